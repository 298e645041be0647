#pragma once

#include <Eigen/Dense>

namespace kfp {

// Half-lattice occupation vector; site n sits at x = n h, one update advances
// time by h^2. lambda is the escape probability from site 0.
struct LatticeDist {
    double h = 1.0 / 128.0;
    double lambda = 1.0;
    Eigen::VectorXd p;  // occupation probabilities, sums to 1
    long k = 0;         // step counter

    double time() const { return static_cast<double>(k) * h * h; }
    double mass() const { return p.sum(); }
    double interior_mass() const { return p.tail(p.size() - 1).sum(); }

    // truncated Gaussian bump (center 1, sigma 0.2) on [0, x_extent], normalized
    static LatticeDist gaussian_initial(double h, double lambda,
                                        double x_extent = 4.0);
};

// One synchronous master-equation update (interior averaging rule, the
// lambda-boundary rule at sites 0/1, reflecting far wall).
void step_master(LatticeDist& dist);

// Run the lattice to macroscopic time t (rounded down to a whole step count).
void run_to_time(LatticeDist& dist, double t);

enum class HeatBc { Neumann, Dirichlet, Dynamic };

struct ContinuumCompare {
    double max_error = 0.0;   // max_n |P_n/h - U(x_n,t)| over n >= 1
    double m_lattice = 0.0;   // P_0
    double m_reference = 0.0; // reference mass at the origin
    double u0_reference = 0.0;  // reference U(0,t)
    bool continuum_regime = true;  // false when k < 100 (comparison unreliable)
};

// Compare a lattice state against the continuum solution of U_t = U_xx/2 with
// the matching boundary condition. mu is used by the Dynamic condition only.
ContinuumCompare continuum_compare(const LatticeDist& dist, HeatBc bc,
                                   double mu = 1.0);

namespace heat_reference {

// image-method solutions with the shared truncated-Gaussian initial datum
double solution(HeatBc bc, double mu, double x, double t, double x_extent = 4.0);

// reference origin mass m(t) = 1 - int U dx (Dirichlet), U(0,t)/(2 mu)
// (Dynamic), 0 (Neumann)
double origin_mass(HeatBc bc, double mu, double t, double x_extent = 4.0);

}  // namespace heat_reference

}  // namespace kfp
