#pragma once

#include "kfp/exponents.hpp"

namespace kfp {

// Similarity coordinates of a phase-space point. Two conventions coexist:
// the G-profiles use z = -zeta^3 as the U-argument, the F-profiles use y itself.
struct SimilarityPoint {
    double x;     // position, >= 0
    double v;     // velocity
    double zeta;  // v / (9x)^{1/3}
    double y;     // v^3 / (9x) = zeta^3

    static SimilarityPoint from_xv(double x, double v);
};

// Lambda_gamma(zeta) = U(-gamma, 2/3; -zeta^3), positive for gamma in (-5/6,1/6].
double lambda_gamma(double gamma, double zeta);

// d/dzeta of lambda_gamma (Richardson-extrapolated central differences).
double lambda_gamma_deriv(double gamma, double zeta);

// G_gamma(x,v) = x^gamma Lambda_gamma(v/(9x)^{1/3}); requires x > 0.
double g_gamma(double gamma, double x, double v);

// x -> 0+ limit of G_gamma at fixed v != 0.
double g_gamma_wall(double gamma, double v);

// Independent quadrature route for Lambda_{-2/3}:
//   Lambda(zeta) = 3 int_{-inf}^{zeta} exp(-zeta^3 + s^3) ds.
double lambda_m23_oracle(double zeta);

// Phi_beta(y) = U(-beta, 2/3; y)
double phi_beta(double beta, double y);

// Adjoint profile F_beta(x,v) = x^beta Phi_beta(v^3/(9x)); requires x > 0.
double f_beta(const RestitutionConstants& constants, double x, double v);

// Q(z) = z^2/2 + c2 U(-2/3, 2/3; z^3/9) with c2 = 9^{2/3}(1-r^2)/(2(2+r^2)).
double supersolution_q(const RestitutionConstants& constants, double z);

// S(x,v) = x^{2/3} Q(v/x^{1/3}); requires x > 0 and 0 < r <= 1.
double supersolution_s(const RestitutionConstants& constants, double x, double v);

// Profile record: gamma together with the r-derived constants it belongs to.
struct SelfSimilarProfile {
    double gamma;
    RestitutionConstants constants;

    double operator()(double x, double v) const { return g_gamma(gamma, x, v); }
    double wall_limit(double v) const { return g_gamma_wall(gamma, v); }
};

}  // namespace kfp
