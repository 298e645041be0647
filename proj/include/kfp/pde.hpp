#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kfp/exponents.hpp"

namespace kfp {

enum class PdeMode { HalfLine, Strip };
enum class PdeBc { Trapping, Nontrapping, PartialTrapping, Supercritical };

std::string to_string(PdeMode mode);
std::string to_string(PdeBc bc);

struct PdeConfig {
    PdeMode mode = PdeMode::HalfLine;
    PdeBc bc = PdeBc::Nontrapping;
    double mu_star = 0.0;  // PartialTrapping release rate
    double r = 0.1;
    int nx = 150;          // x intervals
    int nv = 320;          // v intervals (kept even so v = 0 is a node;
                           // dv must resolve the capture window r * delta_r)
    double L = 2.5;        // x extent (1 in strip mode)
    double V = 4.5;        // velocity truncation
    double delta = 0.0;    // excision scale; 0 -> 0.02 * L
    double x0 = 0.5, v0 = 0.0, sx = 0.07, sv = 0.5;  // initial Gaussian blob
    double m0 = 0.0;       // initial origin mass
    double tend = 0.5;
    double dt = 0.0;       // 0 -> 0.85 * CFL bound
    bool strang = false;   // symmetrized transport splitting
    double ring_fit_factor = 1.0;  // fit ring starts at ring_fit_factor * delta
    double ring_fit_span = 6.0;    // fit ring ends at factor * span * delta

    double delta_or_default() const { return delta > 0.0 ? delta : 0.02 * L; }
};

// Bookkeeping at one singular point: atom mass and expansion coefficients.
struct OriginState {
    double m = 0.0;
    double a_alpha = 0.0;
    double a_m23 = 0.0;
    PdeBc bc = PdeBc::Nontrapping;
    double mu_star = 0.0;
};

struct PhaseSpaceField {
    Eigen::VectorXd x_nodes;  // graded grid on [0, L]
    Eigen::VectorXd v_nodes;  // uniform grid on [-V, V]
    Eigen::MatrixXd values;   // values(i,j) = P(x_i, v_j)
    double t = 0.0;

    Eigen::Index nx() const { return x_nodes.size() - 1; }
    Eigen::Index nv() const { return v_nodes.size() - 1; }
};

struct OriginFit {
    double a_alpha = 0.0;
    double a_m23 = 0.0;
    double condition = 0.0;
};

struct TimeSeriesRow {
    double t;
    double interior_mass;  // includes the excised-hole expansion estimate
    double m;              // origin atom (sum of both corners in strip mode)
    double a_alpha;        // fitted, pre-projection
    double a_m23;
};

class PdeSystem {
public:
    explicit PdeSystem(const PdeConfig& config);

    void step();                      // one operator-split step of size dt()
    void run(double tend,
             const std::function<void(const TimeSeriesRow&)>& on_record = {},
             int record_every = 10);

    double dt() const { return dt_; }
    double time() const { return field_.t; }
    const PhaseSpaceField& field() const { return field_; }
    PhaseSpaceField& mutable_field() { return field_; }
    const OriginState& origin() const { return origin_; }
    const OriginState& origin_far() const { return origin_far_; }  // strip only
    const PdeConfig& config() const { return cfg_; }
    const RestitutionConstants& constants() const { return constants_; }

    double interior_mass() const;     // grid quadrature + hole estimate
    double total_mass() const;        // interior + atoms
    double hole_mass() const;
    OriginFit last_fit() const { return last_fit_; }
    double setup_fit_condition() const { return setup_condition_; }
    double clipped_mass() const { return clipped_mass_; }

    // least-squares expansion coefficients on the ring [delta, 8 delta]
    OriginFit fit_origin(double delta, bool far_corner = false) const;

    // L1 distance to a reference function of (x, v) over the active region
    double l1_distance(const std::function<double(double, double)>& ref) const;

private:
    void build_grids();
    void build_masks();
    void build_transport(double dt);
    void build_rings();
    void transport_substep();
    void apply_wall_traces();
    void diffusion_substep();
    void project_and_impose();
    void impose_ring(bool far_corner);
    double imposed_hole_mass() const;
    void flux_correction(double total_before);
    void clip_negative();
    double node_weight(Eigen::Index i, Eigen::Index j) const;
    double grid_mass() const;

    double rho_near(double x, double v) const;
    double rho_far(double x, double v) const;

    PdeConfig cfg_;
    RestitutionConstants constants_;
    PhaseSpaceField field_;
    OriginState origin_;
    OriginState origin_far_;
    double dt_ = 0.0;
    double delta_ = 0.0;    // s-scale of the excision, x + |v|^3 ~ delta
    double delta_r_ = 0.0;  // velocity half-width of the excised box
    double hole_x_ = 0.0;   // x-extent of the excised box
    double b_aspect_ = 0.3;

    // masks: 0 interior, 1 Dirichlet band, 2 hole (per corner union)
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask_;

    struct Stencil {
        enum Kind : std::uint8_t { Interior, Wall, WallFar, Zero, Keep };
        Kind kind = Keep;
        std::int32_t cell = 0;
        float theta = 0.0f;
    };
    std::vector<Stencil> stencil_;       // (nx+1) x (nv+1), row-major [i * (nv+1) + j]
    std::vector<Stencil> stencil_half_;  // for Strang half steps
    bool strang_built_ = false;

    struct RingNode {
        Eigen::Index i, j;
        double g_alpha, g_m23, w;
    };
    std::vector<RingNode> fit_ring_, fit_ring_far_;
    std::vector<RingNode> inner_ring_, inner_ring_far_;  // amplitude pairing
    std::vector<RingNode> band_, band_far_;
    // smoothed amplitudes actually imposed on the excised box (the
    // instantaneous window ratio drives the mass transfer; the imposed data
    // follows slowly, which severs the capture feedback loop)
    double imp_alpha_[2] = {0.0, 0.0};
    double imp_m23_[2] = {0.0, 0.0};

    Eigen::VectorXd wx_, wv_;  // trapezoid weights
    double hole_int_alpha_ = 0.0, hole_int_m23_ = 0.0;
    double setup_condition_ = 0.0;
    OriginFit last_fit_, last_fit_far_;
    double clipped_mass_ = 0.0;
    Eigen::MatrixXd scratch_;
};

// Factory matching the spec surface: build the field and origin bookkeeping.
PdeSystem init_field(const PdeConfig& config);

// Set the outgoing (v > 0) trace at x = 0 from the incoming one:
// P(0, v) = P(0, -v/r) / r^2, linear interpolation in velocity.
void apply_wall(PhaseSpaceField& field, double r);

// Convenience wrapper around PdeSystem::fit_origin on a bare field.
OriginFit fit_origin_coeffs(const PhaseSpaceField& field,
                            const RestitutionConstants& constants, double delta);

struct SteadyStateResult {
    PdeSystem system;
    bool converged;
    std::vector<double> residual_history;
};

// March the strip problem to a steady state; tol is the relative change of the
// field per unit time.
SteadyStateResult steady_state_strip(const PdeConfig& config, double tol,
                                     long max_steps = 2'000'000);

// Closed-form whole-space evolution of the symmetrized initial blob
// (g + its (x,v) -> (-x,-v) image); reference for the r = 1 half-line run.
double free_space_reference(const PdeConfig& config, double x, double v, double t);

}  // namespace kfp
