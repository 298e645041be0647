#pragma once

#include <cstdint>
#include <vector>

#include "kfp/rng.hpp"

namespace kfp {

struct ParticleState {
    double x = 0.0;  // position, >= 0
    double v = 0.0;  // velocity
    double t = 0.0;  // elapsed time
};

struct BounceRecord {
    double t;       // wall-hitting time, strictly increasing along a path
    double v_in;    // arrival velocity, < 0
    double v_out;   // post-bounce velocity, exactly -r * v_in
};

struct TrajectoryOutcome {
    bool collapsed = false;
    bool bounce_capped = false;
    double t_final = 0.0;
    std::uint64_t bounce_count = 0;
    std::vector<BounceRecord> bounces;  // truncated to cfg.max_bounce_log
    std::uint64_t rng_seed = 0;
};

struct SimConfig {
    double r = 0.5;
    double h_max = 0.05;        // hard cap on the time step
    double step_scale = 0.02;   // h = min(h_max, step_scale * (x^{2/3} + v^2))
    double t_max = 10.0;
    double eps_v = 1e-4;        // collapse speed threshold
    double eps_x = 1e-7;        // collapse position threshold
    int min_bounces = 3;        // a collapse verdict needs at least this many
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0x5eedULL;
    std::uint64_t bounce_cap = 10'000'000;
    std::size_t max_bounce_log = 64;
    double x0 = 1.0;            // initial state for collapse experiments
    double v0 = 0.0;
    int threads = 0;            // 0 -> hardware concurrency
};

// Exact one-step transition of the Kolmogorov process: given two standard
// normals, advances (x,v) by h with the joint Gaussian increment of
// covariance [[2h^3/3, h^2], [h^2, 2h]] on (x - vh, v).
ParticleState step_exact(const ParticleState& state, double h, double g1, double g2);

// Advance one trajectory through bounces until collapse, t >= t_max, or the
// bounce cap. Throws std::runtime_error("bounce cap") only if the cap is hit
// without a verdict and cfg treats it as fatal (collapse_experiment records it).
TrajectoryOutcome advance_with_wall(ParticleState state, const SimConfig& cfg,
                                    Rng& rng);

struct HittingSample {
    double t1;  // first return time to x = 0
    double h1;  // |velocity| at the return
};

struct HittingResult {
    std::vector<HittingSample> samples;
    std::size_t censored = 0;  // paths that exceeded the time cap (reported, rare)
};

// From X(0)=eps_x, V(0)=b, record the first return to the wall. The time cap
// scales as cap * b^2 so that censoring is scale-consistent.
HittingResult hitting_statistics(double b, std::size_t n_paths, const SimConfig& cfg,
                                 double t_cap_factor = 100.0);

struct CollapseSummary {
    double fraction = 0.0;
    double ci_halfwidth = 0.0;       // 95% Wilson half-width
    double mean_bounce_count = 0.0;
    double mean_collapse_time = 0.0; // among collapsed paths
    std::size_t n_paths = 0;
    std::size_t n_collapsed = 0;
    std::size_t n_capped = 0;
};

CollapseSummary collapse_experiment(const SimConfig& cfg);

// Per-path outcomes (deterministic given cfg.seed, independent of threading).
std::vector<TrajectoryOutcome> run_paths(const SimConfig& cfg);

}  // namespace kfp
