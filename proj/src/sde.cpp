#include "kfp/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "kfp/stats.hpp"

namespace kfp {

namespace {

// cubic Hermite interpolant of the deterministic path across one step
struct HermiteSegment {
    double x0, v0, x1, v1, h;

    double position(double s) const {
        const double u = s / h;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * h * v0 +
               (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * h * v1;
    }
    double velocity(double s) const {
        const double u = s / h;
        const double u2 = u * u;
        return ((6 * u2 - 6 * u) * x0 + (3 * u2 - 4 * u + 1) * h * v0 +
                (-6 * u2 + 6 * u) * x1 + (3 * u2 - 2 * u) * h * v1) / h;
    }
};

// first zero of the interpolated position in (0, h]; returns h if none found
double locate_crossing(const HermiteSegment& seg) {
    // scan a few subintervals for the first sign change, then bisect
    constexpr int kScan = 8;
    double a = 0.0;
    double fa = seg.x0;
    for (int k = 1; k <= kScan; ++k) {
        const double b = seg.h * k / kScan;
        const double fb = seg.position(b);
        if (fa >= 0.0 && fb <= 0.0 && !(fa == 0.0 && fb == 0.0)) {
            double lo = a, hi = b;
            for (int it = 0; it < 40; ++it) {
                const double m = 0.5 * (lo + hi);
                (seg.position(m) > 0.0 ? lo : hi) = m;
            }
            return 0.5 * (lo + hi);
        }
        a = b;
        fa = fb;
    }
    return seg.h;
}

double step_size(const ParticleState& s, const SimConfig& cfg) {
    const double scale = std::pow(s.x, 2.0 / 3.0) + s.v * s.v;
    return std::max(1e-14, std::min(cfg.h_max, cfg.step_scale * scale));
}

template <class Fn>
void parallel_over_paths(std::size_t n, int threads, Fn&& body) {
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<std::size_t>(t, n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

ParticleState step_exact(const ParticleState& state, double h, double g1, double g2) {
    if (!(h > 0.0)) throw std::domain_error("step_exact: h must be > 0");
    // Cholesky factor of [[2h^3/3, h^2], [h^2, 2h]]
    const double l11 = std::sqrt(2.0 * h * h * h / 3.0);
    const double l21 = std::sqrt(1.5 * h);
    const double l22 = std::sqrt(0.5 * h);
    ParticleState out;
    out.x = state.x + state.v * h + l11 * g1;
    out.v = state.v + l21 * g1 + l22 * g2;
    out.t = state.t + h;
    return out;
}

TrajectoryOutcome advance_with_wall(ParticleState state, const SimConfig& cfg,
                                    Rng& rng) {
    TrajectoryOutcome out;
    double last_flight = -1.0;   // duration of the previous inter-bounce flight
    double prev_flight = -1.0;
    double flight_start = state.t;

    while (state.t < cfg.t_max) {
        const double h = std::min(step_size(state, cfg), cfg.t_max - state.t + 1e-15);
        const double g1 = rng.next_normal();
        const double g2 = rng.next_normal();
        const ParticleState next = step_exact(state, h, g1, g2);

        if (next.x >= 0.0) {
            state = next;
            continue;
        }

        // wall crossing inside this step
        HermiteSegment seg{state.x, state.v, next.x, next.v, h};
        const double s = locate_crossing(seg);
        double v_in = seg.velocity(s);
        // grazing fallback: a crossing whose interpolated slope is nonnegative
        // gets the in-step fluctuation scale as its arrival speed
        if (v_in >= 0.0) v_in = std::min(next.v, -0.1 * std::sqrt(2.0 * h));
        const double t_hit = state.t + s;
        const double v_out = -cfg.r * v_in;

        ++out.bounce_count;
        if (out.bounces.size() < cfg.max_bounce_log)
            out.bounces.push_back({t_hit, v_in, v_out});

        prev_flight = last_flight;
        last_flight = t_hit - flight_start;
        flight_start = t_hit;
        state = {0.0, v_out, t_hit};

        // collapse verdict: slow bounce at the wall plus a geometric-decay
        // extrapolation of the time left in the remaining bounce cascade
        if (v_out < cfg.eps_v && state.x < cfg.eps_x &&
            out.bounce_count >= static_cast<std::uint64_t>(cfg.min_bounces)) {
            double q = cfg.r * cfg.r;
            if (prev_flight > 0.0 && last_flight > 0.0)
                q = std::clamp(last_flight / prev_flight, 0.0, 0.9);
            const double remaining = last_flight * q / (1.0 - q);
            if (remaining < cfg.eps_v * cfg.eps_v) {
                out.collapsed = true;
                out.t_final = t_hit;
                return out;
            }
        }

        if (out.bounce_count >= cfg.bounce_cap) {
            out.bounce_capped = true;
            out.t_final = state.t;
            return out;
        }
    }
    out.t_final = state.t;
    return out;
}

std::vector<TrajectoryOutcome> run_paths(const SimConfig& cfg) {
    std::vector<TrajectoryOutcome> outcomes(cfg.n_paths);
    parallel_over_paths(cfg.n_paths, cfg.threads, [&](std::size_t i) {
        Rng rng(cfg.seed, i);
        ParticleState init{cfg.x0, cfg.v0, 0.0};
        outcomes[i] = advance_with_wall(init, cfg, rng);
        outcomes[i].rng_seed = cfg.seed;
    });
    return outcomes;
}

CollapseSummary collapse_experiment(const SimConfig& cfg) {
    const auto outcomes = run_paths(cfg);
    CollapseSummary s;
    s.n_paths = outcomes.size();
    double bounce_sum = 0.0, time_sum = 0.0;
    for (const auto& o : outcomes) {
        bounce_sum += static_cast<double>(o.bounce_count);
        if (o.collapsed) {
            ++s.n_collapsed;
            time_sum += o.t_final;
        }
        if (o.bounce_capped) ++s.n_capped;
    }
    s.fraction = s.n_paths ? static_cast<double>(s.n_collapsed) / s.n_paths : 0.0;
    s.ci_halfwidth = binomial_ci_halfwidth(s.n_collapsed, s.n_paths);
    s.mean_bounce_count = s.n_paths ? bounce_sum / s.n_paths : 0.0;
    s.mean_collapse_time = s.n_collapsed ? time_sum / s.n_collapsed : 0.0;
    return s;
}

HittingResult hitting_statistics(double b, std::size_t n_paths, const SimConfig& cfg,
                                 double t_cap_factor) {
    if (!(b > 0.0)) throw std::domain_error("hitting_statistics: b must be > 0");
    const double t_cap = t_cap_factor * b * b;
    std::vector<HittingSample> samples(n_paths, HittingSample{-1.0, -1.0});

    parallel_over_paths(n_paths, cfg.threads, [&](std::size_t i) {
        Rng rng(cfg.seed, i);
        ParticleState s{cfg.eps_x, b, 0.0};
        while (s.t < t_cap) {
            const double h = std::min(step_size(s, cfg), t_cap - s.t + 1e-15);
            const ParticleState next =
                step_exact(s, h, rng.next_normal(), rng.next_normal());
            if (next.x >= 0.0) {
                s = next;
                continue;
            }
            HermiteSegment seg{s.x, s.v, next.x, next.v, h};
            const double sc = locate_crossing(seg);
            const double v_in = seg.velocity(sc);
            samples[i] = {s.t + sc, std::abs(v_in)};
            break;
        }
    });

    HittingResult out;
    out.samples.reserve(n_paths);
    for (const auto& smp : samples) {
        if (smp.t1 >= 0.0) out.samples.push_back(smp);
        else ++out.censored;
    }
    return out;
}

}  // namespace kfp
