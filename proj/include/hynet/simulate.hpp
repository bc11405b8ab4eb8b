#pragma once

// Numerical generation of executions: fixed-step integration per mode, guard
// event detection (pinned-coordinate sign change plus range containment at
// the bisected event point), box-exit detection, and jump policies resolving
// non-determinism. Jumps fire eagerly on first guard contact; several jumps
// at one instant are chained into a single composite path, bounded by
// SimConfig::chain_depth. Arrows enabled at the very start of a run are
// taken before the first segment and reported in SimResult::initial_jumps.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hynet/hyds.hpp"

namespace hynet {

enum class IntegratorKind { rk4, euler };

/// Executions produced with rk4 pass validate_execution at
/// kRk4ResidualConstant * step^2; with euler at kEulerResidualConstant * step.
inline constexpr double kRk4ResidualConstant = 10.0;
inline constexpr double kEulerResidualConstant = 2.0;

struct SimConfig {
    double step = 1e-3;
    double t_max = 10.0;
    int max_jumps = 1000;
    double event_tol = 1e-9;
    IntegratorKind integrator = IntegratorKind::rk4;
    int chain_depth = 4;
    double t_start = 0.0;

    double residual_tol() const {
        return integrator == IntegratorKind::rk4 ? kRk4ResidualConstant * step * step
                                                 : kEulerResidualConstant * step;
    }
};

enum class PolicyKind { priority, first_enabled, seeded_random };

struct JumpPolicy {
    PolicyKind kind = PolicyKind::priority;
    std::uint64_t seed = 0;
};

inline const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::priority: return "priority";
        case PolicyKind::first_enabled: return "first-enabled";
        case PolicyKind::seeded_random: return "seeded-random";
    }
    return "?";
}

enum class SimStatus { ok, jump_limit, stuck, nan_error };

inline const char* status_name(SimStatus s) {
    switch (s) {
        case SimStatus::ok: return "ok";
        case SimStatus::jump_limit: return "jump-limit";
        case SimStatus::stuck: return "stuck";
        case SimStatus::nan_error: return "nan";
    }
    return "?";
}

struct SimResult {
    Execution exec;
    SimStatus status = SimStatus::ok;
    Path initial_jumps = Path{"", "", {}};
    std::string message;
};

/// Arrows out of the state's mode with some branch guard containing the
/// state within tol, in declaration order.
inline std::vector<ArrowId> enabled_arrows(const HybridDynamicalSystem& h,
                                           const UnderlyingPoint& state, double tol) {
    h.space.mode_box(state.mode);  // reject unknown modes
    std::vector<ArrowId> out;
    for (const auto& id : h.space.out_arrows(state.mode)) {
        for (const auto& br : h.space.arrow(id).rel.branches) {
            if (br.admits(state.point, tol)) {
                out.push_back(id);
                break;
            }
        }
    }
    return out;
}

namespace detail {

inline Point rk_step(const SmoothFn& X, const Point& x, double dt, IntegratorKind kind) {
    const std::size_t n = x.dim();
    if (kind == IntegratorKind::euler) {
        Point k1 = X(x), out = x;
        for (std::size_t i = 0; i < n; ++i) out[i] += dt * k1[i];
        return out;
    }
    Point k1 = X(x);
    Point w = x;
    for (std::size_t i = 0; i < n; ++i) w[i] = x[i] + 0.5 * dt * k1[i];
    Point k2 = X(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = x[i] + 0.5 * dt * k2[i];
    Point k3 = X(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = x[i] + dt * k3[i];
    Point k4 = X(w);
    Point out = x;
    for (std::size_t i = 0; i < n; ++i)
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline bool has_nan(const Point& p) {
    for (double v : p.x)
        if (std::isnan(v)) return true;
    return false;
}

/// Earliest time s in (0, dt] at which coordinate j of the flow from x
/// crosses level p, located by bisection to time accuracy event_tol.
/// Assumes a bracketing sign change between s=0 and s=dt.
inline double bisect_crossing(const SmoothFn& X, const Point& x, double dt, IntegratorKind kind,
                              std::size_t j, double level, double event_tol) {
    double a = 0.0, b = dt;
    double ga = x[j] - level;
    int sa = ga > 0 ? 1 : -1;
    while (b - a > event_tol) {
        double m = 0.5 * (a + b);
        Point xm = rk_step(X, x, m, kind);
        double gm = xm[j] - level;
        if ((gm > 0 ? 1 : -1) == sa && std::abs(gm) > event_tol)
            a = m;
        else
            b = m;
    }
    return b;
}

struct EventCandidate {
    double when = 0.0;   // offset into the step
    bool box_exit = false;
};

} // namespace detail

/// Integrates h from init under the given policy and configuration.
inline SimResult simulate(const HybridDynamicalSystem& h, const UnderlyingPoint& init,
                          const JumpPolicy& policy, const SimConfig& cfg) {
    if (!(cfg.step > 0)) throw std::invalid_argument("simulate: step must be positive");
    if (!(cfg.event_tol > 0)) throw std::invalid_argument("simulate: event_tol must be positive");
    if (cfg.max_jumps < 0) throw std::invalid_argument("simulate: max_jumps must be nonnegative");
    const Box& init_box = h.space.mode_box(init.mode);
    if (!init_box.contains(init.point, global_tol()))
        throw std::invalid_argument("simulate: initial point outside its mode box");

    SimResult res;
    Sampler rng(policy.seed);
    ModeId mode = init.mode;
    Point x = init.point;
    double t = cfg.t_start;
    int jumps_taken = 0;

    auto jump_tol_at = [&](const Point& p) {
        double fn = inf_norm(h.field.at(mode)(p).x);
        return std::max(global_tol(), cfg.event_tol * (1.0 + fn));
    };

    auto select_arrow = [&](const std::vector<ArrowId>& enabled) -> ArrowId {
        if (policy.kind == PolicyKind::seeded_random && enabled.size() > 1)
            return enabled[rng.index(enabled.size())];
        return enabled.front();  // priority and first-enabled: declaration order
    };

    // Applies one policy-selected jump from (mode, x); returns the arrow id.
    auto apply_jump = [&](const std::vector<ArrowId>& enabled, double tol) -> ArrowId {
        ArrowId id = select_arrow(enabled);
        const Arrow& ar = h.space.arrow(id);
        for (const auto& br : ar.rel.branches) {
            if (br.admits(x, tol)) {
                x = br.map(x);
                mode = ar.dst;
                return id;
            }
        }
        throw std::logic_error("selected arrow has no admitting branch");
    };

    // Chain of jumps at a single instant, bounded by chain_depth.
    auto chain_jumps = [&](Path& into) {
        int depth = static_cast<int>(into.arrows.size());
        while (depth < cfg.chain_depth) {
            double tol = jump_tol_at(x);
            auto enabled = enabled_arrows(h, {mode, x}, tol);
            if (enabled.empty()) break;
            into.arrows.push_back(apply_jump(enabled, tol));
            ++depth;
        }
        into.dst = mode;
    };

    // Eager jumps at the start of the run, before the first segment.
    res.initial_jumps = Path::identity(mode);
    if (jumps_taken < cfg.max_jumps) {
        chain_jumps(res.initial_jumps);
        if (!res.initial_jumps.empty()) ++jumps_taken;
    }

    Execution& e = res.exec;
    bool done = false;
    while (!done) {
        Segment seg;
        seg.t.push_back(t);
        seg.p.push_back(x);
        ModeId seg_mode = mode;
        const SmoothFn& X = h.field.at(mode);
        const Box& box = h.space.mode_box(mode);

        bool segment_open = true;
        while (segment_open) {
            if (t >= cfg.t_max) {
                done = true;
                break;
            }
            // lookahead clamp: never leave a vanishing final step behind
            bool last_step = t + 1.5 * cfg.step >= cfg.t_max;
            double dt = last_step ? cfg.t_max - t : cfg.step;
            Point x1 = detail::rk_step(X, x, dt, cfg.integrator);
            if (detail::has_nan(x1)) {
                res.status = SimStatus::nan_error;
                res.message = "field evaluation produced NaN in mode '" + mode + "'";
                done = true;
                break;
            }

            // event scan over this step
            std::optional<detail::EventCandidate> best;
            auto record = [&](double when, bool box_exit) {
                if (!best || when < best->when - cfg.event_tol)
                    best = detail::EventCandidate{when, box_exit};
                else if (box_exit && when <= best->when + cfg.event_tol)
                    best->box_exit = true;
            };
            // guard pins: a strict sign change of x_j - pin across the step
            auto consider_pin = [&](std::size_t j, double level) {
                double ga = x[j] - level, gb = x1[j] - level;
                bool crossing = (ga > 0) != (gb > 0) && std::abs(ga) > cfg.event_tol;
                bool arrival = std::abs(gb) <= cfg.event_tol && std::abs(ga) > cfg.event_tol;
                if (crossing)
                    record(detail::bisect_crossing(X, x, dt, cfg.integrator, j, level,
                                                   cfg.event_tol),
                           false);
                else if (arrival)
                    record(dt, false);
            };
            // box faces: the endpoint escapes the box beyond tolerance
            auto consider_face = [&](std::size_t j, double level, bool low_face) {
                double ga = x[j] - level, gb = x1[j] - level;
                if (low_face) {
                    ga = -ga;
                    gb = -gb;  // normalized: positive = outside
                }
                if (gb <= global_tol()) return;   // endpoint stays inside
                if (ga >= -cfg.event_tol) {
                    record(0.0, true);  // already on or past the face, moving out
                    return;
                }
                record(detail::bisect_crossing(X, x, dt, cfg.integrator, j, level, cfg.event_tol),
                       true);
            };
            for (const auto& id : h.space.out_arrows(mode))
                for (const auto& br : h.space.arrow(id).rel.branches)
                    for (std::size_t j = 0; j < br.guard.dim(); ++j)
                        if (br.guard.pinned(j)) consider_pin(j, br.guard.sub[j].lo);
            for (std::size_t j = 0; j < box.dim(); ++j) {
                if (std::isfinite(box.ivs[j].lo)) consider_face(j, box.ivs[j].lo, true);
                if (std::isfinite(box.ivs[j].hi)) consider_face(j, box.ivs[j].hi, false);
            }

            if (!best) {
                t = last_step ? cfg.t_max : t + dt;
                x = x1;
                seg.t.push_back(t);
                seg.p.push_back(x);
                continue;
            }

            // land on the event (tau == 0: the current sample already sits there)
            double tau = best->when;
            if (tau > 0.0) {
                Point xev = detail::rk_step(X, x, tau, cfg.integrator);
                if (detail::has_nan(xev)) {
                    res.status = SimStatus::nan_error;
                    res.message = "field evaluation produced NaN in mode '" + mode + "'";
                    done = true;
                    break;
                }
                t += tau;
                x = xev;
                seg.t.push_back(t);
                seg.p.push_back(x);
            }

            double tol = jump_tol_at(x);
            auto enabled = enabled_arrows(h, {mode, x}, tol);
            if (enabled.empty()) {
                if (best->box_exit) {
                    res.status = SimStatus::stuck;
                    res.message = "flow leaves mode '" + mode + "' with no enabled reset";
                    done = true;
                    break;
                }
                continue;  // a pin was crossed but no guard is satisfied; keep flowing
            }
            if (t >= cfg.t_max - cfg.event_tol) {
                done = true;  // resets within event_tol of the horizon are not taken
                break;
            }
            if (jumps_taken >= cfg.max_jumps) {
                res.status = SimStatus::jump_limit;
                res.message = "jump limit reached";
                done = true;
                break;
            }
            if (seg.t.size() == 1) {
                // an instant-of-start reset would force a zero-length segment;
                // the start-of-segment chain already ran to its depth limit
                res.status = SimStatus::stuck;
                res.message = "enabled resets at one instant exceed chain_depth in mode '" + mode + "'";
                done = true;
                break;
            }
            Path jump = Path::identity(mode);
            jump.arrows.push_back(apply_jump(enabled, tol));
            chain_jumps(jump);
            ++jumps_taken;
            e.jumps.push_back(std::move(jump));
            segment_open = false;  // close this segment, open the next
        }

        if (seg.t.size() == 1 && !e.segments.empty()) {
            // A failure on the first step of a fresh segment leaves a
            // zero-length tail that the strict time track cannot carry;
            // truncate to the last jump instant instead.
            e.jumps.pop_back();
            res.message += " (trace truncated at the preceding jump)";
        } else {
            e.modes.push_back(seg_mode);
            if (e.track.t.empty()) e.track.t.push_back(seg.t.front());
            if (seg.t.back() > e.track.t.back()) e.track.t.push_back(seg.t.back());
            e.segments.push_back(std::move(seg));
        }
    }
    return res;
}

} // namespace hynet
