#pragma once

// Hybrid dynamical systems (a phase space plus a vector field on the
// underlying manifold), executions as time-tracks of integral-curve samples
// joined by reset jumps, execution validation, and push-forward of
// executions along maps of systems.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/hyph.hpp"

namespace hynet {

/// Per mode, a smooth map from the mode box to R^dim giving the coordinates
/// of a tangent vector.
struct VectorField {
    std::map<ModeId, SmoothFn> by_mode;

    const SmoothFn& at(const ModeId& m) const {
        auto it = by_mode.find(m);
        if (it == by_mode.end()) throw std::invalid_argument("no field at mode '" + m + "'");
        return it->second;
    }
};

struct HybridDynamicalSystem {
    HybridPhaseSpace space;
    VectorField field;
};

inline HybridDynamicalSystem make_hds(HybridPhaseSpace space, VectorField field) {
    for (const auto& m : space.mode_order) {
        const SmoothFn& f = field.at(m);
        if (f.dom.dim() != space.mode_box(m).dim() || f.cod.dim() != space.mode_box(m).dim())
            throw std::invalid_argument("vector field at mode '" + m + "' has wrong shape");
    }
    return HybridDynamicalSystem{std::move(space), std::move(field)};
}

/// Strictly increasing jump times t_0 < t_1 < ... < t_n.
struct TimeTrack {
    std::vector<double> t;
};

/// Dense samples of one integral-curve segment.
struct Segment {
    std::vector<double> t;
    std::vector<Point> p;
};

/// A finite execution. Segment i flows in modes[i]; consecutive segments are
/// joined by the reset relation of jumps[i] (the empty path is the trivial
/// jump via the identity relation). A single-point track carries exactly one
/// instantaneous segment.
struct Execution {
    TimeTrack track;
    std::vector<ModeId> modes;
    std::vector<Path> jumps;
    std::vector<Segment> segments;
};

inline Report validate_execution(const Execution& e, const HybridDynamicalSystem& h, double tol) {
    Report rep;
    const auto& t = e.track.t;
    if (t.empty()) {
        rep.fail("empty time track", 0, true);
        return rep;
    }
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i - 1] < t[i])) rep.fail("time track is not strictly increasing", 0, true);
    const std::size_t nseg = t.size() == 1 ? 1 : t.size() - 1;
    if (e.segments.size() != nseg) rep.fail("segment count does not match time track", 0, true);
    if (e.modes.size() != e.segments.size()) rep.fail("one mode per segment required", 0, true);
    if (e.jumps.size() + 1 != e.segments.size()) rep.fail("one jump between consecutive segments required", 0, true);
    if (rep.has_structural()) return rep;

    for (std::size_t i = 0; i < e.segments.size(); ++i) {
        const Segment& s = e.segments[i];
        const ModeId& m = e.modes[i];
        const Box& box = h.space.mode_box(m);
        if (s.t.size() != s.p.size() || s.t.empty()) {
            rep.fail("segment " + std::to_string(i) + ": malformed samples", 0, true);
            continue;
        }
        double t_lo = t.size() == 1 ? t[0] : t[i];
        double t_hi = t.size() == 1 ? t[0] : t[i + 1];
        if (s.t.front() != t_lo || s.t.back() != t_hi)
            rep.fail("segment " + std::to_string(i) + ": endpoints do not match the time track",
                     std::max(std::abs(s.t.front() - t_lo), std::abs(s.t.back() - t_hi)));
        const SmoothFn& X = h.field.at(m);
        for (std::size_t k = 0; k < s.t.size(); ++k) {
            if (s.p[k].dim() != box.dim()) {
                rep.fail("segment " + std::to_string(i) + ": sample dimension mismatch", 0, true);
                break;
            }
            if (!box.contains(s.p[k], tol))
                rep.fail("segment " + std::to_string(i) + " sample " + std::to_string(k) +
                         ": point outside mode box");
            if (k == 0) continue;
            double dt = s.t[k] - s.t[k - 1];
            if (!(dt > 0)) {
                rep.fail("segment " + std::to_string(i) + ": sample times not increasing", 0, true);
                continue;
            }
            Point mid;
            mid.x.reserve(box.dim());
            for (std::size_t c = 0; c < box.dim(); ++c)
                mid.x.push_back(0.5 * (s.p[k - 1][c] + s.p[k][c]));
            Point f = X(mid);
            double worst = 0.0;
            for (std::size_t c = 0; c < box.dim(); ++c)
                worst = std::max(worst, std::abs((s.p[k][c] - s.p[k - 1][c]) / dt - f[c]));
            double bound = tol * (1.0 + inf_norm(f.x));
            rep.observe(worst);
            if (worst > bound)
                rep.fail("segment " + std::to_string(i) + " interval " + std::to_string(k) +
                             ": flow residual above tolerance",
                         worst);
        }
    }

    for (std::size_t j = 0; j < e.jumps.size(); ++j) {
        const Path& p = e.jumps[j];
        if (p.src != e.modes[j] || p.dst != e.modes[j + 1]) {
            rep.fail("jump " + std::to_string(j) + ": path endpoints do not match segment modes", 0,
                     true);
            continue;
        }
        Relation rel = path_relation(h.space, p);
        const Point& from = e.segments[j].p.back();
        const Point& to = e.segments[j + 1].p.front();
        if (!member(rel, from, to, tol)) {
            auto d = member_distance(rel, from, to, tol);
            rep.fail("jump " + std::to_string(j) + ": endpoints not related by the reset relation",
                     d ? *d : kInf);
        }
    }
    return rep;
}

/// Checks that dst's field is related to src's along F: for sampled x in
/// each mode, D(Phi_m)(x) . X_m(x) must match Y_{phi(m)}(Phi_m(x)).
inline Report check_hds_map(const HyPhMap& F, const HybridDynamicalSystem& src,
                            const HybridDynamicalSystem& dst, std::size_t nsamples = 20,
                            double tol = 1e-9, std::uint64_t seed = 77) {
    Report rep = validate_map(F, src.space, dst.space);
    if (!rep.ok()) {
        Report out;
        out.fail("structural: map is not a valid phase-space map", rep.worst_residual(), true);
        out.merge(rep, "  ");
        return out;
    }
    Sampler rng(seed);
    for (const auto& m : src.space.mode_order) {
        const Box& box = src.space.mode_box(m);
        const SmoothFn& phi = F.comp(m);
        const SmoothFn& X = src.field.at(m);
        const SmoothFn& Y = dst.field.at(F.obj_at(m));
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point x = k == 0 ? box.center() : box.sample(rng);
            Matrix J = differential(phi, x);
            std::vector<double> lhs = J.apply(X(x).x);
            Point rhs = Y(phi(x));
            double worst = 0.0;
            for (std::size_t c = 0; c < lhs.size(); ++c)
                worst = std::max(worst, std::abs(lhs[c] - rhs[c]));
            rep.observe(worst);
            if (worst > tol)
                rep.fail("mode '" + m + "': vector fields not related at a sample", worst);
        }
    }
    return rep;
}

/// Theorem-of-executions transport: same track, modes and jumps through the
/// map, samples through the mode components.
inline Execution pushforward_execution(const HyPhMap& F, const Execution& e) {
    Execution out;
    out.track = e.track;
    out.modes.reserve(e.modes.size());
    for (const auto& m : e.modes) out.modes.push_back(F.obj_at(m));
    out.jumps.reserve(e.jumps.size());
    for (const auto& p : e.jumps) out.jumps.push_back(map_path(F, p));
    out.segments.reserve(e.segments.size());
    for (std::size_t i = 0; i < e.segments.size(); ++i) {
        const SmoothFn& phi = F.comp(e.modes[i]);
        Segment s;
        s.t = e.segments[i].t;
        s.p.reserve(e.segments[i].p.size());
        for (const auto& pt : e.segments[i].p) s.p.push_back(phi(pt));
        out.segments.push_back(std::move(s));
    }
    return out;
}

} // namespace hynet
