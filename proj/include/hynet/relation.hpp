#pragma once

// Relations between boxes, represented as finite unions of guarded partial
// maps. Guards are sub-boxes of the source with some coordinates pinned to
// exact values. Composition pulls guards back exactly through axis-affine
// maps; otherwise the composite keeps a deferred predicate that is checked
// at membership time, and branches that interval propagation proves empty
// are dropped.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/geometry.hpp"
#include "hynet/smoothfn.hpp"

namespace hynet {

struct Guard {
    std::vector<Interval> sub;

    std::size_t dim() const { return sub.size(); }

    bool contains(const Point& p, double tol) const {
        if (p.dim() != dim()) throw std::invalid_argument("Guard::contains: dimension mismatch");
        for (std::size_t i = 0; i < dim(); ++i)
            if (!sub[i].contains(p[i], tol)) return false;
        return true;
    }

    bool pinned(std::size_t i) const { return sub[i].degenerate(); }

    bool any_pinned() const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (pinned(i)) return true;
        return false;
    }

    bool empty() const {
        for (const auto& iv : sub)
            if (iv.lo > iv.hi) return true;
        return false;
    }

    Box as_box() const { return Box(sub); }
};

inline Guard full_guard(const Box& source) { return Guard{source.ivs}; }

/// Validates an authored guard against its source box: sub-intervals inside
/// the source, and either some coordinate pinned or the guard is the whole
/// box (a pure-map branch).
inline Guard make_guard(const Box& source, std::vector<Interval> sub) {
    if (sub.size() != source.dim()) throw std::invalid_argument("guard dimension mismatch");
    bool whole = true;
    for (std::size_t i = 0; i < sub.size(); ++i) {
        if (sub[i].lo > sub[i].hi) throw std::invalid_argument("guard interval with lo > hi");
        if (sub[i].lo < source.ivs[i].lo || sub[i].hi > source.ivs[i].hi)
            throw std::invalid_argument("guard must be a sub-box of the source");
        if (sub[i].lo != source.ivs[i].lo || sub[i].hi != source.ivs[i].hi) whole = false;
    }
    Guard g{std::move(sub)};
    if (!whole && !g.any_pinned())
        throw std::invalid_argument("guard must pin a coordinate or equal the whole box");
    return g;
}

/// A deferred domain cut: x is in the branch domain only if fn(x) lies in
/// `set`. Produced by compositions whose guards cannot be pulled back.
struct Constraint {
    SmoothFn fn;
    Guard set;
};

struct Branch {
    Guard guard;
    SmoothFn map;  // dom = source box, cod = target box
    std::vector<Constraint> constraints;

    bool admits(const Point& x, double tol) const {
        if (!guard.contains(x, tol)) return false;
        for (const auto& c : constraints)
            if (!c.set.contains(c.fn(x), tol)) return false;
        return true;
    }
};

struct Relation {
    Box source, target;
    std::vector<Branch> branches;  // empty list = empty relation

    bool is_empty() const { return branches.empty(); }
};

inline Relation make_relation(Box source, Box target, std::vector<Branch> branches) {
    for (const auto& br : branches) {
        if (br.guard.dim() != source.dim())
            throw std::invalid_argument("branch guard dimension mismatch");
        if (br.map.dom.dim() != source.dim() || br.map.cod.dim() != target.dim())
            throw std::invalid_argument("branch map shape mismatch");
    }
    return Relation{std::move(source), std::move(target), std::move(branches)};
}

inline Relation empty_relation(Box source, Box target) {
    return Relation{std::move(source), std::move(target), {}};
}

inline Relation identity_rel(const Box& b) {
    Branch br{full_guard(b), make_identity_fn(b), {}};
    return Relation{b, b, {br}};
}

[[nodiscard]] inline bool member(const Relation& R, const Point& x, const Point& y, double tol) {
    if (x.dim() != R.source.dim() || y.dim() != R.target.dim())
        throw std::invalid_argument("member: dimension mismatch");
    for (const auto& br : R.branches) {
        if (!br.admits(x, tol)) continue;
        if (inf_dist(br.map(x), y) <= tol) return true;
    }
    return false;
}

namespace detail {

inline bool box_intersects(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (std::max(a.ivs[i].lo, b.ivs[i].lo) > std::min(a.ivs[i].hi, b.ivs[i].hi)) return false;
    return true;
}

inline std::optional<Guard> intersect_guard(const Guard& g, const Box& cut) {
    Guard out = g;
    for (std::size_t i = 0; i < g.dim(); ++i) {
        out.sub[i].lo = std::max(out.sub[i].lo, cut.ivs[i].lo);
        out.sub[i].hi = std::min(out.sub[i].hi, cut.ivs[i].hi);
        if (out.sub[i].lo > out.sub[i].hi) return std::nullopt;
    }
    return out;
}

} // namespace detail

/// S after R. Branches whose composite domain is provably empty (by exact
/// pullback or interval propagation) are dropped; guards that cannot be
/// pulled back exactly survive as deferred constraints.
inline Relation compose(const Relation& S, const Relation& R) {
    if (!boxes_equal(R.target, S.source))
        throw std::invalid_argument("compose: target of inner must equal source of outer");
    Relation out{R.source, S.target, {}};
    for (const auto& br : R.branches) {
        for (const auto& bs : S.branches) {
            Branch comp;
            comp.map = compose_fns(bs.map, br.map);
            comp.constraints = br.constraints;
            auto pb = pullback_box(br.map, bs.guard.as_box());
            if (pb) {
                auto g = detail::intersect_guard(br.guard, *pb);
                if (!g) continue;  // provably empty
                comp.guard = *g;
            } else {
                auto img = image_box(br.map, br.guard.as_box());
                if (img && !detail::box_intersects(*img, bs.guard.as_box())) continue;
                comp.guard = br.guard;
                comp.constraints.push_back({br.map, bs.guard});
            }
            for (const auto& c : bs.constraints)
                comp.constraints.push_back({compose_fns(c.fn, br.map), c.set});
            out.branches.push_back(std::move(comp));
        }
    }
    return out;
}

/// Monoidal product: (m,q,n,p) in R x S iff (m,n) in R and (q,p) in S.
inline Relation rel_product(const Relation& R, const Relation& S) {
    Relation out{concat(R.source, S.source), concat(R.target, S.target), {}};
    const std::size_t off = R.source.dim();
    for (const auto& br : R.branches) {
        for (const auto& bs : S.branches) {
            Branch comp;
            comp.guard.sub = br.guard.sub;
            comp.guard.sub.insert(comp.guard.sub.end(), bs.guard.sub.begin(), bs.guard.sub.end());
            comp.map = concat_fns(br.map, bs.map);
            SmoothFn proj1 = make_projection_fn(out.source, [&] {
                std::vector<std::size_t> ix(off);
                for (std::size_t i = 0; i < off; ++i) ix[i] = i;
                return ix;
            }());
            SmoothFn proj2 = make_projection_fn(out.source, [&] {
                std::vector<std::size_t> ix(S.source.dim());
                for (std::size_t i = 0; i < ix.size(); ++i) ix[i] = off + i;
                return ix;
            }());
            for (const auto& c : br.constraints)
                comp.constraints.push_back({compose_fns(c.fn, proj1), c.set});
            for (const auto& c : bs.constraints)
                comp.constraints.push_back({compose_fns(c.fn, proj2), c.set});
            out.branches.push_back(std::move(comp));
        }
    }
    return out;
}

} // namespace hynet
