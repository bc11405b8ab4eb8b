#pragma once

// Hybrid phase spaces: a finite graph of modes, a box per mode and a guarded
// reset relation per arrow, together with their maps, finite products and
// the underlying-manifold functor. Functors out of the free category on the
// graph are represented by graph data; a map sends arrows to paths.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/common.hpp"
#include "hynet/relation.hpp"

namespace hynet {

using ModeId = std::string;
using ArrowId = std::string;

struct Arrow {
    ModeId src, dst;
    Relation rel;
};

struct HybridPhaseSpace {
    std::vector<ModeId> mode_order;
    std::map<ModeId, Box> modes;
    std::vector<ArrowId> arrow_order;
    std::map<ArrowId, Arrow> arrows;

    void add_mode(const ModeId& id, Box box) {
        if (modes.count(id)) throw std::invalid_argument("duplicate mode '" + id + "'");
        mode_order.push_back(id);
        modes.emplace(id, std::move(box));
    }

    void add_arrow(const ArrowId& id, const ModeId& src, const ModeId& dst, Relation rel) {
        if (arrows.count(id)) throw std::invalid_argument("duplicate arrow '" + id + "'");
        if (!modes.count(src) || !modes.count(dst))
            throw std::invalid_argument("arrow '" + id + "' references unknown mode");
        if (!boxes_equal(rel.source, modes.at(src)) || !boxes_equal(rel.target, modes.at(dst)))
            throw std::invalid_argument("arrow '" + id + "' relation boxes do not match its endpoints");
        arrow_order.push_back(id);
        arrows.emplace(id, Arrow{src, dst, std::move(rel)});
    }

    const Box& mode_box(const ModeId& id) const {
        auto it = modes.find(id);
        if (it == modes.end()) throw std::invalid_argument("unknown mode '" + id + "'");
        return it->second;
    }

    const Arrow& arrow(const ArrowId& id) const {
        auto it = arrows.find(id);
        if (it == arrows.end()) throw std::invalid_argument("unknown arrow '" + id + "'");
        return it->second;
    }

    /// Arrows out of a mode, in declaration order.
    std::vector<ArrowId> out_arrows(const ModeId& m) const {
        std::vector<ArrowId> out;
        for (const auto& id : arrow_order)
            if (arrows.at(id).src == m) out.push_back(id);
        return out;
    }
};

/// A path in the free category: a composable arrow sequence with endpoints.
/// The empty path is the identity at its (equal) endpoints.
struct Path {
    ModeId src, dst;
    std::vector<ArrowId> arrows;

    static Path identity(const ModeId& m) { return Path{m, m, {}}; }
    bool empty() const { return arrows.empty(); }
};

inline void check_path(const HybridPhaseSpace& a, const Path& p) {
    if (p.empty()) {
        if (p.src != p.dst) throw std::invalid_argument("empty path with distinct endpoints");
        a.mode_box(p.src);
        return;
    }
    ModeId at = p.src;
    for (const auto& id : p.arrows) {
        const Arrow& arr = a.arrow(id);
        if (arr.src != at)
            throw std::invalid_argument("path does not compose at arrow '" + id + "'");
        at = arr.dst;
    }
    if (at != p.dst) throw std::invalid_argument("path endpoint mismatch");
}

/// The relation a(p): composite of the edge relations along the path, the
/// identity relation for the empty path.
inline Relation path_relation(const HybridPhaseSpace& a, const Path& p) {
    check_path(a, p);
    Relation acc = identity_rel(a.mode_box(p.src));
    for (const auto& id : p.arrows) acc = compose(a.arrow(id).rel, acc);
    return acc;
}

/// A map of hybrid phase spaces: modes to modes, arrows to paths, and one
/// smooth component per mode, subject to the 2-cell condition that each
/// reset relation is carried into the relation of its image path.
struct HyPhMap {
    std::map<ModeId, ModeId> obj;
    std::map<ArrowId, Path> arr;
    std::map<ModeId, SmoothFn> comps;

    const ModeId& obj_at(const ModeId& m) const {
        auto it = obj.find(m);
        if (it == obj.end()) throw std::invalid_argument("map undefined on mode '" + m + "'");
        return it->second;
    }

    const Path& arr_at(const ArrowId& g) const {
        auto it = arr.find(g);
        if (it == arr.end()) throw std::invalid_argument("map undefined on arrow '" + g + "'");
        return it->second;
    }

    const SmoothFn& comp(const ModeId& m) const {
        auto it = comps.find(m);
        if (it == comps.end()) throw std::invalid_argument("no component at mode '" + m + "'");
        return it->second;
    }
};

inline HyPhMap identity_map(const HybridPhaseSpace& a) {
    HyPhMap f;
    for (const auto& m : a.mode_order) {
        f.obj[m] = m;
        f.comps.emplace(m, make_identity_fn(a.mode_box(m)));
    }
    for (const auto& g : a.arrow_order)
        f.arr[g] = Path{a.arrow(g).src, a.arrow(g).dst, {g}};
    return f;
}

/// Image of a path under a map: arrow-wise substitution.
inline Path map_path(const HyPhMap& g, const Path& p) {
    Path out{g.obj_at(p.src), g.obj_at(p.dst), {}};
    for (const auto& id : p.arrows) {
        const Path& q = g.arr_at(id);
        out.arrows.insert(out.arrows.end(), q.arrows.begin(), q.arrows.end());
    }
    return out;
}

inline HyPhMap compose_map(const HyPhMap& g, const HyPhMap& f) {
    HyPhMap h;
    for (const auto& [m, fm] : f.obj) h.obj[m] = g.obj_at(fm);
    for (const auto& [gamma, p] : f.arr) h.arr[gamma] = map_path(g, p);
    for (const auto& [m, c] : f.comps) h.comps.emplace(m, compose_fns(g.comp(f.obj_at(m)), c));
    return h;
}

// --------------------------------------------------------------------------
// Finite products

inline ModeId tuple_id(const std::vector<std::string>& parts) {
    return "(" + join(parts, ",") + ")";
}

struct ProductResult {
    HybridPhaseSpace space;
    std::vector<HyPhMap> projections;
};

/// One-mode, 0-dimensional phase space: the terminal object.
inline HybridPhaseSpace terminal() {
    HybridPhaseSpace t;
    t.add_mode("*", Box{});
    return t;
}

inline HyPhMap terminal_map(const HybridPhaseSpace& a) {
    HyPhMap f;
    for (const auto& m : a.mode_order) {
        f.obj[m] = "*";
        f.comps.emplace(m, make_projection_fn(a.mode_box(m), {}));
    }
    for (const auto& g : a.arrow_order) f.arr[g] = Path::identity("*");
    return f;
}

namespace detail {

/// Odometer over factor mode lists, last factor fastest.
inline bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& radix) {
    for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < radix[k]) return true;
        idx[k] = 0;
    }
    return false;
}

} // namespace detail

/// n-ary product of phase spaces with its projections. The empty product is
/// the terminal object; the unary product is the factor itself.
inline ProductResult product_n(const std::vector<const HybridPhaseSpace*>& factors) {
    ProductResult out;
    if (factors.empty()) {
        out.space = terminal();
        return out;
    }
    if (factors.size() == 1) {
        out.space = *factors[0];
        out.projections.push_back(identity_map(*factors[0]));
        return out;
    }

    const std::size_t n = factors.size();
    std::vector<std::size_t> radix;
    for (const auto* f : factors) radix.push_back(f->mode_order.size());

    // modes: cartesian tuples
    std::vector<std::size_t> idx(n, 0);
    do {
        std::vector<std::string> parts;
        Box box;
        for (std::size_t k = 0; k < n; ++k) {
            const ModeId& m = factors[k]->mode_order[idx[k]];
            parts.push_back(m);
            box = concat(box, factors[k]->mode_box(m));
        }
        out.space.add_mode(tuple_id(parts), std::move(box));
    } while (detail::advance(idx, radix));

    // projections: object part filled while enumerating generators below
    out.projections.assign(n, HyPhMap{});

    idx.assign(n, 0);
    do {
        std::vector<std::string> parts;
        for (std::size_t k = 0; k < n; ++k) parts.push_back(factors[k]->mode_order[idx[k]]);
        ModeId big = tuple_id(parts);
        std::size_t offset = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const Box& bk = factors[k]->mode_box(parts[k]);
            out.projections[k].obj[big] = parts[k];
            std::vector<std::size_t> sel(bk.dim());
            for (std::size_t i = 0; i < bk.dim(); ++i) sel[i] = offset + i;
            out.projections[k].comps.emplace(big,
                                             make_projection_fn(out.space.mode_box(big), sel));
            offset += bk.dim();
        }
    } while (detail::advance(idx, radix));

    // generating arrows: one factor moves, the rest carry identities
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& gamma : factors[i]->arrow_order) {
            const Arrow& a = factors[i]->arrows.at(gamma);
            std::vector<std::size_t> others_radix;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i) others_radix.push_back(factors[k]->mode_order.size());
            std::vector<std::size_t> oidx(others_radix.size(), 0);
            bool more = true;
            while (more) {
                std::vector<std::string> parts(n), src_parts(n), dst_parts(n);
                Relation rel = identity_rel(Box{});
                std::size_t oi = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == i) {
                        parts[k] = gamma;
                        src_parts[k] = a.src;
                        dst_parts[k] = a.dst;
                        rel = rel_product(rel, a.rel);
                    } else {
                        const ModeId& m = factors[k]->mode_order[oidx[oi++]];
                        parts[k] = "id:" + m;
                        src_parts[k] = m;
                        dst_parts[k] = m;
                        rel = rel_product(rel, identity_rel(factors[k]->mode_box(m)));
                    }
                }
                ArrowId gid = tuple_id(parts);
                ModeId src = tuple_id(src_parts), dst = tuple_id(dst_parts);
                out.space.add_arrow(gid, src, dst, std::move(rel));
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == i)
                        out.projections[k].arr[gid] = Path{a.src, a.dst, {gamma}};
                    else
                        out.projections[k].arr[gid] = Path::identity(src_parts[k]);
                }
                more = !others_radix.empty() && detail::advance(oidx, others_radix);
                if (others_radix.empty()) more = false;
            }
        }
    }
    return out;
}

inline ProductResult product(const HybridPhaseSpace& a, const HybridPhaseSpace& b) {
    return product_n({&a, &b});
}

/// The unique map <z_1,...,z_n>: c -> prod(factors) with proj_k o <z> = z_k.
/// Arrow images interleave: slot k moves along z_k's path while earlier
/// slots sit at their image modes and later slots at their source modes.
inline HyPhMap pair_n(const HybridPhaseSpace& c, const std::vector<HyPhMap>& zs,
                      const std::vector<const HybridPhaseSpace*>& factors) {
    if (zs.size() != factors.size()) throw std::invalid_argument("pair_n: arity mismatch");
    const std::size_t n = zs.size();
    if (n == 0) return terminal_map(c);
    if (n == 1) return zs[0];
    HyPhMap h;
    for (const auto& m : c.mode_order) {
        std::vector<std::string> parts;
        SmoothFn comp = zs[0].comp(m);
        parts.push_back(zs[0].obj_at(m));
        for (std::size_t k = 1; k < n; ++k) {
            parts.push_back(zs[k].obj_at(m));
            comp = pair_fns(comp, zs[k].comp(m));
        }
        h.obj[m] = tuple_id(parts);
        h.comps.emplace(m, std::move(comp));
    }
    for (const auto& gid : c.arrow_order) {
        const Arrow& a = c.arrows.at(gid);
        std::vector<std::string> at(n);  // current slot modes, advanced left to right
        for (std::size_t k = 0; k < n; ++k) at[k] = zs[k].obj_at(a.src);
        Path big{tuple_id(at), "", {}};
        for (std::size_t k = 0; k < n; ++k) {
            const Path& pk = zs[k].arr_at(gid);
            ModeId cur = pk.src;
            for (const auto& step : pk.arrows) {
                const Arrow& fa = factors[k]->arrows.at(step);
                std::vector<std::string> parts(n);
                for (std::size_t j = 0; j < n; ++j) parts[j] = j == k ? step : "id:" + at[j];
                big.arrows.push_back(tuple_id(parts));
                cur = fa.dst;
                at[k] = cur;
            }
            at[k] = zs[k].obj_at(a.dst);
        }
        big.dst = tuple_id(at);
        h.arr[gid] = std::move(big);
    }
    return h;
}

inline HyPhMap pair(const HyPhMap& z1, const HyPhMap& z2, const HybridPhaseSpace& c,
                    const HybridPhaseSpace& a, const HybridPhaseSpace& b) {
    return pair_n(c, {z1, z2}, {&a, &b});
}

// --------------------------------------------------------------------------
// Underlying manifold functor

struct UnderlyingPoint {
    ModeId mode;
    Point point;
};

inline std::vector<std::pair<ModeId, Box>> underlying(const HybridPhaseSpace& a) {
    std::vector<std::pair<ModeId, Box>> out;
    for (const auto& m : a.mode_order) out.emplace_back(m, a.mode_box(m));
    return out;
}

inline UnderlyingPoint apply_underlying(const HyPhMap& F, const UnderlyingPoint& p) {
    return UnderlyingPoint{F.obj_at(p.mode), F.comp(p.mode)(p.point)};
}

inline std::function<UnderlyingPoint(const UnderlyingPoint&)> underlying_map(const HyPhMap& F) {
    return [F](const UnderlyingPoint& p) { return apply_underlying(F, p); };
}

// --------------------------------------------------------------------------
// Sampling and validation

/// Distance from y to the image of x under R, minimized over branches that
/// admit x. Unset when no branch admits x.
inline std::optional<double> member_distance(const Relation& R, const Point& x, const Point& y,
                                             double tol) {
    std::optional<double> best;
    for (const auto& br : R.branches) {
        if (!br.admits(x, tol)) continue;
        double d = inf_dist(br.map(x), y);
        if (!best || d < *best) best = d;
    }
    return best;
}

/// Deterministic sample of a guard region: clamped corners (dimension
/// permitting), the center, then uniform fill; points failing the branch's
/// deferred constraints are rejected.
inline std::vector<Point> sample_branch(const Branch& br, std::size_t nsamples, Sampler& rng,
                                        double tol) {
    std::vector<Point> cand;
    const std::size_t d = br.guard.dim();
    Box gb = br.guard.as_box();
    cand.push_back(gb.center());
    if (d > 0 && d <= 4) {
        for (std::size_t mask = 0; mask < (1u << d); ++mask) {
            Point p;
            p.x.reserve(d);
            for (std::size_t i = 0; i < d; ++i) {
                const Interval& iv = gb.ivs[i];
                p.x.push_back(mask & (1u << i) ? iv.clamp_hi() : iv.clamp_lo());
            }
            cand.push_back(std::move(p));
        }
    }
    std::size_t guard_budget = nsamples * 8 + 8;
    while (cand.size() < nsamples + 1 && guard_budget--) cand.push_back(gb.sample(rng));
    std::vector<Point> out;
    for (auto& p : cand) {
        if (out.size() >= nsamples + (d <= 4 ? (1u << std::min<std::size_t>(d, 4)) : 0) + 1) break;
        if (br.admits(p, tol)) out.push_back(std::move(p));
    }
    return out;
}

/// Checks a HyPhMap structurally (modes, components, arrow paths) and
/// semantically (the 2-cell condition, by sampling each branch guard).
inline Report validate_map(const HyPhMap& F, const HybridPhaseSpace& a, const HybridPhaseSpace& b,
                           std::size_t nsamples = 8, double tol = 1e-7,
                           std::uint64_t seed = 2024) {
    Report rep;
    for (const auto& m : a.mode_order) {
        auto it = F.obj.find(m);
        if (it == F.obj.end()) {
            rep.fail("mode map undefined on '" + m + "'", 0, true);
            continue;
        }
        if (!b.modes.count(it->second)) {
            rep.fail("mode '" + m + "' maps to unknown mode '" + it->second + "'", 0, true);
            continue;
        }
        auto cit = F.comps.find(m);
        if (cit == F.comps.end()) {
            rep.fail("no component at mode '" + m + "'", 0, true);
            continue;
        }
        if (cit->second.dom.dim() != a.mode_box(m).dim() ||
            cit->second.cod.dim() != b.mode_box(it->second).dim())
            rep.fail("component at mode '" + m + "' has wrong shape", 0, true);
    }
    for (const auto& gid : a.arrow_order) {
        auto it = F.arr.find(gid);
        if (it == F.arr.end()) {
            rep.fail("arrow map undefined on '" + gid + "'", 0, true);
            continue;
        }
        const Arrow& ar = a.arrows.at(gid);
        try {
            check_path(b, it->second);
        } catch (const std::exception& e) {
            rep.fail("arrow '" + gid + "': " + e.what(), 0, true);
            continue;
        }
        if (F.obj.count(ar.src) && it->second.src != F.obj.at(ar.src))
            rep.fail("arrow '" + gid + "': path source is not the image of the arrow source", 0, true);
        if (F.obj.count(ar.dst) && it->second.dst != F.obj.at(ar.dst))
            rep.fail("arrow '" + gid + "': path target is not the image of the arrow target", 0, true);
    }
    if (rep.has_structural()) return rep;

    Sampler rng(seed);
    for (const auto& gid : a.arrow_order) {
        const Arrow& ar = a.arrows.at(gid);
        Relation target = path_relation(b, F.arr_at(gid));
        const SmoothFn& phi_src = F.comp(ar.src);
        const SmoothFn& phi_dst = F.comp(ar.dst);
        for (std::size_t bi = 0; bi < ar.rel.branches.size(); ++bi) {
            const Branch& br = ar.rel.branches[bi];
            auto samples = sample_branch(br, nsamples, rng, tol);
            if (samples.empty())
                rep.note("arrow '" + gid + "' branch " + std::to_string(bi) +
                         ": no sample satisfied the deferred constraints; branch unchecked");
            for (const auto& x : samples) {
                Point y = br.map(x);
                Point fx = phi_src(x), fy = phi_dst(y);
                auto d = member_distance(target, fx, fy, tol);
                if (!d)
                    rep.fail("arrow '" + gid + "' branch " + std::to_string(bi) +
                                 ": image point escapes every branch of the target relation",
                             kInf);
                else if (*d > tol)
                    rep.fail("arrow '" + gid + "' branch " + std::to_string(bi) +
                                 ": 2-cell condition violated",
                             *d);
            }
        }
    }
    return rep;
}

} // namespace hynet
