#pragma once

// Hybrid surjective submersions (total space of states-and-inputs projecting
// onto states), open systems on them, f-relatedness of open systems,
// interconnection morphisms and their pullback action, and finite products
// of submersions and open systems.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/hyds.hpp"

namespace hynet {

/// p: tot -> st whose mode map is surjective and whose components are
/// coordinate projections onto a subset of coordinates.
struct HybridSubmersion {
    HybridPhaseSpace tot, st;
    HyPhMap p;
};

inline HybridSubmersion identity_submersion(const HybridPhaseSpace& a) {
    return HybridSubmersion{a, a, identity_map(a)};
}

/// The coordinate indices a projection selects, when the map is one.
inline std::optional<std::vector<std::size_t>> projection_indices(const SmoothFn& f) {
    if (!f.affine) return std::nullopt;
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < f.affine->A.rows; ++r) {
        if (f.affine->b[r] != 0.0) return std::nullopt;
        std::size_t hit = f.affine->A.cols;
        for (std::size_t c = 0; c < f.affine->A.cols; ++c) {
            double v = f.affine->A.at(r, c);
            if (v == 0.0) continue;
            if (v != 1.0 || hit != f.affine->A.cols) return std::nullopt;
            hit = c;
        }
        if (hit == f.affine->A.cols) return std::nullopt;
        out.push_back(hit);
    }
    return out;
}

inline bool is_identity_fn(const SmoothFn& f) {
    if (f.dom.dim() != f.cod.dim()) return false;
    auto idx = projection_indices(f);
    if (!idx || idx->size() != f.dom.dim()) return false;
    for (std::size_t r = 0; r < idx->size(); ++r)
        if ((*idx)[r] != r) return false;
    return true;
}

inline Report validate_submersion(const HybridSubmersion& s, std::size_t nsamples = 8) {
    Report rep;
    std::map<ModeId, bool> hit;
    for (const auto& m : s.st.mode_order) hit[m] = false;
    for (const auto& m : s.tot.mode_order) {
        auto it = s.p.obj.find(m);
        if (it == s.p.obj.end()) continue;  // validate_map reports this
        if (hit.count(it->second)) hit[it->second] = true;
    }
    for (const auto& [m, covered] : hit)
        if (!covered) rep.fail("state mode '" + m + "' not in the image of the mode map", 0, true);

    for (const auto& m : s.tot.mode_order) {
        auto cit = s.p.comps.find(m);
        if (cit == s.p.comps.end()) continue;
        auto idx = projection_indices(cit->second);
        if (!idx) {
            rep.fail("component at mode '" + m + "' is not a coordinate projection", 0, true);
            continue;
        }
        if (!s.p.obj.count(m)) continue;
        const Box& stb = s.st.mode_box(s.p.obj.at(m));
        const Box& totb = s.tot.mode_box(m);
        if (idx->size() != stb.dim()) {
            rep.fail("projection at mode '" + m + "' has the wrong state dimension", 0, true);
            continue;
        }
        for (std::size_t r = 0; r < idx->size(); ++r) {
            const Interval& a = totb.ivs[(*idx)[r]];
            const Interval& b = stb.ivs[r];
            if (a.lo != b.lo || a.hi != b.hi)
                rep.fail("projection at mode '" + m + "' does not match the state box", 0, true);
        }
    }
    rep.merge(validate_map(s.p, s.tot, s.st, nsamples), "p: ");
    return rep;
}

/// A hybrid open system: a submersion carrier plus, per total mode, a map
/// assigning a state-space tangent vector over the projected base point.
struct OpenSystem {
    HybridSubmersion sub;
    std::map<ModeId, SmoothFn> fiber;  // dom = tot box, cod = R^{dim st box}

    const SmoothFn& fiber_at(const ModeId& tot_mode) const {
        auto it = fiber.find(tot_mode);
        if (it == fiber.end()) throw std::invalid_argument("no fiber at mode '" + tot_mode + "'");
        return it->second;
    }
};

/// Every closed system is an open system on the identity submersion.
inline OpenSystem open_from_field(const HybridPhaseSpace& a, const VectorField& X) {
    OpenSystem o;
    o.sub = identity_submersion(a);
    for (const auto& m : a.mode_order) o.fiber.emplace(m, X.at(m));
    return o;
}

/// A closed system's fiber is a vector field on the state space.
inline HybridDynamicalSystem closed_to_hds(const OpenSystem& o) {
    for (const auto& m : o.sub.tot.mode_order) {
        if (o.sub.p.obj_at(m) != m || !is_identity_fn(o.sub.p.comp(m)))
            throw std::invalid_argument("closed_to_hds: carrier is not an identity submersion");
    }
    VectorField X;
    for (const auto& [m, f] : o.fiber) X.by_mode.emplace(m, f);
    return make_hds(o.sub.st, std::move(X));
}

inline Report crl_check(const OpenSystem& o, std::size_t nsamples = 8, double tol = 1e-7) {
    Report rep = validate_submersion(o.sub, nsamples);
    Sampler rng(5150);
    for (const auto& m : o.sub.tot.mode_order) {
        auto it = o.fiber.find(m);
        if (it == o.fiber.end()) {
            rep.fail("no fiber at total mode '" + m + "'", 0, true);
            continue;
        }
        const SmoothFn& F = it->second;
        if (F.dom.dim() != o.sub.tot.mode_box(m).dim()) {
            rep.fail("fiber at mode '" + m + "' has wrong input arity", 0, true);
            continue;
        }
        if (!o.sub.p.obj.count(m)) continue;
        std::size_t want = o.sub.st.mode_box(o.sub.p.obj.at(m)).dim();
        if (F.cod.dim() != want) {
            rep.fail("fiber at mode '" + m + "' has wrong output arity", 0, true);
            continue;
        }
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point q = k == 0 ? o.sub.tot.mode_box(m).center() : o.sub.tot.mode_box(m).sample(rng);
            Point v = F(q);
            for (double c : v.x)
                if (!std::isfinite(c)) {
                    rep.fail("fiber at mode '" + m + "' is not finite at a sample", 0.0);
                    break;
                }
        }
    }
    (void)tol;
    return rep;
}

/// A morphism of submersions: a pair of phase-space maps making the square
/// with the two projections commute.
struct SubmersionMorphism {
    HyPhMap tot, st;
};

inline SubmersionMorphism identity_morphism(const HybridSubmersion& a) {
    return SubmersionMorphism{identity_map(a.tot), identity_map(a.st)};
}

inline SubmersionMorphism compose_morphism(const SubmersionMorphism& g,
                                           const SubmersionMorphism& f) {
    return SubmersionMorphism{compose_map(g.tot, f.tot), compose_map(g.st, f.st)};
}

inline Report validate_morphism(const SubmersionMorphism& h, const HybridSubmersion& a,
                                const HybridSubmersion& b, std::size_t nsamples = 8,
                                double tol = 1e-7, std::uint64_t seed = 31) {
    Report rep;
    rep.merge(validate_map(h.tot, a.tot, b.tot, nsamples, tol), "tot: ");
    rep.merge(validate_map(h.st, a.st, b.st, nsamples, tol), "st: ");
    if (!rep.ok()) return rep;
    Sampler rng(seed);
    for (const auto& m : a.tot.mode_order) {
        ModeId lhs_mode = h.st.obj_at(a.p.obj_at(m));
        ModeId rhs_mode = b.p.obj_at(h.tot.obj_at(m));
        if (lhs_mode != rhs_mode) {
            rep.fail("square does not commute on modes at '" + m + "'", 0, true);
            continue;
        }
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point q = k == 0 ? a.tot.mode_box(m).center() : a.tot.mode_box(m).sample(rng);
            Point lhs = h.st.comp(a.p.obj_at(m))(a.p.comp(m)(q));
            Point rhs = b.p.comp(h.tot.obj_at(m))(h.tot.comp(m)(q));
            double d = inf_dist(lhs, rhs);
            if (d > tol) rep.fail("square does not commute at a sample of mode '" + m + "'", d);
        }
    }
    return rep;
}

/// Is F h-related to G: does T(h_st) carry F's tangent outputs onto G's at
/// corresponding points. Sampled residual check.
inline Report crl_related(const SubmersionMorphism& h, const HybridSubmersion& a,
                          const HybridSubmersion& b, const OpenSystem& F, const OpenSystem& G,
                          std::size_t nsamples = 20, double tol = 1e-9,
                          std::uint64_t seed = 808) {
    (void)b;  // the morphism carries the target data
    Report rep;
    Sampler rng(seed);
    for (const auto& m : a.tot.mode_order) {
        const SmoothFn& Fm = F.fiber_at(m);
        const SmoothFn& Gm = G.fiber_at(h.tot.obj_at(m));
        const ModeId st_mode = a.p.obj_at(m);
        const SmoothFn& phi_st = h.st.comp(st_mode);
        const SmoothFn& proj = a.p.comp(m);
        const SmoothFn& phi_tot = h.tot.comp(m);
        bool st_identity = is_identity_fn(phi_st);
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point q = k == 0 ? a.tot.mode_box(m).center() : a.tot.mode_box(m).sample(rng);
            Point fv = Fm(q);
            std::vector<double> lhs =
                st_identity ? fv.x : differential(phi_st, proj(q)).apply(fv.x);
            Point rhs = Gm(phi_tot(q));
            double worst = 0.0;
            for (std::size_t c = 0; c < lhs.size(); ++c)
                worst = std::max(worst, std::abs(lhs[c] - rhs[c]));
            rep.observe(worst);
            if (worst > tol)
                rep.fail("mode '" + m + "': open systems not related at a sample", worst);
        }
    }
    return rep;
}

/// An interconnection morphism: a submersion morphism whose state component
/// is a diffeomorphism, witnessed by explicit inverse data (identity by
/// default).
struct InterconnectionMap {
    SubmersionMorphism mor;
    std::map<ModeId, SmoothFn> st_inverse;  // per target-st mode, when not identity
    bool st_identity = true;
};

inline InterconnectionMap make_interconnection(SubmersionMorphism mor) {
    return InterconnectionMap{std::move(mor), {}, true};
}

inline InterconnectionMap make_interconnection(SubmersionMorphism mor,
                                               std::map<ModeId, SmoothFn> st_inverse) {
    return InterconnectionMap{std::move(mor), std::move(st_inverse), false};
}

inline Report validate_interconnection(const InterconnectionMap& phi, const HybridSubmersion& a,
                                       const HybridSubmersion& b, std::size_t nsamples = 8,
                                       double tol = 1e-7, std::uint64_t seed = 606) {
    Report rep = validate_morphism(phi.mor, a, b, nsamples, tol, seed);
    // the state mode map must be a bijection
    std::map<ModeId, int> counts;
    for (const auto& m : b.st.mode_order) counts[m] = 0;
    for (const auto& m : a.st.mode_order) {
        auto it = phi.mor.st.obj.find(m);
        if (it != phi.mor.st.obj.end() && counts.count(it->second)) ++counts[it->second];
    }
    for (const auto& [m, c] : counts)
        if (c != 1)
            rep.fail("state mode map is not a bijection at '" + m + "'", 0, true);
    if (phi.st_identity) {
        for (const auto& m : a.st.mode_order) {
            auto it = phi.mor.st.comps.find(m);
            if (it == phi.mor.st.comps.end()) continue;
            if (!is_identity_fn(it->second))
                rep.fail("state component at '" + m + "' declared identity but is not", 0, true);
        }
        return rep;
    }
    Sampler rng(seed + 1);
    for (const auto& m : a.st.mode_order) {
        ModeId bm = phi.mor.st.obj_at(m);
        auto inv = phi.st_inverse.find(bm);
        if (inv == phi.st_inverse.end()) {
            rep.fail("no inverse component for state mode '" + bm + "'", 0, true);
            continue;
        }
        const SmoothFn& fwd = phi.mor.st.comp(m);
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point x = k == 0 ? a.st.mode_box(m).center() : a.st.mode_box(m).sample(rng);
            double d1 = inf_dist(inv->second(fwd(x)), x);
            Point y = k == 0 ? b.st.mode_box(bm).center() : b.st.mode_box(bm).sample(rng);
            double d2 = inf_dist(fwd(inv->second(y)), y);
            double d = std::max(d1, d2);
            if (d > tol)
                rep.fail("state inverse does not round-trip at mode '" + m + "'", d);
        }
    }
    return rep;
}

/// phi^* G = T(phi_st)^-1 o G o phi_tot. With an identity state component
/// this composes expressions, so the pullback stays analytic and exact.
inline OpenSystem pullback(const InterconnectionMap& phi, const HybridSubmersion& a,
                           const HybridSubmersion& b, const OpenSystem& G) {
    (void)b;  // the morphism carries the target data
    OpenSystem out;
    out.sub = a;
    for (const auto& m : a.tot.mode_order) {
        const SmoothFn& Gm = G.fiber_at(phi.mor.tot.obj_at(m));
        SmoothFn carried = compose_fns(Gm, phi.mor.tot.comp(m));
        if (phi.st_identity) {
            out.fiber.emplace(m, std::move(carried));
            continue;
        }
        ModeId a_st = a.p.obj_at(m);
        ModeId b_st = phi.mor.st.obj_at(a_st);
        auto inv = phi.st_inverse.find(b_st);
        if (inv == phi.st_inverse.end())
            throw std::invalid_argument("pullback: missing inverse for state mode '" + b_st + "'");
        SmoothFn inv_fn = inv->second;
        SmoothFn proj = a.p.comp(m);
        SmoothFn st_fwd = phi.mor.st.comp(a_st);
        SmoothFn base = carried;
        SmoothFn result = make_lambda_fn(
            a.tot.mode_box(m), real_box(a.st.mode_box(a_st).dim()),
            [base, inv_fn, proj, st_fwd](const Point& q) {
                Point v = base(q);
                Point b_pt = st_fwd(proj(q));
                Matrix J = differential(inv_fn, b_pt);
                return Point(J.apply(v.x));
            });
        out.fiber.emplace(m, std::move(result));
    }
    return out;
}

/// Finite product of submersions: componentwise product of total and state
/// spaces with the blockwise projection.
inline HybridSubmersion submersion_product(const std::vector<const HybridSubmersion*>& subs) {
    if (subs.empty()) throw std::invalid_argument("submersion_product: empty list");
    if (subs.size() == 1) return *subs[0];
    std::vector<const HybridPhaseSpace*> tots, sts;
    for (const auto* s : subs) {
        tots.push_back(&s->tot);
        sts.push_back(&s->st);
    }
    ProductResult tot = product_n(tots);
    ProductResult st = product_n(sts);
    const std::size_t n = subs.size();

    HyPhMap p;
    // modes and components
    for (const auto& m : tot.space.mode_order) {
        std::vector<std::string> st_parts;
        SmoothFn comp;
        bool first = true;
        for (std::size_t k = 0; k < n; ++k) {
            ModeId mk = tot.projections[k].obj_at(m);
            st_parts.push_back(subs[k]->p.obj_at(mk));
            SmoothFn ck = compose_fns(subs[k]->p.comp(mk), tot.projections[k].comp(m));
            comp = first ? ck : pair_fns(comp, ck);
            first = false;
        }
        p.obj[m] = tuple_id(st_parts);
        p.comps.emplace(m, std::move(comp));
    }
    // arrows: the moving slot maps through its factor, frozen slots stay
    for (const auto& gid : tot.space.arrow_order) {
        const Arrow& ar = tot.space.arrows.at(gid);
        std::vector<ModeId> at(n);
        for (std::size_t k = 0; k < n; ++k)
            at[k] = subs[k]->p.obj_at(tot.projections[k].obj_at(ar.src));
        Path big{tuple_id(at), "", {}};
        for (std::size_t k = 0; k < n; ++k) {
            const Path& pk = tot.projections[k].arr_at(gid);
            Path mapped = map_path(subs[k]->p, pk);
            for (const auto& step : mapped.arrows) {
                const Arrow& fa = sts[k]->arrows.at(step);
                std::vector<std::string> parts(n);
                for (std::size_t j = 0; j < n; ++j) parts[j] = j == k ? step : "id:" + at[j];
                big.arrows.push_back(tuple_id(parts));
                at[k] = fa.dst;
            }
            at[k] = mapped.dst;
        }
        big.dst = tuple_id(at);
        p.arr[gid] = std::move(big);
    }
    return HybridSubmersion{tot.space, st.space, std::move(p)};
}

/// Product open system: factorwise evaluation on concatenated coordinates.
inline OpenSystem crl_product(const std::vector<const OpenSystem*>& systems) {
    if (systems.empty()) throw std::invalid_argument("crl_product: empty list");
    if (systems.size() == 1) return *systems[0];
    std::vector<const HybridSubmersion*> subs;
    for (const auto* o : systems) subs.push_back(&o->sub);
    HybridSubmersion prod = submersion_product(subs);
    std::vector<const HybridPhaseSpace*> tots;
    for (const auto* s : subs) tots.push_back(&s->tot);
    ProductResult tot = product_n(tots);

    OpenSystem out;
    out.sub = prod;
    for (const auto& m : prod.tot.mode_order) {
        SmoothFn f;
        bool first = true;
        for (std::size_t k = 0; k < systems.size(); ++k) {
            ModeId mk = tot.projections[k].obj_at(m);
            SmoothFn fk = systems[k]->fiber_at(mk);
            f = first ? fk : concat_fns(f, fk);
            first = false;
        }
        out.fiber.emplace(m, std::move(f));
    }
    return out;
}

/// Pointwise linear combination of open systems on the same carrier.
inline OpenSystem crl_lin_comb(double alpha, const OpenSystem& F, double beta,
                               const OpenSystem& G) {
    OpenSystem out;
    out.sub = F.sub;
    for (const auto& [m, f] : F.fiber) out.fiber.emplace(m, lin_comb_fns(alpha, f, beta, G.fiber_at(m)));
    return out;
}

} // namespace hynet
