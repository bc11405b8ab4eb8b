#pragma once

// Networks of hybrid open systems: an indexed list of submersions together
// with an interconnection of their product, maps of networks, and the
// verifier for the induced map of interconnected systems (hypotheses are
// checked separately from the conclusion, which the theory guarantees).

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/opensys.hpp"

namespace hynet {

struct Network {
    std::vector<std::string> index;                  // ordered node names
    std::map<std::string, HybridSubmersion> nodes;   // tau
    HybridSubmersion base;                           // b
    InterconnectionMap psi;                          // b -> product of nodes

    const HybridSubmersion& node(const std::string& x) const {
        auto it = nodes.find(x);
        if (it == nodes.end()) throw std::invalid_argument("unknown network node '" + x + "'");
        return it->second;
    }

    std::vector<const HybridSubmersion*> node_list() const {
        std::vector<const HybridSubmersion*> out;
        for (const auto& x : index) out.push_back(&node(x));
        return out;
    }

    HybridSubmersion product() const { return submersion_product(node_list()); }

    /// A network is closed when its base is an identity submersion.
    bool closed() const {
        if (base.tot.mode_order != base.st.mode_order) return false;
        for (const auto& m : base.tot.mode_order) {
            if (base.p.obj_at(m) != m) return false;
            if (!is_identity_fn(base.p.comp(m))) return false;
        }
        return true;
    }
};

/// The product functor on maps of indexed lists: the x-th component of the
/// result is Phi_x composed with the projection onto slot phi(x).
inline HyPhMap pi_map(const std::vector<std::size_t>& phi, const std::vector<const HyPhMap*>& Phi,
                      const std::vector<const HybridPhaseSpace*>& mu,
                      const std::vector<const HybridPhaseSpace*>& tau) {
    if (phi.size() != tau.size() || Phi.size() != tau.size())
        throw std::invalid_argument("pi_map: arity mismatch");
    ProductResult pm = product_n(mu);
    std::vector<HyPhMap> comps;
    comps.reserve(tau.size());
    for (std::size_t x = 0; x < tau.size(); ++x) {
        if (phi[x] >= mu.size()) throw std::invalid_argument("pi_map: index map out of range");
        comps.push_back(compose_map(*Phi[x], pm.projections[phi[x]]));
    }
    return pair_n(pm.space, comps, tau);
}

/// pi_map at the submersion level: componentwise on totals and states.
inline SubmersionMorphism pi_morphism(const std::vector<std::size_t>& phi,
                                      const std::vector<const SubmersionMorphism*>& Phi,
                                      const std::vector<const HybridSubmersion*>& mu,
                                      const std::vector<const HybridSubmersion*>& tau) {
    std::vector<const HyPhMap*> tot_maps, st_maps;
    std::vector<const HybridPhaseSpace*> mu_tot, mu_st, tau_tot, tau_st;
    for (const auto* m : Phi) {
        tot_maps.push_back(&m->tot);
        st_maps.push_back(&m->st);
    }
    for (const auto* s : mu) {
        mu_tot.push_back(&s->tot);
        mu_st.push_back(&s->st);
    }
    for (const auto* s : tau) {
        tau_tot.push_back(&s->tot);
        tau_st.push_back(&s->st);
    }
    return SubmersionMorphism{pi_map(phi, tot_maps, mu_tot, tau_tot),
                              pi_map(phi, st_maps, mu_st, tau_st)};
}

inline Report validate_network(const Network& n, std::size_t nsamples = 8, double tol = 1e-7) {
    Report rep;
    if (n.index.empty()) rep.fail("network has no nodes", 0, true);
    for (const auto& x : n.index) {
        if (!n.nodes.count(x)) {
            rep.fail("node '" + x + "' has no submersion", 0, true);
            continue;
        }
        rep.merge(validate_submersion(n.node(x), nsamples), "node " + x + ": ");
    }
    rep.merge(validate_submersion(n.base, nsamples), "base: ");
    if (rep.has_structural()) return rep;
    HybridSubmersion prod = n.product();
    rep.merge(validate_interconnection(n.psi, n.base, prod, nsamples, tol), "psi: ");
    return rep;
}

/// Interconnect a tuple of open systems, one per node, into one open system
/// on the base. For closed networks the result's carrier is an identity
/// submersion, i.e. a hybrid dynamical system.
inline OpenSystem apply_interconnection(const Network& n,
                                        const std::map<std::string, const OpenSystem*>& w) {
    std::vector<const OpenSystem*> systems;
    for (const auto& x : n.index) {
        auto it = w.find(x);
        if (it == w.end()) throw std::invalid_argument("no open system for node '" + x + "'");
        systems.push_back(it->second);
    }
    OpenSystem prod = crl_product(systems);
    return pullback(n.psi, n.base, prod.sub, prod);
}

/// A map of networks (tau, psi) -> (mu, nu): an index map phi, componentwise
/// morphisms Phi_x: mu(phi(x)) -> tau(x), and a base morphism f: c -> b
/// making the interconnection square commute.
struct NetworkMap {
    std::map<std::string, std::string> phi;
    std::map<std::string, SubmersionMorphism> Phi;
    SubmersionMorphism f;

    const std::string& phi_at(const std::string& x) const {
        auto it = phi.find(x);
        if (it == phi.end()) throw std::invalid_argument("index map undefined on '" + x + "'");
        return it->second;
    }

    const SubmersionMorphism& Phi_at(const std::string& x) const {
        auto it = Phi.find(x);
        if (it == Phi.end()) throw std::invalid_argument("no component morphism at '" + x + "'");
        return it->second;
    }
};

/// The submersion-level Pi(phi, Phi): product of the dst nodes -> product of
/// the src nodes.
inline SubmersionMorphism network_pi(const NetworkMap& m, const Network& src, const Network& dst) {
    std::vector<std::size_t> phi_ix;
    std::vector<const SubmersionMorphism*> Phi;
    for (const auto& x : src.index) {
        const std::string& y = m.phi_at(x);
        std::size_t pos = dst.index.size();
        for (std::size_t k = 0; k < dst.index.size(); ++k)
            if (dst.index[k] == y) pos = k;
        if (pos == dst.index.size())
            throw std::invalid_argument("index map hits unknown node '" + y + "'");
        phi_ix.push_back(pos);
        Phi.push_back(&m.Phi_at(x));
    }
    return pi_morphism(phi_ix, Phi, dst.node_list(), src.node_list());
}

namespace detail {

inline Report maps_agree_sampled(const HyPhMap& F, const HyPhMap& G, const HybridPhaseSpace& dom,
                                 std::size_t nsamples, double tol, std::uint64_t seed) {
    Report rep;
    Sampler rng(seed);
    for (const auto& m : dom.mode_order) {
        if (F.obj_at(m) != G.obj_at(m)) {
            rep.fail("images of mode '" + m + "' differ", 0, true);
            continue;
        }
        for (std::size_t k = 0; k < nsamples; ++k) {
            Point q = k == 0 ? dom.mode_box(m).center() : dom.mode_box(m).sample(rng);
            double d = inf_dist(F.comp(m)(q), G.comp(m)(q));
            if (d > tol) rep.fail("maps differ at a sample of mode '" + m + "'", d);
        }
    }
    return rep;
}

} // namespace detail

/// Checks the defining square of a network map: Pi(phi,Phi) o nu = psi o f,
/// componentwise morphism validity included.
inline Report validate_network_map(const NetworkMap& m, const Network& src, const Network& dst,
                                   std::size_t nsamples = 8, double tol = 1e-7) {
    Report rep;
    for (const auto& x : src.index) {
        if (!m.phi.count(x)) {
            rep.fail("index map undefined on '" + x + "'", 0, true);
            continue;
        }
        if (!dst.nodes.count(m.phi.at(x))) {
            rep.fail("index map sends '" + x + "' to an unknown node", 0, true);
            continue;
        }
        if (!m.Phi.count(x)) {
            rep.fail("no component morphism at '" + x + "'", 0, true);
            continue;
        }
        rep.merge(validate_morphism(m.Phi_at(x), dst.node(m.phi_at(x)), src.node(x), nsamples, tol),
                  "Phi[" + x + "]: ");
    }
    rep.merge(validate_morphism(m.f, dst.base, src.base, nsamples, tol), "f: ");
    if (rep.has_structural()) return rep;

    SubmersionMorphism pi = network_pi(m, src, dst);
    SubmersionMorphism lhs{compose_map(pi.tot, dst.psi.mor.tot), compose_map(pi.st, dst.psi.mor.st)};
    SubmersionMorphism rhs{compose_map(src.psi.mor.tot, m.f.tot),
                           compose_map(src.psi.mor.st, m.f.st)};
    rep.merge(detail::maps_agree_sampled(lhs.tot, rhs.tot, dst.base.tot, nsamples, tol, 914),
              "square(tot): ");
    rep.merge(detail::maps_agree_sampled(lhs.st, rhs.st, dst.base.st, nsamples, tol, 915),
              "square(st): ");
    return rep;
}

/// Outcome of the induced-map verifier. A conclusion failure with passing
/// hypotheses would contradict the theory: it indicates a bug or a
/// tolerance too tight for the data, and is reported separately.
struct InducedMapResult {
    Report hypothesis;
    bool conclusion_attempted = false;
    Report conclusion;
    OpenSystem on_dst_base;  // nu^*(prod u), lives on c
    OpenSystem on_src_base;  // psi^*(prod w), lives on b

    bool ok() const { return hypothesis.ok() && conclusion_attempted && conclusion.ok(); }
};

inline InducedMapResult induced_system_map(const NetworkMap& m, const Network& src,
                                           const Network& dst,
                                           const std::map<std::string, const OpenSystem*>& w,
                                           const std::map<std::string, const OpenSystem*>& u,
                                           std::size_t nsamples = 20, double tol = 1e-9) {
    InducedMapResult out;
    out.hypothesis = validate_network_map(m, src, dst, std::max<std::size_t>(4, nsamples / 2),
                                          std::max(tol, 1e-7));
    for (const auto& x : src.index) {
        auto wx = w.find(x);
        if (wx == w.end()) {
            out.hypothesis.fail("no open system for source node '" + x + "'", 0, true);
            continue;
        }
        auto uy = u.find(m.phi_at(x));
        if (uy == u.end()) {
            out.hypothesis.fail("no open system for target node '" + m.phi_at(x) + "'", 0, true);
            continue;
        }
        Report rel = crl_related(m.Phi_at(x), dst.node(m.phi_at(x)), src.node(x), *uy->second,
                                 *wx->second, nsamples, tol);
        out.hypothesis.merge(rel, "relatedness[" + x + "]: ");
    }
    if (!out.hypothesis.ok()) return out;

    out.conclusion_attempted = true;
    out.on_dst_base = apply_interconnection(dst, u);
    out.on_src_base = apply_interconnection(src, w);
    out.conclusion = crl_related(m.f, dst.base, src.base, out.on_dst_base, out.on_src_base,
                                 nsamples, tol);
    return out;
}

} // namespace hynet
