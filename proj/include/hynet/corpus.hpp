#pragma once

// Built-in constructors for the worked examples: the heated room
// (thermostat), two rooms as a product, a product seen as a two-node
// network, the single-node self-coupling loop, the three-node network, and
// the map that collapses it onto the loop. These anchor the test suites and
// the CLI demo command.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/network.hpp"
#include "hynet/simulate.hpp"

namespace hynet::corpus {

inline constexpr double kCouplingGain = 0.1;

inline std::vector<std::string> demo_names() {
    return {"thermostat",       "two-rooms",          "product-as-network",
            "single-node-loop", "three-node-network", "three-node-map"};
}

/// Everything a demo may carry; unset members do not apply to that demo.
struct DemoBundle {
    std::string name;
    std::optional<HybridDynamicalSystem> system;
    std::optional<Network> network;
    std::map<std::string, OpenSystem> node_systems;
    std::optional<Network> dst_network;
    std::map<std::string, OpenSystem> dst_node_systems;
    std::optional<NetworkMap> map;
};

inline HybridPhaseSpace thermostat_space() {
    Box b = make_mode_box({{0.0, 1.0}});
    auto pin = [&](double v) {
        std::vector<Interval> sub = b.ivs;
        sub[0] = {v, v};
        Branch br{make_guard(b, sub), make_identity_fn(b), {}};
        return make_relation(b, b, {br});
    };
    HybridPhaseSpace a;
    a.add_mode("off", b);
    a.add_mode("on", b);
    a.add_arrow("f", "off", "on", pin(0.0));
    a.add_arrow("g", "on", "off", pin(1.0));
    return a;
}

inline HybridDynamicalSystem thermostat() {
    HybridPhaseSpace a = thermostat_space();
    VectorField X;
    X.by_mode.emplace("off", make_expr_fn(a.mode_box("off"), real_box(1), {"x"}, {"-1"}));
    X.by_mode.emplace("on", make_expr_fn(a.mode_box("on"), real_box(1), {"x"}, {"1"}));
    return make_hds(std::move(a), std::move(X));
}

/// Rate of the thermostat field in a named mode ("off" cools, "on" heats).
inline std::string thermostat_rate(const std::string& mode) {
    return mode == "off" ? "-1" : "1";
}

inline HybridDynamicalSystem two_rooms() {
    HybridPhaseSpace a = thermostat_space();
    ProductResult pr = product(a, a);
    VectorField X;
    for (const auto& m : pr.space.mode_order) {
        std::string first = m.substr(1, m.find(',') - 1);
        std::string second = m.substr(m.find(',') + 1, m.size() - m.find(',') - 2);
        X.by_mode.emplace(m, make_expr_fn(pr.space.mode_box(m), real_box(2), {"x", "y"},
                                          {thermostat_rate(first), thermostat_rate(second)}));
    }
    return make_hds(pr.space, std::move(X));
}

/// One-mode control space: a single unbounded input coordinate.
inline HybridPhaseSpace input_line() {
    HybridPhaseSpace u;
    u.add_mode("u", Box({Interval{-kInf, kInf}}));
    return u;
}

/// The coupling map s: thermostat -> input line, forgetting the mode and
/// including the temperature coordinate.
inline HyPhMap inclusion_map(const HybridPhaseSpace& m, const HybridPhaseSpace& u) {
    HyPhMap s;
    for (const auto& mode : m.mode_order) {
        s.obj[mode] = "u";
        s.comps.emplace(mode, make_expr_fn(m.mode_box(mode), u.mode_box("u"), {"x"}, {"x"}));
    }
    for (const auto& g : m.arrow_order) s.arr[g] = Path::identity("u");
    return s;
}

/// The node carrier (m x u -> m) shared by the loop and three-node demos.
inline HybridSubmersion control_node(const HybridPhaseSpace& m, const HybridPhaseSpace& u) {
    ProductResult pr = product(m, u);
    return HybridSubmersion{pr.space, m, pr.projections[0]};
}

/// w(x, v) = thermostat rate + gain * v on every node.
inline OpenSystem coupling_system(const HybridSubmersion& node) {
    OpenSystem w;
    w.sub = node;
    for (const auto& m : node.tot.mode_order) {
        std::string st_mode = node.p.obj.at(m);
        std::string rhs = thermostat_rate(st_mode) + " + " + fmt_double(kCouplingGain) + "*x1";
        w.fiber.emplace(m, make_expr_fn(node.tot.mode_box(m), real_box(1), {"x0", "x1"}, {rhs}));
    }
    return w;
}

/// Two projections of a product interconnected by the diagonal recover the
/// product system.
inline DemoBundle product_as_network() {
    DemoBundle d;
    d.name = "product-as-network";
    HybridPhaseSpace a = thermostat_space();
    ProductResult pr = product(a, a);

    Network n;
    n.index = {"1", "2"};
    n.nodes.emplace("1", HybridSubmersion{pr.space, a, pr.projections[0]});
    n.nodes.emplace("2", HybridSubmersion{pr.space, a, pr.projections[1]});
    n.base = identity_submersion(pr.space);
    HyPhMap diag = pair_n(pr.space, {identity_map(pr.space), identity_map(pr.space)},
                          {&pr.space, &pr.space});
    n.psi = make_interconnection(SubmersionMorphism{diag, identity_map(pr.space)});

    // slice systems of the isolated two-room field
    for (int i = 0; i < 2; ++i) {
        OpenSystem Xi;
        Xi.sub = n.node(i == 0 ? "1" : "2");
        for (const auto& m : pr.space.mode_order) {
            std::string first = m.substr(1, m.find(',') - 1);
            std::string second = m.substr(m.find(',') + 1, m.size() - m.find(',') - 2);
            std::string rate = thermostat_rate(i == 0 ? first : second);
            Xi.fiber.emplace(m, make_expr_fn(pr.space.mode_box(m), real_box(1), {"x", "y"}, {rate}));
        }
        d.node_systems.emplace(i == 0 ? "1" : "2", std::move(Xi));
    }
    d.network = std::move(n);
    return d;
}

/// A single node wired to itself through the coupling map s.
inline DemoBundle single_node_loop() {
    DemoBundle d;
    d.name = "single-node-loop";
    HybridPhaseSpace m = thermostat_space();
    HybridPhaseSpace u = input_line();
    HybridSubmersion node = control_node(m, u);

    Network n;
    n.index = {"*"};
    n.nodes.emplace("*", node);
    n.base = identity_submersion(m);
    HyPhMap nu_tot = pair_n(m, {identity_map(m), inclusion_map(m, u)}, {&m, &u});
    n.psi = make_interconnection(SubmersionMorphism{nu_tot, identity_map(m)});

    d.node_systems.emplace("*", coupling_system(node));
    d.network = std::move(n);
    return d;
}

/// Three copies of the control node, inputs wired 1<-2, 2<-1, 3<-2.
inline DemoBundle three_node_network() {
    DemoBundle d;
    d.name = "three-node-network";
    HybridPhaseSpace m = thermostat_space();
    HybridPhaseSpace u = input_line();
    HybridSubmersion node = control_node(m, u);

    ProductResult m3 = product_n({&m, &m, &m});
    const std::size_t wiring[3] = {1, 0, 1};  // node i listens to state wiring[i]

    Network n;
    n.index = {"1", "2", "3"};
    for (const auto& x : n.index) n.nodes.emplace(x, node);
    n.base = identity_submersion(m3.space);

    HyPhMap s = inclusion_map(m, u);
    std::vector<HyPhMap> slots;
    for (std::size_t i = 0; i < 3; ++i) {
        HyPhMap input = compose_map(s, m3.projections[wiring[i]]);
        slots.push_back(pair_n(m3.space, {m3.projections[i], input}, {&m, &u}));
    }
    HyPhMap psi_tot = pair_n(m3.space, slots, {&node.tot, &node.tot, &node.tot});
    n.psi = make_interconnection(SubmersionMorphism{psi_tot, identity_map(m3.space)});

    for (const auto& x : n.index) d.node_systems.emplace(x, coupling_system(node));
    d.network = std::move(n);
    return d;
}

/// The collapse of the three-node network onto the single-node loop: all
/// nodes map to the lone node with identity components, the base morphism is
/// the diagonal.
inline DemoBundle three_node_map() {
    DemoBundle d = three_node_network();
    d.name = "three-node-map";
    DemoBundle loop = single_node_loop();

    HybridPhaseSpace m = thermostat_space();
    ProductResult m3 = product_n({&m, &m, &m});
    HyPhMap diag = pair_n(m, {identity_map(m), identity_map(m), identity_map(m)}, {&m, &m, &m});

    NetworkMap nm;
    for (const auto& x : d.network->index) {
        nm.phi[x] = "*";
        nm.Phi.emplace(x, identity_morphism(loop.network->node("*")));
    }
    nm.f = SubmersionMorphism{diag, diag};
    (void)m3;

    d.dst_network = loop.network;
    d.dst_node_systems = loop.node_systems;
    d.map = std::move(nm);
    return d;
}

inline DemoBundle build(const std::string& name) {
    if (name == "thermostat") {
        DemoBundle d;
        d.name = name;
        d.system = thermostat();
        return d;
    }
    if (name == "two-rooms") {
        DemoBundle d;
        d.name = name;
        d.system = two_rooms();
        return d;
    }
    if (name == "product-as-network") return product_as_network();
    if (name == "single-node-loop") return single_node_loop();
    if (name == "three-node-network") return three_node_network();
    if (name == "three-node-map") return three_node_map();
    throw std::invalid_argument("unknown demo '" + name + "'");
}

} // namespace hynet::corpus
