#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hynet/corpus.hpp"
#include "support.hpp"

using namespace hynet;

TEST_CASE("thermostat: two modes, two partial functions") {
    corpus::DemoBundle d = corpus::build("thermostat");
    REQUIRE(d.system.has_value());
    CHECK(d.system->space.mode_order.size() == 2);
    CHECK(d.system->space.arrow_order.size() == 2);
    // f takes 0 in off to 0 in on and is undefined elsewhere
    const Relation& f = d.system->space.arrow("f").rel;
    CHECK(member(f, Point({0.0}), Point({0.0}), 1e-9));
    CHECK_FALSE(member(f, Point({0.5}), Point({0.5}), 1e-9));
}

TEST_CASE("two rooms: the product of two thermostats") {
    corpus::DemoBundle d = corpus::build("two-rooms");
    REQUIRE(d.system.has_value());
    CHECK(d.system->space.mode_order.size() == 4);
    CHECK(d.system->space.arrow_order.size() == 8);
    CHECK(testing::count_connected_pairs_len2(d.system->space) == 12);
}

TEST_CASE("every corpus object passes its validator") {
    for (const auto& name : corpus::demo_names()) {
        corpus::DemoBundle d = corpus::build(name);
        if (d.system) {
            for (const auto& m : d.system->space.mode_order)
                CHECK(d.system->field.at(m).dom.dim() == d.system->space.mode_box(m).dim());
        }
        if (d.network) {
            CHECK_MESSAGE(validate_network(*d.network).ok(), name << ": network invalid");
            for (const auto& [x, sys] : d.node_systems)
                CHECK_MESSAGE(crl_check(sys).ok(), name << ": node system " << x << " invalid");
        }
        if (d.map) {
            REQUIRE(d.dst_network.has_value());
            CHECK(validate_network_map(*d.map, *d.network, *d.dst_network).ok());
        }
    }
    CHECK_THROWS_AS(corpus::build("no-such-demo"), std::invalid_argument);
}

TEST_CASE("three-node-map: theorem hypotheses and conclusion hold") {
    corpus::DemoBundle d = corpus::build("three-node-map");
    std::map<std::string, const OpenSystem*> w, u;
    for (const auto& [x, sys] : d.node_systems) w.emplace(x, &sys);
    for (const auto& [y, sys] : d.dst_node_systems) u.emplace(y, &sys);
    InducedMapResult r = induced_system_map(*d.map, *d.network, *d.dst_network, w, u, 30, 1e-9);
    CHECK(r.ok());
}

TEST_CASE("simulating the thermostat demo matches the closed form") {
    corpus::DemoBundle d = corpus::build("thermostat");
    SimConfig cfg;
    cfg.step = 1e-3;
    cfg.t_max = 3.5;
    SimResult r = simulate(*d.system, {"off", Point({1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    REQUIRE(r.exec.track.t.size() >= 4);
    CHECK(std::abs(r.exec.track.t[1] - 1.0) < 1e-6);
    CHECK(std::abs(r.exec.track.t[2] - 2.0) < 1e-6);
    CHECK(std::abs(r.exec.track.t[3] - 3.0) < 1e-6);
}

TEST_CASE("the interconnected three-node system keeps the diagonal invariant") {
    corpus::DemoBundle d = corpus::build("three-node-network");
    std::map<std::string, const OpenSystem*> w;
    for (const auto& [x, sys] : d.node_systems) w.emplace(x, &sys);
    OpenSystem closed = apply_interconnection(*d.network, w);
    REQUIRE(d.network->closed());
    HybridDynamicalSystem h = closed_to_hds(closed);

    SimConfig cfg;
    cfg.step = 1e-3;
    cfg.t_max = 5.0;
    SimResult r = simulate(h, {"(off,off,off)", Point({0.7, 0.7, 0.7})},
                           {PolicyKind::priority, 0}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(r.exec.jumps.size() >= 4);  // several resets inside [0, 5]
    double worst = 0.0;
    for (const auto& seg : r.exec.segments)
        for (const auto& p : seg.p) {
            worst = std::max(worst, std::abs(p[0] - p[1]));
            worst = std::max(worst, std::abs(p[0] - p[2]));
        }
    CHECK(worst <= 1e-6);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}
