#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hynet/simulate.hpp"
#include "support.hpp"

using namespace hynet;
using namespace hynet::testing;

namespace {

bool executions_identical(const Execution& a, const Execution& b) {
    if (a.track.t != b.track.t || a.modes != b.modes) return false;
    if (a.jumps.size() != b.jumps.size() || a.segments.size() != b.segments.size()) return false;
    for (std::size_t i = 0; i < a.jumps.size(); ++i)
        if (a.jumps[i].arrows != b.jumps[i].arrows) return false;
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        if (a.segments[i].t != b.segments[i].t) return false;
        if (a.segments[i].p.size() != b.segments[i].p.size()) return false;
        for (std::size_t k = 0; k < a.segments[i].p.size(); ++k)
            if (!(a.segments[i].p[k] == b.segments[i].p[k])) return false;
    }
    return true;
}

HybridDynamicalSystem two_room_isolated() {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    VectorField X;
    for (const auto& m : two.space.mode_order) {
        std::vector<std::string> rows;
        rows.push_back(m.substr(1, m.find(',') - 1) == "off" ? "-1" : "1");
        rows.push_back(m.find(",off") != std::string::npos ? "-1" : "1");
        X.by_mode.emplace(m, make_expr_fn(two.space.mode_box(m), real_box(2), {"x", "y"}, rows));
    }
    return make_hds(two.space, std::move(X));
}

} // namespace

TEST_CASE("thermostat jump times follow the closed-form solution") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.step = 1e-3;
    cfg.t_max = 10.5;
    cfg.max_jumps = 20;
    SimResult r = simulate(h, {"off", pt({1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(r.initial_jumps.empty());
    REQUIRE(r.exec.track.t.size() == 12);  // 11 segments: jumps at 1..10, tail to 10.5
    for (int k = 1; k <= 10; ++k)
        CHECK(std::abs(r.exec.track.t[static_cast<std::size_t>(k)] - k) <= 1e-6);
    for (std::size_t i = 0; i < r.exec.modes.size(); ++i)
        CHECK(r.exec.modes[i] == (i % 2 == 0 ? "off" : "on"));
    for (const auto& j : r.exec.jumps) CHECK(j.arrows.size() == 1);

    // oracle separation: the simulator's own output validates
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("no out-arrows and zero field yield a single segment") {
    HybridPhaseSpace s;
    s.add_mode("only", make_mode_box({{-1.0, 1.0}}));
    VectorField X;
    X.by_mode.emplace("only", make_expr_fn(s.mode_box("only"), real_box(1), {"x"}, {"0"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));
    SimConfig cfg;
    cfg.t_max = 2.0;
    SimResult r = simulate(h, {"only", pt({0.25})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(r.exec.segments.size() == 1);
    CHECK(r.exec.jumps.empty());
    CHECK(r.exec.track.t.front() == 0.0);
    CHECK(r.exec.track.t.back() == 2.0);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("max_jumps = 0 truncates at the first guard hit") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.t_max = 5.0;
    cfg.max_jumps = 0;
    SimResult r = simulate(h, {"off", pt({1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::jump_limit);
    CHECK(r.exec.segments.size() == 1);
    CHECK(std::abs(r.exec.track.t.back() - 1.0) <= 1e-6);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("enabled arrows") {
    HybridDynamicalSystem h = thermostat_hds();
    CHECK(enabled_arrows(h, {"off", pt({0.0})}, 1e-9) == std::vector<ArrowId>{"f"});
    CHECK(enabled_arrows(h, {"off", pt({0.5})}, 1e-9).empty());

    HybridDynamicalSystem two = two_room_isolated();
    auto both = enabled_arrows(two, {"(off,off)", pt({0.0, 0.0})}, 1e-9);
    CHECK(both == std::vector<ArrowId>{"(f,id:off)", "(id:off,f)"});
}

TEST_CASE("event time accuracy") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.step = 1e-3;
    cfg.t_max = 1.5;
    cfg.event_tol = 1e-9;
    SimResult r = simulate(h, {"off", pt({1.0})}, {}, cfg);
    REQUIRE(r.exec.track.t.size() >= 2);
    CHECK(std::abs(r.exec.track.t[1] - 1.0) <= cfg.event_tol + cfg.step * cfg.step);
}

TEST_CASE("determinism: identical inputs give identical executions") {
    HybridDynamicalSystem two = two_room_isolated();
    SimConfig cfg;
    cfg.t_max = 4.2;
    JumpPolicy pol{PolicyKind::seeded_random, 99};
    SimResult a = simulate(two, {"(off,off)", pt({1.0, 0.6})}, pol, cfg);
    SimResult b = simulate(two, {"(off,off)", pt({1.0, 0.6})}, pol, cfg);
    CHECK(a.status == b.status);
    CHECK(executions_identical(a.exec, b.exec));
    CHECK(validate_execution(a.exec, two, cfg.residual_tol()).ok());
}

TEST_CASE("policies coincide when at most one arrow is ever enabled") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.t_max = 6.0;
    SimResult pr = simulate(h, {"off", pt({0.8})}, {PolicyKind::priority, 0}, cfg);
    SimResult fe = simulate(h, {"off", pt({0.8})}, {PolicyKind::first_enabled, 0}, cfg);
    SimResult sr = simulate(h, {"off", pt({0.8})}, {PolicyKind::seeded_random, 1234}, cfg);
    CHECK(executions_identical(pr.exec, fe.exec));
    CHECK(executions_identical(pr.exec, sr.exec));
}

TEST_CASE("simultaneous guards chain into one composite jump") {
    HybridDynamicalSystem two = two_room_isolated();
    SimConfig cfg;
    cfg.t_max = 1.5;
    SimResult r = simulate(two, {"(off,off)", pt({1.0, 1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    REQUIRE(r.exec.jumps.size() == 1);
    CHECK(r.exec.jumps[0].arrows.size() == 2);  // both rooms reset at t = 1
    CHECK(r.exec.modes[0] == "(off,off)");
    CHECK(r.exec.modes[1] == "(on,on)");
    CHECK(validate_execution(r.exec, two, cfg.residual_tol()).ok());
}

TEST_CASE("arrows enabled at the start fire before the first segment") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.t_max = 0.5;
    SimResult r = simulate(h, {"off", pt({0.0})}, {}, cfg);
    CHECK(r.initial_jumps.arrows == std::vector<ArrowId>{"f"});
    CHECK(r.exec.modes[0] == "on");
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("outward flow with no reset reports stuck") {
    HybridPhaseSpace s;
    s.add_mode("m", make_mode_box({{0.0, 1.0}}));
    VectorField X;
    X.by_mode.emplace("m", make_expr_fn(s.mode_box("m"), real_box(1), {"x"}, {"-1"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));
    SimConfig cfg;
    cfg.t_max = 2.0;
    SimResult r = simulate(h, {"m", pt({0.5})}, {}, cfg);
    CHECK(r.status == SimStatus::stuck);
    CHECK(std::abs(r.exec.track.t.back() - 0.5) <= 1e-6);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("NaN in the field halts with an error status") {
    HybridPhaseSpace s;
    s.add_mode("m", make_mode_box({{0.0, 4.0}}));
    VectorField X;
    // unit speed until x reaches 1.5, NaN beyond
    X.by_mode.emplace("m", make_expr_fn(s.mode_box("m"), real_box(1), {"x"}, {"1 + 0*log(1.5 - x)"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));
    SimConfig cfg;
    cfg.t_max = 50.0;
    cfg.max_jumps = 0;
    SimResult r = simulate(h, {"m", pt({1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::nan_error);
}

TEST_CASE("euler integrator validates at its documented tolerance") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.t_max = 2.5;
    cfg.integrator = IntegratorKind::euler;
    SimResult r = simulate(h, {"off", pt({1.0})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("zero-duration run yields the degenerate execution") {
    HybridDynamicalSystem h = thermostat_hds();
    SimConfig cfg;
    cfg.t_max = 0.0;
    SimResult r = simulate(h, {"off", pt({0.5})}, {}, cfg);
    CHECK(r.exec.track.t == std::vector<double>{0.0});
    CHECK(r.exec.segments.size() == 1);
    CHECK(validate_execution(r.exec, h, 1e-9).ok());
}

TEST_CASE("a reset that lands on its own guard exhausts the chain and reports") {
    // pin at 0, identity reset, inward-free flow: the reset re-enables itself
    Box b = make_mode_box({{0.0, 1.0}});
    HybridPhaseSpace s;
    s.add_mode("m", b);
    s.add_arrow("loop", "m", "m", pin_identity(b, 0, 0.0));
    VectorField X;
    X.by_mode.emplace("m", make_expr_fn(b, real_box(1), {"x"}, {"-1"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));

    SimConfig cfg;
    cfg.t_max = 2.0;
    SimResult r = simulate(h, {"m", pt({0.5})}, {}, cfg);
    CHECK(r.status == SimStatus::stuck);
    // the post-chain tail is instantaneous, so the trace truncates to the
    // flow segment and the status message carries the explanation
    CHECK(r.exec.segments.size() == 1);
    CHECK(r.exec.jumps.empty());
    CHECK(r.message.find("chain_depth") != std::string::npos);
    CHECK(r.message.find("truncated") != std::string::npos);
    CHECK(std::abs(r.exec.track.t.back() - 0.5) <= 1e-6);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());

    // with no jump budget at all, the same trap reports the jump limit
    cfg.max_jumps = 0;
    SimResult r0 = simulate(h, {"m", pt({0.0})}, {}, cfg);
    CHECK(r0.status == SimStatus::jump_limit);
}

TEST_CASE("multi-pin guards fire only when every pin holds") {
    Box b = make_mode_box({{0.0, 3.0}, {0.0, 3.0}});
    HybridPhaseSpace s;
    s.add_mode("m", b);
    std::vector<Interval> sub = b.ivs;
    sub[0] = {1.0, 1.0};
    sub[1] = {1.0, 1.0};
    // corner reset back to the origin
    Branch br{make_guard(b, sub),
              make_expr_fn(b, b, {"x", "y"}, {"x - 1", "y - 1"}), {}};
    s.add_arrow("corner", "m", "m", make_relation(b, b, {br}));
    VectorField X;
    X.by_mode.emplace("m", make_expr_fn(b, real_box(2), {"x", "y"}, {"1", "1"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));

    SimConfig cfg;
    cfg.t_max = 3.5;
    cfg.max_jumps = 5;
    // on the diagonal both pins are hit together: periodic resets
    SimResult diag = simulate(h, {"m", pt({0.0, 0.0})}, {}, cfg);
    CHECK(diag.status == SimStatus::ok);
    CHECK(diag.exec.jumps.size() == 3);
    CHECK(validate_execution(diag.exec, h, cfg.residual_tol()).ok());

    // off the diagonal each pin is crossed alone: no jump ever fires
    cfg.t_max = 1.4;
    SimResult off = simulate(h, {"m", pt({0.0, 0.5})}, {}, cfg);
    CHECK(off.status == SimStatus::ok);
    CHECK(off.exec.jumps.empty());
    CHECK(validate_execution(off.exec, h, cfg.residual_tol()).ok());
}

TEST_CASE("long runs with many out-of-phase jumps stay valid") {
    HybridDynamicalSystem two = two_room_isolated();
    SimConfig cfg;
    cfg.step = 2e-3;
    cfg.t_max = 50.0;
    cfg.max_jumps = 200;
    SimResult r = simulate(two, {"(off,off)", pt({1.0, 0.37})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(r.exec.jumps.size() >= 90);  // each room resets every second
    CHECK(validate_execution(r.exec, two, cfg.residual_tol()).ok());
    // the two rooms never synchronize from an incommensurate offset
    for (const auto& j : r.exec.jumps) CHECK(j.arrows.size() == 1);
}

TEST_CASE("curved fields validate at the documented rk4 tolerance") {
    HybridPhaseSpace s;
    s.add_mode("m", make_mode_box({{-2.0, 2.0}, {-2.0, 2.0}}));
    VectorField X;
    X.by_mode.emplace("m", make_expr_fn(s.mode_box("m"), real_box(2), {"x", "y"},
                                        {"y - x^3/4", "-x + sin(y)/2"}));
    HybridDynamicalSystem h = make_hds(std::move(s), std::move(X));
    SimConfig cfg;
    cfg.t_max = 3.0;
    cfg.step = 2e-3;
    SimResult r = simulate(h, {"m", pt({0.5, -0.25})}, {}, cfg);
    CHECK(r.status == SimStatus::ok);
    CHECK(validate_execution(r.exec, h, cfg.residual_tol()).ok());
}
