#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hynet/hyph.hpp"
#include "support.hpp"

using namespace hynet;
using namespace hynet::testing;

TEST_CASE("path relations realize the free-category functor") {
    HybridPhaseSpace a = thermostat_space();
    Relation idp = path_relation(a, Path::identity("off"));
    CHECK(member(idp, pt({0.4}), pt({0.4}), 1e-9));
    CHECK_FALSE(member(idp, pt({0.4}), pt({0.6}), 1e-9));

    Relation f = path_relation(a, Path{"off", "on", {"f"}});
    CHECK(member(f, pt({0.0}), pt({0.0}), 1e-9));
    CHECK_FALSE(member(f, pt({0.5}), pt({0.5}), 1e-9));

    // f then g requires 0 to land on 1: empty
    Relation fg = path_relation(a, Path{"off", "off", {"f", "g"}});
    CHECK(fg.is_empty());
    CHECK_THROWS_AS(path_relation(a, Path{"off", "off", {"f"}}), std::invalid_argument);
}

TEST_CASE("functor law: path concatenation composes relations") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    // p = (f,id) from (off,off), q = (id,f) from (on,off)
    Path p{"(off,off)", "(on,off)", {"(f,id:off)"}};
    Path q{"(on,off)", "(on,on)", {"(id:on,f)"}};
    Path pq{"(off,off)", "(on,on)", {"(f,id:off)", "(id:on,f)"}};
    Relation lhs = path_relation(two.space, pq);
    Relation rhs = compose(path_relation(two.space, q), path_relation(two.space, p));
    Sampler rng(9);
    Box src = two.space.mode_box("(off,off)");
    for (int k = 0; k < 50; ++k) {
        Point x = src.sample(rng);
        if (k % 3 == 0) x = pt({0.0, 0.0});
        Point y = x;
        CHECK(member(lhs, x, y, 1e-9) == member(rhs, x, y, 1e-9));
    }
    CHECK(member(lhs, pt({0.0, 0.0}), pt({0.0, 0.0}), 1e-9));
}

TEST_CASE("two-room product has 4 modes and 8 generating arrows") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    CHECK(two.space.mode_order.size() == 4);
    CHECK(two.space.arrow_order.size() == 8);
    CHECK(two.space.mode_box("(off,on)").dim() == 2);
    for (const auto& proj : two.projections) {
        Report r = validate_map(proj, two.space, a);
        CHECK_MESSAGE(r.ok(), "projection failed validation");
    }
}

TEST_CASE("terminal object") {
    HybridPhaseSpace t = terminal();
    CHECK(underlying(t).size() == 1);
    CHECK(underlying(t)[0].second.dim() == 0);

    HybridPhaseSpace a = thermostat_space();
    HyPhMap bang = terminal_map(a);
    CHECK(validate_map(bang, a, t).ok());

    ProductResult tt = product(t, t);
    CHECK(tt.space.mode_order.size() == 1);
    CHECK(tt.space.arrow_order.empty());
    CHECK(tt.space.mode_box(tt.space.mode_order[0]).dim() == 0);
}

TEST_CASE("product with terminal pads with zero dimensions") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult at = product(a, terminal());
    CHECK(at.space.mode_order.size() == a.mode_order.size());
    CHECK(at.space.arrow_order.size() == a.arrow_order.size());
    for (const auto& m : a.mode_order)
        CHECK(at.space.mode_box("(" + m + ",*)").dim() == a.mode_box(m).dim());
}

TEST_CASE("validate_map accepts the identity and rejects the label swap") {
    HybridPhaseSpace a = thermostat_space();
    CHECK(validate_map(identity_map(a), a, a).ok());

    // swap on/off with identity components: resets land outside the target relation
    HyPhMap swap;
    swap.obj["off"] = "on";
    swap.obj["on"] = "off";
    swap.comps.emplace("off", make_identity_fn(a.mode_box("off")));
    swap.comps.emplace("on", make_identity_fn(a.mode_box("on")));
    swap.arr["f"] = Path{"on", "off", {"g"}};
    swap.arr["g"] = Path{"off", "on", {"f"}};
    Report r = validate_map(swap, a, a);
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.has_structural());  // structurally fine, semantically wrong
}

TEST_CASE("validate_map flags structural problems distinctly") {
    HybridPhaseSpace a = thermostat_space();
    HyPhMap broken = identity_map(a);
    broken.arr["f"] = Path{"off", "off", {}};  // endpoint mismatch with obj image of dst
    Report r = validate_map(broken, a, a);
    CHECK_FALSE(r.ok());
    CHECK(r.has_structural());
}

TEST_CASE("pairing into the product satisfies the universal property") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    HyPhMap diag = pair(identity_map(a), identity_map(a), a, a, a);
    CHECK(validate_map(diag, a, two.space).ok());

    // proj_i o pair(z1, z2) = z_i exactly on underlying points
    Sampler rng(21);
    for (int k = 0; k < 30; ++k) {
        ModeId m = a.mode_order[rng.index(a.mode_order.size())];
        UnderlyingPoint u{m, a.mode_box(m).sample(rng)};
        UnderlyingPoint d = apply_underlying(diag, u);
        CHECK(d.mode == "(" + m + "," + m + ")");
        UnderlyingPoint p1 = apply_underlying(two.projections[0], d);
        UnderlyingPoint p2 = apply_underlying(two.projections[1], d);
        CHECK(p1.mode == m);
        CHECK(p2.mode == m);
        CHECK(p1.point == u.point);
        CHECK(p2.point == u.point);
    }

    // and the composite maps are equal as phase-space maps on samples
    HyPhMap back = compose_map(two.projections[0], diag);
    for (const auto& m : a.mode_order) CHECK(back.obj_at(m) == m);
    CHECK(validate_map(back, a, a).ok());
}

TEST_CASE("compose_map is associative and unital on samples") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    HyPhMap diag = pair(identity_map(a), identity_map(a), a, a, a);
    HyPhMap proj = two.projections[1];
    HyPhMap idm = identity_map(a);

    HyPhMap left = compose_map(compose_map(proj, diag), idm);
    HyPhMap right = compose_map(proj, compose_map(diag, idm));
    Sampler rng(4);
    for (int k = 0; k < 20; ++k) {
        ModeId m = a.mode_order[rng.index(a.mode_order.size())];
        UnderlyingPoint u{m, a.mode_box(m).sample(rng)};
        UnderlyingPoint l = apply_underlying(left, u);
        UnderlyingPoint r = apply_underlying(right, u);
        CHECK(l.mode == r.mode);
        CHECK(l.point == r.point);
    }

    HyPhMap unit_l = compose_map(idm, idm);
    for (const auto& m : a.mode_order) CHECK(unit_l.obj_at(m) == m);
}

TEST_CASE("underlying functor preserves products") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    auto ua = underlying(a);
    auto uab = underlying(two.space);
    CHECK(ua.size() == 2);
    CHECK(uab.size() == 4);

    // canonical bijection U(a x a) <-> U(a) x U(a), commuting with projections
    Sampler rng(13);
    for (const auto& [m, box] : uab) {
        for (int k = 0; k < 5; ++k) {
            UnderlyingPoint u{m, box.sample(rng)};
            UnderlyingPoint l = apply_underlying(two.projections[0], u);
            UnderlyingPoint r = apply_underlying(two.projections[1], u);
            // split and reassemble: this is the inverse direction of P
            CHECK(m == "(" + l.mode + "," + r.mode + ")");
            Point glued = concat(l.point, r.point);
            CHECK(glued == u.point);
        }
    }
}

TEST_CASE("arrows may map to longer paths") {
    // L has one reset arrow; L2 refines it into two hops through a middle mode
    Box b = make_mode_box({{0.0, 1.0}});
    HybridPhaseSpace L;
    L.add_mode("l0", b);
    L.add_mode("l1", b);
    L.add_arrow("step", "l0", "l1", pin_identity(b, 0, 1.0));

    HybridPhaseSpace L2;
    L2.add_mode("m0", b);
    L2.add_mode("mid", b);
    L2.add_mode("m1", b);
    L2.add_arrow("s1", "m0", "mid", pin_identity(b, 0, 1.0));
    Branch pure{full_guard(b), make_identity_fn(b), {}};
    L2.add_arrow("s2", "mid", "m1", make_relation(b, b, {pure}));

    HyPhMap refine;
    refine.obj["l0"] = "m0";
    refine.obj["l1"] = "m1";
    refine.arr["step"] = Path{"m0", "m1", {"s1", "s2"}};
    refine.comps.emplace("l0", make_identity_fn(b));
    refine.comps.emplace("l1", make_identity_fn(b));
    CHECK(validate_map(refine, L, L2).ok());

    // pairing two such maps interleaves the two-hop paths into four hops
    ProductResult two = product(L2, L2);
    HyPhMap both = pair(refine, refine, L, L2, L2);
    REQUIRE(both.arr.count("step"));
    CHECK(both.arr.at("step").arrows.size() == 4);
    CHECK(validate_map(both, L, two.space).ok());

    // and compose_map substitutes paths for arrows
    HyPhMap idm = identity_map(L);
    HyPhMap chained = compose_map(refine, idm);
    CHECK(chained.arr.at("step").arrows == std::vector<ArrowId>{"s1", "s2"});
}

TEST_CASE("validate_map composes: valid maps compose to valid maps") {
    HybridPhaseSpace a = thermostat_space();
    ProductResult two = product(a, a);
    HyPhMap diag = pair(identity_map(a), identity_map(a), a, a, a);
    HyPhMap proj0 = two.projections[0];
    REQUIRE(validate_map(diag, a, two.space).ok());
    REQUIRE(validate_map(proj0, two.space, a).ok());
    CHECK(validate_map(compose_map(proj0, diag), a, a).ok());
    CHECK(validate_map(compose_map(diag, proj0), two.space, two.space).ok());
}
