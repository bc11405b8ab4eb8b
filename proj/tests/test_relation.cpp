#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hynet/relation.hpp"

using namespace hynet;

namespace {

Box unit() { return make_mode_box({{0.0, 1.0}}); }

/// Thermostat reset: defined only on the pinned value, acts as the identity.
Relation pin_id(double pin) {
    Box b = unit();
    Branch br{make_guard(b, {{pin, pin}}), make_identity_fn(b), {}};
    return make_relation(b, b, {br});
}

/// Clamps a point into a branch guard (lands exactly on pins).
Point snap_to_guard(const Branch& br, Point p) {
    for (std::size_t i = 0; i < br.guard.dim(); ++i) {
        p[i] = std::max(p[i], br.guard.sub[i].lo);
        p[i] = std::min(p[i], br.guard.sub[i].hi);
    }
    return p;
}

Relation random_relation(Sampler& rng, const Box& src, const Box& tgt) {
    std::vector<Branch> branches;
    std::size_t nb = 1 + rng.index(2);
    for (std::size_t i = 0; i < nb; ++i) {
        std::vector<Interval> sub = src.ivs;
        std::size_t pin = rng.index(src.dim());
        double v = rng.uniform(src.ivs[pin].lo, src.ivs[pin].hi);
        sub[pin] = {v, v};
        std::vector<std::string> names = positional_names(src.dim());
        std::vector<std::string> rows;
        for (std::size_t r = 0; r < tgt.dim(); ++r) {
            double a = rng.uniform(-0.5, 0.5), b = rng.uniform(-0.5, 0.5);
            std::size_t which = rng.index(src.dim());
            rows.push_back(fmt_double(a) + "*" + names[which] + " + " + fmt_double(b));
        }
        branches.push_back(Branch{make_guard(src, sub), make_expr_fn(src, tgt, names, rows), {}});
    }
    return make_relation(src, tgt, branches);
}

} // namespace

TEST_CASE("membership of a guarded partial map") {
    Relation f = pin_id(0.0);
    CHECK(member(f, Point({0.0}), Point({0.0}), 1e-9));
    CHECK_FALSE(member(f, Point({0.5}), Point({0.5}), 1e-9));  // guard not met
    CHECK_FALSE(member(f, Point({0.0}), Point({0.5}), 1e-9));
    Relation none = empty_relation(unit(), unit());
    CHECK_FALSE(member(none, Point({0.0}), Point({0.0}), 1.0));
}

TEST_CASE("guards validate") {
    Box b = unit();
    CHECK_THROWS_AS(make_guard(b, {{-0.5, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make_guard(b, {{0.6, 0.4}}), std::invalid_argument);
    // a strict sub-range with no pin is not a legal guard
    CHECK_THROWS_AS(make_guard(b, {{0.1, 0.9}}), std::invalid_argument);
    CHECK_NOTHROW(make_guard(b, {{0.0, 1.0}}));  // whole box: pure-map branch
    CHECK_NOTHROW(make_guard(b, {{0.3, 0.3}}));
}

TEST_CASE("composition prunes provably empty guards") {
    Relation f = pin_id(0.0), g = pin_id(1.0);
    Relation gf = compose(g, f);  // f lands at 0, g requires 1
    CHECK(gf.is_empty());
    Relation ff = compose(f, f);
    CHECK_FALSE(ff.is_empty());
    CHECK(member(ff, Point({0.0}), Point({0.0}), 1e-9));
}

TEST_CASE("identity relation is a unit for composition") {
    Sampler rng(5);
    Box src = make_mode_box({{0.0, 1.0}, {-1.0, 1.0}});
    Box tgt = make_mode_box({{-10.0, 10.0}, {-10.0, 10.0}});
    Relation R = random_relation(rng, src, tgt);
    Relation Rl = compose(R, identity_rel(src));
    Relation Rr = compose(identity_rel(tgt), R);
    for (int k = 0; k < 50; ++k) {
        Point x = src.sample(rng);
        for (const auto& br : R.branches) {
            if (!br.admits(x, 1e-9)) continue;
            Point y = br.map(x);
            CHECK(member(Rl, x, y, 1e-9));
            CHECK(member(Rr, x, y, 1e-9));
        }
        Point y = tgt.sample(rng);
        bool m = member(R, x, y, 1e-9);
        CHECK(member(Rl, x, y, 1e-9) == m);
        CHECK(member(Rr, x, y, 1e-9) == m);
    }
}

TEST_CASE("identity relation membership") {
    Box b = unit();
    Relation id = identity_rel(b);
    CHECK(member(id, Point({0.25}), Point({0.25}), 1e-9));
    CHECK_FALSE(member(id, Point({0.25}), Point({0.75}), 1e-9));
}

TEST_CASE("two-room composite pins both coordinates") {
    // (f x id) o (id x f) on [0,1]^2: the composite guard is the corner {0}x{0}
    Box b = unit();
    Relation f = pin_id(0.0);
    Relation id = identity_rel(b);
    Relation idxf = rel_product(id, f);
    Relation fxid = rel_product(f, id);
    Relation comp = compose(fxid, idxf);
    REQUIRE(comp.branches.size() == 1);
    const Guard& g = comp.branches[0].guard;
    CHECK(g.sub[0].lo == 0.0);
    CHECK(g.sub[0].hi == 0.0);
    CHECK(g.sub[1].lo == 0.0);
    CHECK(g.sub[1].hi == 0.0);
    CHECK(member(comp, Point({0.0, 0.0}), Point({0.0, 0.0}), 1e-9));
    CHECK_FALSE(member(comp, Point({0.0, 0.5}), Point({0.0, 0.5}), 1e-9));
}

TEST_CASE("product membership coherence") {
    Relation f = pin_id(0.0);
    Relation idr = identity_rel(unit());
    Relation fxid = rel_product(f, idr);
    CHECK(member(fxid, Point({0.0, 0.3}), Point({0.0, 0.3}), 1e-9));
    CHECK_FALSE(member(fxid, Point({0.5, 0.3}), Point({0.5, 0.3}), 1e-9));

    Relation e = rel_product(empty_relation(unit(), unit()), idr);
    CHECK(e.is_empty());

    // identity x identity behaves as the identity of the product box
    Relation idxid = rel_product(idr, idr);
    Sampler rng(11);
    Box prod = make_mode_box({{0.0, 1.0}, {0.0, 1.0}});
    for (int k = 0; k < 20; ++k) {
        Point x = prod.sample(rng);
        CHECK(member(idxid, x, x, 1e-9));
        Point y = prod.sample(rng);
        CHECK(member(idxid, x, y, 1e-9) == (inf_dist(x, y) <= 1e-9));
    }
}

TEST_CASE("product membership matches componentwise membership on random data") {
    Sampler rng(23);
    Box a = make_mode_box({{0.0, 1.0}, {-1.0, 1.0}});
    Box b = make_mode_box({{-2.0, 2.0}});
    Box ta = make_mode_box({{-10.0, 10.0}});
    Box tb = make_mode_box({{-10.0, 10.0}, {-10.0, 10.0}});
    Relation R = random_relation(rng, a, ta);
    Relation S = random_relation(rng, b, tb);
    Relation RxS = rel_product(R, S);
    int positives = 0;
    for (int k = 0; k < 100; ++k) {
        Point m = a.sample(rng), q = b.sample(rng);
        // exercise the positive side by landing on branch guards and images
        Point n = ta.sample(rng), p = tb.sample(rng);
        if (k % 2 == 0) {
            m = snap_to_guard(R.branches[rng.index(R.branches.size())], m);
            q = snap_to_guard(S.branches[rng.index(S.branches.size())], q);
            for (const auto& br : R.branches)
                if (br.admits(m, 1e-9)) n = br.map(m);
            for (const auto& br : S.branches)
                if (br.admits(q, 1e-9)) p = br.map(q);
        }
        bool lhs = member(RxS, concat(m, q), concat(n, p), 1e-9);
        bool rhs = member(R, m, n, 1e-9) && member(S, q, p, 1e-9);
        CHECK(lhs == rhs);
        if (lhs) ++positives;
    }
    CHECK(positives > 0);
}

TEST_CASE("membership-level associativity of composition") {
    Sampler rng(31);
    Box A = make_mode_box({{0.0, 1.0}, {0.0, 1.0}});
    Box B = make_mode_box({{-3.0, 3.0}, {-3.0, 3.0}});
    Box C = make_mode_box({{-5.0, 5.0}});
    Box D = make_mode_box({{-9.0, 9.0}});
    for (int trial = 0; trial < 4; ++trial) {
        Relation R = random_relation(rng, A, B);
        Relation S = random_relation(rng, B, C);
        Relation T = random_relation(rng, C, D);
        Relation left = compose(T, compose(S, R));
        Relation right = compose(compose(T, S), R);
        for (int k = 0; k < 50; ++k) {
            Point x = A.sample(rng);
            Point w = D.sample(rng);
            if (k % 2 == 0) {
                // walk the chain to land on a related pair when possible
                x = snap_to_guard(R.branches[rng.index(R.branches.size())], x);
                Point y = x;
                bool alive = true;
                for (const Relation* rel : {&R, &S, &T}) {
                    bool hopped = false;
                    for (const auto& br : rel->branches)
                        if (br.admits(y, 1e-9)) {
                            y = br.map(y);
                            hopped = true;
                            break;
                        }
                    if (!hopped) {
                        alive = false;
                        break;
                    }
                }
                if (alive) w = y;
            }
            CHECK(member(left, x, w, 1e-9) == member(right, x, w, 1e-9));
        }
    }
}

TEST_CASE("non-affine maps defer their guard composition to membership time") {
    Box src = make_mode_box({{0.0, 1.0}});
    Box mid = make_mode_box({{-1.0, 1.0}});
    Box tgt = make_mode_box({{-9.0, 9.0}});

    // R pins 0.5 and maps through tanh(2x): no exact pullback is possible
    Branch rbr{make_guard(src, {{0.5, 0.5}}),
               make_expr_fn(src, mid, {"x"}, {"tanh(2*x)"}), {}};
    Relation R = make_relation(src, mid, {rbr});

    const double hit = std::tanh(1.0);
    Branch s_hit{make_guard(mid, {{hit, hit}}), make_expr_fn(mid, tgt, {"y"}, {"3*y"}), {}};
    Branch s_miss{make_guard(mid, {{-0.9, -0.9}}), make_expr_fn(mid, tgt, {"y"}, {"y"}), {}};
    Relation S = make_relation(mid, tgt, {s_hit, s_miss});

    Relation SR = compose(S, R);
    // the reachable branch survives with a deferred predicate, the
    // unreachable one is pruned by interval propagation on tanh(2*{0.5})
    REQUIRE(SR.branches.size() == 1);
    CHECK_FALSE(SR.branches[0].constraints.empty());

    CHECK(member(SR, Point({0.5}), Point({3 * hit}), 1e-9));
    CHECK_FALSE(member(SR, Point({0.5}), Point({hit}), 1e-9));   // wrong image
    CHECK_FALSE(member(SR, Point({0.3}), Point({3 * hit}), 1e-9));  // guard not met

    // lifting the deferred predicate through a product keeps it meaningful
    Relation idr = identity_rel(src);
    Relation prod = rel_product(SR, idr);
    CHECK(member(prod, Point({0.5, 0.25}), Point({3 * hit, 0.25}), 1e-9));
    CHECK_FALSE(member(prod, Point({0.5, 0.25}), Point({hit, 0.25}), 1e-9));
}

TEST_CASE("composition members have constructive witnesses") {
    Sampler rng(41);
    Box A = make_mode_box({{0.0, 1.0}});
    Box B = make_mode_box({{-3.0, 3.0}});
    Box C = make_mode_box({{-5.0, 5.0}});
    for (int trial = 0; trial < 8; ++trial) {
        Relation R = random_relation(rng, A, B);
        Relation S = random_relation(rng, B, C);
        Relation SR = compose(S, R);
        for (int k = 0; k < 25; ++k) {
            Point x = A.sample(rng);
            for (const auto& br : R.branches) {
                if (!br.admits(x, 1e-9)) continue;
                Point y = br.map(x);
                for (const auto& bs : S.branches) {
                    if (!bs.admits(y, 1e-9)) continue;
                    Point z = bs.map(y);
                    CHECK(member(SR, x, z, 1e-9));
                    CHECK(member(R, x, y, 1e-9));
                    CHECK(member(S, y, z, 1e-9));
                }
            }
        }
    }
}
