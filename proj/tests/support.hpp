#pragma once

// Shared builders for the test suites. The thermostat here is the standing
// two-mode example: temperature in [0,1], cooling in mode "off" at rate -1,
// heating in mode "on" at rate +1, resets pinned at 0 and 1.

#include "hynet/hyds.hpp"

namespace hynet::testing {

inline Relation pin_identity(const Box& b, std::size_t coord, double pin) {
    std::vector<Interval> sub = b.ivs;
    sub[coord] = {pin, pin};
    Branch br{make_guard(b, sub), make_identity_fn(b), {}};
    return make_relation(b, b, {br});
}

inline HybridPhaseSpace thermostat_space() {
    Box b = make_mode_box({{0.0, 1.0}});
    HybridPhaseSpace a;
    a.add_mode("off", b);
    a.add_mode("on", b);
    a.add_arrow("f", "off", "on", pin_identity(b, 0, 0.0));
    a.add_arrow("g", "on", "off", pin_identity(b, 0, 1.0));
    return a;
}

inline HybridDynamicalSystem thermostat_hds() {
    HybridPhaseSpace a = thermostat_space();
    VectorField X;
    Box b = a.mode_box("off");
    X.by_mode.emplace("off", make_expr_fn(b, real_box(1), {"x"}, {"-1"}));
    X.by_mode.emplace("on", make_expr_fn(b, real_box(1), {"x"}, {"1"}));
    return make_hds(std::move(a), std::move(X));
}

inline Point pt(std::vector<double> v) { return Point(std::move(v)); }

/// Ordered pairs of distinct modes joined by a path of length <= 2 whose
/// composite relation is nonempty.
inline int count_connected_pairs_len2(const HybridPhaseSpace& a) {
    int count = 0;
    for (const auto& src : a.mode_order) {
        for (const auto& dst : a.mode_order) {
            if (src == dst) continue;
            bool connected = false;
            for (const auto& g1 : a.arrow_order) {
                const Arrow& ar1 = a.arrows.at(g1);
                if (ar1.src != src) continue;
                if (ar1.dst == dst && !ar1.rel.is_empty()) connected = true;
                for (const auto& g2 : a.arrow_order) {
                    const Arrow& ar2 = a.arrows.at(g2);
                    if (ar2.src != ar1.dst || ar2.dst != dst) continue;
                    if (!compose(ar2.rel, ar1.rel).is_empty()) connected = true;
                }
            }
            if (connected) ++count;
        }
    }
    return count;
}

} // namespace hynet::testing
