#pragma once

// Execution trace writers. CSV schema: `t,mode,x0..x{n-1},event` where n is
// the widest mode dimension; `event` is `flow` or `jump:ID[;ID...]`, carried
// by the first sample after the jump. The JSON schema mirrors the Execution
// structure and is versioned. Both formats are byte-stable for identical
// inputs: doubles print with round-trip precision.

#include <ostream>
#include <string>

#include <json.hpp>

#include "hynet/simulate.hpp"

namespace hynet {

using ordered_json = nlohmann::ordered_json;

inline std::string join_arrows(const std::vector<ArrowId>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ';';
        out += ids[i];
    }
    return out;
}

inline void write_trace_csv(std::ostream& os, const SimResult& r,
                            const HybridPhaseSpace& space) {
    std::size_t width = 0;
    for (const auto& m : space.mode_order) width = std::max(width, space.mode_box(m).dim());
    os << "t,mode";
    for (std::size_t i = 0; i < width; ++i) os << ",x" << i;
    os << ",event\n";
    for (std::size_t i = 0; i < r.exec.segments.size(); ++i) {
        const Segment& s = r.exec.segments[i];
        for (std::size_t k = 0; k < s.t.size(); ++k) {
            std::string event = "flow";
            if (k == 0 && i == 0 && !r.initial_jumps.empty())
                event = "jump:" + join_arrows(r.initial_jumps.arrows);
            else if (k == 0 && i > 0)
                event = "jump:" + join_arrows(r.exec.jumps[i - 1].arrows);
            os << fmt_double(s.t[k]) << ',' << r.exec.modes[i];
            for (std::size_t c = 0; c < width; ++c) {
                os << ',';
                if (c < s.p[k].dim()) os << fmt_double(s.p[k][c]);
            }
            os << ',' << event << '\n';
        }
    }
}

inline ordered_json trace_json(const SimResult& r, const std::string& system_name) {
    ordered_json j;
    j["schema"] = "hynet-trace/1";
    j["system"] = system_name;
    j["status"] = status_name(r.status);
    if (!r.message.empty()) j["message"] = r.message;
    j["initial_jumps"] = r.initial_jumps.arrows;
    j["track"] = r.exec.track.t;
    j["modes"] = r.exec.modes;
    ordered_json jumps = ordered_json::array();
    for (const auto& p : r.exec.jumps) jumps.push_back(p.arrows);
    j["jumps"] = std::move(jumps);
    ordered_json segs = ordered_json::array();
    for (const auto& s : r.exec.segments) {
        ordered_json seg;
        seg["t"] = s.t;
        ordered_json xs = ordered_json::array();
        for (const auto& p : s.p) xs.push_back(p.x);
        seg["x"] = std::move(xs);
        segs.push_back(std::move(seg));
    }
    j["segments"] = std::move(segs);
    return j;
}

inline ordered_json report_json(const Report& rep) {
    ordered_json j;
    j["ok"] = rep.ok();
    j["worst_observed"] = rep.worst_observed;
    ordered_json items = ordered_json::array();
    for (const auto& f : rep.failures) {
        ordered_json it;
        it["what"] = f.what;
        it["residual"] = f.residual;
        it["structural"] = f.structural;
        items.push_back(std::move(it));
    }
    j["failures"] = std::move(items);
    j["notes"] = rep.notes;
    return j;
}

} // namespace hynet
