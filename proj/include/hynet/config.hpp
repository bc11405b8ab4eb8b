#pragma once

// The config document: one JSON format declaring phase spaces, vector
// fields, phase-space maps, submersions, open systems, networks, network
// maps and simulation settings. Loading resolves every cross-reference and
// builds the object graph; validate_all runs the per-object validators.
// Corpus demos export to this format, and exported documents reload to
// equivalent objects (product constructions are rebuilt deterministically
// from their factors, so generated mode/arrow names round-trip).
//
// See docs/grammar.md for the format reference.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hynet/corpus.hpp"
#include "hynet/network.hpp"
#include "hynet/simulate.hpp"
#include "hynet/trace.hpp"

namespace hynet {

/// A structural config problem: bad reference, malformed expression, shape
/// mismatch. Carries the config path of the offending entry.
struct ConfigError : std::runtime_error {
    std::string where;

    ConfigError(std::string where_, const std::string& what_)
        : std::runtime_error(where_ + ": " + what_), where(std::move(where_)) {}
};

struct SystemDef {
    std::string space;
    HybridDynamicalSystem hds;
};

struct MapDef {
    std::string from, to;
    std::string source_system, target_system;  // optional: names in `systems`
    HyPhMap map;
};

struct SubmersionDef {
    std::string tot, st;
    HybridSubmersion sub;
};

struct OpenSystemDef {
    std::string on;  // submersion name
    OpenSystem sys;
};

struct NetworkDef {
    Network net;
    std::map<std::string, std::string> system_names;  // node -> opensystem name
};

struct NetworkMapDef {
    std::string from, to;
    NetworkMap map;
};

struct ConfigDocument {
    double tolerance = 1e-9;
    std::vector<std::string> space_order;
    std::map<std::string, HybridPhaseSpace> spaces;
    std::vector<std::string> system_order;
    std::map<std::string, SystemDef> systems;
    std::vector<std::string> map_order;
    std::map<std::string, MapDef> maps;
    std::vector<std::string> submersion_order;
    std::map<std::string, SubmersionDef> submersions;
    std::vector<std::string> opensystem_order;
    std::map<std::string, OpenSystemDef> opensystems;
    std::vector<std::string> network_order;
    std::map<std::string, NetworkDef> networks;
    std::vector<std::string> networkmap_order;
    std::map<std::string, NetworkMapDef> networkmaps;
    SimConfig sim;
    JumpPolicy policy;
};

namespace cfg_detail {

inline double interval_bound(const ordered_json& j, bool lo, const std::string& where) {
    if (j.is_null()) return lo ? -kInf : kInf;
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ConfigError(where, "interval bound must be a number, null, or \"±inf\"");
}

inline Box parse_box(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where, "box must be an array of [lo, hi] pairs");
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& iv = j[i];
        if (!iv.is_array() || iv.size() != 2)
            throw ConfigError(where, "box entry " + std::to_string(i) + " must be [lo, hi]");
        ivs.push_back({interval_bound(iv[0], true, where), interval_bound(iv[1], false, where)});
    }
    try {
        return make_mode_box(std::move(ivs));
    } catch (const std::exception& e) {
        throw ConfigError(where, e.what());
    }
}

inline std::vector<std::string> mode_coords(const ordered_json& jmode, std::size_t dim,
                                            const std::string& where) {
    if (!jmode.contains("coords")) return positional_names(dim);
    std::vector<std::string> names = jmode["coords"].get<std::vector<std::string>>();
    if (names.size() != dim) throw ConfigError(where, "coords list does not match box dimension");
    return names;
}

inline ExprPtr parse_expr_at(const std::string& src, const std::string& where) {
    try {
        return parse(src);
    } catch (const ParseError& e) {
        throw ConfigError(where, e.what());
    }
}

inline SmoothFn expr_fn_at(const Box& dom, const Box& cod, const std::vector<std::string>& names,
                           const std::vector<std::string>& sources, const std::string& where) {
    std::vector<ExprPtr> exprs;
    for (std::size_t i = 0; i < sources.size(); ++i)
        exprs.push_back(parse_expr_at(sources[i], where + "[" + std::to_string(i) + "]"));
    try {
        return make_expr_fn_ast(dom, cod, names, exprs);
    } catch (const std::exception& e) {
        throw ConfigError(where, e.what());
    }
}

inline void check_identifier(const std::string& id, const std::string& where) {
    if (id.empty()) throw ConfigError(where, "empty identifier");
    if (id.find(':') != std::string::npos)
        throw ConfigError(where, "identifier '" + id + "' may not contain ':'");
}

inline HybridPhaseSpace parse_space(const std::string& name, const ordered_json& j,
                                    std::map<std::string, std::vector<std::string>>& coords_out) {
    std::string where = "spaces." + name;
    HybridPhaseSpace sp;
    if (!j.contains("modes") || !j["modes"].is_object() || j["modes"].empty())
        throw ConfigError(where, "a space needs at least one mode");
    for (const auto& [mid, jm] : j["modes"].items()) {
        check_identifier(mid, where + ".modes");
        Box b = parse_box(jm.contains("box") ? jm["box"] : ordered_json::array(),
                          where + ".modes." + mid + ".box");
        coords_out[mid] = mode_coords(jm, b.dim(), where + ".modes." + mid);
        sp.add_mode(mid, std::move(b));
    }
    if (!j.contains("arrows")) return sp;
    for (const auto& [aid, ja] : j["arrows"].items()) {
        std::string aw = where + ".arrows." + aid;
        std::string from = ja.value("from", std::string{});
        std::string to = ja.value("to", std::string{});
        if (!sp.modes.count(from) || !sp.modes.count(to))
            throw ConfigError(aw, "unknown endpoint mode");
        const Box& src = sp.mode_box(from);
        const Box& tgt = sp.mode_box(to);
        const auto& names = coords_out.at(from);

        std::vector<ordered_json> branch_list;
        if (ja.contains("branches"))
            for (const auto& b : ja["branches"]) branch_list.push_back(b);
        else
            branch_list.push_back(ja);  // single-branch shorthand: guard/reset inline

        std::vector<Branch> branches;
        for (std::size_t bi = 0; bi < branch_list.size(); ++bi) {
            const auto& jb = branch_list[bi];
            std::string bw = aw + ".branches[" + std::to_string(bi) + "]";
            std::vector<Interval> sub = src.ivs;
            if (jb.contains("guard")) {
                for (const auto& [cname, jv] : jb["guard"].items()) {
                    std::size_t ci = names.size();
                    for (std::size_t k = 0; k < names.size(); ++k)
                        if (names[k] == cname) ci = k;
                    if (ci == names.size())
                        throw ConfigError(bw, "guard names unknown coordinate '" + cname + "'");
                    if (jv.is_number()) {
                        double v = jv.get<double>();
                        sub[ci] = {v, v};
                    } else if (jv.is_array() && jv.size() == 2) {
                        sub[ci] = {interval_bound(jv[0], true, bw), interval_bound(jv[1], false, bw)};
                    } else {
                        throw ConfigError(bw, "guard entries are a pin value or [lo, hi]");
                    }
                }
            }
            Guard g;
            try {
                g = make_guard(src, std::move(sub));
            } catch (const std::exception& e) {
                throw ConfigError(bw + ".guard", e.what());
            }
            if (!jb.contains("reset")) throw ConfigError(bw, "missing reset expression list");
            std::vector<std::string> reset = jb["reset"].get<std::vector<std::string>>();
            if (reset.size() != tgt.dim())
                throw ConfigError(bw + ".reset", "one expression per target coordinate required");
            SmoothFn map = expr_fn_at(src, tgt, names, reset, bw + ".reset");
            branches.push_back(Branch{std::move(g), std::move(map), {}});
        }
        sp.add_arrow(aid, from, to, make_relation(src, tgt, std::move(branches)));
    }
    return sp;
}

/// Shared table form of a phase-space map: modes, arrows->paths, comps.
inline HyPhMap parse_phmap(const ordered_json& j, const HybridPhaseSpace& from,
                           const HybridPhaseSpace& to,
                           const std::map<std::string, std::vector<std::string>>& from_coords,
                           const std::string& where) {
    HyPhMap f;
    if (!j.contains("modes")) throw ConfigError(where, "missing modes table");
    for (const auto& [m, jm] : j["modes"].items()) {
        if (!from.modes.count(m)) throw ConfigError(where, "unknown source mode '" + m + "'");
        std::string img = jm.get<std::string>();
        if (!to.modes.count(img)) throw ConfigError(where, "unknown target mode '" + img + "'");
        f.obj[m] = img;
    }
    if (j.contains("arrows")) {
        for (const auto& [g, jp] : j["arrows"].items()) {
            if (!from.arrows.count(g)) throw ConfigError(where, "unknown source arrow '" + g + "'");
            const Arrow& ar = from.arrows.at(g);
            Path p;
            p.src = f.obj.count(ar.src) ? f.obj.at(ar.src) : ar.src;
            p.dst = f.obj.count(ar.dst) ? f.obj.at(ar.dst) : ar.dst;
            p.arrows = jp.get<std::vector<std::string>>();
            for (const auto& step : p.arrows)
                if (!to.arrows.count(step))
                    throw ConfigError(where, "path uses unknown arrow '" + step + "'");
            f.arr[g] = std::move(p);
        }
    }
    if (!j.contains("comps")) throw ConfigError(where, "missing comps table");
    for (const auto& [m, jc] : j["comps"].items()) {
        if (!from.modes.count(m) || !f.obj.count(m))
            throw ConfigError(where + ".comps", "component for unmapped mode '" + m + "'");
        const Box& dom = from.mode_box(m);
        const Box& cod = to.mode_box(f.obj.at(m));
        auto names_it = from_coords.find(m);
        std::vector<std::string> names =
            names_it != from_coords.end() ? names_it->second : positional_names(dom.dim());
        std::vector<std::string> rows = jc.get<std::vector<std::string>>();
        f.comps.emplace(m, expr_fn_at(dom, cod, names, rows, where + ".comps." + m));
    }
    return f;
}

} // namespace cfg_detail

class ConfigRegistry;

/// Loads a parsed JSON document, building every declared object. Throws
/// ConfigError on structural problems.
inline ConfigDocument load_config_json(const ordered_json& root) {
    ConfigDocument doc;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> coords;

    doc.tolerance = global_tol();
    if (root.contains("tolerance")) doc.tolerance = root["tolerance"].get<double>();

    if (root.contains("spaces"))
        for (const auto& [name, j] : root["spaces"].items()) {
            doc.space_order.push_back(name);
            doc.spaces.emplace(name, cfg_detail::parse_space(name, j, coords[name]));
        }

    auto space_of = [&](const std::string& name, const std::string& where) -> HybridPhaseSpace& {
        auto it = doc.spaces.find(name);
        if (it == doc.spaces.end()) throw ConfigError(where, "unknown space '" + name + "'");
        return it->second;
    };

    if (root.contains("systems"))
        for (const auto& [name, j] : root["systems"].items()) {
            std::string where = "systems." + name;
            std::string sname = j.value("space", std::string{});
            HybridPhaseSpace& sp = space_of(sname, where);
            if (!j.contains("field")) throw ConfigError(where, "missing field table");
            VectorField X;
            for (const auto& [m, jf] : j["field"].items()) {
                if (!sp.modes.count(m)) throw ConfigError(where, "field at unknown mode '" + m + "'");
                const Box& b = sp.mode_box(m);
                auto names = coords[sname].count(m) ? coords[sname][m] : positional_names(b.dim());
                std::vector<std::string> rows = jf.get<std::vector<std::string>>();
                if (rows.size() != b.dim())
                    throw ConfigError(where + ".field." + m, "one expression per coordinate");
                X.by_mode.emplace(m, cfg_detail::expr_fn_at(b, real_box(b.dim()), names, rows,
                                                            where + ".field." + m));
            }
            try {
                doc.system_order.push_back(name);
                doc.systems.emplace(name, SystemDef{sname, make_hds(sp, std::move(X))});
            } catch (const std::exception& e) {
                throw ConfigError(where, e.what());
            }
        }

    if (root.contains("maps"))
        for (const auto& [name, j] : root["maps"].items()) {
            std::string where = "maps." + name;
            MapDef def;
            def.from = j.value("from", std::string{});
            def.to = j.value("to", std::string{});
            def.source_system = j.value("source_system", std::string{});
            def.target_system = j.value("target_system", std::string{});
            const HybridPhaseSpace& from = space_of(def.from, where);
            const HybridPhaseSpace& to = space_of(def.to, where);
            def.map = cfg_detail::parse_phmap(j, from, to, coords[def.from], where);
            doc.map_order.push_back(name);
            doc.maps.emplace(name, std::move(def));
        }

    if (root.contains("submersions"))
        for (const auto& [name, j] : root["submersions"].items()) {
            std::string where = "submersions." + name;
            SubmersionDef def;
            def.tot = j.value("tot", std::string{});
            def.st = j.value("st", std::string{});
            const HybridPhaseSpace& tot = space_of(def.tot, where);
            const HybridPhaseSpace& st = space_of(def.st, where);
            HyPhMap p;
            if (!j.contains("modes")) throw ConfigError(where, "missing modes table");
            for (const auto& [m, jm] : j["modes"].items()) {
                if (!tot.modes.count(m)) throw ConfigError(where, "unknown total mode '" + m + "'");
                std::string img = jm.get<std::string>();
                if (!st.modes.count(img)) throw ConfigError(where, "unknown state mode '" + img + "'");
                p.obj[m] = img;
            }
            if (!j.contains("coords")) throw ConfigError(where, "missing coords table");
            for (const auto& [m, jc] : j["coords"].items()) {
                if (!p.obj.count(m)) throw ConfigError(where, "coords for unmapped mode '" + m + "'");
                std::vector<std::size_t> sel = jc.get<std::vector<std::size_t>>();
                try {
                    p.comps.emplace(m, make_projection_fn(tot.mode_box(m), sel));
                } catch (const std::exception& e) {
                    throw ConfigError(where + ".coords." + m, e.what());
                }
            }
            if (j.contains("arrows"))
                for (const auto& [g, jp] : j["arrows"].items()) {
                    if (!tot.arrows.count(g))
                        throw ConfigError(where, "unknown total arrow '" + g + "'");
                    const Arrow& ar = tot.arrows.at(g);
                    Path path;
                    path.src = p.obj.count(ar.src) ? p.obj.at(ar.src) : ar.src;
                    path.dst = p.obj.count(ar.dst) ? p.obj.at(ar.dst) : ar.dst;
                    path.arrows = jp.get<std::vector<std::string>>();
                    for (const auto& step : path.arrows)
                        if (!st.arrows.count(step))
                            throw ConfigError(where, "path uses unknown arrow '" + step + "'");
                    p.arr[g] = std::move(path);
                }
            def.sub = HybridSubmersion{tot, st, std::move(p)};
            doc.submersion_order.push_back(name);
            doc.submersions.emplace(name, std::move(def));
        }

    auto submersion_of = [&](const std::string& name, const std::string& where)
        -> const HybridSubmersion& {
        auto it = doc.submersions.find(name);
        if (it == doc.submersions.end())
            throw ConfigError(where, "unknown submersion '" + name + "'");
        return it->second.sub;
    };

    if (root.contains("opensystems"))
        for (const auto& [name, j] : root["opensystems"].items()) {
            std::string where = "opensystems." + name;
            OpenSystemDef def;
            def.on = j.value("on", std::string{});
            const HybridSubmersion& sub = submersion_of(def.on, where);
            def.sys.sub = sub;
            if (!j.contains("fiber")) throw ConfigError(where, "missing fiber table");
            for (const auto& [m, jf] : j["fiber"].items()) {
                if (!sub.tot.modes.count(m))
                    throw ConfigError(where, "fiber at unknown mode '" + m + "'");
                const Box& dom = sub.tot.mode_box(m);
                std::size_t out = sub.st.mode_box(sub.p.obj_at(m)).dim();
                std::vector<std::string> rows = jf.get<std::vector<std::string>>();
                if (rows.size() != out)
                    throw ConfigError(where + ".fiber." + m, "one expression per state coordinate");
                auto names = coords[def.on].count(m) ? coords[def.on][m]
                                                     : positional_names(dom.dim());
                def.sys.fiber.emplace(m, cfg_detail::expr_fn_at(dom, real_box(out), names, rows,
                                                                where + ".fiber." + m));
            }
            doc.opensystem_order.push_back(name);
            doc.opensystems.emplace(name, std::move(def));
        }

    if (root.contains("networks"))
        for (const auto& [name, j] : root["networks"].items()) {
            std::string where = "networks." + name;
            NetworkDef def;
            if (!j.contains("nodes")) throw ConfigError(where, "missing nodes table");
            for (const auto& [x, jn] : j["nodes"].items()) {
                def.net.index.push_back(x);
                def.net.nodes.emplace(x, submersion_of(jn.get<std::string>(), where));
            }
            if (j.contains("order")) def.net.index = j["order"].get<std::vector<std::string>>();
            def.net.base = submersion_of(j.value("base", std::string{}), where);
            if (!j.contains("psi")) throw ConfigError(where, "missing psi");
            HybridSubmersion prod = def.net.product();
            std::map<std::string, std::vector<std::string>> no_coords;
            HyPhMap tot = cfg_detail::parse_phmap(j["psi"]["tot"], def.net.base.tot, prod.tot,
                                                  no_coords, where + ".psi.tot");
            if (j["psi"].contains("st") && j["psi"]["st"].is_object()) {
                HyPhMap st = cfg_detail::parse_phmap(j["psi"]["st"]["map"], def.net.base.st,
                                                     prod.st, no_coords, where + ".psi.st");
                std::map<ModeId, SmoothFn> inv;
                for (const auto& [m, je] : j["psi"]["st"]["inverse"].items()) {
                    const Box& dom = prod.st.mode_box(st.obj_at(m));
                    const Box& cod = def.net.base.st.mode_box(m);
                    inv.emplace(st.obj_at(m),
                                cfg_detail::expr_fn_at(dom, cod, positional_names(dom.dim()),
                                                       je.get<std::vector<std::string>>(),
                                                       where + ".psi.st.inverse." + m));
                }
                def.net.psi = make_interconnection(SubmersionMorphism{tot, st}, std::move(inv));
            } else {
                HyPhMap st = identity_map(def.net.base.st);
                def.net.psi = make_interconnection(SubmersionMorphism{tot, std::move(st)});
            }
            if (j.contains("systems"))
                for (const auto& [x, js] : j["systems"].items()) {
                    std::string sys = js.get<std::string>();
                    if (!doc.opensystems.count(sys))
                        throw ConfigError(where, "unknown open system '" + sys + "'");
                    if (!j["nodes"].contains(x))
                        throw ConfigError(where, "system assigned to unknown node '" + x + "'");
                    std::string node_sub = j["nodes"][x].get<std::string>();
                    if (doc.opensystems.at(sys).on != node_sub)
                        throw ConfigError(where, "open system '" + sys + "' lives on '" +
                                                     doc.opensystems.at(sys).on +
                                                     "', not on node '" + x + "' (" + node_sub + ")");
                    def.system_names[x] = sys;
                }
            doc.network_order.push_back(name);
            doc.networks.emplace(name, std::move(def));
        }

    if (root.contains("networkmaps"))
        for (const auto& [name, j] : root["networkmaps"].items()) {
            std::string where = "networkmaps." + name;
            NetworkMapDef def;
            def.from = j.value("from", std::string{});
            def.to = j.value("to", std::string{});
            if (!doc.networks.count(def.from) || !doc.networks.count(def.to))
                throw ConfigError(where, "unknown source or target network");
            const Network& src = doc.networks.at(def.from).net;
            const Network& dst = doc.networks.at(def.to).net;
            for (const auto& [x, jy] : j["phi"].items()) def.map.phi[x] = jy.get<std::string>();
            std::map<std::string, std::vector<std::string>> no_coords;
            for (const auto& [x, jm] : j["Phi"].items()) {
                const HybridSubmersion& a = dst.node(def.map.phi.at(x));
                const HybridSubmersion& b = src.node(x);
                HyPhMap tot = cfg_detail::parse_phmap(jm["tot"], a.tot, b.tot, no_coords,
                                                      where + ".Phi." + x + ".tot");
                HyPhMap st = cfg_detail::parse_phmap(jm["st"], a.st, b.st, no_coords,
                                                     where + ".Phi." + x + ".st");
                def.map.Phi.emplace(x, SubmersionMorphism{std::move(tot), std::move(st)});
            }
            if (!j.contains("f")) throw ConfigError(where, "missing base morphism f");
            def.map.f = SubmersionMorphism{
                cfg_detail::parse_phmap(j["f"]["tot"], dst.base.tot, src.base.tot, no_coords,
                                        where + ".f.tot"),
                cfg_detail::parse_phmap(j["f"]["st"], dst.base.st, src.base.st, no_coords,
                                        where + ".f.st")};
            doc.networkmap_order.push_back(name);
            doc.networkmaps.emplace(name, std::move(def));
        }

    if (root.contains("simulation")) {
        const auto& js = root["simulation"];
        doc.sim.step = js.value("step", doc.sim.step);
        doc.sim.t_max = js.value("t_max", doc.sim.t_max);
        doc.sim.max_jumps = js.value("max_jumps", doc.sim.max_jumps);
        doc.sim.event_tol = js.value("event_tol", doc.sim.event_tol);
        doc.sim.chain_depth = js.value("chain_depth", doc.sim.chain_depth);
        std::string integ = js.value("integrator", std::string{"rk4"});
        if (integ == "rk4")
            doc.sim.integrator = IntegratorKind::rk4;
        else if (integ == "euler")
            doc.sim.integrator = IntegratorKind::euler;
        else
            throw ConfigError("simulation.integrator", "must be rk4 or euler");
        std::string pol = js.value("policy", std::string{"priority"});
        if (pol == "priority")
            doc.policy.kind = PolicyKind::priority;
        else if (pol == "first-enabled")
            doc.policy.kind = PolicyKind::first_enabled;
        else if (pol == "seeded-random" || pol == "random")
            doc.policy.kind = PolicyKind::seeded_random;
        else
            throw ConfigError("simulation.policy", "must be priority, first-enabled, or seeded-random");
        doc.policy.seed = js.value("seed", std::uint64_t{0});
    }
    return doc;
}

inline ConfigDocument load_config_text(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("json", e.what());
    }
    return load_config_json(root);
}

/// Runs every structural and sampled semantic validator over a document.
inline Report validate_all(const ConfigDocument& doc, std::size_t nsamples = 8,
                           double tol = 1e-7) {
    Report rep;
    Sampler rng(4242);
    for (const auto& name : doc.space_order) {
        const HybridPhaseSpace& sp = doc.spaces.at(name);
        for (const auto& gid : sp.arrow_order) {
            const Arrow& ar = sp.arrows.at(gid);
            const Box& tgt = sp.mode_box(ar.dst);
            for (const auto& br : ar.rel.branches)
                for (const auto& x : sample_branch(br, nsamples, rng, tol)) {
                    Point y = br.map(x);
                    if (!tgt.contains(y, doc.tolerance * 10 + tol))
                        rep.fail("spaces." + name + ".arrows." + gid +
                                 ": reset lands outside the target box");
                }
        }
    }
    for (const auto& name : doc.map_order) {
        const MapDef& def = doc.maps.at(name);
        rep.merge(validate_map(def.map, doc.spaces.at(def.from), doc.spaces.at(def.to), nsamples,
                               tol),
                  "maps." + name + ": ");
    }
    for (const auto& name : doc.submersion_order)
        rep.merge(validate_submersion(doc.submersions.at(name).sub, nsamples),
                  "submersions." + name + ": ");
    for (const auto& name : doc.opensystem_order)
        rep.merge(crl_check(doc.opensystems.at(name).sys, nsamples, tol),
                  "opensystems." + name + ": ");
    for (const auto& name : doc.network_order)
        rep.merge(validate_network(doc.networks.at(name).net, nsamples, tol),
                  "networks." + name + ": ");
    for (const auto& name : doc.networkmap_order) {
        const NetworkMapDef& def = doc.networkmaps.at(name);
        rep.merge(validate_network_map(def.map, doc.networks.at(def.from).net,
                                       doc.networks.at(def.to).net, nsamples, tol),
                  "networkmaps." + name + ": ");
    }
    return rep;
}

// --------------------------------------------------------------------------
// Export: object graphs back to the config format.

namespace cfg_detail {

inline ordered_json dump_box(const Box& b) {
    ordered_json out = ordered_json::array();
    for (const auto& iv : b.ivs) {
        ordered_json pair = ordered_json::array();
        if (std::isfinite(iv.lo))
            pair.push_back(iv.lo);
        else
            pair.push_back(nullptr);
        if (std::isfinite(iv.hi))
            pair.push_back(iv.hi);
        else
            pair.push_back(nullptr);
        out.push_back(std::move(pair));
    }
    return out;
}

inline std::string dump_expr(const ExprPtr& e, std::size_t dim) {
    return print(detail::shift_and_rename(e, 0, positional_names(dim)));
}

inline ordered_json dump_fn_exprs(const SmoothFn& f, const std::string& what) {
    if (!f.expr_backed())
        throw std::invalid_argument(what + ": only expression-backed maps can be exported");
    ordered_json rows = ordered_json::array();
    for (const auto& e : f.exprs) rows.push_back(dump_expr(e, f.dom.dim()));
    return rows;
}

inline ordered_json dump_space(const HybridPhaseSpace& sp) {
    ordered_json j;
    ordered_json modes;
    for (const auto& m : sp.mode_order) {
        ordered_json jm;
        jm["box"] = dump_box(sp.mode_box(m));
        modes[m] = std::move(jm);
    }
    j["modes"] = std::move(modes);
    if (!sp.arrow_order.empty()) {
        ordered_json arrows;
        for (const auto& g : sp.arrow_order) {
            const Arrow& ar = sp.arrows.at(g);
            ordered_json ja;
            ja["from"] = ar.src;
            ja["to"] = ar.dst;
            ordered_json branches = ordered_json::array();
            for (const auto& br : ar.rel.branches) {
                if (!br.constraints.empty())
                    throw std::invalid_argument("arrow '" + g +
                                                "': relations with deferred constraints cannot be exported");
                ordered_json jb;
                ordered_json guard;
                const Box& src = ar.rel.source;
                auto names = positional_names(src.dim());
                for (std::size_t i = 0; i < br.guard.dim(); ++i) {
                    const Interval& sub = br.guard.sub[i];
                    const Interval& full = src.ivs[i];
                    if (sub.lo == full.lo && sub.hi == full.hi) continue;
                    if (sub.degenerate())
                        guard[names[i]] = sub.lo;
                    else {
                        ordered_json pair = ordered_json::array();
                        pair.push_back(std::isfinite(sub.lo) ? ordered_json(sub.lo) : ordered_json(nullptr));
                        pair.push_back(std::isfinite(sub.hi) ? ordered_json(sub.hi) : ordered_json(nullptr));
                        guard[names[i]] = std::move(pair);
                    }
                }
                if (!guard.empty()) jb["guard"] = std::move(guard);
                jb["reset"] = dump_fn_exprs(br.map, "arrow '" + g + "' reset");
                branches.push_back(std::move(jb));
            }
            ja["branches"] = std::move(branches);
            arrows[g] = std::move(ja);
        }
        j["arrows"] = std::move(arrows);
    }
    return j;
}

inline ordered_json dump_phmap(const HyPhMap& f, const HybridPhaseSpace& from) {
    ordered_json j;
    ordered_json modes;
    for (const auto& m : from.mode_order) modes[m] = f.obj_at(m);
    j["modes"] = std::move(modes);
    if (!from.arrow_order.empty()) {
        ordered_json arrows;
        for (const auto& g : from.arrow_order) arrows[g] = f.arr_at(g).arrows;
        j["arrows"] = std::move(arrows);
    }
    ordered_json comps;
    for (const auto& m : from.mode_order)
        comps[m] = dump_fn_exprs(f.comp(m), "component at '" + m + "'");
    j["comps"] = std::move(comps);
    return j;
}

inline ordered_json dump_submersion(const HybridSubmersion& s, const std::string& tot_name,
                                    const std::string& st_name) {
    ordered_json j;
    j["tot"] = tot_name;
    j["st"] = st_name;
    ordered_json modes, coords;
    for (const auto& m : s.tot.mode_order) {
        modes[m] = s.p.obj_at(m);
        auto idx = projection_indices(s.p.comp(m));
        if (!idx) throw std::invalid_argument("submersion component at '" + m + "' is not a projection");
        coords[m] = *idx;
    }
    j["modes"] = std::move(modes);
    j["coords"] = std::move(coords);
    if (!s.tot.arrow_order.empty()) {
        ordered_json arrows;
        for (const auto& g : s.tot.arrow_order) arrows[g] = s.p.arr_at(g).arrows;
        j["arrows"] = std::move(arrows);
    }
    return j;
}

} // namespace cfg_detail

/// Serializes a corpus demo to the config format.
inline ordered_json export_demo(const corpus::DemoBundle& d) {
    using cfg_detail::dump_phmap;
    using cfg_detail::dump_space;
    using cfg_detail::dump_submersion;
    ordered_json root;
    root["schema"] = "hynet-config/1";

    ordered_json spaces, systems, maps, submersions, opensystems, networks, networkmaps;

    if (d.name == "thermostat" || d.name == "two-rooms") {
        spaces["m"] = dump_space(d.system->space);
        ordered_json sys;
        sys["space"] = "m";
        ordered_json field;
        for (const auto& m : d.system->space.mode_order)
            field[m] = cfg_detail::dump_fn_exprs(d.system->field.at(m), "field");
        sys["field"] = std::move(field);
        systems[d.name] = std::move(sys);

        ordered_json jm = dump_phmap(identity_map(d.system->space), d.system->space);
        ordered_json entry;
        entry["from"] = "m";
        entry["to"] = "m";
        entry["source_system"] = d.name;
        entry["target_system"] = d.name;
        entry.update(jm);
        maps["identity"] = std::move(entry);
    }

    auto dump_network = [&](const Network& net, const std::map<std::string, OpenSystem>& node_sys,
                            const std::string& net_name, const std::string& prefix) {
        // name and emit the constituent spaces once each
        std::map<const HybridPhaseSpace*, std::string> names;
        std::vector<std::pair<std::string, const HybridPhaseSpace*>> order;
        auto intern = [&](const HybridPhaseSpace& sp, const std::string& suggested) {
            for (auto& [name, ptr] : order)
                if (ptr->mode_order == sp.mode_order && ptr->arrow_order == sp.arrow_order) {
                    bool same = true;
                    for (const auto& m : sp.mode_order)
                        same = same && boxes_equal(ptr->mode_box(m), sp.mode_box(m));
                    if (same) return name;
                }
            std::string name = prefix + suggested;
            order.emplace_back(name, &sp);
            spaces[name] = dump_space(sp);
            return name;
        };
        auto same_submersion = [](const HybridSubmersion& a, const HybridSubmersion& b) {
            if (a.tot.mode_order != b.tot.mode_order || a.tot.arrow_order != b.tot.arrow_order)
                return false;
            if (a.st.mode_order != b.st.mode_order || a.st.arrow_order != b.st.arrow_order)
                return false;
            if (a.p.obj != b.p.obj) return false;
            for (const auto& [g, p] : a.p.arr) {
                auto it = b.p.arr.find(g);
                if (it == b.p.arr.end() || it->second.arrows != p.arrows) return false;
            }
            return true;
        };
        std::map<std::string, std::string> sub_names;
        int k = 0;
        for (const auto& x : net.index) {
            const HybridSubmersion& s = net.node(x);
            std::string tn = intern(s.tot, "node_tot" + std::to_string(k));
            std::string sn = intern(s.st, "node_st" + std::to_string(k));
            std::string subname = prefix + "node" + std::to_string(k);
            bool shared = false;
            for (const auto& [x2, nm] : sub_names)
                if (same_submersion(net.node(x2), s)) {
                    sub_names[x] = nm;
                    shared = true;
                    break;
                }
            if (!shared) {
                submersions[subname] = dump_submersion(s, tn, sn);
                sub_names[x] = subname;
            }
            ++k;
        }
        std::string base_tot = intern(net.base.tot, "base_tot");
        std::string base_st = intern(net.base.st, "base_st");
        std::string base_name = prefix + "base";
        submersions[base_name] = dump_submersion(net.base, base_tot, base_st);

        ordered_json jn;
        ordered_json nodes;
        for (const auto& x : net.index) nodes[x] = sub_names.at(x);
        jn["nodes"] = std::move(nodes);
        jn["order"] = net.index;
        jn["base"] = base_name;
        ordered_json psi;
        psi["tot"] = dump_phmap(net.psi.mor.tot, net.base.tot);
        if (net.psi.st_identity)
            psi["st"] = "identity";
        else
            throw std::invalid_argument("export of non-identity state interconnections is not supported");
        jn["psi"] = std::move(psi);
        if (!node_sys.empty()) {
            ordered_json jsys;
            for (const auto& x : net.index) {
                auto it = node_sys.find(x);
                if (it == node_sys.end()) continue;
                std::string osname = prefix + "w_" + x;
                ordered_json jo;
                jo["on"] = sub_names.at(x);
                ordered_json fiber;
                for (const auto& m : it->second.sub.tot.mode_order)
                    fiber[m] = cfg_detail::dump_fn_exprs(it->second.fiber_at(m), "fiber");
                jo["fiber"] = std::move(fiber);
                opensystems[osname] = std::move(jo);
                jsys[x] = osname;
            }
            jn["systems"] = std::move(jsys);
        }
        networks[net_name] = std::move(jn);
        return sub_names;
    };

    if (d.network && !d.map) {
        dump_network(*d.network, d.node_systems, d.name, "");
    }
    if (d.map) {
        dump_network(*d.network, d.node_systems, "three-node-network", "src_");
        dump_network(*d.dst_network, d.dst_node_systems, "single-node-loop", "dst_");
        ordered_json jm;
        jm["from"] = "three-node-network";
        jm["to"] = "single-node-loop";
        ordered_json phi;
        for (const auto& x : d.network->index) phi[x] = d.map->phi_at(x);
        jm["phi"] = std::move(phi);
        ordered_json Phi;
        for (const auto& x : d.network->index) {
            const SubmersionMorphism& mor = d.map->Phi_at(x);
            const HybridSubmersion& a = d.dst_network->node(d.map->phi_at(x));
            ordered_json jx;
            jx["tot"] = dump_phmap(mor.tot, a.tot);
            jx["st"] = dump_phmap(mor.st, a.st);
            Phi[x] = std::move(jx);
        }
        jm["Phi"] = std::move(Phi);
        ordered_json jf;
        jf["tot"] = dump_phmap(d.map->f.tot, d.dst_network->base.tot);
        jf["st"] = dump_phmap(d.map->f.st, d.dst_network->base.st);
        jm["f"] = std::move(jf);
        networkmaps[d.name] = std::move(jm);
    }

    if (!spaces.empty()) root["spaces"] = std::move(spaces);
    if (!systems.empty()) root["systems"] = std::move(systems);
    if (!maps.empty()) root["maps"] = std::move(maps);
    if (!submersions.empty()) root["submersions"] = std::move(submersions);
    if (!opensystems.empty()) root["opensystems"] = std::move(opensystems);
    if (!networks.empty()) root["networks"] = std::move(networks);
    if (!networkmaps.empty()) root["networkmaps"] = std::move(networkmaps);
    ordered_json sim;
    sim["step"] = 1e-3;
    sim["t_max"] = 10.5;
    sim["max_jumps"] = 1000;
    sim["event_tol"] = 1e-9;
    sim["integrator"] = "rk4";
    sim["policy"] = "priority";
    sim["seed"] = 0;
    root["simulation"] = std::move(sim);
    return root;
}

} // namespace hynet
