// hynet: validate, simulate and verify compositional hybrid systems from
// config files. Exit codes: 0 success, 1 semantic failure, 2 parse or
// structural failure, 3 runtime failure (NaN / stuck).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hynet/config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSemantic = 1;
constexpr int kExitStructural = 2;
constexpr int kExitRuntime = 3;

struct CliError {
    int code;
    std::string message;
};

hynet::ConfigDocument load_document(const std::string& path) {
    if (path.rfind("demo:", 0) == 0) {
        std::string name = path.substr(5);
        try {
            return hynet::load_config_json(hynet::export_demo(hynet::corpus::build(name)));
        } catch (const std::invalid_argument& e) {
            throw CliError{kExitStructural, e.what()};
        }
    }
    std::ifstream in(path);
    if (!in) throw CliError{kExitStructural, "cannot open config file '" + path + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    return hynet::load_config_text(ss.str());
}

void print_report(const hynet::Report& rep, const std::string& label, bool as_json,
                  const std::string& command) {
    if (as_json) {
        hynet::ordered_json j;
        j["schema"] = "hynet-report/1";
        j["command"] = command;
        j["label"] = label;
        j.update(hynet::report_json(rep));
        std::cout << j.dump(2) << "\n";
        return;
    }
    if (rep.ok()) {
        if (rep.worst_observed > 0)
            std::printf("%s: PASS (worst residual %s)\n", label.c_str(),
                        hynet::fmt_double(rep.worst_observed).c_str());
        else
            std::printf("%s: PASS\n", label.c_str());
    } else {
        std::printf("%s: FAIL (%zu failure%s, worst residual %s)\n", label.c_str(),
                    rep.failures.size(), rep.failures.size() == 1 ? "" : "s",
                    hynet::fmt_double(rep.worst_residual()).c_str());
        for (const auto& f : rep.failures)
            std::printf("  [%s] %s\n", f.structural ? "structural" : "semantic", f.what.c_str());
    }
    for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
}

std::pair<hynet::ModeId, hynet::Point> parse_init(const std::string& arg) {
    std::size_t colon = arg.find(':');
    if (colon == std::string::npos)
        throw CliError{kExitStructural, "--init must look like MODE:c0,c1,..."};
    hynet::ModeId mode = arg.substr(0, colon);
    hynet::Point p;
    std::string rest = arg.substr(colon + 1);
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) throw CliError{kExitStructural, "bad coordinate '" + tok + "'"};
        p.x.push_back(v);
    }
    return {mode, p};
}

int run_validate(const std::string& path, bool as_json) {
    hynet::ConfigDocument doc = load_document(path);
    hynet::Report rep = hynet::validate_all(doc);
    print_report(rep, "validate " + path, as_json, "validate");
    return rep.ok() ? kExitOk : (rep.has_structural() ? kExitStructural : kExitSemantic);
}

struct SimArgs {
    std::string system, init, out, format = "csv", policy;
    std::optional<double> t_max, step, event_tol;
    std::optional<int> max_jumps;
    std::optional<std::uint64_t> seed;
};

int run_simulate(const std::string& path, const SimArgs& args) {
    hynet::ConfigDocument doc = load_document(path);
    hynet::Report pre = hynet::validate_all(doc);
    if (!pre.ok()) {
        print_report(pre, "validate " + path, false, "simulate");
        return pre.has_structural() ? kExitStructural : kExitSemantic;
    }
    std::string name = args.system;
    if (name.empty() && doc.system_order.size() == 1) name = doc.system_order[0];
    auto it = doc.systems.find(name);
    if (it == doc.systems.end())
        throw CliError{kExitStructural, "unknown system '" + name + "' (use --system)"};
    const hynet::HybridDynamicalSystem& h = it->second.hds;

    hynet::SimConfig cfg = doc.sim;
    if (args.t_max) cfg.t_max = *args.t_max;
    if (args.step) cfg.step = *args.step;
    if (args.event_tol) cfg.event_tol = *args.event_tol;
    if (args.max_jumps) cfg.max_jumps = *args.max_jumps;
    hynet::JumpPolicy pol = doc.policy;
    if (!args.policy.empty()) {
        if (args.policy == "priority")
            pol.kind = hynet::PolicyKind::priority;
        else if (args.policy == "first-enabled")
            pol.kind = hynet::PolicyKind::first_enabled;
        else if (args.policy == "seeded-random" || args.policy == "random")
            pol.kind = hynet::PolicyKind::seeded_random;
        else
            throw CliError{kExitStructural, "unknown policy '" + args.policy + "'"};
    }
    if (args.seed) pol.seed = *args.seed;

    auto [mode, p] = parse_init(args.init);
    hynet::SimResult r;
    try {
        r = hynet::simulate(h, {mode, p}, pol, cfg);
    } catch (const std::invalid_argument& e) {
        throw CliError{kExitStructural, e.what()};
    }

    std::string format = args.format;
    if (!args.out.empty() && args.out.size() > 5 && args.out.substr(args.out.size() - 5) == ".json")
        format = "json";
    std::ostringstream body;
    if (format == "json")
        body << hynet::trace_json(r, name).dump(2) << "\n";
    else
        hynet::write_trace_csv(body, r, h.space);
    if (args.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw CliError{kExitStructural, "cannot write '" + args.out + "'"};
        out << body.str();
    }

    const hynet::Point& final_pt = r.exec.segments.back().p.back();
    std::string coords;
    for (std::size_t i = 0; i < final_pt.dim(); ++i) {
        if (i) coords += ",";
        coords += hynet::fmt_double(final_pt[i]);
    }
    std::fprintf(stderr, "system %s: %zu jumps, t = %s, final state %s:%s, status %s\n",
                 name.c_str(), r.exec.jumps.size(),
                 hynet::fmt_double(r.exec.track.t.back()).c_str(), r.exec.modes.back().c_str(),
                 coords.c_str(), hynet::status_name(r.status));
    return r.status == hynet::SimStatus::ok || r.status == hynet::SimStatus::jump_limit
               ? kExitOk
               : kExitRuntime;
}

int run_check_map(const std::string& path, const std::string& map_name, std::size_t nsamples,
                  double tol, int executions, bool as_json) {
    hynet::ConfigDocument doc = load_document(path);
    std::string name = map_name;
    if (name.empty() && doc.map_order.size() == 1) name = doc.map_order[0];
    auto it = doc.maps.find(name);
    if (it == doc.maps.end()) throw CliError{kExitStructural, "unknown map '" + name + "'"};
    const hynet::MapDef& def = it->second;
    if (def.source_system.empty() || def.target_system.empty())
        throw CliError{kExitStructural,
                       "map '" + name + "' needs source_system and target_system for checking"};
    const auto& src = doc.systems.at(def.source_system).hds;
    const auto& dst = doc.systems.at(def.target_system).hds;

    hynet::Report hyp = hynet::check_hds_map(def.map, src, dst, nsamples, tol);
    print_report(hyp, "hypothesis: vector fields related along '" + name + "'", as_json,
                 "check-map");
    if (!hyp.ok()) return hyp.has_structural() ? kExitStructural : kExitSemantic;

    // conclusion: pushed-forward executions are executions of the target
    hynet::Report conc;
    hynet::Sampler rng(2718);
    hynet::SimConfig cfg = doc.sim;
    for (int k = 0; k < executions; ++k) {
        const auto& modes = src.space.mode_order;
        hynet::ModeId m = modes[rng.index(modes.size())];
        hynet::Point x = src.space.mode_box(m).sample(rng);
        hynet::SimResult r = hynet::simulate(src, {m, x}, doc.policy, cfg);
        if (r.status == hynet::SimStatus::nan_error) {
            conc.fail("execution " + std::to_string(k) + " failed with NaN", 0, true);
            continue;
        }
        hynet::Report v1 = hynet::validate_execution(r.exec, src, cfg.residual_tol());
        conc.merge(v1, "source execution " + std::to_string(k) + ": ");
        hynet::Execution pushed = hynet::pushforward_execution(def.map, r.exec);
        hynet::Report v2 = hynet::validate_execution(pushed, dst, 10 * cfg.residual_tol());
        conc.merge(v2, "pushed execution " + std::to_string(k) + ": ");
    }
    print_report(conc, "conclusion: executions push forward", as_json, "check-map");
    return conc.ok() ? kExitOk : kExitSemantic;
}

int run_network(const std::string& path, const std::string& net_name, bool apply,
                bool check_theorem, const std::string& theorem_map, std::size_t nsamples,
                double tol, const std::string& out, bool as_json) {
    hynet::ConfigDocument doc = load_document(path);
    int exit_code = kExitOk;

    std::string name = net_name;
    if (name.empty() && doc.network_order.size() >= 1 && !check_theorem) name = doc.network_order[0];
    if (!name.empty()) {
        auto it = doc.networks.find(name);
        if (it == doc.networks.end())
            throw CliError{kExitStructural, "unknown network '" + name + "'"};
        const hynet::NetworkDef& def = it->second;
        hynet::Report rep = hynet::validate_network(def.net, nsamples, std::max(tol, 1e-7));
        print_report(rep, "network '" + name + "'", as_json, "network");
        if (!rep.ok()) return rep.has_structural() ? kExitStructural : kExitSemantic;

        if (apply) {
            std::map<std::string, const hynet::OpenSystem*> w;
            for (const auto& x : def.net.index) {
                auto sit = def.system_names.find(x);
                if (sit == def.system_names.end())
                    throw CliError{kExitStructural, "network '" + name + "' has no system for node '" + x + "'"};
                w.emplace(x, &doc.opensystems.at(sit->second).sys);
            }
            hynet::OpenSystem induced = hynet::apply_interconnection(def.net, w);
            hynet::ordered_json samples = hynet::ordered_json::array();
            hynet::Sampler rng(1618);
            for (const auto& m : induced.sub.tot.mode_order) {
                for (int k = 0; k < 5; ++k) {
                    hynet::Point q = induced.sub.tot.mode_box(m).sample(rng);
                    hynet::ordered_json row;
                    row["mode"] = m;
                    row["point"] = q.x;
                    row["value"] = induced.fiber_at(m)(q).x;
                    samples.push_back(std::move(row));
                }
            }
            hynet::ordered_json ja;
            ja["schema"] = "hynet-apply/1";
            ja["network"] = name;
            ja["closed"] = def.net.closed();
            ja["samples"] = std::move(samples);
            if (out.empty()) {
                std::cout << ja.dump(2) << "\n";
            } else {
                std::ofstream os(out, std::ios::binary);
                os << ja.dump(2) << "\n";
            }
        }
    }

    if (check_theorem) {
        std::string mname = theorem_map;
        if (mname.empty() && doc.networkmap_order.size() == 1) mname = doc.networkmap_order[0];
        auto it = doc.networkmaps.find(mname);
        if (it == doc.networkmaps.end())
            throw CliError{kExitStructural, "unknown network map '" + mname + "'"};
        const hynet::NetworkMapDef& def = it->second;
        const hynet::NetworkDef& src = doc.networks.at(def.from);
        const hynet::NetworkDef& dst = doc.networks.at(def.to);
        std::map<std::string, const hynet::OpenSystem*> w, u;
        for (const auto& x : src.net.index)
            w.emplace(x, &doc.opensystems.at(src.system_names.at(x)).sys);
        for (const auto& y : dst.net.index)
            u.emplace(y, &doc.opensystems.at(dst.system_names.at(y)).sys);
        hynet::InducedMapResult r =
            hynet::induced_system_map(def.map, src.net, dst.net, w, u, nsamples, tol);
        print_report(r.hypothesis, "hypotheses of '" + mname + "'", as_json, "network");
        if (!r.conclusion_attempted) {
            std::printf("conclusion: NOT ATTEMPTED (hypotheses failed)\n");
            return r.hypothesis.has_structural() ? kExitStructural : kExitSemantic;
        }
        print_report(r.conclusion, "conclusion: induced systems related along f", as_json,
                     "network");
        if (!r.conclusion.ok()) return kExitSemantic;
    }
    return exit_code;
}

int run_demo(const std::string& name, const std::string& out) {
    hynet::ordered_json j;
    try {
        j = hynet::export_demo(hynet::corpus::build(name));
    } catch (const std::invalid_argument& e) {
        throw CliError{kExitStructural, e.what()};
    }
    std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os) throw CliError{kExitStructural, "cannot write '" + out + "'"};
        os << text;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hynet: compositional hybrid systems - validate, simulate, interconnect, verify"};
    app.require_subcommand(1);

    std::string config, system, init, out, format = "csv", policy, map_name, net_name, theorem_map,
                demo_name;
    bool as_json = false, apply = false, check_theorem = false;
    SimArgs sim;
    std::size_t nsamples = 25;
    double tol = 1e-9;
    int executions = 3;
    double tmax_v = 0, step_v = 0, etol_v = 0;
    int maxj_v = 0;
    std::uint64_t seed_v = 0;

    auto* v = app.add_subcommand("validate", "run all validators over a config");
    v->add_option("config", config, "config path or demo:NAME")->required();
    v->add_flag("--json", as_json, "machine-readable report");

    auto* s = app.add_subcommand("simulate", "integrate a system and write its trace");
    s->add_option("config", config, "config path or demo:NAME")->required();
    s->add_option("--system", sim.system, "system name (default: the only one)");
    s->add_option("--init", sim.init, "initial state MODE:c0,c1,...")->required();
    s->add_option("--policy", sim.policy, "priority | first-enabled | seeded-random");
    auto* so_seed = s->add_option("--seed", seed_v, "seed for seeded-random");
    auto* so_tmax = s->add_option("--t-max", tmax_v, "time horizon");
    auto* so_step = s->add_option("--step", step_v, "integrator step");
    auto* so_maxj = s->add_option("--max-jumps", maxj_v, "jump budget");
    auto* so_etol = s->add_option("--event-tol", etol_v, "event time tolerance");
    s->add_option("--out", sim.out, "trace file (default: stdout)");
    s->add_option("--format", sim.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    auto* c = app.add_subcommand("check-map", "verify a map of hybrid dynamical systems");
    c->add_option("config", config, "config path or demo:NAME")->required();
    c->add_option("--map", map_name, "map name (default: the only one)");
    c->add_option("--samples", nsamples, "samples per mode");
    c->add_option("--tol", tol, "relatedness tolerance");
    c->add_option("--executions", executions, "simulated executions to push forward");
    c->add_flag("--json", as_json, "machine-readable report");

    auto* n = app.add_subcommand("network", "validate networks, interconnect, verify the theorem");
    n->add_option("config", config, "config path or demo:NAME")->required();
    n->add_option("--network", net_name, "network name");
    n->add_flag("--apply", apply, "apply the interconnection and emit sampled evaluations");
    auto* ct = n->add_flag("--check-theorem", check_theorem,
                           "verify the induced map of interconnected systems");
    n->add_option("--map", theorem_map, "network map name for --check-theorem")->needs(ct);
    n->add_option("--samples", nsamples, "samples per mode");
    n->add_option("--tol", tol, "relatedness tolerance");
    n->add_option("--out", out, "output file for --apply");
    n->add_flag("--json", as_json, "machine-readable report");

    auto* d = app.add_subcommand("demo", "write a built-in example as a config document");
    d->add_option("name", demo_name, "one of: thermostat, two-rooms, product-as-network, "
                                     "single-node-loop, three-node-network, three-node-map")
        ->required();
    d->add_option("--out", out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitStructural;
    }

    try {
        if (v->parsed()) return run_validate(config, as_json);
        if (s->parsed()) {
            if (*so_tmax) sim.t_max = tmax_v;
            if (*so_step) sim.step = step_v;
            if (*so_etol) sim.event_tol = etol_v;
            if (*so_maxj) sim.max_jumps = maxj_v;
            if (*so_seed) sim.seed = seed_v;
            return run_simulate(config, sim);
        }
        if (c->parsed()) return run_check_map(config, map_name, nsamples, tol, executions, as_json);
        if (n->parsed())
            return run_network(config, net_name, apply, check_theorem, theorem_map, nsamples, tol,
                               out, as_json);
        if (d->parsed()) return run_demo(demo_name, out);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.code;
    } catch (const hynet::ConfigError& e) {
        std::fprintf(stderr, "config error at %s\n", e.what());
        return kExitStructural;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
