#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the command-line tool and its exit-code contract:
// 0 success, 1 semantic failure, 2 parse/structural failure, 3 runtime.

namespace {

const std::string cli = HYNET_CLI_PATH;

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " >/tmp/hynet_cli_out.txt 2>/tmp/hynet_cli_err.txt";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("validate: demos exit 0") {
    CHECK(run("validate demo:thermostat") == 0);
    CHECK(run("validate demo:three-node-map") == 0);
    CHECK(run("validate demo:single-node-loop --json") == 0);
    CHECK(slurp("/tmp/hynet_cli_out.txt").find("hynet-report/1") != std::string::npos);
}

TEST_CASE("validate: semantic failure exits 1 and names the arrow") {
    write_file("/tmp/hynet_bad_semantic.json", R"json({
      "spaces": { "s": { "modes": { "m": {"box": [[0,1]]}, "n": {"box": [[0,1]]} },
                  "arrows": { "leak": {"from":"m","to":"n","guard":{"x0":1.0},"reset":["x0 + 4"]} } } }
    })json");
    CHECK(run("validate /tmp/hynet_bad_semantic.json") == 1);
    CHECK(slurp("/tmp/hynet_cli_out.txt").find("leak") != std::string::npos);
}

TEST_CASE("validate: malformed expression exits 2 with a location") {
    write_file("/tmp/hynet_bad_parse.json", R"json({
      "spaces": { "s": { "modes": { "m": {"box": [[0,1]]} },
                  "arrows": { "a": {"from":"m","to":"m","guard":{"x0":0.0},"reset":["(1 +"]} } } }
    })json");
    CHECK(run("validate /tmp/hynet_bad_parse.json") == 2);
    CHECK(slurp("/tmp/hynet_cli_err.txt").find("spaces.s.arrows.a") != std::string::npos);
    CHECK(run("validate /tmp/does_not_exist.json") == 2);
}

TEST_CASE("simulate: trace, summary, and jump-limit behavior") {
    CHECK(run("simulate demo:thermostat --init off:1.0 --t-max 2.5 --out /tmp/hynet_t.csv") == 0);
    std::string csv = slurp("/tmp/hynet_t.csv");
    CHECK(csv.rfind("t,mode,x0,event\n", 0) == 0);
    CHECK(csv.find("jump:f") != std::string::npos);

    CHECK(run("simulate demo:thermostat --init off:1.0 --t-max 2.5 --max-jumps 0 "
              "--out /tmp/hynet_t0.csv") == 0);
    std::string err = slurp("/tmp/hynet_cli_err.txt");
    CHECK(err.find("jump-limit") != std::string::npos);

    // bad init is structural
    CHECK(run("simulate demo:thermostat --init off:7.0 --t-max 1") == 2);
    CHECK(run("simulate demo:thermostat --init nosuchmode:0.5 --t-max 1") == 2);
}

TEST_CASE("simulate: a stuck run exits 3") {
    write_file("/tmp/hynet_stuck.json", R"json({
      "spaces": { "s": { "modes": { "m": {"box": [[0,1]]} } } },
      "systems": { "drain": {"space":"s", "field": { "m": ["-1"] } } },
      "simulation": { "t_max": 2.0 }
    })json");
    CHECK(run("simulate /tmp/hynet_stuck.json --system drain --init m:0.5 "
              "--out /tmp/hynet_stuck.csv") == 3);
    CHECK(slurp("/tmp/hynet_cli_err.txt").find("stuck") != std::string::npos);
}

TEST_CASE("check-map: the identity map of the thermostat demo passes") {
    CHECK(run("check-map demo:thermostat --map identity") == 0);
    std::string out = slurp("/tmp/hynet_cli_out.txt");
    CHECK(out.find("hypothesis") != std::string::npos);
    CHECK(out.find("conclusion") != std::string::npos);
}

TEST_CASE("check-map: unrelated fields fail the hypothesis") {
    write_file("/tmp/hynet_badmap.json", R"json({
      "spaces": { "s": { "modes": { "m": {"box": [[0,1]]} } } },
      "systems": { "a": {"space":"s", "field": { "m": ["1"] } },
                   "b": {"space":"s", "field": { "m": ["2"] } } },
      "maps": { "id": {"from":"s","to":"s","source_system":"a","target_system":"b",
                       "modes": {"m":"m"}, "comps": {"m": ["x0"]} } }
    })json");
    CHECK(run("check-map /tmp/hynet_badmap.json --map id") == 1);
}

TEST_CASE("network: validation, apply, and the theorem check") {
    CHECK(run("network demo:three-node-network --network three-node-network") == 0);
    CHECK(run("network demo:three-node-network --network three-node-network --apply "
              "--out /tmp/hynet_apply.json") == 0);
    std::string apply = slurp("/tmp/hynet_apply.json");
    CHECK(apply.find("hynet-apply/1") != std::string::npos);
    CHECK(apply.find("\"closed\": true") != std::string::npos);

    CHECK(run("network demo:three-node-map --check-theorem") == 0);
    std::string out = slurp("/tmp/hynet_cli_out.txt");
    CHECK(out.find("hypotheses") != std::string::npos);
    CHECK(out.find("conclusion") != std::string::npos);
}

TEST_CASE("demo: configs export and reload through the CLI") {
    for (const std::string name :
         {"thermostat", "two-rooms", "product-as-network", "single-node-loop",
          "three-node-network", "three-node-map"}) {
        CHECK(run("demo " + name + " --out /tmp/hynet_demo.json") == 0);
        CHECK(run("validate /tmp/hynet_demo.json") == 0);
    }
    CHECK(run("demo no-such-demo") == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("simulate demo:thermostat") == 2);  // missing --init
    CHECK(run("no-such-command") == 2);
}

TEST_CASE("HYNET_TOL loosens the containment tolerance globally") {
    write_file("/tmp/hynet_slightly_out.json", R"json({
      "spaces": { "s": { "modes": { "m": {"box": [[0,1]]}, "n": {"box": [[0,1]]} },
                  "arrows": { "a": {"from":"m","to":"n","guard":{"x0":1.0},
                                    "reset":["x0 + 1/10000"]} } } }
    })json");
    // lands 1e-4 outside: fails at the default tolerance, passes at 1e-2
    CHECK(run("validate /tmp/hynet_slightly_out.json") == 1);
    std::string cmd = "HYNET_TOL=0.01 " + cli +
                      " validate /tmp/hynet_slightly_out.json >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
}
