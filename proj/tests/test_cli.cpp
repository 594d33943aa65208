#include "invextopo/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
    json report;  // parsed stdout when it carried a report
};

CliRun run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"invex-topo"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = invextopo::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    if (!r.out.empty() && r.out.front() == '{') r.report = json::parse(r.out);
    return r;
}

json without_timings(json report) {
    report.erase("timings_ms");
    return report;
}

}  // namespace

TEST_CASE("reports carry the envelope fields and exit clean on pass") {
    CliRun r = run({"sublevel", "--expr", "x0^2", "--dim", "1", "--box=-1,1", "--res", "41"});
    REQUIRE(r.code == 0);
    REQUIRE(r.report.is_object());
    CHECK(r.report["schema_version"] == 1);
    CHECK(r.report["toolkit_version"] == "1.0.0");
    CHECK(r.report["command"] == "sublevel");
    CHECK(r.report["config"]["command"] == "sublevel");
    CHECK(r.report["config"]["expr"] == "x0^2");
    CHECK(r.report["config"]["dim"] == 1);
    CHECK(r.report["config"]["box"] == json::array({-1.0, 1.0}));
    CHECK(r.report["config"]["res"] == json::array({41}));
    CHECK(r.report["config"]["anchor"] == "above-min");
    CHECK(r.report["config_hash"].get<std::string>().size() == 16);
    CHECK(r.report["results"]["counts"] == json::array({1}));
    CHECK(r.report["timings_ms"].contains("total"));
}

TEST_CASE("failing certificates drive the exit code to one") {
    // The quadratic's gradient-dominance ratio is exactly 4, so mu = 5 fails
    // and mu = 4 passes.
    CliRun fail = run({"certify-pl", "--builtin", "quadratic", "--mu", "5", "--res", "41",
                       "--box=-2,2,-2,2"});
    CHECK(fail.code == 1);
    CHECK(fail.report["results"]["certificate"]["verdict"] == "fail");

    CliRun pass = run({"certify-pl", "--builtin", "quadratic", "--mu", "4", "--res", "41",
                       "--box=-2,2,-2,2"});
    CHECK(pass.code == 0);
    CHECK(pass.report["results"]["certificate"]["verdict"] == "pass");
}

TEST_CASE("usage problems exit with two") {
    CHECK(run({}).code == 2);                                   // no subcommand
    CHECK(run({"no-such-command"}).code == 2);                  // unknown command
    CHECK(run({"sublevel"}).code == 2);                         // no function source
    CHECK(run({"sublevel", "--builtin", "nope"}).code == 2);    // unknown builtin
    CHECK(run({"sublevel", "--expr", "x0^^2", "--dim", "1"}).code == 2);  // parse error
    CHECK(run({"sublevel", "--expr", "x0", "--dim", "1", "--builtin", "quadratic"}).code ==
          2);                                                   // two sources
    CHECK(run({"certify-pl", "--builtin", "quadratic"}).code == 2);  // missing --mu
    CHECK(run({"sublevel", "--builtin", "quadratic", "--box", "0,1"}).code == 2);  // dim
    CHECK(run({"game-nash", "--game-json", "/no/such/file.json"}).code == 2);
    CHECK(run({"mountain-pass", "--builtin", "quadratic", "--x0", "0,0"}).code == 2);

    CliRun r = run({"sublevel", "--expr", "x0^^2", "--dim", "1"});
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(r.out.empty());  // no report on a usage error
}

TEST_CASE("inconclusive analyses exit with three") {
    // A profile budget of 10 trips immediately on a 41-node pair of grids.
    CliRun r = run({"game-rationalize", "--builtin", "fig4", "--res", "41", "--budget", "10"});
    CHECK(r.code == 3);
    CHECK(r.report["results"]["trace"]["budget_exceeded"] == true);
}

TEST_CASE("expectations assert against the report") {
    const std::vector<std::string> base{"sublevel", "--expr", "x0^2", "--dim", "1",
                                        "--box=-1,1", "--res", "41"};
    auto with = [&](const std::string& e) {
        std::vector<std::string> args = base;
        args.push_back("--expect");
        args.push_back(e);
        return run(args);
    };
    CHECK(with("results.counts.0=1").code == 0);
    CHECK(with("command=sublevel").code == 0);
    CHECK(with("results.reports.0.connected=true").code == 0);

    CliRun bad = with("results.counts.0=2");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("mismatch") != std::string::npos);
    CHECK(bad.err.find("results.counts.0") != std::string::npos);

    CliRun missing = with("results.nothing.here=1");
    CHECK(missing.code == 1);
    CHECK(missing.err.find("no field") != std::string::npos);

    CHECK(with("results.counts.0").code == 2);  // malformed: no '='
}

TEST_CASE("config files expand to the same analysis as flags") {
    namespace fs = std::filesystem;
    const fs::path cfg = fs::temp_directory_path() / "invextopo_cli_cfg_test.json";
    {
        std::ofstream f(cfg);
        f << R"({"command": "sublevel", "expr": "x0^2", "dim": 1,
                 "box": [-1, 1], "res": [41], "level": 1e-6})";
    }
    CliRun from_file = run({"--config", cfg.string()});
    CliRun from_flags = run({"sublevel", "--expr", "x0^2", "--dim", "1", "--box=-1,1",
                             "--res", "41", "--level", "1e-6"});
    REQUIRE(from_file.code == 0);
    REQUIRE(from_flags.code == 0);
    CHECK(from_file.report["config_hash"] == from_flags.report["config_hash"]);
    CHECK(from_file.report["results"] == from_flags.report["results"]);

    // Extra flags alongside --config stay in effect.
    CliRun with_expect = run({"--config", cfg.string(), "--expect", "results.counts.0=1"});
    CHECK(with_expect.code == 0);

    {
        std::ofstream f(cfg);
        f << R"({"expr": "x0^2"})";  // no "command"
    }
    CHECK(run({"--config", cfg.string()}).code == 2);
    {
        std::ofstream f(cfg);
        f << "not json";
    }
    CHECK(run({"--config", cfg.string()}).code == 2);
    CHECK(run({"--config", "/no/such/config.json"}).code == 2);
    fs::remove(cfg);
}

TEST_CASE("reports are reproducible and the hash tracks semantic changes") {
    const std::vector<std::string> args{"certify-growth", "--builtin", "quadratic",
                                        "--eta", "1", "--res", "41", "--box=-2,2,-2,2"};
    CliRun a = run(args);
    CliRun b = run(args);
    REQUIRE(a.code == 0);
    CHECK(without_timings(a.report) == without_timings(b.report));

    std::vector<std::string> tweaked = args;
    tweaked.back() = "-2,2,-2,2.5";
    CliRun c = run(tweaked);
    CHECK(c.report["config_hash"] != a.report["config_hash"]);

    // The same semantic config through different spellings hashes identically.
    CliRun spaced = run({"certify-growth", "--builtin", "quadratic", "--eta", "1.0",
                         "--res", "41", "--box", "-2,2,-2,2"});
    CHECK(spaced.report["config_hash"] == a.report["config_hash"]);
}

TEST_CASE("out directories receive the report and CSV artifacts") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "invextopo_cli_out_test";
    fs::remove_all(dir);

    CliRun r = run({"sublevel", "--expr", "x0^2", "--dim", "1", "--box=-1,1", "--res",
                    "41", "--csv", "--out", dir.string()});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "sublevel_res41.csv"));

    std::ifstream rf(dir / "report.json");
    json stored = json::parse(rf);
    CHECK(stored == r.report);

    std::ifstream cf(dir / "sublevel_res41.csv");
    std::string header;
    std::getline(cf, header);
    CHECK(header.find("value") != std::string::npos);
    CHECK(header.find(',') != std::string::npos);

    fs::remove_all(dir);

    const fs::path dir2 = fs::temp_directory_path() / "invextopo_cli_out_test2";
    fs::remove_all(dir2);
    CliRun g = run({"game-rationalize", "--builtin", "econ_quadratic", "--res", "9",
                    "--max-k", "2", "--csv", "--out", dir2.string()});
    REQUIRE(fs::exists(dir2 / "trace.csv"));
    std::ifstream tf(dir2 / "trace.csv");
    std::string theader;
    std::getline(tf, theader);
    CHECK(theader == "k,player,node,in_mask,c0");
    fs::remove_all(dir2);
}

TEST_CASE("negative numbers survive as space-separated option values") {
    CliRun spaced = run({"pl-flow", "--builtin", "quadratic", "--x0", "-0.5,0",
                         "--alpha", "2", "--fstar", "0"});
    REQUIRE(spaced.code == 0);
    CHECK(spaced.report["config"]["x0"] == json::array({-0.5, 0.0}));
    CHECK(spaced.report["results"]["flow"]["converged"] == true);
}

TEST_CASE("help prints the command surface and exits clean") {
    CliRun top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("sublevel") != std::string::npos);
    CHECK(top.out.find("game-nash") != std::string::npos);
    CHECK(top.out.find("minimax-classify") != std::string::npos);

    CliRun sub = run({"sublevel", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--anchor") != std::string::npos);
    CHECK(sub.out.find("--expect") != std::string::npos);
}
