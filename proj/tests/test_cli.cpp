#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("hpsim_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

int hpsim(const std::string& args) {
    std::string cmd = std::string("\"") + HPSIM_CLI + "\" " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::path p = scratch(name + ".json");
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("same config and seed give byte-identical outputs") {
    auto cfg = write_config("sim", R"({"lambda": 1.5, "box": [0, 12, 0, 8], "window": [3, 9], "times": [2, 6],
                                       "flux_at": 6, "reps": 200})");
    auto a = scratch("sim_a"), b = scratch("sim_b");
    int ra = hpsim("simulate --config " + cfg.string() + " --seed 5 --workers 1 --out " + a.string());
    int rb = hpsim("simulate --config " + cfg.string() + " --seed 5 --workers 3 --out " + b.string());
    CHECK(ra == rb);
    CHECK((ra == 0 || ra == 2));
    for (const char* f : {"simulate_replicates.csv", "simulate_summary.csv"}) {
        CHECK(!slurp(a / f).empty());
        CHECK(slurp(a / f) == slurp(b / f));
    }
    auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m["seed"] == 5);
    CHECK(m["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(m["streams"].size() == 1);
    CHECK(m.contains("wall_seconds"));
    auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
    CHECK(m["config_hash"] == mb["config_hash"]);

    auto c = scratch("sim_c");
    hpsim("simulate --config " + cfg.string() + " --seed 6 --out " + c.string());
    CHECK(slurp(a / "simulate_replicates.csv") != slurp(c / "simulate_replicates.csv"));
}

TEST_CASE("malformed configs exit 1 and write nothing") {
    const char* bad[] = {
        R"({"lambda": 1.0, "colour": "red"})",
        R"({"lambda": "one"})",
        R"({"lambda": -1})",
        R"({"box": [0, 1, 0]})",
        R"({"kind": "detect"})",
        R"({"lambda": 1.0,)",
        R"({"box": [0, 2000, 0, 2000]})",
        R"({"reps": 100000000})",
    };
    int i = 0;
    for (const char* text : bad) {
        auto cfg = write_config("bad" + std::to_string(i), text);
        auto out = scratch("bad_out" + std::to_string(i++));
        CHECK_MESSAGE(hpsim("simulate --config " + cfg.string() + " --out " + out.string()) == 1, text);
        CHECK_MESSAGE(!fs::exists(out), text);
    }
    auto cfg = write_config("bad_fn", R"({"f1": {"kind": "at-least", "lo": 0, "hi": 1, "t_lo": 0, "t_hi": 1,
                                                 "threshold": 1, "direction": "sideways"}})");
    auto out = scratch("bad_fn_out");
    CHECK(hpsim("decouple --config " + cfg.string() + " --out " + out.string()) == 1);
    CHECK(!fs::exists(out));
    CHECK(hpsim("simulate --config /nonexistent/config.json --out " + out.string()) == 1);
    CHECK(!fs::exists(out));
    CHECK(hpsim("nosuchcommand") == 1);
}

TEST_CASE("schedule reproduces the base row") {
    auto cfg = write_config("sched", R"({"family": "rwre", "L0": 10000000000})");
    auto out = scratch("sched_out");
    REQUIRE(hpsim("schedule --config " + cfg.string() + " --out " + out.string()) == 0);
    std::istringstream csv(slurp(out / "schedule.csv"));
    std::string header, row0;
    std::getline(csv, header);
    std::getline(csv, row0);
    CHECK(header == "k,L,l,eps,rho,v_tilde");
    CHECK(row0.rfind("0,10000000000,316,0.2371", 0) == 0);

    auto dcfg = write_config("dsched", R"({"family": "detection", "l0": "1e100", "k_max": 2})");
    auto dout = scratch("dsched_out");
    REQUIRE(hpsim("schedule --config " + dcfg.string() + " --out " + dout.string()) == 0);
    std::istringstream d(slurp(dout / "schedule.csv"));
    std::getline(d, header);
    std::getline(d, row0);
    CHECK(row0 == "0,1" + std::string(100, '0') + ",15" + std::string(99, '0'));
}

TEST_CASE("other subcommands produce their reports") {
    auto out = scratch("pb");
    CHECK(hpsim("poisson-bound --out " + out.string()) == 0);
    CHECK(slurp(out / "poisson_bound.csv").rfind("lambda,x,side,exact,bound,holds\n", 0) == 0);

    auto cfg = write_config("det", R"({"lambda": 1, "r": 0.3, "horizon": 5, "half_width": 8, "N": [0, 1, 2],
                                       "trigger": {"l0": 3, "k": 0}})");
    out = scratch("det");
    CHECK(hpsim("detect --config " + cfg.string() + " --reps 50 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "detect.csv"));
    CHECK(fs::exists(out / "trigger.json"));

    cfg = write_config("rw", R"({"H": 20, "mode": "forced-dense", "p_bullet": 0.7, "p_circ": 0.2})");
    out = scratch("rw");
    CHECK(hpsim("rwre-speed --config " + cfg.string() + " --reps 20 --out " + out.string()) == 0);
    auto j = nlohmann::json::parse(slurp(out / "rwre_speed.json"));
    CHECK(j["v_minus"].get<double>() <= j["v_plus"].get<double>());

    cfg = write_config("ep", R"({"lambda": 1.5, "box": [-60, 0, 0, 20], "x": 0, "t": 20})");
    out = scratch("ep");
    CHECK(hpsim("exitpoint --config " + cfg.string() + " --reps 50 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "exitpoint.csv"));

    out = scratch("ex");
    CHECK(hpsim("explpp-checks --reps 100 --out " + out.string()) == 0);
    out = scratch("dx");
    CHECK(hpsim("decouple-exp --reps 2000 --out " + out.string()) == 0);
    out = scratch("dh");
    CHECK(hpsim("decouple --reps 2000 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "decouple.json"));
    fs::remove_all(fs::temp_directory_path() / ("hpsim_cli_" + std::to_string(::getpid())));
}
