// Runs `hpsim selftest` twice with the same seed and prints one PASS/FAIL
// line per acceptance criterion.
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_selftest(const std::string& cli, const fs::path& out, const std::string& seed) {
    fs::remove_all(out);
    std::string cmd = "\"" + cli + "\" selftest --seed " + seed + " --out \"" + out.string() + "\" > \"" +
                      out.string() + ".log\" 2>&1";
    int rc = std::system(cmd.c_str());
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-hpsim> [seed]\n";
        return 1;
    }
    std::string cli = argv[1];
    std::string seed = argc > 2 ? argv[2] : "20240601";
    fs::path base = fs::temp_directory_path() / ("hpsim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(base);
    fs::path a = base / "first", b = base / "second";

    int rc_a = run_selftest(cli, a, seed);
    int rc_b = run_selftest(cli, b, seed);
    std::string ra = slurp(a / "selftest_report.json");
    std::string rb = slurp(b / "selftest_report.json");
    if (ra.empty()) {
        std::cerr << "selftest produced no report (status " << rc_a << ")\n" << slurp(fs::path(a.string() + ".log"));
        return 1;
    }
    json report = json::parse(ra);
    json manifest = json::parse(slurp(a / "manifest.json"));

    std::map<int, double> seconds;
    for (const auto& c : manifest["details"]["criteria"]) seconds[c["id"].get<int>()] = c["seconds"].get<double>();

    bool all = true;
    auto line = [&](int id, const std::string& title, bool pass, const std::string& note) {
        all = all && pass;
        std::printf("criterion %2d %-4s %s%s\n", id, pass ? "PASS" : "FAIL", title.c_str(), note.c_str());
    };
    for (const auto& c : report["criteria"]) {
        int id = c["id"].get<int>();
        bool pass = c["pass"].get<bool>();
        std::string note;
        if (id == 1 || id == 6) {
            double limit = id == 1 ? 60.0 : 600.0;
            double s = seconds.count(id) ? seconds[id] : 1e9;
            std::ostringstream os;
            os << " (" << s << " s, limit " << limit << " s)";
            note = os.str();
            pass = pass && s < limit;
        }
        line(id, c["title"].get<std::string>(), pass, note);
    }
    if (report["criteria"].size() != 11) {
        std::printf("expected 11 criteria in the report, found %zu\n", report["criteria"].size());
        all = false;
    }
    bool same = !rb.empty() && ra == rb && rc_a == rc_b;
    line(12, "selftest reports byte-identical across runs", same, "");

    if (all) fs::remove_all(base);
    return all ? 0 : 1;
}
