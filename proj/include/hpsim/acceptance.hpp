#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hpsim {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    nlohmann::ordered_json metrics;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
    std::vector<int> only;  // empty: every criterion
};

struct AcceptanceRun {
    std::vector<CriterionResult> results;
    std::vector<double> seconds;  // wall time per result; kept out of the report
};

// Criteria 1-11. Determinism across runs (12) is checked by running this twice.
AcceptanceRun run_acceptance(const AcceptanceOptions& opt);

// Byte-stable JSON text of the results (no timings).
std::string acceptance_report(const AcceptanceRun& run);

}  // namespace hpsim
