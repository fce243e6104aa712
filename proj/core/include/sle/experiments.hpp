#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sle/estimate.hpp"
#include "sle/greens.hpp"

namespace sle {

struct UnknownExperiment : std::invalid_argument {
    explicit UnknownExperiment(const std::string& n)
        : std::invalid_argument("unknown experiment: " + n) {}
};

struct ConfigInvalid : std::invalid_argument {
    explicit ConfigInvalid(const std::string& w) : std::invalid_argument(w) {}
};

struct DegenerateDesign : std::invalid_argument {
    explicit DegenerateDesign(const std::string& w) : std::invalid_argument(w) {}
};

// --- power-law fitting --------------------------------------------------------

struct FitPoint {
    double x, y, y_err;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;   // log-space intercept
    double slope_err = 0.0;
};

// weighted least squares in log-log coordinates
FitResult fit_power_law(const std::vector<FitPoint>& points);

// --- experiment reports ---------------------------------------------------------

struct ExperimentRow {
    std::string row_id;
    std::vector<std::pair<std::string, std::string>> inputs;
    EnsembleEstimate est;
    std::string verdict;   // "pass", "fail" or "info"
};

struct ExperimentReport {
    std::string name;
    nlohmann::json params;
    uint64_t master_seed = 0;
    std::vector<ExperimentRow> rows;
    std::map<std::string, FitResult> fits;
    std::map<std::string, bool> verdicts;
    double wall_seconds = 0.0;

    bool all_pass() const {
        for (const auto& [k, v] : verdicts)
            if (!v) return false;
        return true;
    }
};

// catalog: radius_law, distance_law, minkowski_expectation, two_point_band,
// invariant_density, theta_consistency, domain_covariance, martingale_identity,
// holder_trend
ExperimentReport run_experiment(const std::string& name, const nlohmann::json& config,
                                uint64_t master_seed, int workers,
                                const std::string& table_cache_dir);

nlohmann::json default_config(const std::string& name);
std::vector<std::string> experiment_names();

void write_report_csv(const std::string& path, const ExperimentReport& rep,
                      const std::string& command_line);
void write_report_json(const std::string& path, const ExperimentReport& rep,
                       const std::string& command_line);

// --- exact-identity suite (no Monte Carlo) ---------------------------------------

struct SelfTestItem {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<SelfTestItem> selftest(uint64_t seed = 12345);

// phi-table cache shared by experiments; builds into dir when missing
const PhiTable& cached_phi_table(double kappa, const std::string& dir, int workers);

} // namespace sle
