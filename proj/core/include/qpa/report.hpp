#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qpa/simulator.hpp"

// Result emission.  CSV numeric fields use %.17g so re-parsing reproduces
// every double bit-exactly; the JSON sidecar carries seeds, configuration and
// per-trial raw metrics for audit.

namespace qpa {

struct RunConfig {
    std::string scenario;
    std::vector<std::string> mechanisms;
    int trials = 0;
    std::uint64_t base_seed = 0;
    int segments = 0;
    std::string provider;
    double sigma = 0.0;
    std::string replay_file;
    bool seed_from_env = false;
};

// One flattened summary row per mechanism.
struct CsvRow {
    std::string mechanism;
    int trials = 0;
    int segments = 0;
    double revenue_per_ad_mean = 0, revenue_per_ad_se = 0;
    double social_welfare_mean = 0, social_welfare_se = 0;
    double relevance_mean = 0, relevance_se = 0;
    bool has_kl = false;
    double kl_mean = 0, kl_se = 0;   // blank columns when !has_kl
    double num_ads_mean = 0, num_ads_se = 0;
};

std::vector<CsvRow> csv_rows(const MetricsReport& report);
void write_results_csv(const MetricsReport& report, std::ostream& os);
// Round-trip reader used by tests to prove the full-precision guarantee.
std::vector<CsvRow> parse_results_csv(std::istream& is);

void write_run_sidecar_json(const MetricsReport& report, const RunConfig& cfg,
                            std::ostream& os);

// Human-readable mean +/- se table (stdout in the CLI).
void print_summary_table(const MetricsReport& report, std::ostream& os);

// Verification report for `qpa verify`.
struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
    std::map<std::string, double> stats;
};

struct VerifyReport {
    std::string suite;
    std::uint64_t seed = 0;
    int instances = 0;
    std::vector<VerifyCheck> checks;

    bool all_pass() const;
};

void write_verification_json(const VerifyReport& report, std::ostream& os);

}  // namespace qpa
