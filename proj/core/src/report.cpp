#include "qpa/report.hpp"

#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qpa {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr const char* kCsvHeader =
    "mechanism,trials,segments,"
    "revenue_per_ad_mean,revenue_per_ad_se,"
    "social_welfare_mean,social_welfare_se,"
    "relevance_mean,relevance_se,"
    "kl_mean,kl_se,"
    "num_ads_mean,num_ads_se";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

std::vector<CsvRow> csv_rows(const MetricsReport& report) {
    std::vector<CsvRow> rows;
    for (const MechanismSummary& m : report.rows) {
        CsvRow r;
        r.mechanism = mechanism_id(m.mech);
        r.trials = report.trials;
        r.segments = report.segments;
        r.revenue_per_ad_mean = m.revenue_per_ad.mean;
        r.revenue_per_ad_se = m.revenue_per_ad.se;
        r.social_welfare_mean = m.social_welfare.mean;
        r.social_welfare_se = m.social_welfare.se;
        r.relevance_mean = m.relevance.mean;
        r.relevance_se = m.relevance.se;
        if (m.kl) {
            r.has_kl = true;
            r.kl_mean = m.kl->mean;
            r.kl_se = m.kl->se;
        }
        r.num_ads_mean = m.num_ads.mean;
        r.num_ads_se = m.num_ads.se;
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_results_csv(const MetricsReport& report, std::ostream& os) {
    os << kCsvHeader << "\n";
    for (const CsvRow& r : csv_rows(report)) {
        os << r.mechanism << ',' << r.trials << ',' << r.segments << ','
           << g17(r.revenue_per_ad_mean) << ',' << g17(r.revenue_per_ad_se) << ','
           << g17(r.social_welfare_mean) << ',' << g17(r.social_welfare_se) << ','
           << g17(r.relevance_mean) << ',' << g17(r.relevance_se) << ',';
        if (r.has_kl)
            os << g17(r.kl_mean) << ',' << g17(r.kl_se);
        else
            os << ',';
        os << ',' << g17(r.num_ads_mean) << ',' << g17(r.num_ads_se) << "\n";
    }
}

std::vector<CsvRow> parse_results_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("results csv: empty stream");
    if (line != kCsvHeader)
        throw std::invalid_argument("results csv: unexpected header: " + line);

    std::vector<CsvRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 13)
            throw std::invalid_argument("results csv: expected 13 fields, got " +
                                        std::to_string(f.size()) + ": " + line);
        CsvRow r;
        r.mechanism = f[0];
        r.trials = std::stoi(f[1]);
        r.segments = std::stoi(f[2]);
        r.revenue_per_ad_mean = std::stod(f[3]);
        r.revenue_per_ad_se = std::stod(f[4]);
        r.social_welfare_mean = std::stod(f[5]);
        r.social_welfare_se = std::stod(f[6]);
        r.relevance_mean = std::stod(f[7]);
        r.relevance_se = std::stod(f[8]);
        r.has_kl = !f[9].empty();
        if (r.has_kl) {
            r.kl_mean = std::stod(f[9]);
            r.kl_se = std::stod(f[10]);
        }
        r.num_ads_mean = std::stod(f[11]);
        r.num_ads_se = std::stod(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_run_sidecar_json(const MetricsReport& report, const RunConfig& cfg,
                            std::ostream& os) {
    nlohmann::json j;
    j["config"] = {{"scenario", cfg.scenario},
                   {"mechanisms", cfg.mechanisms},
                   {"trials", cfg.trials},
                   {"base_seed", cfg.base_seed},
                   {"segments", cfg.segments},
                   {"provider", cfg.provider},
                   {"sigma", cfg.sigma},
                   {"replay_file", cfg.replay_file},
                   {"seed_from_env", cfg.seed_from_env}};
    j["scenario"] = report.scenario;
    j["trials"] = report.trials;
    j["segments"] = report.segments;
    j["provider"] = report.provider;
    j["base_seed"] = report.base_seed;

    j["mechanisms"] = nlohmann::json::array();
    for (const MechanismSummary& m : report.rows) {
        nlohmann::json row;
        row["id"] = mechanism_id(m.mech);
        row["display_name"] = mechanism_display_name(m.mech);
        row["trial_seeds"] = m.trial_seeds;
        row["summary"] = {
            {"revenue_per_ad", {{"mean", m.revenue_per_ad.mean}, {"se", m.revenue_per_ad.se}}},
            {"social_welfare", {{"mean", m.social_welfare.mean}, {"se", m.social_welfare.se}}},
            {"relevance", {{"mean", m.relevance.mean}, {"se", m.relevance.se}}},
            {"num_ads", {{"mean", m.num_ads.mean}, {"se", m.num_ads.se}}},
        };
        if (m.kl) row["summary"]["kl"] = {{"mean", m.kl->mean}, {"se", m.kl->se}};
        nlohmann::json per_trial = nlohmann::json::array();
        for (const TrialMetrics& t : m.per_trial) {
            nlohmann::json tj = {{"revenue_per_ad", t.revenue_per_ad},
                                 {"social_welfare", t.social_welfare},
                                 {"relevance", t.relevance},
                                 {"num_ads", t.num_ads}};
            if (t.kl) tj["kl"] = *t.kl;
            per_trial.push_back(std::move(tj));
        }
        row["per_trial"] = std::move(per_trial);
        j["mechanisms"].push_back(std::move(row));
    }
    os << j.dump(2) << "\n";
}

void print_summary_table(const MetricsReport& report, std::ostream& os) {
    os << "scenario " << report.scenario << " | trials " << report.trials
       << " | segments " << report.segments << " | provider " << report.provider
       << " | seed " << report.base_seed << "\n";

    auto cell = [](const SummaryStat& s) {
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(4) << s.mean << " +/- "
           << std::setprecision(4) << s.se;
        return ss.str();
    };

    os << std::left << std::setw(22) << "mechanism" << std::setw(22)
       << "revenue/ad" << std::setw(22) << "social welfare" << std::setw(22)
       << "relevance" << std::setw(22) << "kl" << std::setw(18) << "ads shown"
       << "\n";
    os << std::string(22 * 5 + 18, '-') << "\n";
    for (const MechanismSummary& m : report.rows) {
        os << std::left << std::setw(22) << mechanism_display_name(m.mech)
           << std::setw(22) << cell(m.revenue_per_ad) << std::setw(22)
           << cell(m.social_welfare) << std::setw(22) << cell(m.relevance)
           << std::setw(22) << (m.kl ? cell(*m.kl) : std::string("-"))
           << std::setw(18) << cell(m.num_ads) << "\n";
    }
}

bool VerifyReport::all_pass() const {
    for (const VerifyCheck& c : checks)
        if (!c.pass) return false;
    return true;
}

void write_verification_json(const VerifyReport& report, std::ostream& os) {
    nlohmann::json j;
    j["suite"] = report.suite;
    j["seed"] = report.seed;
    j["instances"] = report.instances;
    j["all_pass"] = report.all_pass();
    j["checks"] = nlohmann::json::array();
    for (const VerifyCheck& c : report.checks) {
        nlohmann::json cj = {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
        for (const auto& [k, v] : c.stats) cj["stats"][k] = v;
        j["checks"].push_back(std::move(cj));
    }
    os << j.dump(2) << "\n";
}

}  // namespace qpa
