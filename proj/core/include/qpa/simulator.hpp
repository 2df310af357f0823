#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpa/model.hpp"
#include "qpa/random.hpp"

// Multi-trial experiment driver.  Six evaluated mechanisms: the screened
// KL-regularized single auction and the proportional baseline, each with and
// without replacement across segments, plus one whole-output multi-allocation
// auction per side (screened VCG vs. sequential proportional draws).

namespace qpa {

// ---- relevance dynamics ---------------------------------------------------

class RelevanceProvider {
  public:
    virtual ~RelevanceProvider() = default;
    // Weights for all participants at (segment, trial).  Must be a pure
    // function of its arguments so reruns reproduce trials exactly.
    virtual std::vector<double> weights(const Scenario& sc, int segment,
                                        int trial_index,
                                        std::uint64_t trial_seed) const = 0;
    virtual std::string name() const = 0;
};

// Table values verbatim.
class StaticTable final : public RelevanceProvider {
  public:
    std::vector<double> weights(const Scenario&, int, int, std::uint64_t) const override;
    std::string name() const override { return "static"; }
};

// Gaussian perturbation around the table, clipped to [1e-9, 1].  Separate
// sigmas for the organic arm and the ads; the noise stream is derived from
// (trial_seed, segment) and never interleaves with winner sampling.
class NoisyTable final : public RelevanceProvider {
  public:
    explicit NoisyTable(double sigma_organic = 0.01, double sigma_ads = 0.0)
        : sigma_organic_(sigma_organic), sigma_ads_(sigma_ads) {}
    std::vector<double> weights(const Scenario&, int, int, std::uint64_t) const override;
    std::string name() const override { return "noisy"; }

  private:
    double sigma_organic_;
    double sigma_ads_;
};

// Replays a recorded weight trace: trace[trial % n_trials][segment] is a full
// participant-weight vector.  Construct via load_weight_trace().
class FileReplay final : public RelevanceProvider {
  public:
    explicit FileReplay(std::vector<std::vector<std::vector<double>>> trace);
    std::vector<double> weights(const Scenario&, int, int, std::uint64_t) const override;
    std::string name() const override { return "replay"; }

  private:
    std::vector<std::vector<std::vector<double>>> trace_;
};

// ---- mechanisms -----------------------------------------------------------

enum class MechanismKind { QpSingle, QpMulti, SegSingle, SegMulti };
enum class Replacement { With, Without };

struct MechanismSpec {
    MechanismKind kind = MechanismKind::QpSingle;
    Replacement replacement = Replacement::With;   // ignored by multi kinds

    bool is_multi() const {
        return kind == MechanismKind::QpMulti || kind == MechanismKind::SegMulti;
    }
    bool operator==(const MechanismSpec&) const = default;
};

// Canonical ids: qp-repl, qp-norepl, qp-multi, seg-repl, seg-norepl, seg-multi.
std::string mechanism_id(const MechanismSpec& m);
std::string mechanism_display_name(const MechanismSpec& m);
std::optional<MechanismSpec> parse_mechanism(const std::string& id);
std::vector<MechanismSpec> all_mechanisms();

// ---- trial records --------------------------------------------------------

struct SegmentEntry {
    int segment = 0;          // auction round (single) or winner index (multi)
    int winner = 0;           // participant id; 0 = organic / no insertion
    bool is_ad = false;
    double per_click_payment = 0.0;
    double winner_weight = 0.0;   // q^{(t)}_{winner}; attribution q_{A*,i} for multi
};

struct TrialResult {
    MechanismSpec mech;
    std::uint64_t seed = 0;
    std::vector<SegmentEntry> entries;
    std::vector<double> per_segment_kl;             // empty for multi kinds
    std::vector<std::vector<int>> eligible_sets;    // audit: S* (or A*) per round
    std::vector<std::vector<double>> allocations;   // audit: x per round (single)
};

struct TrialMetrics {
    double revenue_per_ad = 0.0;   // mean p~ * q over ad entries; 0 when none
    double social_welfare = 0.0;
    double relevance = 0.0;
    std::optional<double> kl;      // absent for multi-allocation mechanisms
    double num_ads = 0.0;
};

// A single seeded trial.  T segments for single-allocation mechanisms; multi
// mechanisms run one auction for the whole output using the first segment's
// weights and emit one entry per selected item.  Without replacement, ad
// winners leave the pool for later segments; an exhausted pool falls back to
// the organic arm.  Segment indexes beyond the scenario's table wrap around;
// `trial_index` is forwarded to the provider (replay addressing).
TrialResult run_trial(const MechanismSpec& mech, const Scenario& sc,
                      int segments, std::uint64_t trial_seed,
                      const RelevanceProvider& provider,
                      bool utility_topup = false, int trial_index = 0);

TrialMetrics metrics(const TrialResult& trial, const Scenario& sc);

// ---- experiment summary ---------------------------------------------------

struct SummaryStat {
    double mean = 0.0;
    double se = 0.0;    // sample SE: sd(n-1) / sqrt(n)
};

struct MechanismSummary {
    MechanismSpec mech;
    std::vector<TrialMetrics> per_trial;
    std::vector<std::uint64_t> trial_seeds;
    SummaryStat revenue_per_ad, social_welfare, relevance, num_ads;
    std::optional<SummaryStat> kl;
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t base_seed = 0;
    int trials = 0;
    int segments = 0;
    std::string provider;
    std::vector<MechanismSummary> rows;
};

// Runs `trials` seeded trials per mechanism; trial t always uses
// derive_seed(base_seed, t), so extending the trial count preserves the
// prefix.  Requires trials >= 2 (the SE needs a variance estimate);
// `segments` <= 0 means "use the scenario's segment count".
MetricsReport run_experiment(std::span<const MechanismSpec> mechanisms,
                             const Scenario& sc, int trials,
                             std::uint64_t base_seed, int segments,
                             const RelevanceProvider& provider,
                             bool utility_topup = false);

}  // namespace qpa
