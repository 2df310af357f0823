#include "qpa/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qpa/baseline_auction.hpp"
#include "qpa/multi_auction.hpp"
#include "qpa/screening.hpp"
#include "qpa/single_auction.hpp"

namespace qpa {

// ---- providers ------------------------------------------------------------

namespace {
int wrap_segment(const Scenario& sc, int segment) {
    const int t = sc.relevance.segments();
    return t > 0 ? segment % t : 0;
}
}  // namespace

std::vector<double> StaticTable::weights(const Scenario& sc, int segment, int,
                                         std::uint64_t) const {
    return sc.relevance.weights_at(wrap_segment(sc, segment));
}

std::vector<double> NoisyTable::weights(const Scenario& sc, int segment, int,
                                        std::uint64_t trial_seed) const {
    std::vector<double> w = sc.relevance.weights_at(wrap_segment(sc, segment));
    // One gaussian per participant, always drawn, so the stream layout does
    // not depend on which sigma happens to be zero.
    Rng noise(derive_seed(trial_seed, 0x517cc1b727220a95ULL +
                                          static_cast<std::uint64_t>(segment)));
    for (size_t id = 0; id < w.size(); ++id) {
        const double sigma = (id == 0) ? sigma_organic_ : sigma_ads_;
        w[id] = std::clamp(w[id] + sigma * noise.gaussian(0.0, 1.0), 1e-9, 1.0);
    }
    return w;
}

FileReplay::FileReplay(std::vector<std::vector<std::vector<double>>> trace)
    : trace_(std::move(trace)) {
    if (trace_.empty())
        throw std::invalid_argument("replay trace: needs at least one trial");
}

std::vector<double> FileReplay::weights(const Scenario& sc, int segment,
                                        int trial_index, std::uint64_t) const {
    const auto& trial = trace_[static_cast<size_t>(trial_index) % trace_.size()];
    if (trial.empty())
        throw std::invalid_argument("replay trace: trial has zero segments");
    const auto& w = trial[static_cast<size_t>(segment) % trial.size()];
    if (static_cast<int>(w.size()) != sc.n_ads() + 1)
        throw std::invalid_argument(
            "replay trace: weight vector length " + std::to_string(w.size()) +
            " does not match scenario participant count " +
            std::to_string(sc.n_ads() + 1));
    return w;
}

// ---- mechanism naming -----------------------------------------------------

std::string mechanism_id(const MechanismSpec& m) {
    switch (m.kind) {
        case MechanismKind::QpSingle:
            return m.replacement == Replacement::With ? "qp-repl" : "qp-norepl";
        case MechanismKind::QpMulti:
            return "qp-multi";
        case MechanismKind::SegSingle:
            return m.replacement == Replacement::With ? "seg-repl" : "seg-norepl";
        case MechanismKind::SegMulti:
            return "seg-multi";
    }
    return "unknown";
}

std::string mechanism_display_name(const MechanismSpec& m) {
    switch (m.kind) {
        case MechanismKind::QpSingle:
            return m.replacement == Replacement::With ? "QP (w/ repl.)" : "QP (w/o repl.)";
        case MechanismKind::QpMulti:
            return "QP multi-allocation";
        case MechanismKind::SegSingle:
            return m.replacement == Replacement::With ? "Seg (w/ repl.)" : "Seg (w/o repl.)";
        case MechanismKind::SegMulti:
            return "Seg multi-allocation";
    }
    return "unknown";
}

std::optional<MechanismSpec> parse_mechanism(const std::string& id) {
    for (const MechanismSpec& m : all_mechanisms())
        if (mechanism_id(m) == id) return m;
    return std::nullopt;
}

std::vector<MechanismSpec> all_mechanisms() {
    return {
        {MechanismKind::QpSingle, Replacement::With},
        {MechanismKind::QpSingle, Replacement::Without},
        {MechanismKind::QpMulti, Replacement::With},
        {MechanismKind::SegSingle, Replacement::With},
        {MechanismKind::SegSingle, Replacement::Without},
        {MechanismKind::SegMulti, Replacement::With},
    };
}

// ---- trials ---------------------------------------------------------------

namespace {

void run_qp_single(TrialResult& out, const Scenario& sc, int segments,
                   const RelevanceProvider& provider, std::uint64_t trial_seed,
                   int trial_index, bool without_repl, bool utility_topup) {
    const std::vector<double> bids = sc.bids();
    std::vector<int> pool = sc.all_ad_ids();
    Rng rng(trial_seed);

    for (int t = 0; t < segments; ++t) {
        const std::vector<double> w = provider.weights(sc, t, trial_index, trial_seed);
        const EligibleContext ctx =
            build_context(bids, w, sc.welfare_single, pool);
        const Allocation a = allocate(ctx, sc.params.lambda_tilde);

        const int winner = a.members[rng.categorical(a.x)];
        SegmentEntry e;
        e.segment = t;
        e.winner = winner;
        e.is_ad = winner != 0;
        e.winner_weight = w[static_cast<size_t>(winner)];
        if (e.is_ad)
            e.per_click_payment =
                payment(winner, bids, ctx, sc.params.lambda_tilde, utility_topup);
        out.entries.push_back(e);
        out.per_segment_kl.push_back(kl_divergence(a.x, ctx.q_tilde));
        out.eligible_sets.push_back(ctx.star);
        out.allocations.push_back(a.x);

        if (without_repl && e.is_ad)
            pool.erase(std::find(pool.begin(), pool.end(), winner));
    }
}

void run_seg_single(TrialResult& out, const Scenario& sc, int segments,
                    const RelevanceProvider& provider, std::uint64_t trial_seed,
                    int trial_index, bool without_repl) {
    const std::vector<double> bids = sc.bids();
    std::vector<int> pool = sc.all_ad_ids();
    Rng rng(trial_seed);

    for (int t = 0; t < segments; ++t) {
        const std::vector<double> w = provider.weights(sc, t, trial_index, trial_seed);
        SegmentEntry e;
        e.segment = t;
        if (pool.empty()) {   // exhausted pool: organic fallback
            e.winner = 0;
            e.winner_weight = w[0];
            out.entries.push_back(e);
            out.per_segment_kl.push_back(0.0);
            out.eligible_sets.push_back({});
            out.allocations.push_back({});
            continue;
        }

        const std::vector<double> x = seg_allocate(bids, w, pool);
        const int winner = static_cast<int>(rng.categorical(x));
        e.winner = winner;
        e.is_ad = true;
        e.winner_weight = w[static_cast<size_t>(winner)];
        e.per_click_payment = seg_payment(winner, bids, w, pool);
        out.entries.push_back(e);

        // Divergence of the realized pool allocation from pure relevance
        // shares over the same pool.
        std::vector<double> xs, qs;
        double qsum = 0.0;
        for (int i : pool) qsum += w[static_cast<size_t>(i)];
        for (int i : pool) {
            xs.push_back(x[static_cast<size_t>(i)]);
            qs.push_back(w[static_cast<size_t>(i)] / qsum);
        }
        out.per_segment_kl.push_back(kl_divergence(xs, qs));
        out.eligible_sets.push_back(pool);
        out.allocations.push_back(x);

        if (without_repl) pool.erase(std::find(pool.begin(), pool.end(), winner));
    }
}

void run_qp_multi(TrialResult& out, const Scenario& sc,
                  const RelevanceProvider& provider, std::uint64_t trial_seed,
                  int trial_index) {
    const std::vector<double> w = provider.weights(sc, 0, trial_index, trial_seed);
    const std::vector<int> pool = sc.all_ad_ids();
    const MultiOutcome m = vcg_auction(sc.bids(), w, sc.rel_matrix, sc.params.xi,
                                       sc.welfare_multi, pool);
    int slot = 0;
    for (int id : m.chosen) {
        SegmentEntry e;
        e.segment = slot++;
        e.winner = id;
        e.is_ad = id != 0;
        e.winner_weight = m.weights.of(id);
        if (e.is_ad) e.per_click_payment = m.payment_of(id);
        out.entries.push_back(e);
    }
    out.eligible_sets.push_back(m.chosen);
}

void run_seg_multi(TrialResult& out, const Scenario& sc,
                   const RelevanceProvider& provider, std::uint64_t trial_seed,
                   int trial_index) {
    const std::vector<double> w = provider.weights(sc, 0, trial_index, trial_seed);
    const std::vector<double> bids = sc.bids();
    const std::vector<int> pool = sc.all_ad_ids();
    Rng rng(trial_seed);
    const std::vector<BaselineDraw> draws =
        seg_multi_select(sc.params.k_baseline, bids, w, pool, rng);

    int slot = 0;
    std::vector<int> chosen;
    for (const BaselineDraw& d : draws) {
        SegmentEntry e;
        e.segment = slot++;
        e.winner = d.id;
        e.is_ad = true;
        e.winner_weight = w[static_cast<size_t>(d.id)];
        e.per_click_payment = d.per_click_payment;
        out.entries.push_back(e);
        chosen.push_back(d.id);
    }
    // Slots the pool could not fill fall back to the organic arm.
    for (int s = static_cast<int>(draws.size()); s < sc.params.k_baseline; ++s) {
        SegmentEntry e;
        e.segment = slot++;
        e.winner = 0;
        e.winner_weight = w[0];
        out.entries.push_back(e);
    }
    out.eligible_sets.push_back(chosen);
}

}  // namespace

TrialResult run_trial(const MechanismSpec& mech, const Scenario& sc,
                      int segments, std::uint64_t trial_seed,
                      const RelevanceProvider& provider, bool utility_topup,
                      int trial_index) {
    if (segments <= 0) segments = sc.segments;
    TrialResult out;
    out.mech = mech;
    out.seed = trial_seed;
    const bool without = mech.replacement == Replacement::Without;
    switch (mech.kind) {
        case MechanismKind::QpSingle:
            run_qp_single(out, sc, segments, provider, trial_seed, trial_index,
                          without, utility_topup);
            break;
        case MechanismKind::SegSingle:
            run_seg_single(out, sc, segments, provider, trial_seed, trial_index, without);
            break;
        case MechanismKind::QpMulti:
            run_qp_multi(out, sc, provider, trial_seed, trial_index);
            break;
        case MechanismKind::SegMulti:
            run_seg_multi(out, sc, provider, trial_seed, trial_index);
            break;
    }
    return out;
}

// ---- metrics --------------------------------------------------------------

TrialMetrics metrics(const TrialResult& trial, const Scenario& sc) {
    TrialMetrics m;
    const WelfareFunction& organic =
        trial.mech.is_multi() ? sc.welfare_multi : sc.welfare_single;

    double revenue = 0.0;
    int ads = 0;
    for (const SegmentEntry& e : trial.entries) {
        m.relevance += e.winner_weight;
        if (e.is_ad) {
            ++ads;
            revenue += e.per_click_payment * e.winner_weight;
            m.social_welfare +=
                sc.advertiser(e.winner).value * e.winner_weight;
        } else {
            m.social_welfare += organic.normalized(e.winner_weight);
        }
    }
    m.num_ads = static_cast<double>(ads);
    m.revenue_per_ad = ads > 0 ? revenue / static_cast<double>(ads) : 0.0;
    if (!trial.mech.is_multi()) {
        double kl = 0.0;
        for (double v : trial.per_segment_kl) kl += v;
        m.kl = kl;
    }
    return m;
}

// ---- experiment -----------------------------------------------------------

namespace {
SummaryStat summarize(const std::vector<double>& xs) {
    SummaryStat s;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return s;
}
}  // namespace

MetricsReport run_experiment(std::span<const MechanismSpec> mechanisms,
                             const Scenario& sc, int trials,
                             std::uint64_t base_seed, int segments,
                             const RelevanceProvider& provider,
                             bool utility_topup) {
    if (trials < 2)
        throw std::invalid_argument("run_experiment: needs >= 2 trials for a variance estimate");
    if (segments <= 0) segments = sc.segments;

    MetricsReport rep;
    rep.scenario = sc.name;
    rep.base_seed = base_seed;
    rep.trials = trials;
    rep.segments = segments;
    rep.provider = provider.name();

    for (const MechanismSpec& mech : mechanisms) {
        MechanismSummary row;
        row.mech = mech;
        std::vector<double> rev, sw, relv, na, kls;
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(t));
            const TrialResult tr =
                run_trial(mech, sc, segments, seed, provider, utility_topup, t);
            const TrialMetrics tm = metrics(tr, sc);
            row.per_trial.push_back(tm);
            row.trial_seeds.push_back(seed);
            rev.push_back(tm.revenue_per_ad);
            sw.push_back(tm.social_welfare);
            relv.push_back(tm.relevance);
            na.push_back(tm.num_ads);
            if (tm.kl) kls.push_back(*tm.kl);
        }
        row.revenue_per_ad = summarize(rev);
        row.social_welfare = summarize(sw);
        row.relevance = summarize(relv);
        row.num_ads = summarize(na);
        if (kls.size() == rev.size()) row.kl = summarize(kls);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace qpa
