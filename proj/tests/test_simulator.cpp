#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "qpa/multi_auction.hpp"
#include "qpa/random.hpp"
#include "qpa/scenario_io.hpp"
#include "qpa/simulator.hpp"

using namespace qpa;

namespace {

// One advertiser, varying organic weights across three segments.  With
// bid 0.01 the ad never clears its reserve (~0.497); with bid 2.0 it always
// does and is the whole pool.
Scenario one_ad_scenario(double bid) {
    Scenario sc;
    sc.name = "probe";
    sc.advertisers = {{1, "OnlyAd", bid, bid}};
    sc.relevance.rows = {{0.8, 0.6, 0.7}, {0.9, 0.9, 0.9}};
    sc.welfare_single = {0.5, 0.5, 1.0};
    sc.welfare_multi = {0.5, 0.5, 1.0};
    sc.params = {1.0, 0.5, 1};
    sc.rel_matrix = {{1.0, 0.4}, {0.4, 1.0}};
    sc.segments = 3;
    sc.validate();
    return sc;
}

bool same_entries(const TrialResult& a, const TrialResult& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (size_t i = 0; i < a.entries.size(); ++i) {
        const SegmentEntry& x = a.entries[i];
        const SegmentEntry& y = b.entries[i];
        if (x.segment != y.segment || x.winner != y.winner || x.is_ad != y.is_ad ||
            x.per_click_payment != y.per_click_payment ||
            x.winner_weight != y.winner_weight)
            return false;
    }
    return a.per_segment_kl == b.per_segment_kl;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("run_trial: identical seeds reproduce every mechanism exactly") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    for (const MechanismSpec& m : all_mechanisms()) {
        const TrialResult a = run_trial(m, sc, 3, 42, provider);
        const TrialResult b = run_trial(m, sc, 3, 42, provider);
        CHECK(same_entries(a, b));
    }
}

TEST_CASE("run_trial: segment indexes beyond the table wrap around") {
    const Scenario sc = one_ad_scenario(0.01);   // never eligible -> organic only
    const StaticTable provider;
    const TrialResult t =
        run_trial({MechanismKind::QpSingle, Replacement::With}, sc, 5, 11, provider);
    REQUIRE(t.entries.size() == 5);
    const std::vector<double> expected{0.8, 0.6, 0.7, 0.8, 0.6};
    for (size_t i = 0; i < t.entries.size(); ++i) {
        CHECK(t.entries[i].winner == 0);
        CHECK(!t.entries[i].is_ad);
        CHECK(t.entries[i].winner_weight == expected[i]);
        CHECK(t.per_segment_kl[i] == 0.0);
        CHECK(t.eligible_sets[i] == std::vector<int>{0});
    }
}

TEST_CASE("run_trial: exhausted pool falls back to the organic arm") {
    const Scenario sc = one_ad_scenario(2.0);
    const StaticTable provider;
    const TrialResult t = run_trial({MechanismKind::SegSingle, Replacement::Without},
                                    sc, 3, 5, provider);
    REQUIRE(t.entries.size() == 3);
    CHECK(t.entries[0].winner == 1);
    CHECK(t.entries[0].is_ad);
    CHECK(t.entries[0].per_click_payment == 0.0);   // monopolist
    CHECK(t.entries[0].winner_weight == 0.9);
    CHECK(t.entries[1].winner == 0);
    CHECK(t.entries[1].winner_weight == 0.6);
    CHECK(t.entries[2].winner == 0);
    CHECK(t.entries[2].winner_weight == 0.7);
    CHECK(t.per_segment_kl == std::vector<double>{0.0, 0.0, 0.0});

    const TrialMetrics m = metrics(t, sc);
    CHECK(m.num_ads == 1.0);
    CHECK(m.revenue_per_ad == 0.0);
    CHECK(m.relevance == doctest::Approx(2.2).epsilon(1e-15));
}

TEST_CASE("run_trial: without replacement no ad wins twice") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (MechanismKind kind : {MechanismKind::QpSingle, MechanismKind::SegSingle}) {
            const TrialResult t =
                run_trial({kind, Replacement::Without}, sc, 3, seed, provider);
            std::set<int> ad_winners;
            for (const SegmentEntry& e : t.entries)
                if (e.is_ad) CHECK(ad_winners.insert(e.winner).second);
        }
    }
}

TEST_CASE("run_trial: the multi auction emits one entry per chosen item") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    const TrialResult t =
        run_trial({MechanismKind::QpMulti, Replacement::With}, sc, 3, 123, provider);
    const MultiOutcome m = vcg_run(sc, 0);

    REQUIRE(t.entries.size() == m.chosen.size());
    for (size_t i = 0; i < t.entries.size(); ++i) {
        const SegmentEntry& e = t.entries[i];
        CHECK(e.winner == m.chosen[i]);
        CHECK(e.is_ad == (m.chosen[i] != 0));
        CHECK(e.winner_weight == m.weights.of(m.chosen[i]));
        CHECK(e.per_click_payment == m.payment_of(m.chosen[i]));
    }
    CHECK(t.per_segment_kl.empty());
    CHECK(!metrics(t, sc).kl.has_value());
}

TEST_CASE("run_trial: the baseline multi selector never repeats a winner") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TrialResult t = run_trial({MechanismKind::SegMulti, Replacement::With},
                                        sc, 3, seed, provider);
        REQUIRE(t.entries.size() == 3);   // k_baseline = 3
        std::set<int> winners;
        for (const SegmentEntry& e : t.entries) {
            CHECK(e.is_ad);
            CHECK(winners.insert(e.winner).second);
        }
    }
}

TEST_CASE("metrics: aggregates follow the per-entry formulas") {
    const Scenario sc = load_scenario("scenario1");
    TrialResult t;
    t.mech = {MechanismKind::SegSingle, Replacement::With};
    t.entries.push_back({0, 1, true, 0.5, 0.8});
    t.entries.push_back({1, 0, false, 0.0, 0.62});
    t.per_segment_kl = {0.25, 0.1};

    const TrialMetrics m = metrics(t, sc);
    CHECK(m.num_ads == 1.0);
    CHECK(m.revenue_per_ad == doctest::Approx(0.5 * 0.8).epsilon(1e-15));
    CHECK(m.relevance == doctest::Approx(0.8 + 0.62).epsilon(1e-15));
    const double expected_sw = 3.0 * 0.8 + sc.welfare_single.normalized(0.62);
    CHECK(m.social_welfare == doctest::Approx(expected_sw).epsilon(1e-15));
    REQUIRE(m.kl.has_value());
    CHECK(*m.kl == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("metrics: multi mechanisms price organic value with the whole-output welfare") {
    const Scenario sc = load_scenario("scenario1");
    TrialResult t;
    t.mech = {MechanismKind::QpMulti, Replacement::With};
    t.entries.push_back({0, 0, false, 0.0, 0.9});
    const TrialMetrics m = metrics(t, sc);
    CHECK(m.social_welfare == doctest::Approx(sc.welfare_multi.normalized(0.9)).epsilon(1e-15));
    CHECK(m.revenue_per_ad == 0.0);
    CHECK(!m.kl.has_value());
}

TEST_CASE("NoisyTable: zero noise reduces to the static table") {
    const Scenario sc = load_scenario("scenario1");
    const NoisyTable noisy(0.0, 0.0);
    const StaticTable flat;
    for (int seg = 0; seg < 3; ++seg)
        CHECK(noisy.weights(sc, seg, 0, 99) == flat.weights(sc, seg, 0, 99));
}

TEST_CASE("NoisyTable: perturbed weights stay clipped to (0, 1]") {
    const Scenario sc = load_scenario("scenario1");
    const NoisyTable noisy(5.0, 5.0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::vector<double> w = noisy.weights(sc, 0, 0, seed);
        for (double q : w) {
            CHECK(q >= 1e-9);
            CHECK(q <= 1.0);
        }
    }
}

TEST_CASE("NoisyTable: the noise stream is keyed by trial seed, not trial index") {
    const Scenario sc = load_scenario("scenario1");
    const NoisyTable noisy(0.05, 0.02);
    CHECK(noisy.weights(sc, 1, 3, 77) == noisy.weights(sc, 1, 9, 77));
    CHECK(noisy.weights(sc, 1, 3, 77) != noisy.weights(sc, 1, 3, 78));
    CHECK(noisy.weights(sc, 1, 3, 77) != noisy.weights(sc, 2, 3, 77));
}

TEST_CASE("FileReplay: trials cycle and shapes are validated") {
    const Scenario sc = load_scenario("scenario1");
    const std::vector<double> wa{0.8, 0.6, 0.6, 0.6, 0.5, 0.6};
    const std::vector<double> wb{0.7, 0.5, 0.7, 0.5, 0.5, 0.5};
    const FileReplay replay({{wa}, {wb}});
    CHECK(replay.weights(sc, 0, 0, 1) == wa);
    CHECK(replay.weights(sc, 0, 1, 1) == wb);
    CHECK(replay.weights(sc, 0, 2, 1) == wa);   // trial_index wraps
    CHECK(replay.weights(sc, 4, 0, 1) == wa);   // segment wraps too

    using Trace = std::vector<std::vector<std::vector<double>>>;
    CHECK_THROWS_AS((void)FileReplay(Trace{}), std::invalid_argument);
    const FileReplay short_vec(Trace{{{0.8, 0.6}}});
    CHECK_THROWS_AS((void)short_vec.weights(sc, 0, 0, 1), std::invalid_argument);
    const FileReplay no_segments(Trace{{}});
    CHECK_THROWS_AS((void)no_segments.weights(sc, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("mechanism ids: canonical names round-trip through the parser") {
    const std::vector<std::string> expected{"qp-repl",  "qp-norepl", "qp-multi",
                                            "seg-repl", "seg-norepl", "seg-multi"};
    const std::vector<MechanismSpec> all = all_mechanisms();
    REQUIRE(all.size() == expected.size());
    std::set<std::string> display;
    for (size_t i = 0; i < all.size(); ++i) {
        CHECK(mechanism_id(all[i]) == expected[i]);
        const auto parsed = parse_mechanism(expected[i]);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == all[i]);
        CHECK(display.insert(mechanism_display_name(all[i])).second);
    }
    CHECK(!parse_mechanism("qp").has_value());
    CHECK(!parse_mechanism("").has_value());
}

TEST_CASE("run_experiment: extending the trial count preserves the prefix") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    const std::vector<MechanismSpec> mechs{{MechanismKind::QpSingle, Replacement::With},
                                           {MechanismKind::SegMulti, Replacement::With}};
    const MetricsReport small = run_experiment(mechs, sc, 4, 2024, 0, provider);
    const MetricsReport big = run_experiment(mechs, sc, 7, 2024, 0, provider);

    REQUIRE(small.rows.size() == 2);
    REQUIRE(big.rows.size() == 2);
    CHECK(small.segments == 3);   // segments <= 0 means "use the scenario's"
    for (size_t r = 0; r < small.rows.size(); ++r) {
        const MechanismSummary& s = small.rows[r];
        const MechanismSummary& b = big.rows[r];
        REQUIRE(s.per_trial.size() == 4);
        REQUIRE(b.per_trial.size() == 7);
        for (size_t t = 0; t < s.per_trial.size(); ++t) {
            CHECK(s.trial_seeds[t] == b.trial_seeds[t]);
            CHECK(s.trial_seeds[t] == derive_seed(2024, static_cast<std::uint64_t>(t)));
            CHECK(s.per_trial[t].revenue_per_ad == b.per_trial[t].revenue_per_ad);
            CHECK(s.per_trial[t].social_welfare == b.per_trial[t].social_welfare);
            CHECK(s.per_trial[t].relevance == b.per_trial[t].relevance);
            CHECK(s.per_trial[t].num_ads == b.per_trial[t].num_ads);
        }
    }
    CHECK(small.rows[0].kl.has_value());    // single-allocation mechanism
    CHECK(!small.rows[1].kl.has_value());   // multi-allocation mechanism
}

TEST_CASE("run_experiment: fewer than two trials cannot estimate a spread") {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    const std::vector<MechanismSpec> mechs{{MechanismKind::QpSingle, Replacement::With}};
    CHECK_THROWS_AS((void)run_experiment(mechs, sc, 1, 1, 0, provider),
                    std::invalid_argument);
}

}  // TEST_SUITE
