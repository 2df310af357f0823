#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "qpa/model.hpp"
#include "qpa/random.hpp"
#include "qpa/scenario_io.hpp"

using namespace qpa;

TEST_SUITE("model") {

TEST_CASE("WelfareFunction: power-law values and normalization") {
    WelfareFunction f{2.0, 0.8, 1.0};
    CHECK(f(0.8) == doctest::Approx(1.67302328414604).epsilon(1e-13));
    CHECK(f.normalized(0.8) == doctest::Approx(1.67302328414604).epsilon(1e-13));

    WelfareFunction g{1.5, 0.8, 1.0};
    CHECK(g(0.8) == doctest::Approx(1.25476746310953).epsilon(1e-13));

    WelfareFunction h{0.7, 0.8, 1.0};
    CHECK(h(0.78) == doctest::Approx(0.573817411684271).epsilon(1e-13));

    WelfareFunction scaled{2.0, 0.8, 4.0};
    CHECK(scaled.normalized(0.8) == doctest::Approx(1.67302328414604 / 4.0).epsilon(1e-13));
}

TEST_CASE("WelfareFunction: domain is strictly positive quality") {
    WelfareFunction f{2.0, 0.8, 1.0};
    CHECK_THROWS_AS((void)f(0.0), std::domain_error);
    CHECK_THROWS_AS((void)f(-0.3), std::domain_error);
    CHECK_THROWS_AS((void)f.normalized(0.0), std::domain_error);
}

TEST_CASE("WelfareFunction: ratio is invariant to common quality rescaling") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        WelfareFunction f{rng.uniform(0.2, 3.0), rng.uniform(0.05, 0.95), 1.0};
        const double q1 = rng.uniform(0.05, 1.0);
        const double q2 = rng.uniform(0.05, 1.0);
        const double c = rng.uniform(0.1, 10.0);
        const double lhs = f(c * q1) / f(c * q2);
        const double rhs = f(q1) / f(q2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("Scenario::validate: reports every violation, not just the first") {
    Scenario sc = load_scenario("scenario1");
    sc.welfare_single.eta = -1.0;                 // violation 1
    sc.params.lambda_tilde = 0.0;                 // violation 2
    sc.relevance.rows[1][0] = 1.5;                // violation 3
    sc.rel_matrix[0][1] = 0.9;                    // violation 4 (asymmetric now)
    try {
        sc.validate();
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("eta") != std::string::npos);
        CHECK(msg.find("lambda_tilde") != std::string::npos);
        CHECK(msg.find("relevance") != std::string::npos);
        CHECK(msg.find("symmetr") != std::string::npos);
    }
}

TEST_CASE("Scenario: accessors index ads by id") {
    const Scenario sc = load_scenario("scenario1");
    CHECK(sc.n_ads() == 5);
    CHECK(sc.advertiser(1).label == "SunWing");
    CHECK(sc.advertiser(5).label == "GridPower");
    CHECK_THROWS_AS((void)sc.advertiser(0), std::invalid_argument);
    CHECK_THROWS_AS((void)sc.advertiser(6), std::invalid_argument);
    CHECK(sc.bids() == std::vector<double>{3, 3, 2, 2, 1});
    CHECK(sc.all_ad_ids() == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("kl_divergence: zero mass contributes zero") {
    const std::vector<double> x{0.0, 0.5, 0.5};
    const std::vector<double> y{0.2, 0.4, 0.4};
    const double expect = 0.5 * std::log(0.5 / 0.4) * 2.0;
    CHECK(kl_divergence(x, y) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(kl_divergence(y, y) == 0.0);
}

TEST_CASE("kl_divergence: support violations and length mismatches throw") {
    CHECK_THROWS_AS((void)kl_divergence(std::vector<double>{0.5, 0.5},
                                        std::vector<double>{1.0, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS((void)kl_divergence(std::vector<double>{1.0},
                                        std::vector<double>{0.5, 0.5}),
                    std::invalid_argument);
}

TEST_CASE("kl_divergence: nonnegative and zero only at equality") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(4), y(4);
        double sx = 0, sy = 0;
        for (int k = 0; k < 4; ++k) {
            sx += (x[static_cast<size_t>(k)] = rng.uniform(0.01, 1.0));
            sy += (y[static_cast<size_t>(k)] = rng.uniform(0.01, 1.0));
        }
        for (int k = 0; k < 4; ++k) {
            x[static_cast<size_t>(k)] /= sx;
            y[static_cast<size_t>(k)] /= sy;
        }
        CHECK(kl_divergence(x, y) >= -1e-15);
    }
}

TEST_CASE("mix: convex combination of distributions") {
    std::vector<OutcomeDistribution> comps{{{1.0, 0.0}}, {{0.0, 1.0}}};
    const std::vector<double> w{0.25, 0.75};
    const std::vector<double> m = mix(w, comps);
    CHECK(m[0] == doctest::Approx(0.25));
    CHECK(m[1] == doctest::Approx(0.75));

    CHECK_THROWS_AS((void)mix(std::vector<double>{0.7, 0.7}, comps), std::domain_error);
    std::vector<OutcomeDistribution> ragged{{{1.0, 0.0}}, {{1.0}}};
    CHECK_THROWS_AS((void)mix(w, ragged), std::invalid_argument);
}

TEST_CASE("OutcomeDistribution::validate: rejects non-distributions") {
    const OutcomeDistribution good{{0.5, 0.5}};
    const OutcomeDistribution bad_sum{{0.5, 0.6}};
    const OutcomeDistribution negative{{-0.1, 1.1}};
    CHECK_NOTHROW(good.validate());
    CHECK_THROWS_AS(bad_sum.validate(), std::domain_error);
    CHECK_THROWS_AS(negative.validate(), std::domain_error);
}

}  // TEST_SUITE
