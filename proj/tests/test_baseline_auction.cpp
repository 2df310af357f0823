#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qpa/baseline_auction.hpp"
#include "qpa/random.hpp"
#include "qpa/scenario_io.hpp"

using namespace qpa;

namespace {
struct Fixture {
    Scenario sc = load_scenario("scenario1");
    std::vector<double> bids = sc.bids();
    std::vector<double> w = sc.relevance.weights_at(0);
    std::vector<int> pool = sc.all_ad_ids();
};
}

TEST_SUITE("baseline_auction") {

TEST_CASE("seg_allocate: bid-weighted relevance shares over the pool") {
    Fixture fx;
    const std::vector<double> x = seg_allocate(fx.bids, fx.w, fx.pool);
    CHECK(x[0] == 0.0);   // the baseline never shows organic content
    CHECK(x[1] == doctest::Approx(0.279279279279279).epsilon(1e-13));
    CHECK(x[2] == doctest::Approx(0.301801801801802).epsilon(1e-13));
    CHECK(x[3] == doctest::Approx(0.183183183183183).epsilon(1e-13));
    CHECK(x[4] == doctest::Approx(0.147147147147147).epsilon(1e-13));
    CHECK(x[5] == doctest::Approx(0.0885885885885886).epsilon(1e-13));
    CHECK(std::accumulate(x.begin(), x.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("seg_allocate: restricted pool renormalizes over members") {
    Fixture fx;
    const std::vector<int> pool{2, 5};
    const std::vector<double> x = seg_allocate(fx.bids, fx.w, pool);
    const double total = 3.0 * 0.67 + 1.0 * 0.59;
    CHECK(x[2] == doctest::Approx(3.0 * 0.67 / total).epsilon(1e-13));
    CHECK(x[5] == doctest::Approx(1.0 * 0.59 / total).epsilon(1e-13));
    CHECK(x[1] == 0.0);
}

TEST_CASE("seg_payment: worked-scenario per-click prices") {
    Fixture fx;
    const double expect[] = {0.373349321490374, 0.398723363661529, 0.170844898896512,
                             0.139346682729540, 0.0429250944343642};
    for (int i = 1; i <= 5; ++i)
        CHECK(seg_payment(i, fx.bids, fx.w, fx.pool) ==
              doctest::Approx(expect[i - 1]).epsilon(1e-12));
}

TEST_CASE("seg_payment: small closed forms by hand") {
    // Two unit-relevance ads, b = (3, 1): rival mass R_1 = 1 gives
    // p_1 = ln 4 - 3/4; with b = (1, 1), each pays ln 2 - 1/2.
    const std::vector<double> w{0.5, 1.0, 1.0};
    const std::vector<int> pool{1, 2};
    CHECK(seg_payment(1, std::vector<double>{3.0, 1.0}, w, pool) ==
          doctest::Approx(0.636294361119891).epsilon(1e-13));
    CHECK(seg_payment(1, std::vector<double>{1.0, 1.0}, w, pool) ==
          doctest::Approx(0.193147180559945).epsilon(1e-13));
    CHECK(seg_payment(2, std::vector<double>{1.0, 1.0}, w, pool) ==
          doctest::Approx(0.193147180559945).epsilon(1e-13));
}

TEST_CASE("seg_payment: a monopolist pays nothing") {
    const std::vector<double> w{0.5, 0.8};
    CHECK(seg_payment(1, std::vector<double>{2.0}, w, std::vector<int>{1}) == 0.0);
}

TEST_CASE("seg_payment: payment is positive, below bid-share value, monotone in bid") {
    Fixture fx;
    for (int i = 1; i <= 5; ++i) {
        const double p = seg_payment(i, fx.bids, fx.w, fx.pool);
        const std::vector<double> x = seg_allocate(fx.bids, fx.w, fx.pool);
        CHECK(p > 0.0);
        CHECK(p <= fx.bids[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i)]);
    }
    std::vector<double> lo = fx.bids, hi = fx.bids;
    lo[0] = 1.0;
    hi[0] = 5.0;
    CHECK(seg_payment(1, lo, fx.w, fx.pool) < seg_payment(1, hi, fx.w, fx.pool));
}

TEST_CASE("seg_multi_select: deterministic given the generator state") {
    Fixture fx;
    Rng a(42), b(42);
    const std::vector<BaselineDraw> first = seg_multi_select(3, fx.bids, fx.w, fx.pool, a);
    const std::vector<BaselineDraw> second = seg_multi_select(3, fx.bids, fx.w, fx.pool, b);
    REQUIRE(first.size() == 3);
    for (size_t k = 0; k < 3; ++k) {
        CHECK(first[k].id == second[k].id);
        CHECK(first[k].per_click_payment == second[k].per_click_payment);
    }
    // Winners are distinct: selection is without replacement.
    CHECK(first[0].id != first[1].id);
    CHECK(first[1].id != first[2].id);
    CHECK(first[0].id != first[2].id);
}

TEST_CASE("seg_multi_select: later draws are priced against the shrunken pool") {
    // With two ads, the second draw is a monopolist and pays zero.
    const std::vector<double> w{0.5, 0.9, 0.8};
    const std::vector<double> bids{2.0, 1.0};
    const std::vector<int> pool{1, 2};
    Rng rng(7);
    const std::vector<BaselineDraw> draws = seg_multi_select(2, bids, w, pool, rng);
    REQUIRE(draws.size() == 2);
    CHECK(draws[0].per_click_payment > 0.0);
    CHECK(draws[1].per_click_payment == 0.0);
    // First winner's price matches the full-pool closed form.
    CHECK(draws[0].per_click_payment ==
          doctest::Approx(seg_payment(draws[0].id, bids, w, pool)).epsilon(1e-15));
}

TEST_CASE("seg_multi_select: k beyond the pool returns every ad once") {
    Fixture fx;
    Rng rng(9);
    const std::vector<BaselineDraw> draws = seg_multi_select(9, fx.bids, fx.w, fx.pool, rng);
    CHECK(draws.size() == 5);
}

TEST_CASE("seg_allocate: rejects out-of-range pools") {
    Fixture fx;
    CHECK_THROWS_AS((void)seg_allocate(fx.bids, fx.w, std::vector<int>{0}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)seg_allocate(fx.bids, fx.w, std::vector<int>{6}),
                    std::invalid_argument);
}

}  // TEST_SUITE
