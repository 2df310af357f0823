#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qpa/random.hpp"

using namespace qpa;

TEST_SUITE("random") {

TEST_CASE("splitmix64: published known-answer vectors") {
    CHECK(splitmix64(0) == 16294208416658607535ULL);
    CHECK(splitmix64(1) == 10451216379200822465ULL);
    CHECK(splitmix64(42) == 13679457532755275413ULL);
    CHECK(splitmix64(2024) == 11487996472437173461ULL);
}

TEST_CASE("derive_seed: golden-ratio stream derivation") {
    CHECK(derive_seed(7, 3) == 10753165928301472203ULL);
    CHECK(derive_seed(7, 0) == splitmix64(7));
    // Distinct streams from the same base.
    CHECK(derive_seed(7, 1) != derive_seed(7, 2));
}

TEST_CASE("Rng: engine matches the standard mt19937_64 sequence") {
    Rng rng(5489);   // the reference seed of the standard engine
    std::mt19937_64 ref(5489);
    for (int i = 0; i < 9999; ++i) {
        (void)rng.raw();
        (void)ref();
    }
    CHECK(rng.raw() == ref());
    CHECK(rng.raw() == ref());
}

TEST_CASE("Rng::uniform01: 53-bit mantissa construction in [0, 1)") {
    Rng rng(123);
    std::mt19937_64 ref(123);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform01();
        const double expect = static_cast<double>(ref() >> 11) * 0x1.0p-53;
        CHECK(u == expect);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("Rng::uniform: affine map hits the requested interval") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-2.0, 3.0);
        CHECK(v >= -2.0);
        CHECK(v < 3.0);
    }
}

TEST_CASE("Rng::gaussian: sample moments near the target") {
    Rng rng(777);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian(1.5, 2.0);
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(1.5).epsilon(0.02));
    CHECK(var == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("Rng::categorical: frequencies track the weights; zero mass never drawn") {
    Rng rng(31);
    const std::vector<double> w{0.0, 2.0, 0.0, 1.0, 1.0};
    std::vector<int> counts(w.size(), 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(static_cast<double>(counts[1]) / n == doctest::Approx(0.5).epsilon(0.05));
    CHECK(static_cast<double>(counts[3]) / n == doctest::Approx(0.25).epsilon(0.05));
    CHECK(static_cast<double>(counts[4]) / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("Rng::categorical: rejects invalid weight vectors") {
    Rng rng(1);
    CHECK_THROWS_AS((void)rng.categorical(std::vector<double>{1.0, -0.5}),
                    std::domain_error);
    CHECK_THROWS_AS((void)rng.categorical(std::vector<double>{0.0, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS((void)rng.categorical(std::vector<double>{}), std::domain_error);
}

TEST_CASE("Rng::uniform_int: inclusive bounds") {
    Rng rng(8);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 2000; ++i) {
        const int v = rng.uniform_int(2, 5);
        CHECK(v >= 2);
        CHECK(v <= 5);
        saw_lo = saw_lo || v == 2;
        saw_hi = saw_hi || v == 5;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("Rng: identical seeds give identical streams") {
    Rng a(654), b(654);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform01() == b.uniform01());
        CHECK(a.gaussian(0.0, 1.0) == b.gaussian(0.0, 1.0));
    }
}

}  // TEST_SUITE
