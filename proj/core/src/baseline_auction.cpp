#include "qpa/baseline_auction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qpa {

namespace {

void check_pool(std::span<const double> bids, std::span<const double> weights,
                std::span<const int> pool) {
    const int n = static_cast<int>(bids.size());
    if (weights.size() != static_cast<size_t>(n) + 1)
        throw std::invalid_argument("baseline: " + std::to_string(weights.size()) + " weights for " +
                                    std::to_string(n) + " bids (need n+1)");
    for (int id : pool)
        if (id < 1 || id > n)
            throw std::invalid_argument("baseline: pool id " + std::to_string(id) + " out of range [1, n]");
}

}  // namespace

std::vector<double> seg_allocate(std::span<const double> bids,
                                 std::span<const double> weights,
                                 std::span<const int> pool) {
    check_pool(bids, weights, pool);
    std::vector<double> x(weights.size(), 0.0);
    double total = 0.0;
    for (int id : pool) total += bids[static_cast<size_t>(id - 1)] * weights[static_cast<size_t>(id)];
    if (total <= 0.0) return x;   // all-zero bids: nobody is shown
    for (int id : pool)
        x[static_cast<size_t>(id)] =
            bids[static_cast<size_t>(id - 1)] * weights[static_cast<size_t>(id)] / total;
    return x;
}

double seg_payment(int id, std::span<const double> bids,
                   std::span<const double> weights, std::span<const int> pool) {
    check_pool(bids, weights, pool);
    if (std::find(pool.begin(), pool.end(), id) == pool.end())
        throw std::invalid_argument("seg_payment: advertiser " + std::to_string(id) + " is not in the pool");
    const double b = bids[static_cast<size_t>(id - 1)];
    const double q = weights[static_cast<size_t>(id)];
    double R = 0.0;   // competing mass sum_{j != i} b_j q_j
    for (int j : pool)
        if (j != id) R += bids[static_cast<size_t>(j - 1)] * weights[static_cast<size_t>(j)];
    if (R <= 0.0 || b <= 0.0) return 0.0;   // monopolist always wins and pays nothing
    const double qb = q * b;
    return (R / q) * std::log((qb + R) / R) - b * R / (qb + R);
}

std::vector<BaselineDraw> seg_multi_select(int k, std::span<const double> bids,
                                           std::span<const double> weights,
                                           std::span<const int> pool, Rng& rng) {
    check_pool(bids, weights, pool);
    if (k < 0)
        throw std::invalid_argument("seg_multi_select: k = " + std::to_string(k) +
                                    " is negative");
    const int draws_wanted = std::min(k, static_cast<int>(pool.size()));
    std::vector<int> remaining(pool.begin(), pool.end());
    std::vector<BaselineDraw> draws;
    draws.reserve(static_cast<size_t>(draws_wanted));
    for (int d = 0; d < draws_wanted; ++d) {
        std::vector<double> mass(remaining.size());
        for (size_t j = 0; j < remaining.size(); ++j)
            mass[j] = bids[static_cast<size_t>(remaining[j] - 1)] *
                      weights[static_cast<size_t>(remaining[j])];
        const int pick = rng.categorical(mass);
        const int id = remaining[static_cast<size_t>(pick)];
        draws.push_back({id, seg_payment(id, bids, weights, remaining)});
        remaining.erase(remaining.begin() + pick);
    }
    return draws;
}

}  // namespace qpa
