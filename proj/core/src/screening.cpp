#include "qpa/screening.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace qpa {

std::vector<int> EligibleContext::eligible() const {
    return {star.begin() + 1, star.end()};
}

int EligibleContext::index_of(int id) const {
    for (size_t k = 0; k < star.size(); ++k)
        if (star[k] == id) return static_cast<int>(k);
    return -1;
}

double EligibleContext::q_tilde_of(int id) const {
    const int k = index_of(id);
    return k < 0 ? 0.0 : q_tilde[static_cast<size_t>(k)];
}

double reserve_price(double f_hat_q0, double q_i) {
    if (!(q_i > 0.0)) throw std::domain_error("reserve_price: q_i = " + std::to_string(q_i) + " outside (0, inf)");
    return f_hat_q0 / q_i;
}

EligibleContext build_context(std::span<const double> bids,
                              std::span<const double> weights,
                              const WelfareFunction& organic_welfare,
                              std::span<const int> pool) {
    const int n = static_cast<int>(bids.size());
    if (weights.size() != static_cast<size_t>(n) + 1)
        throw std::invalid_argument("build_context: " + std::to_string(weights.size()) +
                                    " weights for " + std::to_string(n) + " bids (need n+1)");
    std::set<int> seen;
    for (int id : pool) {
        if (id < 1 || id > n)
            throw std::invalid_argument("build_context: pool id " + std::to_string(id) + " out of range [1, n]");
        if (!seen.insert(id).second)
            throw std::invalid_argument("build_context: duplicate pool id " + std::to_string(id));
    }

    EligibleContext ctx;
    ctx.organic_weight = weights[0];
    ctx.f_hat_q0 = organic_welfare.normalized(weights[0]);
    ctx.reserves.assign(static_cast<size_t>(n) + 1, std::numeric_limits<double>::quiet_NaN());
    ctx.reserves[0] = 0.0;

    ctx.star.push_back(0);
    for (int id : seen) {   // ascending
        const double r = reserve_price(ctx.f_hat_q0, weights[static_cast<size_t>(id)]);
        ctx.reserves[static_cast<size_t>(id)] = r;
        if (bids[static_cast<size_t>(id - 1)] >= r) ctx.star.push_back(id);
    }

    ctx.sum_q_star = 0.0;
    for (int id : ctx.star) ctx.sum_q_star += weights[static_cast<size_t>(id)];

    ctx.f_tilde_q0 = ctx.f_hat_q0 / ctx.sum_q_star;
    ctx.q_tilde.reserve(ctx.star.size());
    ctx.scores.reserve(ctx.star.size());
    for (int id : ctx.star) {
        const double qt = weights[static_cast<size_t>(id)] / ctx.sum_q_star;
        ctx.q_tilde.push_back(qt);
        ctx.scores.push_back(id == 0 ? ctx.f_tilde_q0 : qt * bids[static_cast<size_t>(id - 1)]);
    }
    return ctx;
}

EligibleContext build_context(std::span<const double> bids,
                              std::span<const double> weights,
                              const WelfareFunction& organic_welfare) {
    std::vector<int> pool(bids.size());
    for (size_t i = 0; i < bids.size(); ++i) pool[i] = static_cast<int>(i) + 1;
    return build_context(bids, weights, organic_welfare, pool);
}

}  // namespace qpa
