#pragma once

#include <limits>
#include <span>
#include <vector>

#include "qpa/model.hpp"

// Reserve-price screening.  An advertiser enters the auction only if its bid
// clears the endogenous reserve r_i = f_hat(q_0) / q_i, i.e. only if showing
// the ad is worth at least as much per selection as organic content.  The
// surviving set S is augmented with the organic arm and the weights are
// renormalized over S* = S + {0}.

namespace qpa {

struct EligibleContext {
    // Members of S*, ascending by id; star.front() == 0 (organic) always.
    std::vector<int> star;
    // Renormalized weights q~_i = q_i / sum_{j in S*} q_j, parallel to star.
    std::vector<double> q_tilde;
    // Scores parallel to star: s_0 = f~(q_0), s_i = q~_i * b_i for ads.
    std::vector<double> scores;
    // Reserve prices by participant id (size n+1).  reserves[0] == 0; ads
    // outside the screened pool hold quiet NaN.
    std::vector<double> reserves;

    double f_tilde_q0 = 0.0;     // f_hat(q_0) / sum_{j in S*} q_j
    double f_hat_q0 = 0.0;       // f_hat(q_0) before renormalization
    double sum_q_star = 0.0;     // sum of raw weights over S*
    double organic_weight = 0.0; // q_0 at this segment

    // Ads of S (star minus the organic arm).
    std::vector<int> eligible() const;
    // Position of id inside star, or -1.
    int index_of(int id) const;
    double q_tilde_of(int id) const;
    bool is_eligible(int id) const { return index_of(id) > 0; }
};

// r_i = f_hat_q0 / q_i.  Throws std::domain_error for q_i <= 0.
double reserve_price(double f_hat_q0, double q_i);

// Screens `pool` (ad ids) against bids and builds the renormalized context.
// `weights` spans all participants (index 0 = organic); `organic_welfare`
// supplies f_hat.  An empty pool yields the organic-only context S* = {0}.
EligibleContext build_context(std::span<const double> bids,
                              std::span<const double> weights,
                              const WelfareFunction& organic_welfare,
                              std::span<const int> pool);

// Convenience overload over the full ad pool {1..n}.
EligibleContext build_context(std::span<const double> bids,
                              std::span<const double> weights,
                              const WelfareFunction& organic_welfare);

}  // namespace qpa
