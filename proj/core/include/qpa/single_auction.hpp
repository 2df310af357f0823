#pragma once

#include <span>
#include <vector>

#include "qpa/model.hpp"
#include "qpa/screening.hpp"

// Single-allocation auction: one winner per output segment.
//
// The allocation maximizes the KL-regularized surrogate welfare
//     sum_{i in S} x_i q~_i b_i + x_0 f~(q_0) - lambda~ * KL(x || q~)
// over the simplex on S*, whose unique maximizer is the tilted softmax
//     x_i = q~_i exp(s_i / lambda~) / sum_j q~_j exp(s_j / lambda~).
// Payments follow the envelope construction for this monotone allocation,
// anchored at zero utility when bidding the reserve, which makes the pair
// dominant-strategy truthful and individually rational.

namespace qpa {

struct Allocation {
    std::vector<int> members;    // == ctx.star
    std::vector<double> x;       // parallel, sums to 1

    double x_of(int id) const;   // 0.0 for ids outside S*
};

Allocation allocate(const EligibleContext& ctx, double lambda_tilde);

// Surrogate objective value at an arbitrary allocation x over S*.
double surrogate_welfare(const EligibleContext& ctx, std::span<const double> x,
                         double lambda_tilde);

// Per-click payment for eligible advertiser id:
//     p~_i = b_i (x_i(b) - 1) + r_i + (lambda~/q~_i) ln( x_i(b) / x_i(r_i, b_-i) )
// where x_i(r_i, b_-i) re-evaluates the softmax with i's score clamped to the
// reserve, holding S* and q~ fixed.  With `utility_topup` the constant
// r_i * x_i(r_i, b_-i) / 2 is granted back to the winner (default off keeps
// the revenue-maximizing zero-utility-at-reserve normalization).
// Throws std::invalid_argument when id is not in S.
double payment(int id, std::span<const double> bids, const EligibleContext& ctx,
               double lambda_tilde, bool utility_topup = false);

struct PaymentSchedule {
    std::vector<int> ids;             // S, ascending
    std::vector<double> per_click;    // p~_i
    std::vector<double> impression;   // ctr_i * p~_i = C * q_i * p~_i

    double per_click_of(int id) const;   // 0.0 when id is not in S
};

struct SegmentOutcome {
    EligibleContext ctx;
    Allocation alloc;
    PaymentSchedule payments;
};

// Full per-segment pipeline on a restricted ad pool: screen, allocate, price.
SegmentOutcome run_segment(const Scenario& sc, int segment,
                           std::span<const int> pool, bool utility_topup = false);
// Same, over the full ad pool.
SegmentOutcome run_segment(const Scenario& sc, int segment,
                           bool utility_topup = false);

}  // namespace qpa
