#include "qpa/single_auction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qpa {

namespace {

// Softmax x_i = q~_i exp(s_i/lambda) / Z over arbitrary score vectors,
// max-shifted for overflow safety.
std::vector<double> tilted_softmax(const std::vector<double>& q_tilde,
                                   const std::vector<double>& scores,
                                   double lambda_tilde) {
    const double smax = *std::max_element(scores.begin(), scores.end());
    std::vector<double> x(scores.size());
    double z = 0.0;
    for (size_t k = 0; k < scores.size(); ++k) {
        x[k] = q_tilde[k] * std::exp((scores[k] - smax) / lambda_tilde);
        z += x[k];
    }
    for (double& v : x) v /= z;
    return x;
}

}  // namespace

double Allocation::x_of(int id) const {
    for (size_t k = 0; k < members.size(); ++k)
        if (members[k] == id) return x[k];
    return 0.0;
}

Allocation allocate(const EligibleContext& ctx, double lambda_tilde) {
    if (!(lambda_tilde > 0.0))
        throw std::domain_error("allocate: lambda_tilde = " + std::to_string(lambda_tilde) + " outside (0, inf)");
    return Allocation{ctx.star, tilted_softmax(ctx.q_tilde, ctx.scores, lambda_tilde)};
}

double surrogate_welfare(const EligibleContext& ctx, std::span<const double> x,
                         double lambda_tilde) {
    if (x.size() != ctx.star.size())
        throw std::invalid_argument("surrogate_welfare: allocation size " + std::to_string(x.size()) +
                                    " vs |S*| = " + std::to_string(ctx.star.size()));
    double value = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        value += x[k] * ctx.scores[k];
        if (x[k] > 0.0) value -= lambda_tilde * x[k] * std::log(x[k] / ctx.q_tilde[k]);
    }
    return value;
}

double payment(int id, std::span<const double> bids, const EligibleContext& ctx,
               double lambda_tilde, bool utility_topup) {
    const int k = ctx.index_of(id);
    if (k <= 0)
        throw std::invalid_argument("payment: advertiser " + std::to_string(id) + " is not in the eligible set");
    const double b = bids[static_cast<size_t>(id - 1)];
    const double r = ctx.reserves[static_cast<size_t>(id)];
    const double qt = ctx.q_tilde[static_cast<size_t>(k)];

    const std::vector<double> x_at_bid = tilted_softmax(ctx.q_tilde, ctx.scores, lambda_tilde);
    std::vector<double> scores_at_reserve = ctx.scores;
    scores_at_reserve[static_cast<size_t>(k)] = qt * r;
    const std::vector<double> x_at_reserve = tilted_softmax(ctx.q_tilde, scores_at_reserve, lambda_tilde);

    const double xb = x_at_bid[static_cast<size_t>(k)];
    const double xr = x_at_reserve[static_cast<size_t>(k)];
    double p = b * (xb - 1.0) + r + (lambda_tilde / qt) * std::log(xb / xr);
    if (utility_topup) p -= r * xr / 2.0;
    return p;
}

double PaymentSchedule::per_click_of(int id) const {
    for (size_t k = 0; k < ids.size(); ++k)
        if (ids[k] == id) return per_click[k];
    return 0.0;
}

SegmentOutcome run_segment(const Scenario& sc, int segment,
                           std::span<const int> pool, bool utility_topup) {
    const auto bids = sc.bids();
    const auto weights = sc.relevance.weights_at(segment);

    SegmentOutcome out;
    out.ctx = build_context(bids, weights, sc.welfare_single, pool);
    out.alloc = allocate(out.ctx, sc.params.lambda_tilde);
    for (int id : out.ctx.eligible()) {
        const double p = payment(id, bids, out.ctx, sc.params.lambda_tilde, utility_topup);
        out.payments.ids.push_back(id);
        out.payments.per_click.push_back(p);
        out.payments.impression.push_back(sc.welfare_single.ctr_constant *
                                          weights[static_cast<size_t>(id)] * p);
    }
    return out;
}

SegmentOutcome run_segment(const Scenario& sc, int segment, bool utility_topup) {
    return run_segment(sc, segment, sc.all_ad_ids(), utility_topup);
}

}  // namespace qpa
