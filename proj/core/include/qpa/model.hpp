#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Domain model for quality-preserving ad auctions over LLM-style output.
//
// Conventions used throughout the library:
//   * participant 0 is always the organic (ad-free) content arm;
//   * advertisers carry ids 1..n, stored in id order;
//   * a "weights" vector has n+1 entries indexed by participant id,
//     weights[0] being the organic relevance q_0;
//   * a "bids" vector has n entries, bids[i-1] belonging to advertiser i.

namespace qpa {

struct Advertiser {
    int id = 0;               // 1..n
    std::string label;
    double bid = 0.0;         // reported per-click bid, >= 0
    double value = 0.0;       // private per-click value, > 0 (defaults to bid)
};

// Per-segment relevance weights for organic content and every advertiser.
// rows[id][segment], id in [0..n], segment in [0..T-1]; entries in (0, 1].
struct RelevanceTable {
    std::vector<std::vector<double>> rows;

    int participants() const { return static_cast<int>(rows.size()); }
    int segments() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }

    double weight(int id, int segment) const;
    // Column slice: weights of all participants at one segment.
    std::vector<double> weights_at(int segment) const;

    void collect_violations(std::vector<std::string>& out) const;
};

// Organic welfare from the power family f(q) = eta * q^beta with eta > 0 and
// 0 < beta < 1.  The click-through constant C only rescales impression-level
// reporting: mechanisms consume the normalized form f_hat = f / C.
// The domain is all q > 0 (set-level attributions can exceed 1).
struct WelfareFunction {
    double eta = 1.0;
    double beta = 0.5;
    double ctr_constant = 1.0;   // C > 0

    double operator()(double q) const;    // f(q) = eta * q^beta
    double normalized(double q) const;    // f_hat(q) = f(q) / C

    void collect_violations(std::vector<std::string>& out, const std::string& field) const;
};

struct AuctionParams {
    double lambda_tilde = 1.0;   // KL regularization strength, > 0
    double xi = 0.0;             // pairwise set-weight strength, >= 0
    int k_baseline = 1;          // ads drawn by the baseline multi selector, >= 1

    void collect_violations(std::vector<std::string>& out) const;
};

// A probability vector over a finite abstract outcome alphabet.
struct OutcomeDistribution {
    std::vector<double> p;

    void validate() const;   // throws std::domain_error if not a distribution
};

struct Scenario {
    std::string name;
    std::vector<Advertiser> advertisers;       // ids 1..n, in order
    RelevanceTable relevance;                  // (n+1) x T
    WelfareFunction welfare_single;            // organic welfare for per-segment auctions
    WelfareFunction welfare_multi;             // organic welfare for the whole-output auction
    AuctionParams params;
    std::vector<std::vector<double>> rel_matrix;   // (n+1)x(n+1) symmetric, entries in [0,1]
    int segments = 1;                          // T

    int n_ads() const { return static_cast<int>(advertisers.size()); }
    const Advertiser& advertiser(int id) const;
    std::vector<double> bids() const;          // bids[i-1] = advertiser i's bid
    std::vector<double> values() const;
    std::vector<int> all_ad_ids() const;       // {1..n}

    // Throws std::invalid_argument whose message lists *every* violated
    // constraint (field name plus the violated range), not just the first.
    void validate() const;
};

// KL divergence sum_i x_i ln(x_i / y_i) in nats, with 0 ln 0 = 0.
// Throws std::domain_error if some x_i > 0 has y_i <= 0 (support violation)
// and std::invalid_argument on length mismatch.
double kl_divergence(std::span<const double> x, std::span<const double> y);

// Mixture sum_i w_i * components[i] of distributions over a shared alphabet.
// w must lie on the simplex (within 1e-9); components must agree in size.
std::vector<double> mix(std::span<const double> w,
                        const std::vector<OutcomeDistribution>& components);

}  // namespace qpa
