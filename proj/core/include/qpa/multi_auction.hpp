#pragma once

#include <span>
#include <vector>

#include "qpa/model.hpp"
#include "qpa/screening.hpp"

// Multi-allocation auction: one welfare-maximizing *set* of content items for
// the whole output, selected by exhaustive enumeration over subsets of the
// screened pool and priced by VCG externalities.
//
// Set-level retrieval weight (pairwise heuristic):
//     q_A = sum_{i in A} q_i
//         + xi / (|A| (|A|-1)) * sum_{i != j in A} s(i,j) rel(a_i, a_j)
// with s(i,j) = +1 when either side is the organic arm (complementarity
// bonus) and -1 between two ads (redundancy penalty).  Per-item attribution:
//     q_{A,i} = q_i / (sum_{j in A} q_j) * q_A.
// When xi == 0 or |A| < 2 the additive short-circuit is used verbatim so the
// zero-externality case stays exact in floating point.

namespace qpa {

struct SetWeights {
    std::vector<int> members;      // ascending ids, may include 0
    std::vector<double> per_item;  // q_{A,i}, parallel to members
    double total = 0.0;            // q_A

    double of(int id) const;       // 0.0 for non-members
};

// Throws std::invalid_argument for an empty/duplicated member list and
// std::domain_error when the computed q_A is not strictly positive.
SetWeights set_weight(std::span<const int> members,
                      std::span<const double> weights,
                      const std::vector<std::vector<double>>& rel_matrix,
                      double xi);

// SW_hat(b, A) = sum_{i in A, i != 0} q_{A,i} b_i  +  [0 in A] f_hat(q_{A,0}),
// accumulated in ascending member order (the payment path relies on that).
double set_welfare(const SetWeights& sw, std::span<const double> bids,
                   const WelfareFunction& organic_welfare);

struct MultiOutcome {
    std::vector<int> chosen;             // A*, ascending, may include 0
    SetWeights weights;                  // attributions for A*
    double welfare = 0.0;                // SW_hat(A*)
    std::vector<int> ad_winners;         // A* minus the organic arm
    std::vector<double> payments;        // per-click p~, parallel to ad_winners
    std::vector<double> without_welfare; // SW_hat(A*_{-i}), parallel
    EligibleContext ctx;                 // screened context the search ran on

    double payment_of(int id) const;     // 0.0 for non-winners
};

// Enumerates every A subseteq S*_multi (2^|S*_multi| candidates; throws
// std::length_error naming the eligible-set size when it exceeds `cap`).
// Subsets whose pairwise-adjusted q_A is not strictly positive are skipped —
// an incoherent bundle is never selected and never serves as a counterfactual
// in the payment search; singletons are additive, so the candidate space
// always contains at least the organic arm alone.
// Ties in welfare are broken deterministically: organic-containing sets win,
// then the lexicographically smallest ascending member list.
// Winner i pays (SW_hat(A*_{-i}) - [SW_hat(A*) - q_{A*,i} b_i]) / q_{A*,i};
// the bracket is recomputed as a sum over A* \ {i} so that xi == 0 yields
// exactly zero payments.
MultiOutcome vcg_auction(std::span<const double> bids,
                         std::span<const double> weights,
                         const std::vector<std::vector<double>>& rel_matrix,
                         double xi, const WelfareFunction& organic_welfare,
                         std::span<const int> pool, int cap = 16);

// Scenario wrapper: bids/weights/rel/xi/welfare_multi at a given segment.
MultiOutcome vcg_run(const Scenario& sc, int segment, std::span<const int> pool);
MultiOutcome vcg_run(const Scenario& sc, int segment);

}  // namespace qpa
