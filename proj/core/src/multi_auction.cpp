#include "qpa/multi_auction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace qpa {

namespace {

// Welfare-then-tie-break ordering shared by the subset search: higher welfare
// wins; exact ties prefer organic-containing sets, then the lexicographically
// smallest ascending member list.
bool better_set(double welfare_a, const std::vector<int>& a,
                double welfare_b, const std::vector<int>& b) {
    if (welfare_a != welfare_b) return welfare_a > welfare_b;
    const bool org_a = !a.empty() && a.front() == 0;
    const bool org_b = !b.empty() && b.front() == 0;
    if (org_a != org_b) return org_a;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Computes q_A and the per-item attributions for an already-validated
// ascending member list.  Returns false — leaving per_item empty — when the
// pairwise-adjusted q_A is not strictly positive; the additive short-circuit
// (xi == 0 or singleton) can never go non-positive because item weights are.
bool fill_attributions(SetWeights& sw, std::span<const double> weights,
                       const std::vector<std::vector<double>>& rel_matrix,
                       double xi) {
    double sum_q = 0.0;
    for (int id : sw.members) sum_q += weights[static_cast<size_t>(id)];

    const size_t m = sw.members.size();
    if (xi == 0.0 || m < 2) {
        // Additive short-circuit: q_A = sum q_i and q_{A,i} = q_i exactly,
        // so the zero-externality payments cancel bit-for-bit.
        sw.total = sum_q;
        for (int id : sw.members) sw.per_item.push_back(weights[static_cast<size_t>(id)]);
        return true;
    }

    double pair_sum = 0.0;   // over ordered pairs i != j
    for (size_t a = 0; a < m; ++a) {
        for (size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            const int i = sw.members[a], j = sw.members[b];
            const double sgn = (i == 0 || j == 0) ? 1.0 : -1.0;
            pair_sum += sgn * rel_matrix[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    sw.total = sum_q + xi * pair_sum / (static_cast<double>(m) * static_cast<double>(m - 1));
    if (!(sw.total > 0.0)) return false;
    for (int id : sw.members)
        sw.per_item.push_back(weights[static_cast<size_t>(id)] / sum_q * sw.total);
    return true;
}

}  // namespace

double SetWeights::of(int id) const {
    for (size_t k = 0; k < members.size(); ++k)
        if (members[k] == id) return per_item[k];
    return 0.0;
}

SetWeights set_weight(std::span<const int> members,
                      std::span<const double> weights,
                      const std::vector<std::vector<double>>& rel_matrix,
                      double xi) {
    if (members.empty()) throw std::invalid_argument("set_weight: empty member set");
    SetWeights sw;
    sw.members.assign(members.begin(), members.end());
    std::sort(sw.members.begin(), sw.members.end());
    if (std::adjacent_find(sw.members.begin(), sw.members.end()) != sw.members.end())
        throw std::invalid_argument("set_weight: duplicate member id");
    for (int id : sw.members)
        if (id < 0 || static_cast<size_t>(id) >= weights.size())
            throw std::invalid_argument("set_weight: member id " + std::to_string(id) + " out of range");

    if (!fill_attributions(sw, weights, rel_matrix, xi))
        throw std::domain_error("set_weight: pairwise-adjusted q_A = " + std::to_string(sw.total) +
                                " outside (0, inf) — configuration error");
    return sw;
}

double set_welfare(const SetWeights& sw, std::span<const double> bids,
                   const WelfareFunction& organic_welfare) {
    double w = 0.0;
    for (size_t k = 0; k < sw.members.size(); ++k) {
        const int id = sw.members[k];
        w += (id == 0) ? organic_welfare.normalized(sw.per_item[k])
                       : sw.per_item[k] * bids[static_cast<size_t>(id - 1)];
    }
    return w;
}

double MultiOutcome::payment_of(int id) const {
    for (size_t k = 0; k < ad_winners.size(); ++k)
        if (ad_winners[k] == id) return payments[k];
    return 0.0;
}

MultiOutcome vcg_auction(std::span<const double> bids,
                         std::span<const double> weights,
                         const std::vector<std::vector<double>>& rel_matrix,
                         double xi, const WelfareFunction& organic_welfare,
                         std::span<const int> pool, int cap) {
    MultiOutcome out;
    out.ctx = build_context(bids, weights, organic_welfare, pool);

    const std::vector<int>& star = out.ctx.star;
    const int m = static_cast<int>(star.size());
    if (m > cap)
        throw std::length_error("vcg_auction: eligible set size " + std::to_string(m) +
                                " exceeds the enumeration cap " + std::to_string(cap));

    // Welfare of every non-empty subset, indexed by bitmask over `star`
    // (ascending ids, bit k = star[k]).  Subsets whose pairwise-adjusted
    // weight collapses to <= 0 are incoherent bundles, not candidates: they
    // are skipped here and in every counterfactual search below.  Singletons
    // are always additive, so at least {0} survives.
    const std::uint32_t n_masks = 1u << m;
    std::vector<double> mask_welfare(n_masks, 0.0);
    std::vector<std::vector<int>> mask_members(n_masks);
    std::vector<char> mask_ok(n_masks, 0);
    for (std::uint32_t mask = 1; mask < n_masks; ++mask) {
        std::vector<int>& mem = mask_members[mask];
        for (int k = 0; k < m; ++k)
            if (mask & (1u << k)) mem.push_back(star[static_cast<size_t>(k)]);
        SetWeights sw;
        sw.members = mem;
        if (!fill_attributions(sw, weights, rel_matrix, xi)) continue;
        mask_ok[mask] = 1;
        mask_welfare[mask] = set_welfare(sw, bids, organic_welfare);
    }

    std::uint32_t best = 0;
    for (std::uint32_t mask = 1; mask < n_masks; ++mask)
        if (mask_ok[mask] &&
            (best == 0 || better_set(mask_welfare[mask], mask_members[mask],
                                     mask_welfare[best], mask_members[best])))
            best = mask;

    out.chosen = mask_members[best];
    out.weights = set_weight(out.chosen, weights, rel_matrix, xi);
    out.welfare = mask_welfare[best];

    for (size_t k = 0; k < out.chosen.size(); ++k) {
        const int id = out.chosen[k];
        if (id == 0) continue;
        const int bit = out.ctx.index_of(id);

        std::uint32_t best_without = 0;
        for (std::uint32_t mask = 1; mask < n_masks; ++mask) {
            if (!mask_ok[mask] || (mask & (1u << bit))) continue;
            if (best_without == 0 ||
                better_set(mask_welfare[mask], mask_members[mask],
                           mask_welfare[best_without], mask_members[best_without]))
                best_without = mask;
        }
        const double sw_without = mask_welfare[best_without];   // 0 when only {} remains

        // Welfare of the *other* members inside A*, recomputed as a sum over
        // A* \ {i} with A*'s attributions (not as a subtraction) so that the
        // xi == 0 case cancels exactly against SW(A* \ {i}).
        double others = 0.0;
        for (size_t j = 0; j < out.chosen.size(); ++j) {
            if (j == k) continue;
            const int jd = out.chosen[j];
            others += (jd == 0) ? organic_welfare.normalized(out.weights.per_item[j])
                                : out.weights.per_item[j] * bids[static_cast<size_t>(jd - 1)];
        }

        out.ad_winners.push_back(id);
        out.without_welfare.push_back(sw_without);
        out.payments.push_back((sw_without - others) / out.weights.per_item[k]);
    }
    return out;
}

MultiOutcome vcg_run(const Scenario& sc, int segment, std::span<const int> pool) {
    return vcg_auction(sc.bids(), sc.relevance.weights_at(segment), sc.rel_matrix,
                       sc.params.xi, sc.welfare_multi, pool);
}

MultiOutcome vcg_run(const Scenario& sc, int segment) {
    const auto pool = sc.all_ad_ids();
    return vcg_run(sc, segment, pool);
}

}  // namespace qpa
