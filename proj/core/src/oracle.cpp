#include "qpa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "qpa/baseline_auction.hpp"
#include "qpa/random.hpp"

namespace qpa {

namespace {

// ---- simplex tools --------------------------------------------------------

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (size_t k = 0; k < u.size(); ++k) {
        css += u[k];
        const double t = (css - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = static_cast<int>(k + 1);
            theta = t;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

double surrogate_at(const EligibleContext& ctx, const std::vector<double>& x,
                    double lambda) {
    double f = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        f += x[k] * ctx.scores[k];
        if (x[k] > 0.0) f -= lambda * x[k] * std::log(x[k] / ctx.q_tilde[k]);
    }
    return f;
}

// ---- adaptive Simpson -----------------------------------------------------

struct SimpsonState {
    int evals = 0;
    bool ok = true;
    double err = 0.0;
};

double simpson_leaf(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth, SimpsonState& st) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    st.evals += 2;
    const double left = simpson_leaf(fa, flm, fm, m - a);
    const double right = simpson_leaf(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0) {
        st.ok = false;
        st.err += std::abs(delta);
        return left + right;
    }
    if (std::abs(delta) <= 15.0 * tol) {
        st.err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, st) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, st);
}

QuadratureReport integrate(const std::function<double(double)>& f, double a,
                           double b, double tol) {
    QuadratureReport rep;
    if (b <= a) {
        rep.converged = true;
        return rep;
    }
    SimpsonState st;
    const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    st.evals = 3;
    const double whole = simpson_leaf(fa, fm, fb, b - a);
    rep.integral = adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48, st);
    rep.abs_error = st.err;
    rep.evaluations = st.evals;
    rep.converged = st.ok;
    return rep;
}

// Softmax share of member index k when its score is overridden.
double softmax_share(const EligibleContext& ctx, int k, double score_k,
                     double lambda) {
    double smax = score_k;
    for (size_t j = 0; j < ctx.scores.size(); ++j)
        if (static_cast<int>(j) != k) smax = std::max(smax, ctx.scores[j]);
    double z = 0.0, own = 0.0;
    for (size_t j = 0; j < ctx.scores.size(); ++j) {
        const double s = (static_cast<int>(j) == k) ? score_k : ctx.scores[j];
        const double w = ctx.q_tilde[j] * std::exp((s - smax) / lambda);
        z += w;
        if (static_cast<int>(j) == k) own = w;
    }
    return own / z;
}

}  // namespace

// ---- instance generators --------------------------------------------------

SingleInstance make_single_instance(std::uint64_t seed, bool tame) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 256; ++attempt) {
        SingleInstance inst;
        const int n = rng.uniform_int(2, tame ? 4 : 7);
        inst.weights.push_back(rng.uniform(0.5, 0.95));   // organic
        for (int i = 0; i < n; ++i) inst.weights.push_back(rng.uniform(tame ? 0.45 : 0.3, 0.95));
        inst.welfare.eta = rng.uniform(0.6, 2.2);
        inst.welfare.beta = rng.uniform(0.35, 0.9);
        inst.welfare.ctr_constant = 1.0;
        inst.lambda_tilde = rng.uniform(0.8, 3.0);
        for (int i = 0; i < n; ++i) inst.values.push_back(rng.uniform(0.5, 3.5));
        inst.bids = inst.values;

        const double fhat = inst.welfare.normalized(inst.weights[0]);
        const double margin = tame ? 0.05 : 0.0;
        int eligible = 0;
        for (int i = 0; i < n; ++i)
            if (inst.bids[static_cast<size_t>(i)] >=
                fhat / inst.weights[static_cast<size_t>(i + 1)] + margin)
                ++eligible;
        if (eligible >= 1) return inst;
    }
    throw std::runtime_error("make_single_instance: no eligible draw after 256 attempts");
}

MultiInstance make_multi_instance(std::uint64_t seed) {
    Rng rng(seed);
    MultiInstance inst;
    const int n = rng.uniform_int(2, 5);
    inst.weights.push_back(rng.uniform(0.55, 0.95));
    for (int i = 0; i < n; ++i) inst.weights.push_back(rng.uniform(0.55, 0.95));
    inst.welfare.eta = rng.uniform(0.4, 1.6);
    inst.welfare.beta = rng.uniform(0.35, 0.9);
    inst.welfare.ctr_constant = 1.0;
    inst.xi = rng.uniform(0.0, 1.0);
    for (int i = 0; i < n; ++i) inst.values.push_back(rng.uniform(0.5, 3.5));
    inst.bids = inst.values;
    inst.rel_matrix.assign(static_cast<size_t>(n) + 1,
                           std::vector<double>(static_cast<size_t>(n) + 1, 1.0));
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            const double r = rng.uniform(0.0, 1.0);
            inst.rel_matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] = r;
            inst.rel_matrix[static_cast<size_t>(j)][static_cast<size_t>(i)] = r;
        }
    return inst;
}

// ---- allocation oracle ----------------------------------------------------

GradientSolveReport numeric_allocate(const EligibleContext& ctx,
                                     double lambda_tilde, double tol,
                                     int max_iter) {
    const size_t m = ctx.star.size();
    GradientSolveReport rep;
    rep.x = ctx.q_tilde;   // interior start
    if (m == 1) {
        rep.x = {1.0};
        rep.converged = true;
        return rep;
    }

    double f = surrogate_at(ctx, rep.x, lambda_tilde);
    double step = 1.0;
    std::vector<double> grad(m), trial(m);

    auto residual_at = [&](const std::vector<double>& x) {
        double gmean = 0.0;
        for (size_t k = 0; k < m; ++k) {
            grad[k] = ctx.scores[k] -
                      lambda_tilde * (std::log(x[k] / ctx.q_tilde[k]) + 1.0);
            gmean += grad[k];
        }
        gmean /= static_cast<double>(m);
        double resid = 0.0;
        for (size_t k = 0; k < m; ++k)
            resid = std::max(resid, std::abs(grad[k] - gmean));
        return resid;
    };

    int tiny_moves = 0;
    for (rep.iterations = 0; rep.iterations < max_iter; ++rep.iterations) {
        rep.grad_residual = residual_at(rep.x);
        if (rep.grad_residual < tol) {
            rep.converged = true;
            return rep;
        }

        // Armijo backtracking on the projected step.
        bool accepted = false;
        double moved = 0.0;
        for (int ls = 0; ls < 64 && !accepted; ++ls) {
            for (size_t k = 0; k < m; ++k) trial[k] = rep.x[k] + step * grad[k];
            trial = project_simplex(std::move(trial));
            // Keep the entropy term finite: nudge off the boundary.
            double sum = 0.0;
            for (double& v : trial) {
                v = std::max(v, 1e-18);
                sum += v;
            }
            for (double& v : trial) v /= sum;

            double gain = 0.0;
            moved = 0.0;
            for (size_t k = 0; k < m; ++k) {
                gain += grad[k] * (trial[k] - rep.x[k]);
                moved = std::max(moved, std::abs(trial[k] - rep.x[k]));
            }
            const double ftrial = surrogate_at(ctx, trial, lambda_tilde);
            if (gain > 0.0 && ftrial >= f + 1e-4 * gain) {
                rep.x = trial;
                f = ftrial;
                step = std::min(step * 1.3, 64.0);
                accepted = true;
            } else {
                step *= 0.5;
                if (step < 1e-18) break;
            }
        }
        // Near the optimum the Armijo test needs objective differences below
        // double resolution, so a stall (or a run of sub-1e-14 moves) marks
        // the numeric optimum rather than a failure.  Residuals there sit
        // orders of magnitude below the 1e-6 acceptance bar.
        if (!accepted) break;
        tiny_moves = moved < 1e-14 ? tiny_moves + 1 : 0;
        if (tiny_moves >= 3) break;
    }
    rep.grad_residual = residual_at(rep.x);
    rep.converged = rep.grad_residual < std::max(tol, 1e-6);
    return rep;
}

// ---- payment oracles ------------------------------------------------------

QuadratureReport envelope_payment(int id, std::span<const double> bids,
                                  const EligibleContext& ctx,
                                  double lambda_tilde, double tol) {
    const int k = ctx.index_of(id);
    if (k <= 0)
        throw std::invalid_argument("envelope_payment: advertiser " + std::to_string(id) +
                                    " is not in the eligible set");
    const double b = bids[static_cast<size_t>(id - 1)];
    const double r = ctx.reserves[static_cast<size_t>(id)];
    const double qt = ctx.q_tilde[static_cast<size_t>(k)];

    auto x_of_bid = [&](double z) { return softmax_share(ctx, k, qt * z, lambda_tilde); };
    QuadratureReport rep = integrate(x_of_bid, r, b, tol);
    rep.value = b * x_of_bid(b) - rep.integral;
    ++rep.evaluations;
    return rep;
}

QuadratureReport baseline_envelope_payment(int id, std::span<const double> bids,
                                           std::span<const double> weights,
                                           std::span<const int> pool, double tol) {
    const double b = bids[static_cast<size_t>(id - 1)];
    const double q = weights[static_cast<size_t>(id)];
    double R = 0.0;
    for (int j : pool)
        if (j != id) R += bids[static_cast<size_t>(j - 1)] * weights[static_cast<size_t>(j)];

    QuadratureReport rep;
    if (R <= 0.0) {   // monopolist: x == 1 on (0, b], payment 0
        rep.converged = true;
        return rep;
    }
    auto x_of_bid = [&](double z) { return z * q / (z * q + R); };
    rep = integrate(x_of_bid, 0.0, b, tol);
    rep.value = b * x_of_bid(b) - rep.integral;
    ++rep.evaluations;
    return rep;
}

// ---- mixture KL bound -----------------------------------------------------

KlBoundReport kl_bound_check(std::span<const double> x,
                             std::span<const double> q_tilde,
                             const std::vector<OutcomeDistribution>& components,
                             double slack) {
    const std::vector<double> mx = mix(x, components);
    const std::vector<double> mq = mix(q_tilde, components);
    KlBoundReport rep;
    rep.lhs = kl_divergence(mx, mq);
    rep.rhs = kl_divergence(x, q_tilde);
    rep.holds = rep.lhs <= rep.rhs + slack;
    return rep;
}

// ---- incentive sweeps -----------------------------------------------------

namespace {

struct UtilityProbe {
    // Utility of advertiser `i` with true value v when reporting `report`
    // into the otherwise-truthful profile.
    std::function<double(int i, double v, double report)> utility;
    int n_ads = 0;
    std::vector<double> values;
    std::vector<bool> sweep;   // per ad: include in the deviation sweep
};

UtilityProbe make_single_probe(const SingleInstance& inst, MechanismFamily family) {
    UtilityProbe probe;
    probe.n_ads = static_cast<int>(inst.bids.size());
    probe.values = inst.values;
    probe.utility = [inst, family](int i, double v, double report) {
        std::vector<double> bids = inst.bids;
        bids[static_cast<size_t>(i - 1)] = report;
        const EligibleContext ctx = build_context(bids, inst.weights, inst.welfare);
        if (!ctx.is_eligible(i)) return 0.0;
        const Allocation a = allocate(ctx, inst.lambda_tilde);
        const double x = a.x_of(i);
        const double p = (family == MechanismFamily::PayYourBid)
                             ? report * x
                             : payment(i, bids, ctx, inst.lambda_tilde);
        return v * x - p;
    };
    return probe;
}

UtilityProbe make_baseline_probe(const SingleInstance& inst) {
    UtilityProbe probe;
    probe.n_ads = static_cast<int>(inst.bids.size());
    probe.values = inst.values;
    std::vector<int> pool(inst.bids.size());
    std::iota(pool.begin(), pool.end(), 1);
    probe.utility = [inst, pool](int i, double v, double report) {
        std::vector<double> bids = inst.bids;
        bids[static_cast<size_t>(i - 1)] = report;
        const std::vector<double> x = seg_allocate(bids, inst.weights, pool);
        const double p = seg_payment(i, bids, inst.weights, pool);
        return v * x[static_cast<size_t>(i)] - p;
    };
    return probe;
}

UtilityProbe make_multi_probe(const MultiInstance& inst) {
    UtilityProbe probe;
    probe.n_ads = static_cast<int>(inst.bids.size());
    probe.values = inst.values;
    // The incentive guarantee is scoped to the participants the reserve
    // admits at the truthful profile.  A sub-reserve advertiser is outside
    // the auction by construction; it can appear only by misreporting past
    // the reserve, and under complementary couplings that entry can profit
    // (unlike the single auction, whose payment is floored at r_i x_i).
    const double fhat = inst.welfare.normalized(inst.weights[0]);
    probe.sweep.resize(static_cast<size_t>(probe.n_ads));
    for (int i = 1; i <= probe.n_ads; ++i)
        probe.sweep[static_cast<size_t>(i - 1)] =
            inst.values[static_cast<size_t>(i - 1)] >=
            fhat / inst.weights[static_cast<size_t>(i)];
    std::vector<int> pool(inst.bids.size());
    std::iota(pool.begin(), pool.end(), 1);
    probe.utility = [inst, pool](int i, double v, double report) {
        std::vector<double> bids = inst.bids;
        bids[static_cast<size_t>(i - 1)] = report;
        const MultiOutcome out = vcg_auction(bids, inst.weights, inst.rel_matrix,
                                             inst.xi, inst.welfare, pool);
        const double q_attr = out.weights.of(i);
        if (q_attr == 0.0) return 0.0;
        return q_attr * (v - out.payment_of(i));
    };
    return probe;
}

}  // namespace

SweepReport dsic_sweep(MechanismFamily family, int instances, int grid_points,
                       std::uint64_t seed, double tol) {
    SweepReport rep;
    rep.instances = instances;
    rep.grid_points = grid_points;

    for (int idx = 0; idx < instances; ++idx) {
        const std::uint64_t inst_seed = derive_seed(seed, static_cast<std::uint64_t>(idx));
        UtilityProbe probe;
        if (family == MechanismFamily::Multi) {
            probe = make_multi_probe(make_multi_instance(inst_seed));
        } else if (family == MechanismFamily::Baseline) {
            probe = make_baseline_probe(make_single_instance(inst_seed));
        } else {
            const SingleInstance inst = make_single_instance(inst_seed);
            probe = make_single_probe(inst, family);
            // Payment bound audit (0 <= p~ <= b for eligible truthful bidders).
            const EligibleContext ctx = build_context(inst.bids, inst.weights, inst.welfare);
            for (int i : ctx.eligible()) {
                const double p = payment(i, inst.bids, ctx, inst.lambda_tilde);
                const double b = inst.bids[static_cast<size_t>(i - 1)];
                if (p < -1e-9 || p > b + 1e-9) ++rep.bound_violations;
            }
        }

        const int denom = std::max(grid_points - 1, 1);
        for (int i = 1; i <= probe.n_ads; ++i) {
            if (!probe.sweep.empty() && !probe.sweep[static_cast<size_t>(i - 1)]) continue;
            const double v = probe.values[static_cast<size_t>(i - 1)];
            const double truthful = probe.utility(i, v, v);
            if (truthful < -1e-12) ++rep.ir_violations;
            for (int g = 0; g < grid_points; ++g) {
                const double dev =
                    2.0 * v * static_cast<double>(g) / static_cast<double>(denom);
                const double u = probe.utility(i, v, dev);
                ++rep.deviations_checked;
                const double gap = u - truthful;
                rep.worst_gap = std::max(rep.worst_gap, gap);
                if (gap > tol) {
                    ++rep.violation_count;
                    if (rep.violations.size() < 32)
                        rep.violations.push_back({inst_seed, i, truthful, dev, u, gap});
                }
            }
        }
    }
    return rep;
}

// ---- exhaustive VCG cross-check -------------------------------------------

namespace {

// Second implementation of the set weight / welfare sums: long double
// accumulation, members iterated descending.  Returns nullopt when the
// pairwise-adjusted set weight is not strictly positive — the production
// search drops those subsets from its candidate space, so the re-enumeration
// must drop them too.
std::optional<long double> oracle_set_welfare(
    const std::vector<int>& members_desc, std::span<const double> bids,
    std::span<const double> weights, const std::vector<std::vector<double>>& rel,
    double xi, const WelfareFunction& wf,
    std::vector<long double>* per_item_out = nullptr) {
    const size_t m = members_desc.size();
    long double sum_q = 0.0L;
    for (size_t a = m; a-- > 0;) sum_q += weights[static_cast<size_t>(members_desc[a])];

    long double total = sum_q;
    if (xi != 0.0 && m >= 2) {
        long double pair_sum = 0.0L;
        for (size_t a = m; a-- > 0;)
            for (size_t b = m; b-- > 0;) {
                if (a == b) continue;
                const int i = members_desc[a], j = members_desc[b];
                const long double sgn = (i == 0 || j == 0) ? 1.0L : -1.0L;
                pair_sum += sgn * static_cast<long double>(
                                      rel[static_cast<size_t>(i)][static_cast<size_t>(j)]);
            }
        total = sum_q + static_cast<long double>(xi) * pair_sum /
                            static_cast<long double>(m * (m - 1));
        if (!(total > 0.0L)) return std::nullopt;
    }

    long double welfare = 0.0L;
    if (per_item_out) per_item_out->assign(m, 0.0L);
    for (size_t a = 0; a < m; ++a) {
        const int id = members_desc[a];
        const long double attr =
            (xi == 0.0 || m < 2)
                ? static_cast<long double>(weights[static_cast<size_t>(id)])
                : static_cast<long double>(weights[static_cast<size_t>(id)]) / sum_q * total;
        if (per_item_out) (*per_item_out)[a] = attr;
        if (id == 0)
            welfare += static_cast<long double>(
                wf.normalized(static_cast<double>(attr)));
        else
            welfare += attr * static_cast<long double>(bids[static_cast<size_t>(id - 1)]);
    }
    return welfare;
}

}  // namespace

VcgCrossCheck exhaustive_vcg(std::span<const double> bids,
                             std::span<const double> weights,
                             const std::vector<std::vector<double>>& rel_matrix,
                             double xi, const WelfareFunction& organic_welfare,
                             std::span<const int> pool, int cap) {
    const MultiOutcome production =
        vcg_auction(bids, weights, rel_matrix, xi, organic_welfare, pool, cap);

    const EligibleContext ctx = build_context(bids, weights, organic_welfare, pool);
    const int m = static_cast<int>(ctx.star.size());

    auto members_desc_of = [&](std::uint32_t mask) {
        std::vector<int> mem;
        for (int k = m; k-- > 0;)
            if (mask & (1u << k)) mem.push_back(ctx.star[static_cast<size_t>(k)]);
        return mem;   // descending ids
    };
    auto ascending = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    // Independent tie-break: welfare, then organic membership, then lex order
    // of the ascending member list.
    auto prefer = [&](long double wa, const std::vector<int>& a_asc, long double wb,
                      const std::vector<int>& b_asc) {
        if (wa != wb) return wa > wb;
        const bool oa = !a_asc.empty() && a_asc.front() == 0;
        const bool ob = !b_asc.empty() && b_asc.front() == 0;
        if (oa != ob) return oa;
        return std::lexicographical_compare(a_asc.begin(), a_asc.end(), b_asc.begin(), b_asc.end());
    };

    const std::uint32_t n_masks = 1u << m;
    long double best_w = 0.0L;
    std::uint32_t best_mask = 0;
    std::vector<int> best_asc;
    for (std::uint32_t mask = n_masks - 1; mask >= 1; --mask) {
        const auto mem = members_desc_of(mask);
        const auto w = oracle_set_welfare(mem, bids, weights, rel_matrix, xi, organic_welfare);
        if (!w) continue;
        const auto asc = ascending(mem);
        if (best_mask == 0 || prefer(*w, asc, best_w, best_asc)) {
            best_mask = mask;
            best_w = *w;
            best_asc = asc;
        }
    }

    VcgCrossCheck check;
    check.reference.chosen = best_asc;
    check.reference.welfare = static_cast<double>(best_w);

    std::vector<long double> per_item_desc;
    const auto best_desc = members_desc_of(best_mask);
    oracle_set_welfare(best_desc, bids, weights, rel_matrix, xi, organic_welfare, &per_item_desc);

    check.sets_match = best_asc == production.chosen;
    check.welfare_gap = std::abs(static_cast<double>(best_w) - production.welfare);

    for (size_t a = 0; a < best_desc.size(); ++a) {
        const int id = best_desc[a];
        if (id == 0) continue;
        const int bit = ctx.index_of(id);
        long double bw = 0.0L;
        std::uint32_t bw_mask = 0;
        std::vector<int> bw_asc;
        for (std::uint32_t mask = n_masks - 1; mask >= 1; --mask) {
            if (mask & (1u << bit)) continue;
            const auto mem = members_desc_of(mask);
            const auto w = oracle_set_welfare(mem, bids, weights, rel_matrix, xi, organic_welfare);
            if (!w) continue;
            const auto asc = ascending(mem);
            if (bw_mask == 0 || prefer(*w, asc, bw, bw_asc)) {
                bw_mask = mask;
                bw = *w;
                bw_asc = asc;
            }
        }
        long double others = 0.0L;
        for (size_t c = 0; c < best_desc.size(); ++c) {
            if (c == a) continue;
            const int jd = best_desc[c];
            others += (jd == 0)
                          ? static_cast<long double>(organic_welfare.normalized(
                                static_cast<double>(per_item_desc[c])))
                          : per_item_desc[c] *
                                static_cast<long double>(bids[static_cast<size_t>(jd - 1)]);
        }
        const double pay = static_cast<double>((bw - others) / per_item_desc[a]);
        check.reference.ad_winners.push_back(id);
        check.reference.payments.push_back(pay);
        check.max_payment_gap =
            std::max(check.max_payment_gap, std::abs(pay - production.payment_of(id)));
    }
    std::reverse(check.reference.ad_winners.begin(), check.reference.ad_winners.end());
    std::reverse(check.reference.payments.begin(), check.reference.payments.end());
    return check;
}

// ---- screening welfare oracle ---------------------------------------------

ScreeningWelfareReport screening_welfare_check(const SingleInstance& inst) {
    const int n = static_cast<int>(inst.bids.size());
    const EligibleContext ctx = build_context(inst.bids, inst.weights, inst.welfare);
    const double fhat = ctx.f_hat_q0;

    double total_q = 0.0;
    for (double q : inst.weights) total_q += q;
    std::vector<double> p(inst.weights.size());
    for (size_t i = 0; i < p.size(); ++i) p[i] = inst.weights[i] / total_q;

    // Expected welfare of candidate set C: selections outside C (and the
    // organic arm) deliver the organic value f_hat(q_0).
    auto welfare_of = [&](const std::vector<bool>& in) {
        double w = p[0] * fhat;
        for (int i = 1; i <= n; ++i) {
            const double per_sel = inst.weights[static_cast<size_t>(i)] *
                                   inst.values[static_cast<size_t>(i - 1)];
            w += p[static_cast<size_t>(i)] * (in[static_cast<size_t>(i)] ? per_sel : fhat);
        }
        return w;
    };

    std::vector<bool> in_s(static_cast<size_t>(n) + 1, false);
    for (int i : ctx.eligible()) in_s[static_cast<size_t>(i)] = true;
    const double base = welfare_of(in_s);

    ScreeningWelfareReport rep;
    for (int i = 1; i <= n; ++i) {
        std::vector<bool> flipped = in_s;
        flipped[static_cast<size_t>(i)] = !in_s[static_cast<size_t>(i)];
        const double w = welfare_of(flipped);
        const double gain = w - base;
        if (gain > 1e-12) {
            rep.worst_gain = std::max(rep.worst_gain, gain);
            if (in_s[static_cast<size_t>(i)])
                rep.drop_eligible_never_helps = false;
            else
                rep.add_ineligible_never_helps = false;
        }
    }
    return rep;
}

// ---- allocation slope -----------------------------------------------------

DerivativeCheck derivative_check(const SingleInstance& inst, std::uint64_t pick_seed) {
    const EligibleContext ctx = build_context(inst.bids, inst.weights, inst.welfare);
    std::vector<int> candidates;
    for (int i : ctx.eligible())
        if (inst.bids[static_cast<size_t>(i - 1)] >=
            ctx.reserves[static_cast<size_t>(i)] + 1e-3)
            candidates.push_back(i);
    if (candidates.empty()) candidates = ctx.eligible();
    const int i = candidates[splitmix64(pick_seed) % candidates.size()];

    const Allocation a = allocate(ctx, inst.lambda_tilde);
    const double x = a.x_of(i);
    const double qt = ctx.q_tilde_of(i);

    DerivativeCheck chk;
    // Differentiating x_i = A/(A+R), A = q~_i exp(q~_i b_i / lambda~) gives
    // A' = A q~_i/lambda~, hence dx_i/db_i = (q~_i/lambda~) x_i (1 - x_i).
    chk.analytic = qt / inst.lambda_tilde * x * (1.0 - x);

    const double h = 1e-5;
    auto x_at = [&](double db) {
        std::vector<double> bids = inst.bids;
        bids[static_cast<size_t>(i - 1)] += db;
        const EligibleContext c2 = build_context(bids, inst.weights, inst.welfare);
        return allocate(c2, inst.lambda_tilde).x_of(i);
    };
    chk.finite_diff = (x_at(h) - x_at(-h)) / (2.0 * h);
    chk.rel_error = std::abs(chk.finite_diff - chk.analytic) /
                    std::max(std::abs(chk.analytic), 1e-300);
    return chk;
}

}  // namespace qpa
