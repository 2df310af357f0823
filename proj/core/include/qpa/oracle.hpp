#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpa/model.hpp"
#include "qpa/multi_auction.hpp"
#include "qpa/screening.hpp"
#include "qpa/single_auction.hpp"

// Independent verification oracles.  Each one recomputes a mechanism quantity
// by a different algorithm than the production path (iterative optimization
// instead of the closed form, quadrature instead of the antiderivative, a
// second subset enumeration in reversed order) so that agreement is evidence
// rather than tautology.

namespace qpa {

// ---- randomized problem instances -----------------------------------------

struct SingleInstance {
    std::vector<double> bids;      // == values (truthful starting point)
    std::vector<double> values;
    std::vector<double> weights;   // n+1, index 0 organic
    WelfareFunction welfare;
    double lambda_tilde = 1.0;
};

struct MultiInstance {
    std::vector<double> bids;
    std::vector<double> values;
    std::vector<double> weights;
    std::vector<std::vector<double>> rel_matrix;
    double xi = 1.0;
    WelfareFunction welfare;
};

// Deterministic generators (same seed, same instance).  Single instances are
// redrawn until at least one advertiser clears its reserve.  `tame` narrows
// the ranges so softmax allocations stay well away from 0/1 (used by the
// finite-difference checks, which lose precision on near-degenerate slopes).
SingleInstance make_single_instance(std::uint64_t seed, bool tame = false);
// Weights are floored at 0.55 so every subset's pairwise-adjusted q_A stays
// positive for xi <= 1.
MultiInstance make_multi_instance(std::uint64_t seed);

// ---- allocation oracle ----------------------------------------------------

struct GradientSolveReport {
    std::vector<double> x;         // over ctx.star
    int iterations = 0;
    double grad_residual = 0.0;    // sup-norm of the tangent-projected gradient
    bool converged = false;
};

// Maximizes the surrogate objective by projected gradient ascent on the
// simplex (Euclidean projection, Armijo backtracking line search) with no
// reference to the softmax closed form.
GradientSolveReport numeric_allocate(const EligibleContext& ctx,
                                     double lambda_tilde, double tol = 1e-10,
                                     int max_iter = 100000);

// ---- payment oracle -------------------------------------------------------

struct QuadratureReport {
    double value = 0.0;       // payment estimate b*x(b) - integral
    double integral = 0.0;
    double abs_error = 0.0;   // accumulated error bound of the quadrature
    int evaluations = 0;
    bool converged = false;
};

// Envelope payment via adaptive Simpson quadrature of z -> x_i(z, b_-i) over
// [r_i, b_i] to absolute tolerance `tol`.
QuadratureReport envelope_payment(int id, std::span<const double> bids,
                                  const EligibleContext& ctx,
                                  double lambda_tilde, double tol = 1e-8);

// Same construction for the proportional baseline over [0, b_i].
QuadratureReport baseline_envelope_payment(int id, std::span<const double> bids,
                                           std::span<const double> weights,
                                           std::span<const int> pool,
                                           double tol = 1e-8);

// ---- mixture KL bound -----------------------------------------------------

struct KlBoundReport {
    double lhs = 0.0;   // KL(mix(x, comps) || mix(q~, comps))
    double rhs = 0.0;   // KL(x || q~)
    bool holds = false; // lhs <= rhs + slack
};

KlBoundReport kl_bound_check(std::span<const double> x,
                             std::span<const double> q_tilde,
                             const std::vector<OutcomeDistribution>& components,
                             double slack = 1e-12);

// ---- incentive sweeps -----------------------------------------------------

enum class MechanismFamily {
    Single,      // screened softmax + envelope payment
    Multi,       // screened VCG
    Baseline,    // proportional allocation + envelope payment
    PayYourBid,  // deliberately broken canary: single allocation, p~ = b * x
};

struct DsicViolation {
    std::uint64_t instance_seed = 0;
    int advertiser = 0;
    double truthful_utility = 0.0;
    double deviation_bid = 0.0;
    double deviant_utility = 0.0;
    double gap = 0.0;   // deviant - truthful
};

struct SweepReport {
    int instances = 0;
    int grid_points = 0;
    long deviations_checked = 0;
    std::vector<DsicViolation> violations;   // capped at 32 samples
    long violation_count = 0;
    double worst_gap = 0.0;
    long ir_violations = 0;     // truthful utility < -1e-12
    long bound_violations = 0;  // payment outside [min(0,.), b_i] (single/baseline)
};

// For each instance: compute truthful utilities, then sweep each advertiser's
// bid over a `grid_points` grid spanning [0, 2 v_i] and flag any deviation
// whose utility beats truth-telling by more than `tol`.  The Single and
// Baseline sweeps cover every advertiser, including entry across the reserve.
// The Multi sweep covers the advertisers the reserve admits at the truthful
// profile: a sub-reserve advertiser is not a participant of the screened
// auction, and entry by overbidding is deliberately outside its guarantee
// (see the note in make_multi_probe).
SweepReport dsic_sweep(MechanismFamily family, int instances, int grid_points,
                       std::uint64_t seed, double tol = 1e-9);

// ---- exhaustive VCG cross-check -------------------------------------------

struct VcgCrossCheck {
    bool sets_match = false;        // chosen A* identical member-for-member
    double welfare_gap = 0.0;       // |welfare re-derived - production|
    double max_payment_gap = 0.0;
    MultiOutcome reference;         // the oracle's own outcome
};

// Re-runs the subset search with descending-mask iteration order and its own
// long-double accumulation of set weights and welfare.
VcgCrossCheck exhaustive_vcg(std::span<const double> bids,
                             std::span<const double> weights,
                             const std::vector<std::vector<double>>& rel_matrix,
                             double xi, const WelfareFunction& organic_welfare,
                             std::span<const int> pool, int cap = 16);

// ---- screening welfare oracle ---------------------------------------------

struct ScreeningWelfareReport {
    bool add_ineligible_never_helps = true;
    bool drop_eligible_never_helps = true;
    double worst_gain = 0.0;   // best welfare improvement from an exclusion-rule breach
};

// Expected welfare of a candidate set under globally normalized selection
// probabilities, with the mass of excluded ads diverted to the organic arm.
// Inclusion of ad i then moves welfare by p_i (q_i v_i - f_hat(q_0)), so the
// reserve threshold is exactly the welfare-improvement threshold.
ScreeningWelfareReport screening_welfare_check(const SingleInstance& inst);

// ---- allocation slope -----------------------------------------------------

struct DerivativeCheck {
    double analytic = 0.0;      // (q~_i / lambda~) x_i (1 - x_i)
    double finite_diff = 0.0;   // central difference, step 1e-5
    double rel_error = 0.0;
};

// Compares the closed-form own-bid slope of the softmax allocation against a
// central finite difference for one eligible advertiser of the instance.
DerivativeCheck derivative_check(const SingleInstance& inst, std::uint64_t pick_seed);

}  // namespace qpa
