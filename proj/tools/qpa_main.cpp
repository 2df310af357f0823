// Command-line harness: `qpa run` simulates the configured mechanisms over a
// scenario and writes results.csv / results.json; `qpa verify` replays the
// oracle suites against randomized instances and writes verification.json;
// `qpa list` prints the bundled scenarios.
//
// Exit codes: 0 success, 1 usage error, 2 scenario/config validation error,
// 3 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpa/baseline_auction.hpp"
#include "qpa/oracle.hpp"
#include "qpa/report.hpp"
#include "qpa/scenario_io.hpp"
#include "qpa/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitVerifyFailed = 3;

struct CliError {
    int code;
    std::string message;
};

std::uint64_t resolve_seed(std::uint64_t cli_seed, bool& from_env) {
    from_env = false;
    const char* env = std::getenv("QP_AUCTION_SEED");
    if (env == nullptr || *env == '\0') return cli_seed;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw CliError{kExitValidation,
                       std::string("QP_AUCTION_SEED is not an unsigned integer: ") + env};
    from_env = true;
    return static_cast<std::uint64_t>(v);
}

std::vector<qpa::MechanismSpec> resolve_mechanisms(const std::string& ids,
                                                   const std::string& replacement) {
    std::vector<qpa::MechanismSpec> mechs;
    if (ids == "all") {
        mechs = qpa::all_mechanisms();
    } else {
        std::string token;
        std::istringstream ss(ids);
        while (std::getline(ss, token, ',')) {
            const auto m = qpa::parse_mechanism(token);
            if (!m)
                throw CliError{kExitUsage,
                               "unknown mechanism '" + token +
                                   "' (known: qp-repl, qp-norepl, qp-multi, seg-repl, "
                                   "seg-norepl, seg-multi)"};
            mechs.push_back(*m);
        }
    }
    if (!replacement.empty()) {
        const bool keep_with = replacement == "with";
        std::erase_if(mechs, [&](const qpa::MechanismSpec& m) {
            if (m.is_multi()) return false;   // one-shot mechanisms are unaffected
            return keep_with ? m.replacement != qpa::Replacement::With
                             : m.replacement != qpa::Replacement::Without;
        });
    }
    if (mechs.empty())
        throw CliError{kExitUsage, "mechanism list is empty after applying --replacement"};
    return mechs;
}

std::unique_ptr<qpa::RelevanceProvider> resolve_provider(const std::string& name,
                                                         double sigma,
                                                         const std::string& replay_file) {
    if (name == "static") return std::make_unique<qpa::StaticTable>();
    if (name == "noisy") return std::make_unique<qpa::NoisyTable>(sigma, 0.0);
    if (name == "replay") {
        if (replay_file.empty())
            throw CliError{kExitUsage, "--provider replay requires --replay-file"};
        return std::make_unique<qpa::FileReplay>(qpa::load_weight_trace(replay_file));
    }
    throw CliError{kExitUsage, "unknown provider '" + name + "' (static, noisy, replay)"};
}

// ---- verify suites --------------------------------------------------------

using qpa::derive_seed;

void suite_allocation(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    double worst = 0.0;
    int failures = 0;
    long iters = 0;
    for (int i = 0; i < instances; ++i) {
        const qpa::SingleInstance inst =
            qpa::make_single_instance(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const qpa::EligibleContext ctx =
            qpa::build_context(inst.bids, inst.weights, inst.welfare);
        const qpa::Allocation closed = qpa::allocate(ctx, inst.lambda_tilde);
        const qpa::GradientSolveReport num =
            qpa::numeric_allocate(ctx, inst.lambda_tilde);
        iters += num.iterations;
        double gap = 0.0;
        for (size_t k = 0; k < closed.x.size(); ++k)
            gap = std::max(gap, std::abs(closed.x[k] - num.x[k]));
        worst = std::max(worst, gap);
        if (!num.converged || gap > 1e-8) ++failures;
    }
    qpa::VerifyCheck c;
    c.name = "allocation/gradient-ascent-agreement";
    c.pass = failures == 0;
    c.detail = "max coordinate gap " + std::to_string(worst) + " over " +
               std::to_string(instances) + " instances";
    c.stats = {{"max_gap", worst},
               {"failures", static_cast<double>(failures)},
               {"mean_iterations", static_cast<double>(iters) / instances}};
    rep.checks.push_back(std::move(c));

    // Screening = welfare improvement under diverted-mass accounting.
    int breaches = 0;
    double worst_gain = 0.0;
    for (int i = 0; i < instances; ++i) {
        const qpa::SingleInstance inst =
            qpa::make_single_instance(derive_seed(seed ^ 0xABCDULL, static_cast<std::uint64_t>(i)));
        const qpa::ScreeningWelfareReport r = qpa::screening_welfare_check(inst);
        if (!r.add_ineligible_never_helps || !r.drop_eligible_never_helps) ++breaches;
        worst_gain = std::max(worst_gain, r.worst_gain);
    }
    qpa::VerifyCheck s;
    s.name = "allocation/screening-welfare-threshold";
    s.pass = breaches == 0;
    s.detail = std::to_string(breaches) + " exclusion-rule breaches";
    s.stats = {{"breaches", static_cast<double>(breaches)}, {"worst_gain", worst_gain}};
    rep.checks.push_back(std::move(s));
}

void suite_payment(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    double worst_single = 0.0, worst_base = 0.0;
    int failures = 0, quad_failures = 0;
    for (int i = 0; i < instances; ++i) {
        const qpa::SingleInstance inst =
            qpa::make_single_instance(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const qpa::EligibleContext ctx =
            qpa::build_context(inst.bids, inst.weights, inst.welfare);
        for (int id : ctx.eligible()) {
            const double closed = qpa::payment(id, inst.bids, ctx, inst.lambda_tilde);
            const qpa::QuadratureReport q =
                qpa::envelope_payment(id, inst.bids, ctx, inst.lambda_tilde);
            if (!q.converged) ++quad_failures;
            const double gap = std::abs(closed - q.value);
            worst_single = std::max(worst_single, gap);
            if (gap > 1e-6) ++failures;
        }
        std::vector<int> pool(inst.bids.size());
        std::iota(pool.begin(), pool.end(), 1);
        for (int id : pool) {
            const double closed = qpa::seg_payment(id, inst.bids, inst.weights, pool);
            const qpa::QuadratureReport q =
                qpa::baseline_envelope_payment(id, inst.bids, inst.weights, pool);
            if (!q.converged) ++quad_failures;
            const double gap = std::abs(closed - q.value);
            worst_base = std::max(worst_base, gap);
            if (gap > 1e-6) ++failures;
        }
    }
    qpa::VerifyCheck c;
    c.name = "payment/quadrature-agreement";
    c.pass = failures == 0 && quad_failures == 0;
    c.detail = "max gap single " + std::to_string(worst_single) + ", baseline " +
               std::to_string(worst_base);
    c.stats = {{"max_gap_single", worst_single},
               {"max_gap_baseline", worst_base},
               {"failures", static_cast<double>(failures)},
               {"quadrature_failures", static_cast<double>(quad_failures)}};
    rep.checks.push_back(std::move(c));
}

void suite_dsic(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    struct Case {
        qpa::MechanismFamily family;
        const char* name;
        int grid;
        bool expect_violations;
    };
    const Case cases[] = {
        {qpa::MechanismFamily::Single, "dsic/single", 50, false},
        {qpa::MechanismFamily::Baseline, "dsic/baseline", 50, false},
        {qpa::MechanismFamily::Multi, "dsic/multi", 25, false},
        {qpa::MechanismFamily::PayYourBid, "dsic/pay-your-bid-canary", 50, true},
    };
    for (const Case& cs : cases) {
        const qpa::SweepReport r =
            qpa::dsic_sweep(cs.family, instances, cs.grid, seed);
        qpa::VerifyCheck c;
        c.name = cs.name;
        if (cs.expect_violations) {
            c.pass = r.violation_count > 0;
            c.detail = "canary must be caught: " + std::to_string(r.violation_count) +
                       " profitable deviations found";
        } else {
            c.pass = r.violation_count == 0 && r.ir_violations == 0 &&
                     r.bound_violations == 0;
            c.detail = std::to_string(r.violation_count) + " profitable deviations, " +
                       std::to_string(r.ir_violations) + " IR breaches, " +
                       std::to_string(r.bound_violations) + " payment-bound breaches in " +
                       std::to_string(r.deviations_checked) + " checks";
        }
        c.stats = {{"deviations_checked", static_cast<double>(r.deviations_checked)},
                   {"violations", static_cast<double>(r.violation_count)},
                   {"ir_violations", static_cast<double>(r.ir_violations)},
                   {"bound_violations", static_cast<double>(r.bound_violations)},
                   {"worst_gap", r.worst_gap}};
        rep.checks.push_back(std::move(c));
    }
}

void suite_klbound(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    qpa::Rng rng(seed);
    int failures = 0;
    double worst_excess = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int m = rng.uniform_int(2, 6);        // support size
        const int a = rng.uniform_int(2, 6);        // outcome alphabet
        auto draw_simplex = [&](int dim) {
            std::vector<double> v(static_cast<size_t>(dim));
            double s = 0.0;
            for (double& x : v) s += (x = rng.uniform(0.05, 1.0));
            for (double& x : v) x /= s;
            return v;
        };
        const std::vector<double> x = draw_simplex(m);
        const std::vector<double> q = draw_simplex(m);
        std::vector<qpa::OutcomeDistribution> comps;
        for (int k = 0; k < m; ++k) comps.push_back({draw_simplex(a)});
        const qpa::KlBoundReport r = qpa::kl_bound_check(x, q, comps);
        if (!r.holds) ++failures;
        worst_excess = std::max(worst_excess, r.lhs - r.rhs);
        // Equality case: identical inputs give KL 0 on both sides.
        const qpa::KlBoundReport eq = qpa::kl_bound_check(x, x, comps);
        if (std::abs(eq.lhs) > 1e-15 || std::abs(eq.rhs) > 1e-15) ++failures;
    }
    qpa::VerifyCheck c;
    c.name = "klbound/mixture-contraction";
    c.pass = failures == 0;
    c.detail = std::to_string(failures) + " bound failures, worst lhs-rhs " +
               std::to_string(worst_excess);
    c.stats = {{"failures", static_cast<double>(failures)}, {"worst_excess", worst_excess}};
    rep.checks.push_back(std::move(c));
}

void suite_derivative(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    double worst = 0.0;
    int failures = 0;
    for (int i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        const qpa::SingleInstance inst = qpa::make_single_instance(s, /*tame=*/true);
        const qpa::DerivativeCheck chk = qpa::derivative_check(inst, s);
        worst = std::max(worst, chk.rel_error);
        if (chk.rel_error > 1e-6) ++failures;
    }
    qpa::VerifyCheck c;
    c.name = "derivative/own-bid-slope";
    c.pass = failures == 0;
    c.detail = "worst relative error " + std::to_string(worst);
    c.stats = {{"worst_rel_error", worst}, {"failures", static_cast<double>(failures)}};
    rep.checks.push_back(std::move(c));
}

void suite_vcg(qpa::VerifyReport& rep, int instances, std::uint64_t seed) {
    int mismatches = 0, zero_failures = 0;
    double worst_welfare = 0.0, worst_payment = 0.0;
    for (int i = 0; i < instances; ++i) {
        qpa::MultiInstance inst =
            qpa::make_multi_instance(derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::vector<int> pool(inst.bids.size());
        std::iota(pool.begin(), pool.end(), 1);
        const qpa::VcgCrossCheck chk =
            qpa::exhaustive_vcg(inst.bids, inst.weights, inst.rel_matrix, inst.xi,
                                inst.welfare, pool);
        if (!chk.sets_match) ++mismatches;
        worst_welfare = std::max(worst_welfare, chk.welfare_gap);
        worst_payment = std::max(worst_payment, chk.max_payment_gap);

        // With no pairwise adjustment the externality terms cancel exactly.
        const qpa::MultiOutcome flat =
            qpa::vcg_auction(inst.bids, inst.weights, inst.rel_matrix, 0.0,
                             inst.welfare, pool);
        for (double p : flat.payments)
            if (p != 0.0) ++zero_failures;
    }
    qpa::VerifyCheck c;
    c.name = "vcg/exhaustive-re-enumeration";
    c.pass = mismatches == 0 && worst_welfare <= 1e-9 && worst_payment <= 1e-9;
    c.detail = std::to_string(mismatches) + " set mismatches, welfare gap " +
               std::to_string(worst_welfare) + ", payment gap " +
               std::to_string(worst_payment);
    c.stats = {{"mismatches", static_cast<double>(mismatches)},
               {"worst_welfare_gap", worst_welfare},
               {"worst_payment_gap", worst_payment}};
    rep.checks.push_back(std::move(c));

    qpa::VerifyCheck z;
    z.name = "vcg/zero-coupling-zero-payments";
    z.pass = zero_failures == 0;
    z.detail = std::to_string(zero_failures) + " nonzero payments at xi = 0";
    z.stats = {{"nonzero_payments", static_cast<double>(zero_failures)}};
    rep.checks.push_back(std::move(z));
}

int run_verify(const std::string& suite, int instances, std::uint64_t seed,
               const std::string& out_dir) {
    qpa::VerifyReport rep;
    rep.suite = suite;
    rep.seed = seed;
    rep.instances = instances;

    const bool all = suite == "all";
    if (all || suite == "allocation") suite_allocation(rep, instances, seed);
    if (all || suite == "payment") suite_payment(rep, instances, seed);
    if (all || suite == "dsic") suite_dsic(rep, instances, seed);
    if (all || suite == "klbound") suite_klbound(rep, instances, seed);
    if (all || suite == "derivative") suite_derivative(rep, instances, seed);
    if (all || suite == "vcg") suite_vcg(rep, instances, seed);
    if (rep.checks.empty())
        throw CliError{kExitUsage,
                       "unknown suite '" + suite +
                           "' (allocation, payment, dsic, klbound, derivative, vcg, all)"};

    for (const qpa::VerifyCheck& c : rep.checks)
        std::cout << (c.pass ? "[ok]   " : "[FAIL] ") << c.name << ": " << c.detail << "\n";

    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/verification.json";
    std::ofstream os(path);
    qpa::write_verification_json(rep, os);
    std::cout << (rep.all_pass() ? "all checks passed" : "CHECKS FAILED") << " -> " << path
              << "\n";
    return rep.all_pass() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quality-preserving ad auction simulator and verifier"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "simulate mechanisms over a scenario");
    std::string scenario = "scenario1";
    std::string mechanisms = "all";
    std::string replacement;
    std::string provider_name = "static";
    std::string replay_file;
    std::string out_dir = "out";
    int trials = 100;
    int segments = 0;
    std::uint64_t seed = 2024;
    double sigma = 0.01;
    bool utility_topup = false;
    run->add_option("--scenario", scenario, "bundled name or JSON file path");
    run->add_option("--mechanisms", mechanisms, "'all' or comma list of mechanism ids");
    run->add_option("--trials", trials, "number of seeded trials (>= 2)");
    run->add_option("--seed", seed, "base seed (QP_AUCTION_SEED overrides)");
    run->add_option("--segments", segments, "segment count; 0 = scenario default");
    run->add_option("--replacement", replacement,
                    "filter single-allocation mechanisms: 'with' or 'without'")
        ->check(CLI::IsMember({"with", "without"}));
    run->add_option("--provider", provider_name, "relevance source: static, noisy, replay");
    run->add_option("--sigma", sigma, "organic-weight noise for --provider noisy");
    run->add_option("--replay-file", replay_file, "weight trace for --provider replay");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--utility-topup", utility_topup,
                  "enable the reserve-rebate payment variant");

    // verify
    auto* verify = app.add_subcommand("verify", "run oracle verification suites");
    std::string suite = "all";
    int instances = 50;
    std::uint64_t vseed = 2024;
    std::string vout = "out";
    verify->add_option("--suite", suite,
                       "allocation, payment, dsic, klbound, derivative, vcg, all");
    verify->add_option("--instances", instances, "instances per suite")
        ->check(CLI::PositiveNumber);
    verify->add_option("--seed", vseed, "base seed (QP_AUCTION_SEED overrides)");
    verify->add_option("--out", vout, "output directory");

    // list
    auto* list = app.add_subcommand("list", "print bundled scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (list->parsed()) {
            for (const std::string& name : qpa::bundled_scenario_names())
                std::cout << name << "\n";
            return kExitOk;
        }

        if (verify->parsed()) {
            bool from_env = false;
            vseed = resolve_seed(vseed, from_env);
            return run_verify(suite, instances, vseed, vout);
        }

        // run
        bool from_env = false;
        seed = resolve_seed(seed, from_env);
        const std::vector<qpa::MechanismSpec> mechs =
            resolve_mechanisms(mechanisms, replacement);
        const qpa::Scenario sc = qpa::load_scenario(scenario);
        const std::unique_ptr<qpa::RelevanceProvider> provider =
            resolve_provider(provider_name, sigma, replay_file);

        const qpa::MetricsReport report = qpa::run_experiment(
            mechs, sc, trials, seed, segments, *provider, utility_topup);

        qpa::RunConfig cfg;
        cfg.scenario = scenario;
        for (const qpa::MechanismSpec& m : mechs) cfg.mechanisms.push_back(qpa::mechanism_id(m));
        cfg.trials = trials;
        cfg.base_seed = seed;
        cfg.segments = report.segments;
        cfg.provider = provider->name();
        cfg.sigma = sigma;
        cfg.replay_file = replay_file;
        cfg.seed_from_env = from_env;

        std::filesystem::create_directories(out_dir);
        {
            std::ofstream os(out_dir + "/results.csv");
            qpa::write_results_csv(report, os);
        }
        {
            std::ofstream os(out_dir + "/results.json");
            qpa::write_run_sidecar_json(report, cfg, os);
        }
        qpa::print_summary_table(report, std::cout);
        std::cout << "wrote " << out_dir << "/results.csv and " << out_dir
                  << "/results.json\n";
        return kExitOk;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
