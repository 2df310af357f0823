#include <benchmark/benchmark.h>

#include <vector>

#include "qpa/multi_auction.hpp"
#include "qpa/oracle.hpp"
#include "qpa/scenario_io.hpp"
#include "qpa/screening.hpp"
#include "qpa/simulator.hpp"
#include "qpa/single_auction.hpp"

using namespace qpa;

static void BM_BuildContext(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const std::vector<double> bids = sc.bids();
    const std::vector<double> w = sc.relevance.weights_at(0);
    for (auto _ : state) {
        EligibleContext ctx = build_context(bids, w, sc.welfare_single);
        benchmark::DoNotOptimize(ctx.star.data());
    }
}
BENCHMARK(BM_BuildContext);

static void BM_Allocate(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const EligibleContext ctx =
        build_context(sc.bids(), sc.relevance.weights_at(0), sc.welfare_single);
    for (auto _ : state) {
        Allocation a = allocate(ctx, sc.params.lambda_tilde);
        benchmark::DoNotOptimize(a.x.data());
    }
}
BENCHMARK(BM_Allocate);

static void BM_Payment(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const std::vector<double> bids = sc.bids();
    const EligibleContext ctx =
        build_context(bids, sc.relevance.weights_at(0), sc.welfare_single);
    for (auto _ : state) {
        double p = payment(1, bids, ctx, sc.params.lambda_tilde);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_Payment);

// Subset enumeration cost grows with the screened pool: scenario1 admits two
// ads, scenario4 admits seven.
static void BM_VcgEnumerate(benchmark::State& state) {
    const Scenario sc =
        load_scenario(state.range(0) == 1 ? "scenario1" : "scenario4");
    for (auto _ : state) {
        MultiOutcome m = vcg_run(sc, 0);
        benchmark::DoNotOptimize(m.welfare);
    }
}
BENCHMARK(BM_VcgEnumerate)->Arg(1)->Arg(4);

static void BM_NumericAllocate(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const EligibleContext ctx =
        build_context(sc.bids(), sc.relevance.weights_at(0), sc.welfare_single);
    for (auto _ : state) {
        GradientSolveReport r = numeric_allocate(ctx, sc.params.lambda_tilde);
        benchmark::DoNotOptimize(r.x.data());
    }
}
BENCHMARK(BM_NumericAllocate);

static void BM_EnvelopePayment(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const std::vector<double> bids = sc.bids();
    const EligibleContext ctx =
        build_context(bids, sc.relevance.weights_at(0), sc.welfare_single);
    for (auto _ : state) {
        QuadratureReport q = envelope_payment(1, bids, ctx, sc.params.lambda_tilde);
        benchmark::DoNotOptimize(q.value);
    }
}
BENCHMARK(BM_EnvelopePayment);

static void BM_RunTrial(benchmark::State& state) {
    const Scenario sc = load_scenario("scenario1");
    const StaticTable provider;
    const MechanismSpec mech{MechanismKind::QpSingle, Replacement::With};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        TrialResult t = run_trial(mech, sc, 3, seed++, provider);
        benchmark::DoNotOptimize(t.entries.data());
    }
}
BENCHMARK(BM_RunTrial);

BENCHMARK_MAIN();
