#include <memory>

#include <benchmark/benchmark.h>

#include "richpref/active.hpp"
#include "richpref/belief.hpp"
#include "richpref/querygen.hpp"

using namespace richpref;

namespace {

const QueryPool& bench_pool() {
    static const QueryPool pool = [] {
        PoolConfig cfg;
        cfg.pool_size = 500;
        const auto envs = generate_environments(40, 5, cfg.world);
        const auto thetas = sample_plausible_rewards(19, 6, envs.front(), cfg.world, cfg.optimizer);
        return build_pool(envs, thetas, cfg);
    }();
    return pool;
}

const RationalityParams kModel{2.0, 2.5, 0.066};

void BM_LikelihoodTable(benchmark::State& state) {
    const auto hs = HypothesisSet::sample(static_cast<std::size_t>(state.range(0)), 1);
    bench_pool();
    for (auto _ : state) {
        LikelihoodTable table(hs, bench_pool(), kModel, 1);
        benchmark::DoNotOptimize(table.size());
    }
}
BENCHMARK(BM_LikelihoodTable)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SelectQuery(benchmark::State& state) {
    const auto mode = static_cast<SelectionMode>(state.range(0));
    const auto hs = std::make_shared<const HypothesisSet>(HypothesisSet::sample(500, 1));
    const LikelihoodTable table(*hs, bench_pool(), kModel, 1);
    Belief b = Belief::uniform(hs);
    b = update_with_log_likelihoods(b, table.log_likelihoods(0, Answer{Choice::A, 2}));
    const std::vector<bool> asked(table.size(), false);
    for (auto _ : state) benchmark::DoNotOptimize(select_query(b, table, mode, asked));
    state.SetLabel(std::string(to_string(mode)));
}
BENCHMARK(BM_SelectQuery)
    ->Arg(static_cast<int>(SelectionMode::Rich))
    ->Arg(static_cast<int>(SelectionMode::ComparisonOnly))
    ->Arg(static_cast<int>(SelectionMode::RichWithSkip))
    ->Unit(benchmark::kMillisecond);

void BM_BeliefUpdate(benchmark::State& state) {
    const auto hs = std::make_shared<const HypothesisSet>(HypothesisSet::sample(500, 1));
    const Belief prior = Belief::uniform(hs);
    const Contrast q = bench_pool().contrast(3);
    const Answer a{Choice::B, 4};
    for (auto _ : state) benchmark::DoNotOptimize(update(prior, q, a, kModel).map_index());
}
BENCHMARK(BM_BeliefUpdate)->Unit(benchmark::kMicrosecond);

void BM_OptimizeTrajectory(benchmark::State& state) {
    WorldConfig world;
    const auto envs = generate_environments(1, 9, world);
    Rng rng = make_rng(3);
    const FeatureVector theta = RewardWeights::random(rng).values();
    OptimizerConfig opt;
    opt.candidates = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(optimize_trajectory(envs[0], theta, world, opt).phi);
}
BENCHMARK(BM_OptimizeTrajectory)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
