#include <benchmark/benchmark.h>

#include "dmimo/agents.hpp"
#include "dmimo/baselines.hpp"
#include "dmimo/env.hpp"

using namespace dmimo;

static void BM_EvaluateChannelPlan(benchmark::State& state) {
  ChannelAssignmentEnv env(ScenarioConfig::p3(static_cast<int>(state.range(0))));
  Rng rng(1);
  env.reset(rng);
  const ChannelPlan plan = assign_heuristic_pattern(env.topology());
  for (auto _ : state) benchmark::DoNotOptimize(env.evaluate(plan));
}
BENCHMARK(BM_EvaluateChannelPlan)->Arg(0)->Arg(3)->Arg(11);

static void BM_ChannelEnvReset(benchmark::State& state) {
  ChannelAssignmentEnv env(ScenarioConfig::p2(3));
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(env.reset(rng));
}
BENCHMARK(BM_ChannelEnvReset);

static void BM_GroupingStep(benchmark::State& state) {
  GroupingEnv env(ScenarioConfig::p4());
  Rng rng(3);
  env.reset(rng);
  for (auto _ : state) {
    if (env.steps_taken() == env.config().episode_length) env.reset(rng);
    benchmark::DoNotOptimize(env.step(env.valid_actions()[static_cast<std::size_t>(rng() % 448)]));
  }
}
BENCHMARK(BM_GroupingStep);

static void BM_ReinforceEpisodeUpdate(benchmark::State& state) {
  Rng init(4);
  ReinforceAgent agent(16, 64, ReinforceConfig{}, init);
  Trajectory traj;
  traj.episode_length = 50;
  for (int t = 0; t < 50; ++t) traj.steps.push_back({std::vector<double>(16, 0.1 * (t % 7)), t % 64, 0.01, std::vector<double>(16, 0.0)});
  for (auto _ : state) agent.update(traj);
}
BENCHMARK(BM_ReinforceEpisodeUpdate);

static void BM_WolpertingerSelect(benchmark::State& state) {
  Rng init(5), rng(6);
  const DdpgAgent agent(82, 496, DdpgConfig{}, init);
  GroupingEnv env(ScenarioConfig::p4());
  env.reset(rng);
  const auto s = env.encode_state();
  const auto valid = env.valid_actions();
  for (auto _ : state) benchmark::DoNotOptimize(agent.select(s, valid, rng));
}
BENCHMARK(BM_WolpertingerSelect);

static void BM_DdpgUpdate(benchmark::State& state) {
  Rng init(7), rng(8);
  DdpgAgent agent(82, 496, DdpgConfig{}, init);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(82), n(82);
    for (double& v : s) v = u(rng);
    for (double& v : n) v = u(rng);
    agent.remember(s, i % 496, 0.01, n, false);
  }
  for (auto _ : state) agent.update(rng);
}
BENCHMARK(BM_DdpgUpdate);
BENCHMARK_MAIN();
