#pragma once

#include "dmimo/agents.hpp"

namespace dmimo::test_support {

struct BanditRun {
  double final_probability = 0.0;  // P(best arm) after the last update
  int first_above = -1;            // first episode (1-based) after which P(best) > threshold
};

// 10-arm bandit: one-step episodes over a constant state; `best` pays 1, the rest 0.
inline BanditRun train_bandit(std::uint64_t seed, int episodes, double threshold = 0.9, int best = 3,
                              int arms = 10) {
  ReinforceConfig cfg;
  Rng init = make_rng(seed, "init");
  ReinforceAgent agent(1, arms, cfg, init);
  Rng policy = make_rng(seed, "policy");
  const std::vector<double> state{1.0};
  BanditRun run;
  for (int e = 0; e < episodes; ++e) {
    const int a = agent.select(state, policy);
    Trajectory traj;
    traj.episode_length = 1;
    traj.steps.push_back({state, a, a == best ? 1.0 : 0.0, state});
    agent.update(traj);
    run.final_probability = agent.probabilities(state)(best);
    if (run.first_above < 0 && run.final_probability > threshold) run.first_above = e + 1;
  }
  return run;
}

}  // namespace dmimo::test_support
