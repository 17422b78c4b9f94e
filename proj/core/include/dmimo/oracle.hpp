#pragma once

#include <vector>

#include "dmimo/baselines.hpp"
#include "dmimo/env.hpp"

namespace dmimo {

struct PlanScore {
  ChannelPlan plan;
  double metric = 0.0;
};

struct ChannelOracleResult {
  PlanScore best;                // first optimum in lexicographic plan order
  std::vector<PlanScore> plans;  // every plan, lexicographic
};

// Exhaustive search over all K^G channel plans on the environment's current
// realization. Refuses instances with more than `max_plans` plans.
ChannelOracleResult brute_force_channel_plans(const ChannelAssignmentEnv& env,
                                              long max_plans = 1L << 20);

struct ColoringOracleResult {
  ChannelPlan plan;
  double objective = 0.0;
};

// Exact minimum of the same-colour weight sum over all K^n colourings.
ColoringOracleResult brute_force_coloring(const ConflictWeights& weights, int channels);

// Symmetric graph with i.i.d. edges (probability `edge_probability`) and
// uniform(0, 1] weights.
ConflictWeights random_conflict_graph(int vertices, double edge_probability, Rng& rng);

}  // namespace dmimo
