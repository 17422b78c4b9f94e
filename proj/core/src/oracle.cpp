#include "dmimo/oracle.hpp"

#include <stdexcept>

namespace dmimo {

namespace {

// Advances a base-K odometer over 1-based digits; false after the last plan.
bool next_plan(ChannelPlan& plan, int k) {
  for (std::size_t i = plan.size(); i-- > 0;) {
    if (plan[i] < k) {
      ++plan[i];
      return true;
    }
    plan[i] = 1;
  }
  return false;
}

long plan_count(int n, int k, long limit) {
  long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= k;
    if (total > limit) return limit + 1;
  }
  return total;
}

}  // namespace

ChannelOracleResult brute_force_channel_plans(const ChannelAssignmentEnv& env, long max_plans) {
  const int groups = env.group_count();
  const int k = env.channels();
  if (plan_count(groups, k, max_plans) > max_plans)
    throw std::invalid_argument("instance too large for exhaustive search");
  ChannelOracleResult out;
  ChannelPlan plan(static_cast<std::size_t>(groups), 1);
  do {
    const double m = env.evaluate(plan);
    out.plans.push_back({plan, m});
    if (out.plans.size() == 1 || m > out.best.metric) out.best = out.plans.back();
  } while (next_plan(plan, k));
  return out;
}

ColoringOracleResult brute_force_coloring(const ConflictWeights& weights, int channels) {
  if (channels < 1) throw std::invalid_argument("need at least one channel");
  const int n = weights.size();
  if (plan_count(n, channels, 1L << 24) > (1L << 24))
    throw std::invalid_argument("graph too large for exhaustive colouring");
  ColoringOracleResult best;
  ChannelPlan plan(static_cast<std::size_t>(n), 1);
  bool first = true;
  do {
    const double obj = coloring_objective(weights, plan);
    if (first || obj < best.objective) {
      best = {plan, obj};
      first = false;
    }
  } while (next_plan(plan, channels));
  return best;
}

ConflictWeights random_conflict_graph(int vertices, double edge_probability, Rng& rng) {
  if (vertices < 1) throw std::invalid_argument("need at least one vertex");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConflictWeights g;
  g.w.setZero(vertices, vertices);
  for (int a = 0; a < vertices; ++a)
    for (int b = a + 1; b < vertices; ++b)
      if (unit(rng) < edge_probability) g.w(a, b) = g.w(b, a) = 1.0 - unit(rng);
  return g;
}

}  // namespace dmimo
