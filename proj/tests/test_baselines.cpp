#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "dmimo/baselines.hpp"
#include "dmimo/env.hpp"
#include "dmimo/metrics.hpp"

using namespace dmimo;

namespace {

const RadioConfig kRadio;
const MacConfig kMac;

struct Scene {
  Topology topology;
  LinkGains gains;
  Grouping grouping;
  Association association;
};

Scene p1_scene(std::uint64_t seed) {
  Scene s;
  s.topology = make_grid_topology(GridSpec{}, kRadio);
  Rng rng(seed);
  s.topology.users = make_uniform_users(s.topology, 64, rng);
  s.gains = sample_link_gains(s.topology, kRadio, rng);
  s.grouping = Grouping::from_groups(s.topology.groups, 64);
  s.association = associate_users(s.topology, s.gains, s.grouping);
  return s;
}

double p30(const Scene& s, const ChannelPlan& plan) {
  return percentile_throughput(
      simulate_step(s.topology, s.gains, plan, s.grouping, s.association, kRadio, kMac).per_user_throughput_mbps,
      30.0);
}

}  // namespace

TEST(AllSame, EveryGroupOnChannelOne) {
  EXPECT_EQ(assign_all_same(16), ChannelPlan(16, 1));
  EXPECT_NO_THROW(validate_plan(assign_all_same(16), 16, 4));
}

TEST(AllSame, WorstAmongRandomPlans) {
  const Scene s = p1_scene(17);
  const double same = p30(s, assign_all_same(16));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) EXPECT_LE(same, p30(s, assign_random(16, 4, rng)));
}

TEST(Random, DeterministicInRangeAndUniform) {
  Rng a(99), b(99);
  EXPECT_EQ(assign_random(16, 4, a), assign_random(16, 4, b));
  Rng rng(1);
  std::vector<double> counts(4, 0.0);
  const int plans = 6250;  // 10^5 channel draws
  for (int i = 0; i < plans; ++i)
    for (int c : assign_random(16, 4, rng)) {
      ASSERT_GE(c, 1);
      ASSERT_LE(c, 4);
      counts[c - 1] += 1.0;
    }
  const double expected = plans * 16 / 4.0;
  double chi2 = 0.0;
  for (double n : counts) chi2 += (n - expected) * (n - expected) / expected;
  EXPECT_LT(chi2, 11.345);  // chi-square, 3 degrees of freedom, 1%
}

TEST(Heuristic, NoNeighbourSharesAChannel) {
  const Topology t = make_grid_topology(GridSpec{}, kRadio);
  const ChannelPlan plan = assign_heuristic_pattern(t);
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b) {
      const int dr = std::abs(a / 4 - b / 4), dc = std::abs(a % 4 - b % 4);
      if (dr <= 1 && dc <= 1) EXPECT_NE(plan[a], plan[b]) << a << "-" << b;
    }
  for (int c = 1; c <= 4; ++c) EXPECT_EQ(std::count(plan.begin(), plan.end(), c), 4);
}

TEST(Heuristic, BeatsAllSame) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene s = p1_scene(seed);
    EXPECT_GT(p30(s, assign_heuristic_pattern(s.topology)), p30(s, assign_all_same(16)));
  }
}

TEST(Heuristic, RejectsNonGridTopology) {
  Topology t = make_grid_topology(GridSpec{}, kRadio);
  t.groups.pop_back();
  EXPECT_THROW(assign_heuristic_pattern(t), std::invalid_argument);
}

TEST(Sensing, ScattersFromAllSame) {
  const Scene s = p1_scene(5);
  const ChannelPlan next = assign_sensing(s.topology, s.gains, s.grouping, s.association, assign_all_same(16));
  for (int c : next) EXPECT_NE(c, 1);
  // Every other channel is silent, so the tie goes to the lowest of them.
  for (int c : next) EXPECT_EQ(c, 2);
}

TEST(Sensing, AvoidsNearbyInterferer) {
  Scene s = p1_scene(6);
  Interferer intf;
  intf.location = {-3.0, 10.0};  // just outside group 0
  intf.channel = 2;
  s.topology.interferers = {intf};
  Rng rng(6);
  s.gains = sample_link_gains(s.topology, kRadio, rng);
  s.association = associate_users(s.topology, s.gains, s.grouping);
  ChannelPlan current = assign_heuristic_pattern(s.topology);
  const ChannelPlan next = assign_sensing(s.topology, s.gains, s.grouping, s.association, current);
  EXPECT_NE(next[0], 2);
  // Pure function of its inputs.
  EXPECT_EQ(next, assign_sensing(s.topology, s.gains, s.grouping, s.association, current));
}

TEST(ConflictWeights, SymmetricZeroDiagonalNonNegative) {
  const Scene s = p1_scene(8);
  const ConflictWeights w = conflict_weights(s.topology, s.gains, s.grouping, s.association, -82.0);
  ASSERT_EQ(w.size(), 16);
  EXPECT_TRUE(w.w.isApprox(w.w.transpose()));
  EXPECT_EQ(w.w.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(w.w.minCoeff(), 0.0);
  EXPECT_GT(w.w.maxCoeff(), 0.0);
}

TEST(Hsum, ZeroWeightsGiveZeroObjective) {
  ConflictWeights w{Eigen::MatrixXd::Zero(6, 6)};
  const ChannelPlan plan = assign_hsum(w, 3);
  EXPECT_EQ(plan.size(), 6u);
  EXPECT_DOUBLE_EQ(coloring_objective(w, plan), 0.0);
}

TEST(Hsum, EqualCliqueGetsDistinctColours) {
  ConflictWeights w{Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4)};
  const ChannelPlan plan = assign_hsum(w, 4);
  EXPECT_EQ(std::set<int>(plan.begin(), plan.end()).size(), 4u);
  EXPECT_DOUBLE_EQ(coloring_objective(w, plan), 0.0);
}

TEST(Hsum, LocalSearchIsMonotone) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene s = p1_scene(seed);
    const ConflictWeights w = conflict_weights(s.topology, s.gains, s.grouping, s.association, -82.0);
    const HsumResult r = assign_hsum_detailed(w, 4);
    ASSERT_FALSE(r.objective_trace.empty());
    EXPECT_DOUBLE_EQ(r.objective_trace.front(), r.greedy_objective);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      EXPECT_LT(r.objective_trace[i], r.objective_trace[i - 1]);
    EXPECT_DOUBLE_EQ(r.objective_trace.back(), coloring_objective(w, r.plan));
    EXPECT_NO_THROW(validate_plan(r.plan, 16, 4));
  }
}

TEST(Grouping, AdjacentBlocks) {
  const Topology t = make_grid_topology(GridSpec{8, 4, 10.0, 2, 2, 4}, kRadio);
  const Grouping g = grouping_adjacent(t);
  ASSERT_EQ(g.group_count(), 8);
  for (int gid = 0; gid < 8; ++gid) {
    const auto& m = g.members(gid);
    ASSERT_EQ(m.size(), 4u);
    // Contiguous 2x2 block: every member within one diagonal step of every other.
    for (int a : m)
      for (int b : m) EXPECT_LE(distance(t.rhs[a].location, t.rhs[b].location), 10.0 * std::sqrt(2.0) + 1e-9);
  }
  EXPECT_EQ(g.group_of(0), 0);
  EXPECT_EQ(g.group_of(9), 0);
  EXPECT_EQ(g.group_of(2), 1);
  EXPECT_EQ(g.group_of(16), 4);
}

TEST(Grouping, RandomPartition) {
  Rng a(12), b(12);
  const Grouping ga = grouping_random(32, a), gb = grouping_random(32, b);
  EXPECT_EQ(ga, gb);
  std::vector<int> seen(32, 0);
  for (int gid = 0; gid < ga.group_count(); ++gid) {
    EXPECT_EQ(ga.members(gid).size(), 4u);
    for (int r : ga.members(gid)) ++seen[r];
  }
  for (int n : seen) EXPECT_EQ(n, 1);
  Rng c(1);
  EXPECT_THROW(grouping_random(30, c), std::invalid_argument);
}
