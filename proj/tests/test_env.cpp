#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dmimo/baselines.hpp"
#include "dmimo/env.hpp"

using namespace dmimo;

namespace {

int count_changes(const std::vector<int>& a, const std::vector<int>& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace

TEST(ChannelEnv, ResetStartsAllRed) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  Rng rng(1);
  env.reset(rng);
  EXPECT_EQ(env.plan(), ChannelPlan(16, 1));
  EXPECT_EQ(env.encode_state(), std::vector<double>(16, -1.0));
  EXPECT_EQ(env.state_width(), 16);
}

TEST(ChannelEnv, ResetIsDeterministic) {
  ChannelAssignmentEnv a(ScenarioConfig::p2(3)), b(ScenarioConfig::p2(3));
  Rng ra(5), rb(5);
  EXPECT_DOUBLE_EQ(a.reset(ra), b.reset(rb));
  EXPECT_EQ(a.encode_state(), b.encode_state());
  EXPECT_EQ(a.association().user_rh, b.association().user_rh);
}

TEST(ChannelEnv, ActionSpace) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  EXPECT_EQ(env.action_count(), 64);
  EXPECT_EQ(env.valid_actions().size(), 64u);
  const ChannelAction first = ChannelAssignmentEnv::decode_action(0, 4);
  EXPECT_EQ(first.group, 0);
  EXPECT_EQ(first.channel, 1);
  const ChannelAction last = ChannelAssignmentEnv::decode_action(63, 4);
  EXPECT_EQ(last.group, 15);
  EXPECT_EQ(last.channel, 4);
  for (int a = 0; a < 64; ++a)
    EXPECT_EQ(ChannelAssignmentEnv::encode_action(ChannelAssignmentEnv::decode_action(a, 4), 4), a);
}

TEST(ChannelEnv, Encoding) {
  EXPECT_EQ(ChannelAssignmentEnv::encode_plan({1, 2, 3, 4}),
            (std::vector<double>{-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0}));
}

TEST(ChannelEnv, StepChangesOneEntry) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  Rng rng(2);
  env.reset(rng);
  const ChannelPlan before = env.plan();
  // Group 9 (1-based) to channel 3.
  env.step(ChannelAssignmentEnv::encode_action({8, 3}, 4));
  EXPECT_EQ(count_changes(before, env.plan()), 1);
  EXPECT_EQ(env.plan()[8], 3);
}

TEST(ChannelEnv, NoOpGivesZeroReward) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  Rng rng(3);
  env.reset(rng);
  const StepResult r = env.step(ChannelAssignmentEnv::encode_action({4, 1}, 4));
  EXPECT_EQ(r.reward, 0.0);
}

TEST(ChannelEnv, LeavingRedNeverHurts) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  int positive = 0;
  for (int a = 0; a < 64; ++a) {
    if (ChannelAssignmentEnv::decode_action(a, 4).channel == 1) continue;
    Rng rng(4);
    env.reset(rng);
    const StepResult r = env.step(a);
    EXPECT_GE(r.reward, 0.0) << "action " << a;
    positive += r.reward > 0.0;
  }
  EXPECT_GT(positive, 0);
}

TEST(ChannelEnv, EpisodeLengthAndTelescoping) {
  ChannelAssignmentEnv env(ScenarioConfig::p3(3));
  Rng rng(6), pick(7);
  std::uniform_int_distribution<int> action(0, 63);
  for (int episode = 0; episode < 5; ++episode) {
    const double x0 = env.reset(rng);
    double sum = 0.0;
    for (int t = 0; t < 50; ++t) {
      const ChannelPlan before = env.plan();
      const StepResult r = env.step(action(pick));
      EXPECT_LE(count_changes(before, env.plan()), 1);
      EXPECT_EQ(r.done, t == 49);
      sum += r.reward;
    }
    EXPECT_NEAR(sum, (env.current_metric() - x0) / 100.0, 1e-12);
    EXPECT_THROW(env.step(0), std::logic_error);
  }
  EXPECT_THROW(env.step(64), std::logic_error);
}

TEST(ChannelEnv, InvalidAction) {
  ChannelAssignmentEnv env(ScenarioConfig::p1());
  Rng rng(1);
  EXPECT_THROW(env.step(0), std::logic_error);  // before reset
  env.reset(rng);
  EXPECT_THROW(env.step(-1), std::out_of_range);
  EXPECT_THROW(env.step(64), std::out_of_range);
}

TEST(ChannelEnv, ReplayReproducesRewards) {
  ChannelAssignmentEnv a(ScenarioConfig::p2(1)), b(ScenarioConfig::p2(1));
  Rng ra(8), rb(8), pick(9);
  a.reset(ra);
  b.reset(rb);
  std::uniform_int_distribution<int> action(0, 63);
  for (int t = 0; t < 50; ++t) {
    const int act = action(pick);
    EXPECT_EQ(a.step(act).reward, b.step(act).reward);
  }
}

TEST(ChannelEnv, StoredPlanAndFallback) {
  const auto dir = std::filesystem::temp_directory_path() / "dmimo_env_test";
  std::filesystem::create_directories(dir);
  const ChannelPlan plan{1, 2, 3, 4, 2, 3, 4, 1, 3, 4, 1, 2, 4, 1, 2, 3};
  save_channel_plan(dir / "s_star.txt", plan);
  EXPECT_EQ(load_channel_plan(dir / "s_star.txt"), plan);
  EXPECT_FALSE(load_channel_plan(dir / "missing.txt").has_value());

  ScenarioConfig cfg = ScenarioConfig::p2(1);
  cfg.initial_plan = plan;
  ChannelAssignmentEnv stored(cfg);
  Rng rng(1);
  stored.reset(rng);
  EXPECT_EQ(stored.plan(), plan);
  EXPECT_FALSE(stored.initial_plan_fell_back());

  ChannelAssignmentEnv fallback(ScenarioConfig::p2(1));
  EXPECT_TRUE(fallback.initial_plan_fell_back());
  fallback.reset(rng);
  EXPECT_EQ(fallback.plan(), assign_heuristic_pattern(fallback.topology()));
  std::filesystem::remove_all(dir);
}

TEST(ChannelEnv, ScenarioInterfererCounts) {
  for (int n : {0, 1, 3, 11}) {
    ChannelAssignmentEnv env(n == 0 ? ScenarioConfig::p1() : ScenarioConfig::p3(n));
    Rng rng(static_cast<std::uint64_t>(n));
    env.reset(rng);
    EXPECT_EQ(env.topology().interferers.size(), static_cast<std::size_t>(n));
    for (const auto& i : env.topology().interferers) {
      EXPECT_FALSE(env.topology().inside_floor(i.location));
      EXPECT_TRUE(env.topology().inside_border_zone(i.location, 15.0));
    }
  }
}

TEST(GroupingEnv, ResetIsAdjacentGrouping) {
  GroupingEnv env(ScenarioConfig::p4());
  Rng rng(1);
  env.reset(rng);
  const Grouping adjacent = grouping_adjacent(make_grid_topology(GridSpec{8, 4, 10.0, 2, 2, 4}, RadioConfig{}));
  EXPECT_EQ(env.grouping(), adjacent);
  EXPECT_EQ(env.state_width(), 82);
  EXPECT_EQ(env.encode_state().size(), 82u);
  EXPECT_EQ(env.action_count(), 496);
}

TEST(GroupingEnv, Encoding) {
  GroupingEnv env(ScenarioConfig::p4());
  Rng rng(2);
  env.reset(rng);
  const auto s = env.encode_state();
  for (int r = 0; r < 32; ++r)
    EXPECT_DOUBLE_EQ(s[r], (2.0 * (env.grouping().group_of(r) + 1) - 9.0) / 7.0);
  for (int u = 0; u < 50; ++u)
    EXPECT_DOUBLE_EQ(s[32 + u], (2.0 * (env.association().user_rh[u] + 1) - 33.0) / 31.0);
  EXPECT_DOUBLE_EQ(s[0], -1.0);  // RH 1 in group 1
}

TEST(GroupingEnv, PairsAndValidity) {
  const auto pairs = GroupingEnv::enumerate_pairs(32);
  ASSERT_EQ(pairs.size(), 496u);
  EXPECT_EQ(pairs.front(), std::make_pair(0, 1));
  EXPECT_EQ(pairs.back(), std::make_pair(30, 31));

  GroupingEnv env(ScenarioConfig::p4());
  Rng rng(3), pick(4);
  for (int episode = 0; episode < 3; ++episode) {
    const double x0 = env.reset(rng);
    double sum = 0.0;
    for (int t = 0; t < 50; ++t) {
      const auto valid = env.valid_actions();
      ASSERT_EQ(valid.size(), 448u);
      const std::vector<int> before = env.grouping().assignment();
      std::uniform_int_distribution<std::size_t> choose(0, valid.size() - 1);
      sum += env.step(valid[choose(pick)]).reward;
      EXPECT_EQ(count_changes(before, env.grouping().assignment()), 2);
      for (int g = 0; g < 8; ++g) EXPECT_EQ(env.grouping().members(g).size(), 4u);
    }
    EXPECT_NEAR(sum, (env.current_metric() - x0) / 100.0, 1e-12);
  }
}

TEST(GroupingEnv, RejectsIntraGroupSwap) {
  GroupingEnv env(ScenarioConfig::p4());
  Rng rng(5);
  env.reset(rng);
  EXPECT_THROW(env.step(0), std::invalid_argument);  // RHs 0 and 1 share group 0
  EXPECT_THROW(env.step(496), std::out_of_range);
}

TEST(Hotspots, CountsBoundsAndDeterminism) {
  const Topology t = make_grid_topology(GridSpec{8, 4, 10.0, 2, 2, 4}, RadioConfig{});
  HotspotConfig cfg;
  cfg.max_hotspots = 1;
  Rng a(10), b(10);
  std::vector<int> spots;
  const auto users = make_hotspot_users(t, 50, cfg, a, &spots);
  ASSERT_EQ(users.size(), 50u);
  ASSERT_EQ(spots.size(), 1u);
  int near = 0;
  for (const auto& u : users) {
    EXPECT_TRUE(t.inside_floor(u.location));
    near += distance(u.location, t.rhs[spots[0]].location) <= 5.0 + 1e-12;
  }
  EXPECT_GE(near, 30);
  const auto again = make_hotspot_users(t, 50, cfg, b);
  for (std::size_t i = 0; i < users.size(); ++i) {
    EXPECT_EQ(users[i].location.x, again[i].location.x);
    EXPECT_EQ(users[i].location.y, again[i].location.y);
  }

  HotspotConfig two;
  Rng c(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> s;
    make_hotspot_users(t, 50, two, c, &s);
    EXPECT_GE(s.size(), 1u);
    EXPECT_LE(s.size(), 2u);
  }
}
