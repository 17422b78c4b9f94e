#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "bandit.hpp"
#include "dmimo/agents.hpp"
#include "gradcheck.hpp"

using namespace dmimo;

namespace {

ReinforceAgent zero_policy(int width = 16, int actions = 64) {
  nn::DenseNetworkSpec spec{{width, 48, actions}, {nn::Activation::kRelu}, nn::OutputTransform::kSoftmax};
  Rng rng(0);
  nn::DenseNetwork net(spec, rng);
  net.parameters() *= 0.0;
  return ReinforceAgent(ReinforceConfig{}, net);
}

DdpgConfig tiny_ddpg() {
  DdpgConfig c;
  c.actor_hidden = {4};
  c.critic_hidden = {5};
  c.batch_size = 8;
  c.buffer_capacity = 64;
  return c;
}

std::vector<double> random_state(int width, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s(static_cast<std::size_t>(width));
  for (double& v : s) v = u(rng);
  return s;
}

double chi_square(const std::vector<double>& counts, double expected) {
  double chi2 = 0.0;
  for (double n : counts) chi2 += (n - expected) * (n - expected) / expected;
  return chi2;
}

}  // namespace

TEST(Returns, WorkedExamples) {
  EXPECT_EQ(discounted_returns({1, 1, 1}, 0.5), (std::vector<double>{1.75, 1.5, 1.0}));
  EXPECT_EQ(discounted_returns({0.3, -2, 5}, 0.0), (std::vector<double>{0.3, -2, 5}));
}

TEST(Returns, MatchDirectSummation) {
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double gamma : {0.1, 0.25, 0.5, 0.99}) {
    std::vector<double> r(50);
    for (double& v : r) v = n(rng);
    const auto g = discounted_returns(r, gamma);
    for (std::size_t t = 0; t < r.size(); ++t) {
      double direct = 0.0, w = 1.0;
      for (std::size_t k = t; k < r.size(); ++k, w *= gamma) direct += w * r[k];
      EXPECT_NEAR(g[t], direct, 1e-12);
    }
  }
}

TEST(Reinforce, UntrainedPolicyIsUniform) {
  const ReinforceAgent agent = zero_policy();
  const std::vector<double> s(16, -1.0);
  EXPECT_NEAR(agent.entropy(s), std::log(64.0), 1e-12);
  Rng rng(2);
  std::vector<double> counts(64, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[agent.select(s, rng)] += 1.0;
  EXPECT_LT(chi_square(counts, draws / 64.0), 92.01);  // 63 degrees of freedom, 1%
}

TEST(Reinforce, SaturatedLogitDominates) {
  ReinforceAgent agent = zero_policy();
  agent.policy().parameters().layers.back().bias(7) = 50.0;
  const std::vector<double> s(16, 0.0);
  EXPECT_GT(agent.probabilities(s)(7), 0.999);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(agent.select(s, rng), 7);
}

TEST(Reinforce, SameSeedSameSample) {
  Rng init(4);
  const ReinforceAgent agent(16, 64, ReinforceConfig{}, init);
  const std::vector<double> s(16, 1.0 / 3.0);
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(agent.select(s, a), agent.select(s, b));
}

TEST(Reinforce, UpdateFollowsReturnSign) {
  for (double reward : {1.0, -1.0}) {
    Rng init(6);
    ReinforceAgent agent(16, 64, ReinforceConfig{}, init);
    Rng rng(7);
    const std::vector<double> s = random_state(16, rng);
    const int a = 12;
    const double before = std::log(agent.probabilities(s)(a));
    Trajectory traj;
    traj.episode_length = 1;
    traj.steps.push_back({s, a, reward, s});
    agent.update(traj);
    const double after = std::log(agent.probabilities(s)(a));
    if (reward > 0) EXPECT_GT(after, before);
    else EXPECT_LT(after, before);
    EXPECT_EQ(agent.updates(), 1);
  }
}

TEST(Reinforce, RejectsIncompleteTrajectory) {
  Rng init(8);
  ReinforceAgent agent(16, 64, ReinforceConfig{}, init);
  Trajectory traj;
  traj.episode_length = 50;
  traj.steps.push_back({std::vector<double>(16, 0.0), 0, 1.0, std::vector<double>(16, 0.0)});
  EXPECT_THROW(agent.update(traj), std::invalid_argument);
}

TEST(Reinforce, PerStepModeAlsoLearns) {
  ReinforceConfig cfg;
  cfg.per_step_updates = true;
  cfg.discount_weighting = true;
  Rng init(9);
  ReinforceAgent agent(2, 4, cfg, init);
  const std::vector<double> s{0.5, -0.5};
  const double before = agent.probabilities(s)(2);
  Trajectory traj;
  traj.episode_length = 3;
  for (int t = 0; t < 3; ++t) traj.steps.push_back({s, 2, 1.0, s});
  agent.update(traj);
  EXPECT_GT(agent.probabilities(s)(2), before);
}

TEST(Reinforce, BanditConverges) {
  const auto run = test_support::train_bandit(1, 2000);
  EXPECT_GT(run.final_probability, 0.9);
  EXPECT_GT(run.first_above, 0);
}

TEST(Reinforce, CheckpointRoundTrip) {
  ReinforceConfig cfg;
  cfg.discount = 0.25;
  cfg.normalize_returns = true;
  Rng init(10);
  ReinforceAgent agent(16, 64, cfg, init);
  Trajectory traj;
  traj.episode_length = 2;
  Rng rng(11);
  for (int t = 0; t < 2; ++t) traj.steps.push_back({random_state(16, rng), t, 0.5, random_state(16, rng)});
  agent.update(traj);
  std::stringstream ss;
  agent.save(ss);
  const ReinforceAgent back = ReinforceAgent::load(ss);
  EXPECT_EQ(back.config().discount, 0.25);
  EXPECT_TRUE(back.config().normalize_returns);
  EXPECT_EQ(back.updates(), 1);
  for (int i = 0; i < 5; ++i) {
    const auto s = random_state(16, rng);
    EXPECT_EQ(back.probabilities(s), agent.probabilities(s));
  }
}

TEST(Embedding, EvenlySpacedAndBijective) {
  const ActionEmbedding e(496);
  EXPECT_DOUBLE_EQ(e.embed(0), -1.0);
  EXPECT_DOUBLE_EQ(e.embed(495), 1.0);
  for (int i = 1; i < 496; ++i) EXPECT_GT(e.embed(i), e.embed(i - 1));
  for (int i = 0; i < 496; ++i) EXPECT_EQ(e.nearest(e.embed(i)), i);
  EXPECT_EQ(e.nearest(5.0), 495);
  EXPECT_EQ(e.nearest(-5.0), 0);
  // Exactly halfway goes to the lower index.
  const ActionEmbedding three(3);
  EXPECT_EQ(three.nearest(-0.5), 0);
  EXPECT_EQ(three.nearest(0.5), 1);
  EXPECT_EQ(three.nearest(0.5000001), 2);
  EXPECT_THROW(e.embed(496), std::out_of_range);
}

TEST(Embedding, KNearestOverValidSubset) {
  const ActionEmbedding e(11);  // points -1, -0.8, ..., 1
  const std::vector<int> valid{0, 2, 3, 7, 10};
  EXPECT_EQ(e.k_nearest(-0.05, valid, 3), (std::vector<int>{3, 7, 2}));
  EXPECT_EQ(e.k_nearest(-0.05, valid, 1), (std::vector<int>{3}));
  // Equidistant candidates come back lower index first.
  const ActionEmbedding five(5);  // -1, -0.5, 0, 0.5, 1
  EXPECT_EQ(five.k_nearest(0.0, {4, 3, 1, 0}, 2), (std::vector<int>{1, 3}));
  EXPECT_EQ(e.k_nearest(0.0, valid, 99).size(), valid.size());
  EXPECT_THROW(e.k_nearest(0.0, {}, 1), std::invalid_argument);
}

TEST(Replay, RingEvictsOldest) {
  ReplayBuffer buffer(10000);
  for (int i = 0; i < 10001; ++i) buffer.push({Eigen::VectorXd::Zero(1), 0.0, static_cast<double>(i), Eigen::VectorXd::Zero(1), false});
  EXPECT_EQ(buffer.size(), 10000u);
  EXPECT_EQ(buffer.pushed(), 10001u);
  EXPECT_EQ(buffer.at(0).reward, 1.0);
  EXPECT_EQ(buffer.at(9999).reward, 10000.0);
  for (std::size_t i = 0; i < buffer.size(); ++i) EXPECT_NE(buffer.at(i).reward, 0.0);
}

TEST(Replay, SamplingWithoutReplacementAndUniform) {
  ReplayBuffer empty(10);
  Rng rng(12);
  EXPECT_THROW(empty.sample(1, rng), std::logic_error);

  ReplayBuffer buffer(100);
  for (int i = 0; i < 100; ++i) buffer.push({Eigen::VectorXd::Zero(1), 0.0, static_cast<double>(i), Eigen::VectorXd::Zero(1), false});
  const auto all = buffer.sample_indices(100, rng);
  EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), 100u);
  EXPECT_THROW(buffer.sample(101, rng), std::invalid_argument);

  std::vector<double> counts(100, 0.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto idx = buffer.sample_indices(10, rng);
    ASSERT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 10u);
    for (std::size_t i : idx) counts[i] += 1.0;
  }
  EXPECT_LT(chi_square(counts, 1000.0), 134.64);  // 99 degrees of freedom, 1%
}

TEST(Ddpg, TargetsStartEqualAndSigmaSchedule) {
  Rng init(13);
  DdpgAgent agent(82, 496, DdpgConfig{}, init);
  EXPECT_EQ(agent.actor().parameters().flatten(), agent.target_actor().parameters().flatten());
  EXPECT_EQ(agent.critic().parameters().flatten(), agent.target_critic().parameters().flatten());
  EXPECT_EQ(agent.actor().spec().widths, (std::vector<int>{82, 256, 128, 1}));
  EXPECT_EQ(agent.critic().spec().widths, (std::vector<int>{83, 64, 32, 1}));
  EXPECT_DOUBLE_EQ(agent.sigma(), 0.5);
  agent.set_episode(250);
  EXPECT_DOUBLE_EQ(agent.sigma(), 0.275);
  agent.set_episode(500);
  EXPECT_DOUBLE_EQ(agent.sigma(), 0.05);
  agent.set_episode(5000);
  EXPECT_DOUBLE_EQ(agent.sigma(), 0.05);
}

TEST(Ddpg, KOneIsNearestValidToProto) {
  Rng init(14), rng(15);
  const DdpgAgent agent(6, 40, tiny_ddpg(), init);
  std::vector<int> valid;
  for (int a = 0; a < 40; a += 3) valid.push_back(a);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(6, rng);
    const int expected = agent.embedding().k_nearest(agent.proto_action(s), valid, 1).front();
    EXPECT_EQ(agent.select(s, valid, 1, 0.0, rng), expected);
  }
}

TEST(Ddpg, FullKIsCriticGreedy) {
  Rng init(16), rng(17);
  const DdpgAgent agent(6, 40, tiny_ddpg(), init);
  std::vector<int> valid;
  for (int a = 1; a < 40; a += 2) valid.push_back(a);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(6, rng);
    int best = valid.front();
    for (int a : valid)
      if (agent.q_value(s, a) > agent.q_value(s, best)) best = a;
    EXPECT_EQ(agent.select(s, valid, static_cast<int>(valid.size()), 0.3, rng), best);
  }
}

TEST(Ddpg, FullKWithMonotoneCriticPicksLargestEmbedding) {
  DdpgConfig cfg = tiny_ddpg();
  cfg.critic_hidden = {5, 5};
  Rng init(18), rng(19);
  DdpgAgent agent(6, 40, cfg, init);
  // Q(s, a) = tanh(softplus(softplus(a))): increasing in the action input only.
  auto& layers = agent.critic().parameters().layers;
  for (auto& l : layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  layers[0].weights(0, 6) = 1.0;
  layers[1].weights(0, 0) = 1.0;
  layers[2].weights(0, 0) = 1.0;
  const std::vector<int> valid{0, 5, 17, 23, 31};
  for (int trial = 0; trial < 20; ++trial)
    EXPECT_EQ(agent.select(random_state(6, rng), valid, 5, 0.5, rng), 31);
}

TEST(Ddpg, UpdateNeedsFullBatch) {
  Rng init(20), rng(21);
  DdpgAgent agent(6, 40, tiny_ddpg(), init);
  for (int i = 0; i < 7; ++i) agent.remember(random_state(6, rng), i, 0.1, random_state(6, rng), false);
  EXPECT_FALSE(agent.update(rng));
  EXPECT_EQ(agent.updates(), 0);
  agent.remember(random_state(6, rng), 7, 0.1, random_state(6, rng), true);
  EXPECT_TRUE(agent.update(rng));
  EXPECT_EQ(agent.updates(), 1);
}

TEST(Ddpg, SoftUpdateDrift) {
  for (double tau : {1.0, 0.001}) {
    DdpgConfig cfg = tiny_ddpg();
    cfg.actor_tau = cfg.critic_tau = tau;
    Rng init(22), rng(23);
    DdpgAgent agent(6, 40, cfg, init);
    for (int i = 0; i < 8; ++i) agent.remember(random_state(6, rng), i, 0.2, random_state(6, rng), false);
    const auto old_target = agent.target_critic().parameters().flatten();
    ASSERT_TRUE(agent.update(rng));
    const auto live = agent.critic().parameters().flatten();
    const auto target = agent.target_critic().parameters().flatten();
    for (std::size_t i = 0; i < live.size(); ++i)
      EXPECT_NEAR(target[i] - old_target[i], tau * (live[i] - old_target[i]), 1e-14);
    if (tau == 1.0) {
      EXPECT_EQ(agent.target_actor().parameters().flatten(), agent.actor().parameters().flatten());
    }
  }
}

TEST(Ddpg, CriticFitsConstantReward) {
  DdpgConfig cfg;
  cfg.discount = 0.0;
  cfg.batch_size = 32;
  cfg.critic_hidden = {64, 32};
  cfg.actor_hidden = {8};
  Rng init(24), rng(25);
  DdpgAgent agent(4, 20, cfg, init);
  std::vector<std::vector<double>> states;
  for (int i = 0; i < 64; ++i) {
    states.push_back(random_state(4, rng));
    agent.remember(states.back(), i % 20, 0.3, random_state(4, rng), false);
  }
  for (int i = 0; i < 1500; ++i) agent.update(rng);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(agent.q_value(states[i], i % 20), 0.3, 0.02);
}

TEST(Ddpg, ActorGradientMatchesFiniteDifferences) {
  Rng init(26), rng(27);
  DdpgAgent agent(3, 10, tiny_ddpg(), init);
  const Eigen::MatrixXd states = test_support::uniform_matrix(3, 5, -1.0, 1.0, rng);
  const auto analytic = agent.actor_gradient(states).flatten();
  auto objective = [&] {
    const Eigen::MatrixXd mu = agent.actor().forward(states);
    Eigen::MatrixXd x(4, states.cols());
    x.topRows(3) = states;
    x.row(3) = mu.row(0);
    return agent.critic().forward(x).mean();
  };
  std::vector<double> theta = agent.actor().parameters().flatten();
  const double h = 1e-5;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    agent.actor().parameters().unflatten(theta);
    const double up = objective();
    theta[i] = keep - h;
    agent.actor().parameters().unflatten(theta);
    const double down = objective();
    theta[i] = keep;
    agent.actor().parameters().unflatten(theta);
    EXPECT_LT(test_support::relative_error(analytic[i], (up - down) / (2 * h)), 1e-4) << "parameter " << i;
  }
}

TEST(Ddpg, CheckpointRoundTrip) {
  DdpgConfig cfg = tiny_ddpg();
  cfg.k = 7;
  Rng init(28), rng(29);
  DdpgAgent agent(6, 40, cfg, init);
  for (int i = 0; i < 10; ++i) agent.remember(random_state(6, rng), i, 0.1 * i, random_state(6, rng), i == 9);
  agent.update(rng);
  agent.set_episode(123);
  std::stringstream ss;
  agent.save(ss);
  const DdpgAgent back = DdpgAgent::load(ss);
  EXPECT_EQ(back.episode(), 123);
  EXPECT_DOUBLE_EQ(back.sigma(), agent.sigma());
  EXPECT_EQ(back.config().k, 7);
  EXPECT_EQ(back.updates(), 1);
  EXPECT_EQ(back.target_critic().parameters().flatten(), agent.target_critic().parameters().flatten());
  for (int i = 0; i < 5; ++i) {
    const auto s = random_state(6, rng);
    EXPECT_EQ(back.proto_action(s), agent.proto_action(s));
    EXPECT_EQ(back.q_value(s, i), agent.q_value(s, i));
  }
}
