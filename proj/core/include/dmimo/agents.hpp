#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dmimo/env.hpp"
#include "dmimo/nn.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

// G_t = r_t + gamma * G_{t+1}, G_{T+1} = 0.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

// Shannon entropy in nats.
double entropy(const Eigen::VectorXd& probabilities);

// Inverse-CDF draw from a categorical distribution.
int sample_categorical(const Eigen::VectorXd& probabilities, Rng& rng);

struct ReinforceConfig {
  double discount = 0.10;
  double learning_rate = 0.003;
  int hidden_width = 48;
  // Scale the step-t term by gamma^t (t counted from zero).
  bool discount_weighting = false;
  // One Adam step per time step instead of one summed step per episode.
  bool per_step_updates = false;
  bool normalize_returns = false;
};

class ReinforceAgent {
 public:
  ReinforceAgent(int state_width, int action_count, ReinforceConfig config, Rng& init_rng);
  ReinforceAgent(ReinforceConfig config, nn::DenseNetwork policy);

  int select(const std::vector<double>& state, Rng& rng) const;
  Eigen::VectorXd probabilities(const std::vector<double>& state) const;
  double entropy(const std::vector<double>& state) const;
  int greedy(const std::vector<double>& state) const;

  // Policy-gradient ascent over a complete trajectory.
  void update(const Trajectory& trajectory);

  const ReinforceConfig& config() const { return config_; }
  const nn::DenseNetwork& policy() const { return policy_; }
  nn::DenseNetwork& policy() { return policy_; }
  long updates() const { return updates_; }

  void save(std::ostream& out) const;
  static ReinforceAgent load(std::istream& in);

 private:
  ReinforceConfig config_;
  nn::DenseNetwork policy_;
  nn::Adam adam_;
  long updates_ = 0;
};

// Evenly spaced points of [-1, 1], one per action index.
class ActionEmbedding {
 public:
  explicit ActionEmbedding(int action_count);

  int size() const { return count_; }
  double embed(int action) const;
  // Nearest index to a point; ties go to the lower index.
  int nearest(double point) const;
  // The k valid actions closest to `point`, nearest first (ties to the lower index).
  std::vector<int> k_nearest(double point, const std::vector<int>& valid, int k) const;

 private:
  int count_;
};

struct ReplayRecord {
  Eigen::VectorXd state;
  double action = 0.0;  // embedded action
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(ReplayRecord record);
  // Uniform without replacement; throws on an empty buffer or batch > size.
  std::vector<const ReplayRecord*> sample(std::size_t batch, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest record still held.
  const ReplayRecord& at(std::size_t i) const;
  std::uint64_t pushed() const { return pushed_; }

 private:
  std::size_t capacity_;
  std::vector<ReplayRecord> records_;
  std::size_t head_ = 0;  // slot of the oldest record once full
  std::uint64_t pushed_ = 0;
};

struct DdpgConfig {
  double discount = 0.25;
  double actor_learning_rate = 0.003;
  double critic_learning_rate = 0.007;
  double actor_tau = 0.001;
  double critic_tau = 0.001;
  std::vector<int> actor_hidden{256, 128};
  std::vector<int> critic_hidden{64, 32};
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 100;
  int k = 32;
  double sigma_start = 0.5;
  double sigma_end = 0.05;
  int sigma_decay_episodes = 500;
  int updates_per_step = 1;
};

class DdpgAgent {
 public:
  DdpgAgent(int state_width, int action_count, DdpgConfig config, Rng& init_rng);

  // Proto action, noise, k-NN over valid embeddings, critic re-rank.
  int select(const std::vector<double>& state, const std::vector<int>& valid, Rng& rng) const;
  int select(const std::vector<double>& state, const std::vector<int>& valid, int k, double sigma,
             Rng& rng) const;

  double proto_action(const std::vector<double>& state) const;
  double q_value(const std::vector<double>& state, int action) const;

  void remember(const std::vector<double>& state, int action, double reward,
                const std::vector<double>& next_state, bool done);
  // One minibatch step on critic and actor plus soft target updates. Returns false
  // (and does nothing) while the buffer holds fewer than batch_size records.
  bool update(Rng& rng);

  // Exploration noise for the current episode.
  double sigma() const;
  void set_episode(int episode) { episode_ = episode; }
  int episode() const { return episode_; }

  const DdpgConfig& config() const { return config_; }
  const ActionEmbedding& embedding() const { return embedding_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const nn::DenseNetwork& actor() const { return actor_; }
  const nn::DenseNetwork& critic() const { return critic_; }
  const nn::DenseNetwork& target_actor() const { return target_actor_; }
  const nn::DenseNetwork& target_critic() const { return target_critic_; }
  nn::DenseNetwork& actor() { return actor_; }
  nn::DenseNetwork& critic() { return critic_; }
  long updates() const { return updates_; }
  double last_critic_loss() const { return last_critic_loss_; }

  // Actor gradient of mean_j Q(s_j, mu(s_j)) over the given states (columns).
  nn::Gradients actor_gradient(const Eigen::MatrixXd& states) const;

  void save(std::ostream& out) const;
  static DdpgAgent load(std::istream& in);

 private:
  DdpgAgent(DdpgConfig config, int action_count, nn::DenseNetwork actor, nn::DenseNetwork critic,
            nn::DenseNetwork target_actor, nn::DenseNetwork target_critic);

  DdpgConfig config_;
  ActionEmbedding embedding_;
  nn::DenseNetwork actor_;
  nn::DenseNetwork critic_;
  nn::DenseNetwork target_actor_;
  nn::DenseNetwork target_critic_;
  nn::Adam actor_adam_;
  nn::Adam critic_adam_;
  ReplayBuffer buffer_;
  int episode_ = 0;
  long updates_ = 0;
  double last_critic_loss_ = 0.0;
};

}  // namespace dmimo
