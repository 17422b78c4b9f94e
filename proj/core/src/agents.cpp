#include "dmimo/agents.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dmimo {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nn::DenseNetworkSpec mlp(int in, const std::vector<int>& hidden, int out, nn::Activation act,
                         nn::OutputTransform head) {
  nn::DenseNetworkSpec spec;
  spec.widths.push_back(in);
  for (int h : hidden) {
    spec.widths.push_back(h);
    spec.activations.push_back(act);
  }
  spec.widths.push_back(out);
  spec.output = head;
  return spec;
}

void expect_word(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw std::runtime_error("checkpoint: expected '" + word + "', got '" + got + "'");
}

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  expect_word(in, key);
  T value{};
  if (!(in >> value)) throw std::runtime_error("checkpoint: bad value for '" + key + "'");
  return value;
}

}  // namespace

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    g[t] = running;
  }
  return g;
}

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  return h;
}

int sample_categorical(const Eigen::VectorXd& p, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * p.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u at the very top; return the last non-zero entry.
  for (Eigen::Index i = p.size(); i-- > 0;)
    if (p(i) > 0.0) return static_cast<int>(i);
  return static_cast<int>(p.size()) - 1;
}

ReinforceAgent::ReinforceAgent(int state_width, int action_count, ReinforceConfig config,
                               Rng& init_rng)
    : config_(config),
      policy_(mlp(state_width, {config.hidden_width}, action_count, nn::Activation::kRelu,
                  nn::OutputTransform::kSoftmax),
              init_rng),
      adam_(policy_.parameters(), config.learning_rate) {}

ReinforceAgent::ReinforceAgent(ReinforceConfig config, nn::DenseNetwork policy)
    : config_(config), policy_(std::move(policy)), adam_(policy_.parameters(), config.learning_rate) {
  if (policy_.spec().output != nn::OutputTransform::kSoftmax)
    throw std::invalid_argument("REINFORCE policy needs a softmax head");
}

Eigen::VectorXd ReinforceAgent::probabilities(const std::vector<double>& state) const {
  return policy_.forward(to_vector(state));
}

int ReinforceAgent::select(const std::vector<double>& state, Rng& rng) const {
  return sample_categorical(probabilities(state), rng);
}

double ReinforceAgent::entropy(const std::vector<double>& state) const {
  return dmimo::entropy(probabilities(state));
}

int ReinforceAgent::greedy(const std::vector<double>& state) const {
  Eigen::Index best = 0;
  probabilities(state).maxCoeff(&best);
  return static_cast<int>(best);
}

void ReinforceAgent::update(const Trajectory& trajectory) {
  if (!trajectory.complete() || trajectory.steps.empty())
    throw std::invalid_argument("REINFORCE needs a complete trajectory (" +
                                std::to_string(trajectory.steps.size()) + " of " +
                                std::to_string(trajectory.episode_length) + " steps)");
  const std::size_t n = trajectory.steps.size();
  std::vector<double> rewards(n);
  for (std::size_t t = 0; t < n; ++t) rewards[t] = trajectory.steps[t].reward;
  std::vector<double> returns = discounted_returns(rewards, config_.discount);
  if (config_.normalize_returns && n > 1) {
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double g : returns) var += (g - mean) * (g - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& g : returns) g = sd > 1e-12 ? (g - mean) / sd : 0.0;
  }
  std::vector<double> coef(n);
  double weight = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    coef[t] = (config_.discount_weighting ? weight : 1.0) * returns[t];
    weight *= config_.discount;
  }

  const int width = policy_.spec().input_width();
  auto state_matrix = [&](std::size_t from, std::size_t count) {
    Eigen::MatrixXd s(width, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
      const auto& st = trajectory.steps[from + j].state;
      if (static_cast<int>(st.size()) != width) throw std::invalid_argument("state width mismatch");
      s.col(static_cast<Eigen::Index>(j)) = to_vector(st);
    }
    return s;
  };
  auto logit_gradient = [&](const Eigen::MatrixXd& probs, std::size_t from, std::size_t count) {
    Eigen::MatrixXd g(probs.rows(), probs.cols());
    for (std::size_t j = 0; j < count; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      g.col(col) = coef[from + j] *
                   nn::log_softmax_gradient(probs.col(col), trajectory.steps[from + j].action);
    }
    return g;
  };

  if (config_.per_step_updates) {
    for (std::size_t t = 0; t < n; ++t) {
      nn::ForwardCache cache;
      const Eigen::MatrixXd probs = policy_.forward(state_matrix(t, 1), &cache);
      adam_.step(policy_.parameters(), policy_.backward_from_logits(cache, logit_gradient(probs, t, 1)),
                 nn::Direction::kAscend);
    }
  } else {
    nn::ForwardCache cache;
    const Eigen::MatrixXd probs = policy_.forward(state_matrix(0, n), &cache);
    adam_.step(policy_.parameters(), policy_.backward_from_logits(cache, logit_gradient(probs, 0, n)),
               nn::Direction::kAscend);
  }
  ++updates_;
}

void ReinforceAgent::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << "dmimo-reinforce 1\n"
      << "discount " << config_.discount << "\nlearning_rate " << config_.learning_rate
      << "\nhidden_width " << config_.hidden_width << "\ndiscount_weighting "
      << config_.discount_weighting << "\nper_step_updates " << config_.per_step_updates
      << "\nnormalize_returns " << config_.normalize_returns << "\nupdates " << updates_ << '\n';
  nn::save_network(out, policy_);
}

ReinforceAgent ReinforceAgent::load(std::istream& in) {
  expect_word(in, "dmimo-reinforce");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("checkpoint: unsupported REINFORCE version");
  ReinforceConfig cfg;
  cfg.discount = read_field<double>(in, "discount");
  cfg.learning_rate = read_field<double>(in, "learning_rate");
  cfg.hidden_width = read_field<int>(in, "hidden_width");
  cfg.discount_weighting = read_field<bool>(in, "discount_weighting");
  cfg.per_step_updates = read_field<bool>(in, "per_step_updates");
  cfg.normalize_returns = read_field<bool>(in, "normalize_returns");
  const long updates = read_field<long>(in, "updates");
  ReinforceAgent agent(cfg, nn::load_network(in));
  agent.updates_ = updates;
  return agent;
}

ActionEmbedding::ActionEmbedding(int action_count) : count_(action_count) {
  if (action_count < 1) throw std::invalid_argument("embedding needs at least one action");
}

double ActionEmbedding::embed(int action) const {
  if (action < 0 || action >= count_) throw std::out_of_range("action index out of range");
  if (count_ == 1) return 0.0;
  return -1.0 + 2.0 * action / (count_ - 1);
}

int ActionEmbedding::nearest(double point) const {
  if (count_ == 1) return 0;
  const double x = (std::clamp(point, -1.0, 1.0) + 1.0) * (count_ - 1) / 2.0;
  const double lo = std::floor(x);
  // Exactly halfway goes to the lower index.
  const int idx = (x - lo) <= 0.5 ? static_cast<int>(lo) : static_cast<int>(lo) + 1;
  return std::clamp(idx, 0, count_ - 1);
}

std::vector<int> ActionEmbedding::k_nearest(double point, const std::vector<int>& valid, int k) const {
  if (valid.empty()) throw std::invalid_argument("no valid actions");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<int> order = valid;
  const std::size_t take = std::min(order.size(), static_cast<std::size_t>(k));
  auto closer = [&](int a, int b) {
    const double da = std::abs(embed(a) - point);
    const double db = std::abs(embed(b) - point);
    return da != db ? da < db : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), closer);
  order.resize(take);
  return order;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  records_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(ReplayRecord record) {
  ++pushed_;
  if (records_.size() < capacity_) {
    records_.push_back(std::move(record));
    return;
  }
  records_[head_] = std::move(record);
  head_ = (head_ + 1) % capacity_;
}

const ReplayRecord& ReplayBuffer::at(std::size_t i) const {
  if (i >= records_.size()) throw std::out_of_range("replay index out of range");
  return records_[(head_ + i) % records_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (records_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  if (batch > records_.size())
    throw std::invalid_argument("batch of " + std::to_string(batch) + " exceeds buffer size " +
                                std::to_string(records_.size()));
  // Partial Fisher-Yates over the index range.
  std::vector<std::size_t> idx(records_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch);
  return idx;
}

std::vector<const ReplayRecord*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  std::vector<const ReplayRecord*> out;
  for (std::size_t i : sample_indices(batch, rng)) out.push_back(&at(i));
  return out;
}

DdpgAgent::DdpgAgent(int state_width, int action_count, DdpgConfig config, Rng& init_rng)
    : config_(std::move(config)),
      embedding_(action_count),
      actor_(mlp(state_width, config_.actor_hidden, 1, nn::Activation::kSoftplus,
                 nn::OutputTransform::kTanh),
             init_rng),
      critic_(mlp(state_width + 1, config_.critic_hidden, 1, nn::Activation::kSoftplus,
                  nn::OutputTransform::kTanh),
              init_rng),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_adam_(actor_.parameters(), config_.actor_learning_rate),
      critic_adam_(critic_.parameters(), config_.critic_learning_rate),
      buffer_(config_.buffer_capacity) {}

DdpgAgent::DdpgAgent(DdpgConfig config, int action_count, nn::DenseNetwork actor,
                     nn::DenseNetwork critic, nn::DenseNetwork target_actor,
                     nn::DenseNetwork target_critic)
    : config_(std::move(config)),
      embedding_(action_count),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      target_actor_(std::move(target_actor)),
      target_critic_(std::move(target_critic)),
      actor_adam_(actor_.parameters(), config_.actor_learning_rate),
      critic_adam_(critic_.parameters(), config_.critic_learning_rate),
      buffer_(config_.buffer_capacity) {}

double DdpgAgent::sigma() const {
  if (config_.sigma_decay_episodes <= 0 || episode_ >= config_.sigma_decay_episodes) return config_.sigma_end;
  const double f = static_cast<double>(episode_) / config_.sigma_decay_episodes;
  return config_.sigma_start + f * (config_.sigma_end - config_.sigma_start);
}

double DdpgAgent::proto_action(const std::vector<double>& state) const {
  return actor_.forward(to_vector(state))(0);
}

double DdpgAgent::q_value(const std::vector<double>& state, int action) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(state.size()) + 1);
  x << to_vector(state), embedding_.embed(action);
  return critic_.forward(x)(0);
}

int DdpgAgent::select(const std::vector<double>& state, const std::vector<int>& valid, Rng& rng) const {
  return select(state, valid, config_.k, sigma(), rng);
}

int DdpgAgent::select(const std::vector<double>& state, const std::vector<int>& valid, int k,
                      double sigma, Rng& rng) const {
  if (valid.empty()) throw std::invalid_argument("no valid actions");
  double proto = proto_action(state);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    proto += noise(rng);
  }
  proto = std::clamp(proto, -1.0, 1.0);
  const std::vector<int> candidates =
      embedding_.k_nearest(proto, valid, std::min<int>(std::max(k, 1), static_cast<int>(valid.size())));
  if (candidates.size() == 1) return candidates.front();

  const auto width = static_cast<Eigen::Index>(state.size());
  Eigen::MatrixXd x(width + 1, static_cast<Eigen::Index>(candidates.size()));
  const Eigen::VectorXd s = to_vector(state);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)).head(width) = s;
    x(width, static_cast<Eigen::Index>(j)) = embedding_.embed(candidates[j]);
  }
  const Eigen::MatrixXd q = critic_.forward(x);
  std::size_t best = 0;
  for (std::size_t j = 1; j < candidates.size(); ++j)
    if (q(0, static_cast<Eigen::Index>(j)) > q(0, static_cast<Eigen::Index>(best))) best = j;
  return candidates[best];
}

void DdpgAgent::remember(const std::vector<double>& state, int action, double reward,
                         const std::vector<double>& next_state, bool done) {
  buffer_.push({to_vector(state), embedding_.embed(action), reward, to_vector(next_state), done});
}

nn::Gradients DdpgAgent::actor_gradient(const Eigen::MatrixXd& states) const {
  const Eigen::Index b = states.cols();
  const Eigen::Index width = states.rows();
  nn::ForwardCache actor_cache;
  const Eigen::MatrixXd mu = actor_.forward(states, &actor_cache);
  Eigen::MatrixXd x(width + 1, b);
  x.topRows(width) = states;
  x.row(width) = mu.row(0);
  nn::ForwardCache critic_cache;
  critic_.forward(x, &critic_cache);
  Eigen::MatrixXd dx;
  critic_.backward(critic_cache, Eigen::MatrixXd::Constant(1, b, 1.0 / static_cast<double>(b)), &dx);
  return actor_.backward(actor_cache, dx.row(width));
}

bool DdpgAgent::update(Rng& rng) {
  const std::size_t b = config_.batch_size;
  if (buffer_.size() < b) return false;
  const auto batch = buffer_.sample(b, rng);
  const auto width = batch.front()->state.size();
  const auto nb = static_cast<Eigen::Index>(b);

  Eigen::MatrixXd s(width, nb), s_next(width, nb);
  Eigen::RowVectorXd a(nb), r(nb), live(nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    const ReplayRecord& rec = *batch[static_cast<std::size_t>(j)];
    s.col(j) = rec.state;
    s_next.col(j) = rec.next_state;
    a(j) = rec.action;
    r(j) = rec.reward;
    live(j) = rec.done ? 0.0 : 1.0;
  }

  // Critic: regress Q(s, a) onto r + gamma * Q'(s', mu'(s')).
  Eigen::MatrixXd x_next(width + 1, nb);
  x_next.topRows(width) = s_next;
  x_next.row(width) = target_actor_.forward(s_next).row(0);
  const Eigen::RowVectorXd q_next = target_critic_.forward(x_next).row(0);
  const Eigen::RowVectorXd y = r + config_.discount * live.cwiseProduct(q_next);

  Eigen::MatrixXd x(width + 1, nb);
  x.topRows(width) = s;
  x.row(width) = a;
  nn::ForwardCache cache;
  const Eigen::RowVectorXd q = critic_.forward(x, &cache).row(0);
  const Eigen::RowVectorXd err = q - y;
  last_critic_loss_ = err.squaredNorm() / static_cast<double>(nb);
  critic_adam_.step(critic_.parameters(),
                    critic_.backward(cache, err / static_cast<double>(nb)), nn::Direction::kDescend);

  actor_adam_.step(actor_.parameters(), actor_gradient(s), nn::Direction::kAscend);

  nn::soft_update(target_critic_.parameters(), critic_.parameters(), config_.critic_tau);
  nn::soft_update(target_actor_.parameters(), actor_.parameters(), config_.actor_tau);
  ++updates_;
  return true;
}

void DdpgAgent::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << "dmimo-ddpg 1\n"
      << "actions " << embedding_.size() << "\ndiscount " << config_.discount
      << "\nactor_learning_rate " << config_.actor_learning_rate << "\ncritic_learning_rate "
      << config_.critic_learning_rate << "\nactor_tau " << config_.actor_tau << "\ncritic_tau "
      << config_.critic_tau << "\nbuffer_capacity " << config_.buffer_capacity << "\nbatch_size "
      << config_.batch_size << "\nk " << config_.k << "\nsigma_start " << config_.sigma_start
      << "\nsigma_end " << config_.sigma_end << "\nsigma_decay_episodes "
      << config_.sigma_decay_episodes << "\nupdates_per_step " << config_.updates_per_step
      << "\nepisode " << episode_ << "\nupdates " << updates_ << '\n';
  nn::save_network(out, actor_);
  nn::save_network(out, critic_);
  nn::save_network(out, target_actor_);
  nn::save_network(out, target_critic_);
}

DdpgAgent DdpgAgent::load(std::istream& in) {
  expect_word(in, "dmimo-ddpg");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("checkpoint: unsupported DDPG version");
  DdpgConfig cfg;
  const int actions = read_field<int>(in, "actions");
  cfg.discount = read_field<double>(in, "discount");
  cfg.actor_learning_rate = read_field<double>(in, "actor_learning_rate");
  cfg.critic_learning_rate = read_field<double>(in, "critic_learning_rate");
  cfg.actor_tau = read_field<double>(in, "actor_tau");
  cfg.critic_tau = read_field<double>(in, "critic_tau");
  cfg.buffer_capacity = read_field<std::size_t>(in, "buffer_capacity");
  cfg.batch_size = read_field<std::size_t>(in, "batch_size");
  cfg.k = read_field<int>(in, "k");
  cfg.sigma_start = read_field<double>(in, "sigma_start");
  cfg.sigma_end = read_field<double>(in, "sigma_end");
  cfg.sigma_decay_episodes = read_field<int>(in, "sigma_decay_episodes");
  cfg.updates_per_step = read_field<int>(in, "updates_per_step");
  const int episode = read_field<int>(in, "episode");
  const long updates = read_field<long>(in, "updates");
  nn::DenseNetwork actor = nn::load_network(in);
  nn::DenseNetwork critic = nn::load_network(in);
  nn::DenseNetwork target_actor = nn::load_network(in);
  nn::DenseNetwork target_critic = nn::load_network(in);
  cfg.actor_hidden.assign(actor.spec().widths.begin() + 1, actor.spec().widths.end() - 1);
  cfg.critic_hidden.assign(critic.spec().widths.begin() + 1, critic.spec().widths.end() - 1);
  DdpgAgent agent(cfg, actions, std::move(actor), std::move(critic), std::move(target_actor),
                  std::move(target_critic));
  agent.episode_ = episode;
  agent.updates_ = updates;
  return agent;
}

}  // namespace dmimo
