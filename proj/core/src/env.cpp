#include "dmimo/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dmimo/baselines.hpp"

namespace dmimo {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kP1: return "P1";
    case Scenario::kP2: return "P2";
    case Scenario::kP3: return "P3";
    case Scenario::kP4: return "P4";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "P1" || s == "p1") return Scenario::kP1;
  if (s == "P2" || s == "p2") return Scenario::kP2;
  if (s == "P3" || s == "p3") return Scenario::kP3;
  if (s == "P4" || s == "p4") return Scenario::kP4;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

ScenarioConfig ScenarioConfig::p1(double discount) {
  ScenarioConfig c;
  c.scenario = Scenario::kP1;
  c.metric = MetricSpec::percentile_of(30.0);
  c.discount = discount;
  return c;
}

ScenarioConfig ScenarioConfig::p2(int interferers) {
  ScenarioConfig c;
  c.scenario = Scenario::kP2;
  c.metric = MetricSpec::percentile_of(10.0);
  c.interferers = interferers;
  c.discount = 0.25;
  return c;
}

ScenarioConfig ScenarioConfig::p3(int interferers) {
  ScenarioConfig c;
  c.scenario = Scenario::kP3;
  c.metric = MetricSpec::product();
  c.interferers = interferers;
  c.discount = 0.25;
  return c;
}

ScenarioConfig ScenarioConfig::p4() {
  ScenarioConfig c;
  c.scenario = Scenario::kP4;
  c.grid = GridSpec{8, 4, 10.0, 2, 2, 4};
  c.metric = MetricSpec::mean();
  c.user_model = UserModel::kHotspot;
  c.users = 50;
  c.discount = 0.25;
  return c;
}

ScenarioConfig ScenarioConfig::small_channel_instance() {
  ScenarioConfig c;
  c.scenario = Scenario::kP1;
  c.grid = GridSpec{4, 4, 10.0, 2, 2, 2};
  c.users = 16;
  c.metric = MetricSpec::percentile_of(30.0);
  c.fixed_realization = true;
  return c;
}

void ScenarioConfig::validate() const {
  if (episode_length < 1) throw std::invalid_argument("episode length must be >= 1");
  if (users < 1) throw std::invalid_argument("need at least one user");
  if (interferers < 0) throw std::invalid_argument("interferer count must be >= 0");
  if (!(reward_scale_mbps > 0.0)) throw std::invalid_argument("reward scale must be positive");
  if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("discount must lie in [0, 1]");
  if (hotspot.fraction < 0.0 || hotspot.fraction > 1.0)
    throw std::invalid_argument("hotspot fraction must lie in [0, 1]");
  if (hotspot.max_hotspots < 1) throw std::invalid_argument("need at least one hotspot");
  metric.validate();
}

void save_channel_plan(const std::filesystem::path& path, const ChannelPlan& plan) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < plan.size(); ++i) out << (i ? " " : "") << plan[i];
  out << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::optional<ChannelPlan> load_channel_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  ChannelPlan plan;
  int c = 0;
  while (in >> c) plan.push_back(c);
  if (!in.eof()) throw std::runtime_error("malformed channel plan in " + path.string());
  return plan;
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

std::vector<User> make_uniform_users(const Topology& topology, int count, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, topology.floor_width);
  std::uniform_real_distribution<double> uy(0.0, topology.floor_height);
  std::vector<User> users;
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    users.push_back(User{i, {x, uy(rng)}});
  }
  return users;
}

std::vector<User> make_hotspot_users(const Topology& topology, int count, const HotspotConfig& cfg,
                                     Rng& rng, std::vector<int>* hotspot_rhs) {
  if (topology.rhs.empty()) throw std::invalid_argument("hotspots need at least one RH");
  const int max_spots = std::min<int>(cfg.max_hotspots, static_cast<int>(topology.rhs.size()));
  std::uniform_int_distribution<int> how_many(1, max_spots);
  const int spots = how_many(rng);
  std::vector<int> ids(topology.rhs.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> chosen;
  std::sample(ids.begin(), ids.end(), std::back_inserter(chosen), spots, rng);
  if (hotspot_rhs) *hotspot_rhs = chosen;

  const int clustered = static_cast<int>(std::lround(cfg.fraction * count));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<User> users;
  for (int i = 0; i < clustered; ++i) {
    const Point centre = topology.rhs[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i % spots)])].location;
    const double r = cfg.radius_m * std::sqrt(unit(rng));
    const double theta = 2.0 * M_PI * unit(rng);
    Point p{centre.x + r * std::cos(theta), centre.y + r * std::sin(theta)};
    p.x = std::clamp(p.x, 0.0, topology.floor_width);
    p.y = std::clamp(p.y, 0.0, topology.floor_height);
    users.push_back(User{i, p});
  }
  std::uniform_real_distribution<double> ux(0.0, topology.floor_width);
  std::uniform_real_distribution<double> uy(0.0, topology.floor_height);
  for (int i = clustered; i < count; ++i) {
    const double x = ux(rng);
    users.push_back(User{i, {x, uy(rng)}});
  }
  return users;
}

std::vector<Interferer> make_interferers(const Topology& topology, int count, double margin,
                                         double tx_power_dbm, Rng& rng) {
  std::uniform_real_distribution<double> ux(-margin, topology.floor_width + margin);
  std::uniform_real_distribution<double> uy(-margin, topology.floor_height + margin);
  std::vector<int> channels;
  while (static_cast<int>(channels.size()) < count) {
    std::vector<int> block(static_cast<std::size_t>(topology.channels));
    std::iota(block.begin(), block.end(), 1);
    std::shuffle(block.begin(), block.end(), rng);
    channels.insert(channels.end(), block.begin(), block.end());
  }
  std::vector<Interferer> out;
  for (int i = 0; i < count; ++i) {
    Point p;
    do {
      p.x = ux(rng);
      p.y = uy(rng);
    } while (p.x > 0.0 && p.x < topology.floor_width && p.y > 0.0 && p.y < topology.floor_height);
    out.push_back(Interferer{i, p, channels[static_cast<std::size_t>(i)], tx_power_dbm});
  }
  return out;
}

Realization sample_realization(const ScenarioConfig& config, const Topology& base, Rng& rng,
                               std::vector<int>* hotspot_rhs) {
  Realization r;
  r.topology = base;
  if (config.user_model == UserModel::kHotspot)
    r.topology.users = make_hotspot_users(base, config.users, config.hotspot, rng, hotspot_rhs);
  else
    r.topology.users = make_uniform_users(base, config.users, rng);
  r.topology.interferers = make_interferers(base, config.interferers, config.interferer_margin_m,
                                            config.radio.interferer_tx_power_dbm, rng);
  r.gains = sample_link_gains(r.topology, config.radio, rng);
  return r;
}

Environment::Environment(ScenarioConfig config) : config_(std::move(config)) { config_.validate(); }

void Environment::begin_episode(double metric) {
  steps_taken_ = 0;
  started_ = true;
  metric_ = metric;
  initial_metric_ = metric;
}

void Environment::require_running() const {
  if (!started_) throw std::logic_error("reset() must be called before step()");
  if (steps_taken_ >= config_.episode_length)
    throw std::logic_error("episode is over; call reset()");
}

StepResult Environment::finish_step(double metric) {
  StepResult r;
  r.metric = metric;
  r.reward = (metric - metric_) / config_.reward_scale_mbps;
  metric_ = metric;
  ++steps_taken_;
  r.done = steps_taken_ >= config_.episode_length;
  return r;
}

// ---------------------------------------------------------------------------

ChannelAssignmentEnv::ChannelAssignmentEnv(ScenarioConfig config)
    : Environment(std::move(config)),
      base_topology_(make_grid_topology(config_.grid, config_.radio)),
      grouping_(Grouping::from_groups(base_topology_.groups,
                                      static_cast<int>(base_topology_.rhs.size()))) {
  if (config_.scenario == Scenario::kP4)
    throw std::invalid_argument("channel assignment covers P1-P3");
  if (config_.scenario == Scenario::kP1) {
    initial_plan_ = assign_all_same(group_count());
  } else if (config_.initial_plan) {
    initial_plan_ = *config_.initial_plan;
    validate_plan(initial_plan_, group_count(), channels());
  } else {
    std::cerr << "warning: no stored P1 plan for " << to_string(config_.scenario)
              << "; starting episodes from the heuristic pattern\n";
    initial_plan_ = assign_heuristic_pattern(base_topology_);
    fell_back_ = true;
  }
}

double ChannelAssignmentEnv::reset(Rng& episode_rng) {
  if (config_.fixed_realization) {
    if (!cached_) cached_ = sample_realization(config_, base_topology_, episode_rng);
    realization_ = *cached_;
  } else {
    realization_ = sample_realization(config_, base_topology_, episode_rng);
  }
  association_ = associate_users(realization_.topology, realization_.gains, grouping_);
  plan_ = initial_plan_;
  outcome_ = simulate(plan_);
  begin_episode(scalarize(outcome_.per_user_throughput_mbps, config_.metric));
  return metric_;
}

StepResult ChannelAssignmentEnv::step(int action) {
  require_running();
  if (action < 0 || action >= action_count()) throw std::out_of_range("invalid channel action");
  const ChannelAction a = decode_action(action, channels());
  plan_[static_cast<std::size_t>(a.group)] = a.channel;
  outcome_ = simulate(plan_);
  return finish_step(scalarize(outcome_.per_user_throughput_mbps, config_.metric));
}

std::vector<double> ChannelAssignmentEnv::encode_plan(const ChannelPlan& plan) {
  std::vector<double> out(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) out[i] = (2.0 * plan[i] - 5.0) / 3.0;
  return out;
}

std::vector<double> ChannelAssignmentEnv::encode_state() const { return encode_plan(plan_); }

std::vector<int> ChannelAssignmentEnv::valid_actions() const {
  std::vector<int> all(static_cast<std::size_t>(action_count()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

ChannelAction ChannelAssignmentEnv::decode_action(int action, int channels) {
  return ChannelAction{action / channels, action % channels + 1};
}

int ChannelAssignmentEnv::encode_action(ChannelAction action, int channels) {
  return action.group * channels + (action.channel - 1);
}

StepOutcome ChannelAssignmentEnv::simulate(const ChannelPlan& plan) const {
  return simulate_step(realization_.topology, realization_.gains, plan, grouping_, association_,
                       config_.radio, config_.mac);
}

double ChannelAssignmentEnv::evaluate(const ChannelPlan& plan) const {
  return scalarize(simulate(plan).per_user_throughput_mbps, config_.metric);
}

// ---------------------------------------------------------------------------

GroupingEnv::GroupingEnv(ScenarioConfig config)
    : Environment(std::move(config)),
      base_topology_(make_grid_topology(config_.grid, config_.radio)) {
  if (config_.scenario != Scenario::kP4) throw std::invalid_argument("grouping env covers P4");
  channel_plan_ = assign_heuristic_pattern(base_topology_);
  pairs_ = enumerate_pairs(rh_count());
  grouping_ = grouping_adjacent(base_topology_);
}

std::vector<std::pair<int, int>> GroupingEnv::enumerate_pairs(int rh_count) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < rh_count; ++i)
    for (int j = i + 1; j < rh_count; ++j) out.emplace_back(i, j);
  return out;
}

double GroupingEnv::reset(Rng& episode_rng) {
  if (config_.fixed_realization) {
    if (!cached_) {
      std::vector<int> spots;
      Realization r = sample_realization(config_, base_topology_, episode_rng, &spots);
      cached_.emplace(std::move(r), std::move(spots));
    }
    realization_ = cached_->first;
    hotspot_rhs_ = cached_->second;
  } else {
    realization_ = sample_realization(config_, base_topology_, episode_rng, &hotspot_rhs_);
  }
  grouping_ = grouping_adjacent(base_topology_);
  association_ = associate_users(realization_.topology, realization_.gains, grouping_);
  outcome_ = simulate(grouping_);
  begin_episode(scalarize(outcome_.per_user_throughput_mbps, config_.metric));
  return metric_;
}

StepResult GroupingEnv::step(int action) {
  require_running();
  if (action < 0 || action >= action_count()) throw std::out_of_range("invalid swap action");
  const auto [a, b] = pairs_[static_cast<std::size_t>(action)];
  if (grouping_.group_of(a) == grouping_.group_of(b))
    throw std::invalid_argument("swap of two RHs in the same group");
  grouping_.swap_rhs(a, b);
  association_ = associate_users(realization_.topology, realization_.gains, grouping_);
  outcome_ = simulate_step(realization_.topology, realization_.gains, channel_plan_, grouping_,
                           association_, config_.radio, config_.mac);
  return finish_step(scalarize(outcome_.per_user_throughput_mbps, config_.metric));
}

std::vector<double> GroupingEnv::encode_state() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(state_width()));
  const double groups = group_count();
  const double rhs = rh_count();
  // 1-based labels mapped onto [-1, 1]: g -> (2g - (G + 1)) / (G - 1).
  for (int g : grouping_.assignment()) out.push_back((2.0 * (g + 1) - (groups + 1)) / (groups - 1));
  for (int r : association_.user_rh) out.push_back((2.0 * (r + 1) - (rhs + 1)) / (rhs - 1));
  return out;
}

std::vector<int> GroupingEnv::valid_actions() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < pairs_.size(); ++i)
    if (grouping_.group_of(pairs_[i].first) != grouping_.group_of(pairs_[i].second))
      out.push_back(static_cast<int>(i));
  return out;
}

StepOutcome GroupingEnv::simulate(const Grouping& grouping) const {
  return simulate_step(realization_.topology, realization_.gains, channel_plan_, grouping,
                       config_.radio, config_.mac);
}

double GroupingEnv::evaluate(const Grouping& grouping) const {
  return scalarize(simulate(grouping).per_user_throughput_mbps, config_.metric);
}

}  // namespace dmimo
