#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dmimo/mac.hpp"
#include "dmimo/metrics.hpp"
#include "dmimo/radio.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

enum class Scenario { kP1, kP2, kP3, kP4 };
enum class UserModel { kUniform, kHotspot };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct HotspotConfig {
  double fraction = 0.6;
  double radius_m = 5.0;
  int max_hotspots = 2;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kP1;
  GridSpec grid;
  int episode_length = 50;
  MetricSpec metric = MetricSpec::percentile_of(30.0);
  int interferers = 0;
  double interferer_margin_m = 15.0;
  UserModel user_model = UserModel::kUniform;
  int users = 64;
  HotspotConfig hotspot;
  double discount = 0.10;
  double reward_scale_mbps = 100.0;  // x_ref
  // Initial channel plan for P2/P3 (the converged P1 plan). Unset falls back to the
  // heuristic pattern.
  std::optional<ChannelPlan> initial_plan;
  // Reuse one realization (users, interferers, fading) for every episode.
  bool fixed_realization = false;
  RadioConfig radio;
  MacConfig mac;

  static ScenarioConfig p1(double discount = 0.10);
  static ScenarioConfig p2(int interferers);
  static ScenarioConfig p3(int interferers);
  static ScenarioConfig p4();
  // 2x2 groups, 2 channels; small enough to enumerate every plan.
  static ScenarioConfig small_channel_instance();

  void validate() const;
};

// s* record: the channel of every group as whitespace-separated integers on one line.
void save_channel_plan(const std::filesystem::path& path, const ChannelPlan& plan);
std::optional<ChannelPlan> load_channel_plan(const std::filesystem::path& path);

struct StepResult {
  double reward = 0.0;
  double metric = 0.0;
  bool done = false;
};

// One (s_t, a_t, r_t, s_{t+1}) record over encoded states.
struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
};

struct Trajectory {
  int episode_length = 0;
  std::vector<Transition> steps;

  bool complete() const { return static_cast<int>(steps.size()) == episode_length; }
  double total_reward() const;
};

// Per-episode random inputs shared by both environment kinds.
struct Realization {
  Topology topology;
  LinkGains gains;
};

std::vector<User> make_uniform_users(const Topology& topology, int count, Rng& rng);
// 1 or 2 hotspot RHs, `fraction` of the users uniform within `radius_m` of them
// (split evenly), the rest uniform over the floor.
std::vector<User> make_hotspot_users(const Topology& topology, int count, const HotspotConfig& cfg,
                                     Rng& rng, std::vector<int>* hotspot_rhs = nullptr);
// Border zone outside the floor but within `margin` of it; distinct channels while
// count <= K, then balanced repeats.
std::vector<Interferer> make_interferers(const Topology& topology, int count, double margin,
                                         double tx_power_dbm, Rng& rng);

// Gym-style episodic environment over encoded states.
class Environment {
 public:
  virtual ~Environment() = default;

  // Starts an episode and returns the baseline metric x_0.
  virtual double reset(Rng& episode_rng) = 0;
  virtual StepResult step(int action) = 0;

  virtual std::vector<double> encode_state() const = 0;
  virtual int state_width() const = 0;
  virtual int action_count() const = 0;
  // Indices in [0, action_count()) that are legal in the current state.
  virtual std::vector<int> valid_actions() const = 0;

  const ScenarioConfig& config() const { return config_; }
  int steps_taken() const { return steps_taken_; }
  double current_metric() const { return metric_; }
  double initial_metric() const { return initial_metric_; }
  const StepOutcome& last_outcome() const { return outcome_; }

 protected:
  explicit Environment(ScenarioConfig config);
  void begin_episode(double metric);
  StepResult finish_step(double metric);
  void require_running() const;

  ScenarioConfig config_;
  int steps_taken_ = 0;
  bool started_ = false;
  double metric_ = 0.0;
  double initial_metric_ = 0.0;
  StepOutcome outcome_;
};

struct ChannelAction {
  int group = 0;    // 0-based
  int channel = 1;  // 1-based
};

// P1-P3: the state is the group channel plan; action a sets group a / K to
// channel (a mod K) + 1.
class ChannelAssignmentEnv final : public Environment {
 public:
  explicit ChannelAssignmentEnv(ScenarioConfig config);

  double reset(Rng& episode_rng) override;
  StepResult step(int action) override;
  std::vector<double> encode_state() const override;
  int state_width() const override { return group_count(); }
  int action_count() const override { return group_count() * channels(); }
  std::vector<int> valid_actions() const override;

  static ChannelAction decode_action(int action, int channels);
  static int encode_action(ChannelAction action, int channels);
  static std::vector<double> encode_plan(const ChannelPlan& plan);

  int group_count() const { return static_cast<int>(base_topology_.groups.size()); }
  int channels() const { return base_topology_.channels; }
  const ChannelPlan& plan() const { return plan_; }
  const ChannelPlan& initial_plan() const { return initial_plan_; }
  bool initial_plan_fell_back() const { return fell_back_; }

  const Topology& topology() const { return realization_.topology; }
  const LinkGains& gains() const { return realization_.gains; }
  const Grouping& grouping() const { return grouping_; }
  const Association& association() const { return association_; }

  // Simulates an arbitrary plan on the current realization without changing state.
  StepOutcome simulate(const ChannelPlan& plan) const;
  double evaluate(const ChannelPlan& plan) const;

 private:
  Topology base_topology_;
  Grouping grouping_;
  ChannelPlan initial_plan_;
  bool fell_back_ = false;
  std::optional<Realization> cached_;
  Realization realization_;
  Association association_;
  ChannelPlan plan_;
};

// P4: the state is RH -> group followed by user -> RH; the action swaps two RHs in
// different groups. Pairs (i < j) are enumerated lexicographically.
class GroupingEnv final : public Environment {
 public:
  explicit GroupingEnv(ScenarioConfig config);

  double reset(Rng& episode_rng) override;
  StepResult step(int action) override;
  std::vector<double> encode_state() const override;
  int state_width() const override { return rh_count() + user_count(); }
  int action_count() const override { return static_cast<int>(pairs_.size()); }
  std::vector<int> valid_actions() const override;

  int rh_count() const { return static_cast<int>(base_topology_.rhs.size()); }
  int user_count() const { return config_.users; }
  int group_count() const { return static_cast<int>(base_topology_.groups.size()); }
  std::pair<int, int> pair(int action) const { return pairs_[static_cast<std::size_t>(action)]; }
  static std::vector<std::pair<int, int>> enumerate_pairs(int rh_count);

  const Grouping& grouping() const { return grouping_; }
  const ChannelPlan& channel_plan() const { return channel_plan_; }
  const Topology& topology() const { return realization_.topology; }
  const LinkGains& gains() const { return realization_.gains; }
  const Association& association() const { return association_; }
  const std::vector<int>& hotspot_rhs() const { return hotspot_rhs_; }

  StepOutcome simulate(const Grouping& grouping) const;
  double evaluate(const Grouping& grouping) const;

 private:
  Topology base_topology_;
  ChannelPlan channel_plan_;
  std::vector<std::pair<int, int>> pairs_;
  std::optional<std::pair<Realization, std::vector<int>>> cached_;
  Realization realization_;
  std::vector<int> hotspot_rhs_;
  Grouping grouping_;
  Association association_;
};

// Samples one episode's users, interferers and fading for a scenario.
Realization sample_realization(const ScenarioConfig& config, const Topology& base, Rng& rng,
                               std::vector<int>* hotspot_rhs = nullptr);

}  // namespace dmimo
