#include "dmimo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "dmimo/baselines.hpp"
#include "dmimo/metrics.hpp"

namespace dmimo {

using json = nlohmann::ordered_json;

const std::vector<std::string>& channel_baselines() {
  static const std::vector<std::string> names{"all-same", "random", "heuristic", "sensing", "hsum"};
  return names;
}

const std::vector<std::string>& grouping_baselines() {
  static const std::vector<std::string> names{"adjacent", "random-grouping"};
  return names;
}

AgentKind ExperimentConfig::agent_kind() const {
  if (agent == "reinforce") return AgentKind::kReinforce;
  if (agent == "wolpertinger") return AgentKind::kWolpertinger;
  if (agent.rfind("baseline:", 0) == 0) return AgentKind::kBaseline;
  throw ConfigError("unknown agent '" + agent + "' (reinforce, wolpertinger or baseline:<name>)");
}

std::string ExperimentConfig::baseline_name() const {
  return agent_kind() == AgentKind::kBaseline ? agent.substr(9) : std::string{};
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (seeds.empty()) throw ConfigError("need at least one seed");
  if (std::set<int>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  for (int s : seeds)
    if (s < 0) throw ConfigError("seeds must be non-negative");
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  const bool grouping = scenario.scenario == Scenario::kP4;
  switch (agent_kind()) {
    case AgentKind::kReinforce:
      if (grouping) throw ConfigError("reinforce runs P1-P3; P4 uses wolpertinger");
      if (reinforce.hidden_width < 1) throw ConfigError("reinforce.hidden_width must be >= 1");
      if (!(reinforce.learning_rate > 0.0)) throw ConfigError("reinforce.learning_rate must be > 0");
      break;
    case AgentKind::kWolpertinger:
      if (!grouping) throw ConfigError("wolpertinger runs P4 only");
      if (wolpertinger.k < 1) throw ConfigError("wolpertinger.k must be >= 1");
      if (wolpertinger.batch_size < 1 || wolpertinger.batch_size > wolpertinger.buffer_capacity)
        throw ConfigError("wolpertinger.batch_size must lie in [1, buffer_capacity]");
      if (wolpertinger.updates_per_step < 0) throw ConfigError("wolpertinger.updates_per_step must be >= 0");
      for (double tau : {wolpertinger.actor_tau, wolpertinger.critic_tau})
        if (tau < 0.0 || tau > 1.0) throw ConfigError("wolpertinger tau must lie in [0, 1]");
      if (wolpertinger.sigma_start < 0.0 || wolpertinger.sigma_end < 0.0)
        throw ConfigError("wolpertinger sigma must be >= 0");
      break;
    case AgentKind::kBaseline: {
      const auto& names = grouping ? grouping_baselines() : channel_baselines();
      if (std::find(names.begin(), names.end(), baseline_name()) == names.end())
        throw ConfigError("baseline '" + baseline_name() + "' does not exist for " +
                          to_string(scenario.scenario));
      break;
    }
  }
}

ExperimentConfig ExperimentConfig::defaults_for(Scenario s) {
  ExperimentConfig c;
  switch (s) {
    case Scenario::kP1:
      c.scenario = ScenarioConfig::p1();
      break;
    case Scenario::kP2:
      c.scenario = ScenarioConfig::p2(1);
      c.initial_plan_file = "runs/p1/s_star_seed{seed}.txt";
      break;
    case Scenario::kP3:
      c.scenario = ScenarioConfig::p3(3);
      c.initial_plan_file = "runs/p1/s_star_seed{seed}.txt";
      break;
    case Scenario::kP4:
      c.scenario = ScenarioConfig::p4();
      c.agent = "wolpertinger";
      break;
  }
  c.name = to_string(s);
  std::transform(c.name.begin(), c.name.end(), c.name.begin(), ::tolower);
  c.output_dir = "runs/" + c.name;
  c.reinforce.discount = c.scenario.discount;
  c.wolpertinger.discount = c.scenario.discount;
  return c;
}

// ---------------------------------------------------------------- JSON

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string metric_kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::kPercentile: return "percentile";
    case MetricKind::kMean: return "mean";
    case MetricKind::kJain: return "jain";
    case MetricKind::kProduct: return "product";
    case MetricKind::kLinear: return "linear";
  }
  return "?";
}

MetricKind metric_kind_from(const std::string& s) {
  if (s == "percentile") return MetricKind::kPercentile;
  if (s == "mean") return MetricKind::kMean;
  if (s == "jain") return MetricKind::kJain;
  if (s == "product") return MetricKind::kProduct;
  if (s == "linear") return MetricKind::kLinear;
  throw ConfigError("unknown metric kind '" + s + "'");
}

json to_json(const ScenarioConfig& s) {
  json metric{{"kind", metric_kind_name(s.metric.kind)},
              {"percentile", s.metric.percentile},
              {"weights", s.metric.weights}};
  json grid{{"cols", s.grid.cols},
            {"rows", s.grid.rows},
            {"spacing_m", s.grid.spacing},
            {"block_cols", s.grid.block_cols},
            {"block_rows", s.grid.block_rows},
            {"channels", s.grid.channels}};
  json hotspot{{"fraction", s.hotspot.fraction},
               {"radius_m", s.hotspot.radius_m},
               {"max_hotspots", s.hotspot.max_hotspots}};
  json radio{{"frequency_ghz", s.radio.frequency_ghz},
             {"path_loss_exponent", s.radio.path_loss_exponent},
             {"rh_tx_power_dbm", s.radio.rh_tx_power_dbm},
             {"interferer_tx_power_dbm", s.radio.interferer_tx_power_dbm},
             {"bandwidth_mhz", s.radio.bandwidth_mhz},
             {"noise_figure_db", s.radio.noise_figure_db},
             {"cca_threshold_dbm", s.radio.cca_threshold_dbm},
             {"shadowing", s.radio.shadowing},
             {"shadowing_sigma_db", s.radio.shadowing_sigma_db}};
  json mac{{"mac_efficiency", s.mac.mac_efficiency},
           {"se_cap_bps_hz", s.mac.se_cap_bps_hz},
           {"step_duration_ms", s.mac.step_duration_ms}};
  return json{{"episode_length", s.episode_length},
              {"discount", s.discount},
              {"reward_scale_mbps", s.reward_scale_mbps},
              {"metric", metric},
              {"users", s.users},
              {"user_model", s.user_model == UserModel::kHotspot ? "hotspot" : "uniform"},
              {"hotspot", hotspot},
              {"interferers", s.interferers},
              {"interferer_margin_m", s.interferer_margin_m},
              {"fixed_realization", s.fixed_realization},
              {"grid", grid},
              {"radio", radio},
              {"mac", mac}};
}

void from_json(const json& j, ScenarioConfig& s) {
  const std::string w = "environment";
  check_keys(j, {"episode_length", "discount", "reward_scale_mbps", "metric", "users", "user_model",
                 "hotspot", "interferers", "interferer_margin_m", "fixed_realization", "grid",
                 "radio", "mac", "initial_plan"},
             w);
  read(j, "episode_length", s.episode_length, w);
  read(j, "discount", s.discount, w);
  read(j, "reward_scale_mbps", s.reward_scale_mbps, w);
  read(j, "users", s.users, w);
  read(j, "interferers", s.interferers, w);
  read(j, "interferer_margin_m", s.interferer_margin_m, w);
  read(j, "fixed_realization", s.fixed_realization, w);
  if (j.contains("initial_plan")) {
    ChannelPlan plan;
    read(j, "initial_plan", plan, w);
    s.initial_plan = plan;
  }
  if (j.contains("user_model")) {
    std::string m;
    read(j, "user_model", m, w);
    if (m == "uniform") s.user_model = UserModel::kUniform;
    else if (m == "hotspot") s.user_model = UserModel::kHotspot;
    else throw ConfigError("unknown user_model '" + m + "'");
  }
  if (j.contains("metric")) {
    const json& m = j.at("metric");
    check_keys(m, {"kind", "percentile", "weights"}, w + ".metric");
    std::string kind = metric_kind_name(s.metric.kind);
    read(m, "kind", kind, w + ".metric");
    s.metric.kind = metric_kind_from(kind);
    read(m, "percentile", s.metric.percentile, w + ".metric");
    read(m, "weights", s.metric.weights, w + ".metric");
  }
  if (j.contains("hotspot")) {
    const json& h = j.at("hotspot");
    check_keys(h, {"fraction", "radius_m", "max_hotspots"}, w + ".hotspot");
    read(h, "fraction", s.hotspot.fraction, w + ".hotspot");
    read(h, "radius_m", s.hotspot.radius_m, w + ".hotspot");
    read(h, "max_hotspots", s.hotspot.max_hotspots, w + ".hotspot");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"cols", "rows", "spacing_m", "block_cols", "block_rows", "channels"}, w + ".grid");
    read(g, "cols", s.grid.cols, w + ".grid");
    read(g, "rows", s.grid.rows, w + ".grid");
    read(g, "spacing_m", s.grid.spacing, w + ".grid");
    read(g, "block_cols", s.grid.block_cols, w + ".grid");
    read(g, "block_rows", s.grid.block_rows, w + ".grid");
    read(g, "channels", s.grid.channels, w + ".grid");
  }
  if (j.contains("radio")) {
    const json& r = j.at("radio");
    const std::string rw = w + ".radio";
    check_keys(r, {"frequency_ghz", "path_loss_exponent", "rh_tx_power_dbm", "interferer_tx_power_dbm",
                   "bandwidth_mhz", "noise_figure_db", "cca_threshold_dbm", "shadowing",
                   "shadowing_sigma_db"},
               rw);
    read(r, "frequency_ghz", s.radio.frequency_ghz, rw);
    read(r, "path_loss_exponent", s.radio.path_loss_exponent, rw);
    read(r, "rh_tx_power_dbm", s.radio.rh_tx_power_dbm, rw);
    read(r, "interferer_tx_power_dbm", s.radio.interferer_tx_power_dbm, rw);
    read(r, "bandwidth_mhz", s.radio.bandwidth_mhz, rw);
    read(r, "noise_figure_db", s.radio.noise_figure_db, rw);
    read(r, "cca_threshold_dbm", s.radio.cca_threshold_dbm, rw);
    read(r, "shadowing", s.radio.shadowing, rw);
    read(r, "shadowing_sigma_db", s.radio.shadowing_sigma_db, rw);
  }
  if (j.contains("mac")) {
    const json& m = j.at("mac");
    check_keys(m, {"mac_efficiency", "se_cap_bps_hz", "step_duration_ms"}, w + ".mac");
    read(m, "mac_efficiency", s.mac.mac_efficiency, w + ".mac");
    read(m, "se_cap_bps_hz", s.mac.se_cap_bps_hz, w + ".mac");
    read(m, "step_duration_ms", s.mac.step_duration_ms, w + ".mac");
  }
}

json to_json(const ReinforceConfig& r) {
  return json{{"learning_rate", r.learning_rate},
              {"hidden_width", r.hidden_width},
              {"discount_weighting", r.discount_weighting},
              {"per_step_updates", r.per_step_updates},
              {"normalize_returns", r.normalize_returns}};
}

void from_json(const json& j, ReinforceConfig& r) {
  const std::string w = "reinforce";
  check_keys(j, {"learning_rate", "hidden_width", "discount_weighting", "per_step_updates",
                 "normalize_returns"},
             w);
  read(j, "learning_rate", r.learning_rate, w);
  read(j, "hidden_width", r.hidden_width, w);
  read(j, "discount_weighting", r.discount_weighting, w);
  read(j, "per_step_updates", r.per_step_updates, w);
  read(j, "normalize_returns", r.normalize_returns, w);
}

json to_json(const DdpgConfig& d) {
  return json{{"actor_learning_rate", d.actor_learning_rate},
              {"critic_learning_rate", d.critic_learning_rate},
              {"actor_tau", d.actor_tau},
              {"critic_tau", d.critic_tau},
              {"actor_hidden", d.actor_hidden},
              {"critic_hidden", d.critic_hidden},
              {"buffer_capacity", d.buffer_capacity},
              {"batch_size", d.batch_size},
              {"k", d.k},
              {"sigma_start", d.sigma_start},
              {"sigma_end", d.sigma_end},
              {"sigma_decay_episodes", d.sigma_decay_episodes},
              {"updates_per_step", d.updates_per_step}};
}

void from_json(const json& j, DdpgConfig& d) {
  const std::string w = "wolpertinger";
  check_keys(j, {"actor_learning_rate", "critic_learning_rate", "actor_tau", "critic_tau",
                 "actor_hidden", "critic_hidden", "buffer_capacity", "batch_size", "k",
                 "sigma_start", "sigma_end", "sigma_decay_episodes", "updates_per_step"},
             w);
  read(j, "actor_learning_rate", d.actor_learning_rate, w);
  read(j, "critic_learning_rate", d.critic_learning_rate, w);
  read(j, "actor_tau", d.actor_tau, w);
  read(j, "critic_tau", d.critic_tau, w);
  read(j, "actor_hidden", d.actor_hidden, w);
  read(j, "critic_hidden", d.critic_hidden, w);
  read(j, "buffer_capacity", d.buffer_capacity, w);
  read(j, "batch_size", d.batch_size, w);
  read(j, "k", d.k, w);
  read(j, "sigma_start", d.sigma_start, w);
  read(j, "sigma_end", d.sigma_end, w);
  read(j, "sigma_decay_episodes", d.sigma_decay_episodes, w);
  read(j, "updates_per_step", d.updates_per_step, w);
}

}  // namespace

std::string to_json_string(const ExperimentConfig& c) {
  json j{{"name", c.name},
         {"scenario", to_string(c.scenario.scenario)},
         {"agent", c.agent},
         {"episodes", c.episodes},
         {"master_seed", c.master_seed},
         {"seeds", c.seeds},
         {"output_dir", c.output_dir.string()},
         {"initial_plan_file", c.initial_plan_file},
         {"write_checkpoints", c.write_checkpoints},
         {"record_wall_clock", c.record_wall_clock},
         {"environment", to_json(c.scenario)},
         {"reinforce", to_json(c.reinforce)},
         {"wolpertinger", to_json(c.wolpertinger)}};
  if (c.scenario.initial_plan) j["environment"]["initial_plan"] = *c.scenario.initial_plan;
  return j.dump(2) + "\n";
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string w = "config";
  check_keys(j, {"name", "scenario", "agent", "episodes", "master_seed", "seeds", "output_dir",
                 "initial_plan_file", "write_checkpoints", "record_wall_clock", "environment",
                 "reinforce", "wolpertinger"},
             w);
  std::string scenario = "P1";
  read(j, "scenario", scenario, w);
  ExperimentConfig c;
  try {
    c = ExperimentConfig::defaults_for(scenario_from_string(scenario));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read(j, "name", c.name, w);
  read(j, "agent", c.agent, w);
  read(j, "episodes", c.episodes, w);
  read(j, "master_seed", c.master_seed, w);
  read(j, "seeds", c.seeds, w);
  std::string out = c.output_dir.string();
  read(j, "output_dir", out, w);
  c.output_dir = out;
  read(j, "initial_plan_file", c.initial_plan_file, w);
  read(j, "write_checkpoints", c.write_checkpoints, w);
  read(j, "record_wall_clock", c.record_wall_clock, w);
  if (j.contains("environment")) from_json(j.at("environment"), c.scenario);
  if (j.contains("reinforce")) from_json(j.at("reinforce"), c.reinforce);
  if (j.contains("wolpertinger")) from_json(j.at("wolpertinger"), c.wolpertinger);
  c.reinforce.discount = c.scenario.discount;
  c.wolpertinger.discount = c.scenario.discount;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

namespace {

void ensure_parent(const std::filesystem::path& path) {
  if (!path.has_parent_path()) return;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
}

}  // namespace

void save_experiment_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string(config);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------- CSV

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "seed",          "episode",         "initial_metric", "final_metric", "best_metric",
      "total_reward",  "final_mean_mbps", "final_jain",     "entropy",      "wall_ms"};
  return cols;
}

void write_csv_header(std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

void write_csv_row(std::ostream& out, const EpisodeRecord& r) {
  out << r.seed << ',' << r.episode << ',' << num(r.initial_metric) << ',' << num(r.final_metric)
      << ',' << num(r.best_metric) << ',' << opt(r.total_reward) << ',' << num(r.final_mean_mbps)
      << ',' << num(r.final_jain) << ',' << opt(r.entropy) << ',' << opt(r.wall_ms) << '\n';
}

void emit_csv(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv_header(out);
  for (const auto& r : records) write_csv_row(out, r);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EpisodeRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != csv_columns()) throw std::runtime_error("CSV header does not match the record schema");
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != header.size())
      throw std::runtime_error("CSV row has " + std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(header.size()));
    EpisodeRecord r;
    r.seed = std::stoi(cells[0]);
    r.episode = std::stoi(cells[1]);
    r.initial_metric = std::stod(cells[2]);
    r.final_metric = std::stod(cells[3]);
    r.best_metric = std::stod(cells[4]);
    r.total_reward = parse_opt(cells[5]);
    r.final_mean_mbps = std::stod(cells[6]);
    r.final_jain = std::stod(cells[7]);
    r.entropy = parse_opt(cells[8]);
    r.wall_ms = parse_opt(cells[9]);
    out.push_back(r);
  }
  return out;
}

std::vector<EpisodeRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_csv(in);
}

// ---------------------------------------------------------------- runs

Rng seed_stream(std::uint64_t master_seed, int seed, std::string_view tag) {
  return make_rng(split_seed(master_seed, "seed", static_cast<std::uint64_t>(seed)), tag);
}

namespace {

using Clock = std::chrono::steady_clock;

std::string expand_seed(std::string pattern, int seed) {
  const std::string key = "{seed}";
  for (std::size_t at = pattern.find(key); at != std::string::npos; at = pattern.find(key))
    pattern.replace(at, key.size(), std::to_string(seed));
  return pattern;
}

void fill_outcome(EpisodeRecord& r, const StepOutcome& o) {
  r.final_mean_mbps = mean_throughput(o.per_user_throughput_mbps);
  r.final_jain = jain_fairness(o.per_user_throughput_mbps);
}

ChannelPlan baseline_plan(const std::string& name, const ChannelAssignmentEnv& env, Rng& rng) {
  if (name == "all-same") return assign_all_same(env.group_count());
  if (name == "random") return assign_random(env.group_count(), env.channels(), rng);
  if (name == "heuristic") return assign_heuristic_pattern(env.topology());
  if (name == "sensing")
    return assign_sensing(env.topology(), env.gains(), env.grouping(), env.association(), env.initial_plan());
  if (name == "hsum") {
    const auto w = conflict_weights(env.topology(), env.gains(), env.grouping(), env.association(),
                                    env.config().radio.cca_threshold_dbm);
    return assign_hsum(w, env.channels());
  }
  throw ConfigError("unknown channel baseline '" + name + "'");
}

class SeedRun {
 public:
  SeedRun(const ExperimentConfig& cfg, int seed, const RunOptions& options)
      : cfg_(cfg), seed_(seed), options_(options) {}

  SeedResult run() {
    result_.seed = seed_;
    if (options_.write_files) {
      const auto path = cfg_.output_dir / (cfg_.name + "_seed" + std::to_string(seed_) + ".csv");
      csv_.open(path);
      if (!csv_) throw std::runtime_error("cannot write " + path.string());
      write_csv_header(csv_);
    }
    if (cfg_.scenario.scenario == Scenario::kP4)
      run_grouping();
    else
      run_channels();
    if (options_.write_files && result_.final_plan && cfg_.scenario.scenario == Scenario::kP1)
      save_channel_plan(cfg_.output_dir / ("s_star_seed" + std::to_string(seed_) + ".txt"),
                        *result_.final_plan);
    return std::move(result_);
  }

 private:
  Rng stream(std::string_view tag) const { return seed_stream(cfg_.master_seed, seed_, tag); }

  void emit(EpisodeRecord r, Clock::time_point start) {
    r.seed = seed_;
    if (cfg_.record_wall_clock)
      r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (csv_.is_open()) {
      write_csv_row(csv_, r);
      csv_.flush();
      if (!csv_) throw std::runtime_error("failed writing per-seed CSV");
    }
    if (options_.on_episode) options_.on_episode(r);
    result_.records.push_back(r);
  }

  template <typename Agent>
  void checkpoint(const Agent& agent) {
    if (!options_.write_files || !cfg_.write_checkpoints) return;
    const auto path = cfg_.output_dir / (cfg_.name + "_seed" + std::to_string(seed_) + ".ckpt");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    agent.save(out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
    result_.checkpoint = path;
  }

  void run_channels() {
    ScenarioConfig sc = cfg_.scenario;
    if (sc.scenario != Scenario::kP1 && !sc.initial_plan && !cfg_.initial_plan_file.empty()) {
      const std::string path = expand_seed(cfg_.initial_plan_file, seed_);
      sc.initial_plan = load_channel_plan(path);
      if (!sc.initial_plan) std::cerr << "warning: cannot read stored plan " << path << '\n';
    }
    ChannelAssignmentEnv env(sc);
    Rng env_rng = stream("env");
    const AgentKind kind = cfg_.agent_kind();

    if (kind == AgentKind::kBaseline) {
      Rng rng = stream("baseline");
      const std::string name = cfg_.baseline_name();
      for (int e = 0; e < cfg_.episodes; ++e) {
        const auto start = Clock::now();
        EpisodeRecord r;
        r.episode = e;
        r.initial_metric = env.reset(env_rng);
        const ChannelPlan plan = baseline_plan(name, env, rng);
        const StepOutcome o = env.simulate(plan);
        r.final_metric = scalarize(o.per_user_throughput_mbps, sc.metric);
        r.best_metric = r.final_metric;
        fill_outcome(r, o);
        emit(r, start);
        result_.final_plan = plan;
      }
      return;
    }

    ReinforceConfig rc = cfg_.reinforce;
    rc.discount = sc.discount;
    Rng init_rng = stream("init");
    ReinforceAgent agent(env.state_width(), env.action_count(), rc, init_rng);
    Rng policy_rng = stream("policy");
    for (int e = 0; e < cfg_.episodes; ++e) {
      const auto start = Clock::now();
      EpisodeRecord r;
      r.episode = e;
      r.initial_metric = env.reset(env_rng);
      r.best_metric = r.initial_metric;
      Trajectory traj;
      traj.episode_length = sc.episode_length;
      double entropy_sum = 0.0;
      for (int t = 0; t < sc.episode_length; ++t) {
        std::vector<double> s = env.encode_state();
        const Eigen::VectorXd p = agent.probabilities(s);
        entropy_sum += entropy(p);
        const int a = sample_categorical(p, policy_rng);
        const StepResult step = env.step(a);
        r.best_metric = std::max(r.best_metric, step.metric);
        traj.steps.push_back({std::move(s), a, step.reward, env.encode_state()});
      }
      agent.update(traj);
      r.final_metric = env.current_metric();
      r.total_reward = traj.total_reward();
      r.entropy = entropy_sum / sc.episode_length;
      fill_outcome(r, env.last_outcome());
      result_.final_plan = env.plan();
      emit(r, start);
    }
    checkpoint(agent);
  }

  void run_grouping() {
    const ScenarioConfig& sc = cfg_.scenario;
    GroupingEnv env(sc);
    Rng env_rng = stream("env");
    if (cfg_.agent_kind() == AgentKind::kBaseline) {
      Rng rng = stream("baseline");
      const bool random = cfg_.baseline_name() == "random-grouping";
      for (int e = 0; e < cfg_.episodes; ++e) {
        const auto start = Clock::now();
        EpisodeRecord r;
        r.episode = e;
        r.initial_metric = env.reset(env_rng);
        const Grouping g = random ? grouping_random(env.rh_count(), rng) : env.grouping();
        const StepOutcome o = env.simulate(g);
        r.final_metric = scalarize(o.per_user_throughput_mbps, sc.metric);
        r.best_metric = r.final_metric;
        fill_outcome(r, o);
        emit(r, start);
      }
      return;
    }

    DdpgConfig dc = cfg_.wolpertinger;
    dc.discount = sc.discount;
    Rng init_rng = stream("init");
    DdpgAgent agent(env.state_width(), env.action_count(), dc, init_rng);
    Rng explore_rng = stream("explore");
    Rng replay_rng = stream("replay");
    for (int e = 0; e < cfg_.episodes; ++e) {
      const auto start = Clock::now();
      agent.set_episode(e);
      EpisodeRecord r;
      r.episode = e;
      r.initial_metric = env.reset(env_rng);
      r.best_metric = r.initial_metric;
      double total = 0.0;
      for (int t = 0; t < sc.episode_length; ++t) {
        const std::vector<double> s = env.encode_state();
        const int a = agent.select(s, env.valid_actions(), explore_rng);
        const StepResult step = env.step(a);
        agent.remember(s, a, step.reward, env.encode_state(), step.done);
        for (int u = 0; u < dc.updates_per_step; ++u) agent.update(replay_rng);
        r.best_metric = std::max(r.best_metric, step.metric);
        total += step.reward;
      }
      r.final_metric = env.current_metric();
      r.total_reward = total;
      fill_outcome(r, env.last_outcome());
      emit(r, start);
    }
    agent.set_episode(cfg_.episodes);
    checkpoint(agent);
  }

  const ExperimentConfig& cfg_;
  int seed_;
  const RunOptions& options_;
  std::ofstream csv_;
  SeedResult result_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (options.write_files) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + config.output_dir.string() + ": " + ec.message());
  }
  ExperimentResult result;
  for (int seed : config.seeds) {
    result.seeds.push_back(SeedRun(config, seed, options).run());
    const auto& recs = result.seeds.back().records;
    result.records.insert(result.records.end(), recs.begin(), recs.end());
  }
  if (options.write_files) emit_csv(result.records, config.output_dir / (config.name + ".csv"));
  return result;
}

std::vector<double> seed_average(const std::vector<EpisodeRecord>& records,
                                 double EpisodeRecord::*field) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : records) {
    auto& [sum, n] = acc[r.episode];
    sum += r.*field;
    ++n;
  }
  std::vector<double> out;
  out.reserve(acc.size());
  for (const auto& [episode, sn] : acc) out.push_back(sn.first / sn.second);
  return out;
}

// ---------------------------------------------------------------- SVG

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_chart_svg(const std::vector<ChartSeries>& series, int window,
                             const std::string& title) {
  if (series.empty()) throw std::invalid_argument("chart needs at least one series");
  if (window < 1) throw std::invalid_argument("moving-average window must be >= 1");
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double width = 900, height = 520, left = 80, right = 200, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  std::size_t n = 1;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  lo = std::min(lo, 0.0);
  if (hi <= lo) hi = lo + 1.0;
  hi += 0.05 * (hi - lo);

  auto px = [&](std::size_t i) { return left + (n > 1 ? plot_w * i / (n - 1) : plot_w / 2); };
  auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };
  auto polyline = [&](const std::vector<double>& v, const char* colour, double opacity, double stroke) {
    std::string pts;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) continue;
      pts += fmt2(px(i)) + "," + fmt2(py(v[i])) + " ";
    }
    return "  <polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-opacity=\"" +
           fmt2(opacity) + "\" stroke-width=\"" + fmt2(stroke) + "\" points=\"" + pts + "\"/>\n";
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) + "\" height=\"" +
         fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg += "  <text x=\"" + fmt2(left + plot_w / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" +
           xml_escape(title) + "</text>\n";
  svg += "  <rect x=\"" + fmt2(left) + "\" y=\"" + fmt2(top) + "\" width=\"" + fmt2(plot_w) +
         "\" height=\"" + fmt2(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    svg += "  <text x=\"" + fmt2(left - 8) + "\" y=\"" + fmt2(py(v) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fmt2(v) + "</text>\n";
    const std::size_t i = (n - 1) * static_cast<std::size_t>(t) / 5;
    svg += "  <text x=\"" + fmt2(px(i)) + "\" y=\"" + fmt2(top + plot_h + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(i + 1) + "</text>\n";
  }
  svg += "  <text x=\"" + fmt2(left + plot_w / 2) + "\" y=\"" + fmt2(height - 15) +
         "\" text-anchor=\"middle\" font-size=\"13\">Episode</text>\n";
  svg += "  <text x=\"20\" y=\"" + fmt2(top + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
         "transform=\"rotate(-90 20 " + fmt2(top + plot_h / 2) + ")\">Throughput metric (Mbps)</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = palette[k % (sizeof palette / sizeof *palette)];
    svg += polyline(series[k].values, colour, 0.25, 1.0);
    svg += polyline(moving_average(series[k].values, window), colour, 1.0, 2.0);
    const double ly = top + 20 + 22 * static_cast<double>(k);
    svg += "  <line x1=\"" + fmt2(left + plot_w + 15) + "\" y1=\"" + fmt2(ly) + "\" x2=\"" +
           fmt2(left + plot_w + 40) + "\" y2=\"" + fmt2(ly) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    svg += "  <text x=\"" + fmt2(left + plot_w + 46) + "\" y=\"" + fmt2(ly + 4) + "\" font-size=\"12\">" +
           xml_escape(series[k].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_chart(const std::vector<ChartSeries>& series, int window, const std::filesystem::path& path,
                const std::string& title) {
  const std::string svg = render_chart_svg(series, window, title);
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace dmimo
