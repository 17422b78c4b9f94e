#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmimo/agents.hpp"
#include "dmimo/env.hpp"

namespace dmimo {

// Bad or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind { kReinforce, kWolpertinger, kBaseline };

// Baselines by name. P1-P3: all-same, random, heuristic, sensing, hsum.
// P4: adjacent, random-grouping.
const std::vector<std::string>& channel_baselines();
const std::vector<std::string>& grouping_baselines();

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioConfig scenario = ScenarioConfig::p1();
  std::string agent = "reinforce";  // reinforce | wolpertinger | baseline:<name>
  int episodes = 1000;
  std::uint64_t master_seed = 1;
  std::vector<int> seeds{0};
  ReinforceConfig reinforce;
  DdpgConfig wolpertinger;
  // Stored P1 plan for P2/P3; "{seed}" expands to the seed index.
  std::string initial_plan_file;
  std::filesystem::path output_dir = "runs";
  bool write_checkpoints = true;
  // Off by default so that reruns produce byte-identical CSV files.
  bool record_wall_clock = false;

  AgentKind agent_kind() const;
  std::string baseline_name() const;
  // The discount lives on the scenario; agents copy it.
  double discount() const { return scenario.discount; }
  void validate() const;

  static ExperimentConfig defaults_for(Scenario scenario);
};

std::string to_json_string(const ExperimentConfig& config);
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void save_experiment_config(const std::filesystem::path& path, const ExperimentConfig& config);

struct EpisodeRecord {
  int seed = 0;
  int episode = 0;
  double initial_metric = 0.0;
  double final_metric = 0.0;
  double best_metric = 0.0;
  std::optional<double> total_reward;
  double final_mean_mbps = 0.0;
  double final_jain = 0.0;
  std::optional<double> entropy;
  std::optional<double> wall_ms;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const EpisodeRecord& record);
void emit_csv(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path);
std::vector<EpisodeRecord> read_csv(std::istream& in);
std::vector<EpisodeRecord> read_csv(const std::filesystem::path& path);

struct SeedResult {
  int seed = 0;
  std::vector<EpisodeRecord> records;
  // Last plan of the final episode (P1-P3); the s* handed to P2/P3.
  std::optional<ChannelPlan> final_plan;
  std::optional<std::filesystem::path> checkpoint;
};

struct ExperimentResult {
  std::vector<EpisodeRecord> records;  // seed-major
  std::vector<SeedResult> seeds;
};

struct RunOptions {
  bool write_files = true;
  std::function<void(const EpisodeRecord&)> on_episode;
};

// Independent per-seed stream: depends only on (master_seed, seed, tag).
Rng seed_stream(std::uint64_t master_seed, int seed, std::string_view tag);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Per-episode mean of one field across seeds.
std::vector<double> seed_average(const std::vector<EpisodeRecord>& records,
                                 double EpisodeRecord::*field);

struct ChartSeries {
  std::string name;
  std::vector<double> values;  // one point per episode
};

std::string render_chart_svg(const std::vector<ChartSeries>& series, int window,
                             const std::string& title = "");
void emit_chart(const std::vector<ChartSeries>& series, int window,
                const std::filesystem::path& path, const std::string& title = "");

}  // namespace dmimo
