#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dmimo/baselines.hpp"
#include "dmimo/harness.hpp"
#include "dmimo/oracle.hpp"

namespace fs = std::filesystem;
using namespace dmimo;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void print_plan(const ChannelPlan& plan) {
  for (std::size_t i = 0; i < plan.size(); ++i) std::printf("%s%d", i ? " " : "", plan[i]);
}

int cmd_init_config(const std::string& scenario, const std::string& agent, const std::string& out) {
  ExperimentConfig cfg = ExperimentConfig::defaults_for(scenario_from_string(scenario));
  if (!agent.empty()) cfg.agent = agent;
  cfg.validate();
  if (out.empty() || out == "-") {
    std::cout << to_json_string(cfg);
  } else {
    save_experiment_config(out, cfg);
    std::cerr << "wrote " << out << '\n';
  }
  return 0;
}

ExperimentConfig load_with_overrides(const std::string& path, const std::vector<int>& seeds,
                                     int episodes, const std::string& out) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (!seeds.empty()) cfg.seeds = seeds;
  if (episodes > 0) cfg.episodes = episodes;
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();
  return cfg;
}

int cmd_run(const ExperimentConfig& cfg) {
  RunOptions options;
  const int every = std::max(1, cfg.episodes / 10);
  options.on_episode = [&](const EpisodeRecord& r) {
    if ((r.episode + 1) % every == 0 || r.episode + 1 == cfg.episodes)
      std::fprintf(stderr, "seed %d episode %d/%d final %.2f best %.2f\n", r.seed, r.episode + 1,
                   cfg.episodes, r.final_metric, r.best_metric);
  };
  const ExperimentResult result = run_experiment(cfg, options);
  std::cerr << "wrote " << (cfg.output_dir / (cfg.name + ".csv")).string() << " ("
            << result.records.size() << " records)\n";
  return 0;
}

int cmd_chart(const std::vector<std::string>& inputs, const std::vector<std::string>& labels,
              const std::string& out, int window, const std::string& field, const std::string& title) {
  double EpisodeRecord::*member = &EpisodeRecord::final_metric;
  if (field == "best_metric") member = &EpisodeRecord::best_metric;
  else if (field == "final_mean_mbps") member = &EpisodeRecord::final_mean_mbps;
  else if (field == "final_jain") member = &EpisodeRecord::final_jain;
  else if (field == "initial_metric") member = &EpisodeRecord::initial_metric;
  else if (field != "final_metric") throw ConfigError("unknown chart field '" + field + "'");
  if (!labels.empty() && labels.size() != inputs.size())
    throw ConfigError("give one --label per input CSV");
  std::vector<ChartSeries> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string name = labels.empty() ? fs::path(inputs[i]).stem().string() : labels[i];
    series.push_back({name, seed_average(read_csv(fs::path(inputs[i])), member)});
  }
  emit_chart(series, window, out, title);
  std::cerr << "wrote " << out << '\n';
  return 0;
}

int cmd_oracle_channels(const ExperimentConfig& cfg, const std::string& out) {
  if (cfg.scenario.scenario == Scenario::kP4) throw ConfigError("channel oracle needs a P1-P3 scenario");
  std::ofstream csv;
  if (!out.empty()) {
    csv.open(out);
    if (!csv) throw std::runtime_error("cannot write " + out);
    csv << "seed,plan,metric\n";
  }
  for (int seed : cfg.seeds) {
    ChannelAssignmentEnv env(cfg.scenario);
    Rng rng = seed_stream(cfg.master_seed, seed, "env");
    env.reset(rng);
    const ChannelOracleResult r = brute_force_channel_plans(env);
    std::printf("seed %d: %zu plans, best metric %.6f at plan ", seed, r.plans.size(), r.best.metric);
    print_plan(r.best.plan);
    std::printf("\n");
    if (csv.is_open())
      for (const auto& p : r.plans) {
        csv << seed << ',';
        for (std::size_t i = 0; i < p.plan.size(); ++i) csv << (i ? " " : "") << p.plan[i];
        csv << ',' << p.metric << '\n';
      }
  }
  return 0;
}

int cmd_oracle_coloring(int graphs, int vertices, int channels, double density, std::uint64_t seed) {
  int within = 0;
  double worst = 1.0;
  for (int g = 0; g < graphs; ++g) {
    Rng rng = make_rng(seed, "coloring", static_cast<std::uint64_t>(g));
    const ConflictWeights w = random_conflict_graph(vertices, density, rng);
    const double heuristic = coloring_objective(w, assign_hsum(w, channels));
    const double exact = brute_force_coloring(w, channels).objective;
    const double ratio = exact > 0.0 ? heuristic / exact : (heuristic > 0.0 ? INFINITY : 1.0);
    worst = std::max(worst, ratio);
    if (heuristic <= 1.1 * exact + 1e-12) ++within;
  }
  std::printf("%d/%d graphs within 1.1x of the exact optimum (worst ratio %.4f)\n", within, graphs, worst);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed-MIMO Wi-Fi channel assignment and grouping experiments"};
  app.require_subcommand(1);

  std::string scenario = "P1", agent, out, config_path, field = "final_metric", title;
  std::vector<int> seeds;
  std::vector<std::string> inputs, labels;
  int episodes = 0, window = 50;

  auto* init = app.add_subcommand("init-config", "Write a config with every parameter at its default");
  init->add_option("--scenario", scenario, "P1, P2, P3 or P4")->capture_default_str();
  init->add_option("--agent", agent, "reinforce, wolpertinger or baseline:<name>");
  init->add_option("--out", out, "Output file (stdout when omitted)");

  auto* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seeds", seeds, "Seed indices, comma separated")->delimiter(',');
  run->add_option("--episodes", episodes, "Override the episode count");
  run->add_option("--out", out, "Override the output directory");

  auto* chart = app.add_subcommand("chart", "Moving-average SVG chart from run CSVs");
  chart->add_option("inputs", inputs, "Run CSV files")->required();
  chart->add_option("--out", out, "SVG output path")->required();
  chart->add_option("--window", window, "Moving-average window")->capture_default_str();
  chart->add_option("--label", labels, "Series label per input");
  chart->add_option("--field", field, "final_metric, best_metric, final_mean_mbps, final_jain")
      ->capture_default_str();
  chart->add_option("--title", title, "Chart title");

  auto* oracle = app.add_subcommand("oracle", "Brute-force solvers for small instances");
  oracle->require_subcommand(1);
  auto* oracle_channels = oracle->add_subcommand("channels", "Enumerate every channel plan");
  oracle_channels->add_option("--config", config_path, "Experiment config (JSON)")->required();
  oracle_channels->add_option("--seeds", seeds, "Seed indices, comma separated")->delimiter(',');
  oracle_channels->add_option("--out", out, "CSV with every plan and its metric");
  int graphs = 100, vertices = 8, channels = 3;
  double density = 0.5;
  std::uint64_t coloring_seed = 1;
  auto* oracle_coloring = oracle->add_subcommand("coloring", "Compare HSUM with exact colouring");
  oracle_coloring->add_option("--graphs", graphs)->capture_default_str();
  oracle_coloring->add_option("--vertices", vertices)->capture_default_str();
  oracle_coloring->add_option("--channels", channels)->capture_default_str();
  oracle_coloring->add_option("--density", density, "Edge probability")->capture_default_str();
  oracle_coloring->add_option("--seed", coloring_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*init) return cmd_init_config(scenario, agent, out);
    if (*run) return cmd_run(load_with_overrides(config_path, seeds, episodes, out));
    if (*chart) return cmd_chart(inputs, labels, out, window, field, title);
    if (*oracle_channels) return cmd_oracle_channels(load_with_overrides(config_path, seeds, 0, ""), out);
    if (*oracle_coloring) return cmd_oracle_coloring(graphs, vertices, channels, density, coloring_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
