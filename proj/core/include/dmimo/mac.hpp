#pragma once

#include <vector>

#include "dmimo/radio.hpp"

namespace dmimo {

// Channel per group, 1-based in [1, K].
using ChannelPlan = std::vector<int>;

struct MacConfig {
  double mac_efficiency = 0.7;
  double se_cap_bps_hz = 8.0;
  double step_duration_ms = 100.0;  // label only; the model is steady-state
};

struct ConflictEdge {
  int a = 0;
  int b = 0;
  double weight_mw = 0.0;
};

// Vertices [0, group_count) are groups, [group_count, group_count + interferer_count)
// are external interferers. Groups without associated users are absent: they do not
// contend and do not transmit.
struct ConflictGraph {
  int group_count = 0;
  int interferer_count = 0;
  std::vector<bool> present;
  std::vector<int> channel;
  std::vector<std::vector<int>> neighbors;  // sorted
  std::vector<ConflictEdge> edges;

  int vertex_count() const { return group_count + interferer_count; }
  int interferer_vertex(int interferer) const { return group_count + interferer; }
  bool adjacent(int a, int b) const;
};

struct StepOutcome {
  std::vector<double> per_user_throughput_mbps;
  std::vector<double> per_user_sinr;
  std::vector<double> per_group_airtime;
  double step_duration_ms = 100.0;
};

void validate_plan(const ChannelPlan& plan, int group_count, int channels);

ConflictGraph build_conflict_graph(const Topology& topology, const LinkGains& gains,
                                   const ChannelPlan& plan, const Grouping& grouping,
                                   const Association& association, double cca_threshold_dbm);

// Long-run CSMA fairness: share(v) = 1 / (1 + deg(v)); absent vertices get 0.
std::vector<double> airtime_shares(const ConflictGraph& graph);

// Ideal zero-forcing inside the serving group. Co-channel groups and interferers that
// the serving group hears defer and contribute nothing; hidden ones interfere at full
// power.
double per_user_sinr(int user, int serving_group, const ConflictGraph& graph,
                     const Topology& topology, const LinkGains& gains, const Grouping& grouping,
                     const RadioConfig& radio);

StepOutcome simulate_step(const Topology& topology, const LinkGains& gains,
                          const ChannelPlan& plan, const Grouping& grouping,
                          const Association& association, const RadioConfig& radio,
                          const MacConfig& mac);

StepOutcome simulate_step(const Topology& topology, const LinkGains& gains,
                          const ChannelPlan& plan, const Grouping& grouping,
                          const RadioConfig& radio, const MacConfig& mac);

}  // namespace dmimo
