#include "dmimo/mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmimo {

bool ConflictGraph::adjacent(int a, int b) const {
  const auto& n = neighbors[static_cast<std::size_t>(a)];
  return std::binary_search(n.begin(), n.end(), b);
}

void validate_plan(const ChannelPlan& plan, int group_count, int channels) {
  if (static_cast<int>(plan.size()) != group_count)
    throw std::invalid_argument("channel plan size does not match group count");
  for (int c : plan)
    if (c < 1 || c > channels) throw std::invalid_argument("channel index out of range [1, K]");
}

ConflictGraph build_conflict_graph(const Topology& topology, const LinkGains& gains,
                                   const ChannelPlan& plan, const Grouping& grouping,
                                   const Association& association, double cca_threshold_dbm) {
  validate_plan(plan, grouping.group_count(), topology.channels);
  ConflictGraph graph;
  graph.group_count = grouping.group_count();
  graph.interferer_count = static_cast<int>(topology.interferers.size());
  const auto nv = static_cast<std::size_t>(graph.vertex_count());
  graph.present.assign(nv, false);
  graph.channel.assign(nv, 0);
  graph.neighbors.assign(nv, {});

  for (int g : association.user_group) graph.present[static_cast<std::size_t>(g)] = true;
  for (int g = 0; g < graph.group_count; ++g) graph.channel[static_cast<std::size_t>(g)] = plan[static_cast<std::size_t>(g)];
  for (int i = 0; i < graph.interferer_count; ++i) {
    const auto v = static_cast<std::size_t>(graph.interferer_vertex(i));
    graph.present[v] = true;
    graph.channel[v] = topology.interferers[static_cast<std::size_t>(i)].channel;
  }

  const double threshold = dbm_to_mw(cca_threshold_dbm);
  auto connect = [&](int a, int b, double w) {
    graph.edges.push_back({a, b, w});
    graph.neighbors[static_cast<std::size_t>(a)].push_back(b);
    graph.neighbors[static_cast<std::size_t>(b)].push_back(a);
  };

  for (int a = 0; a < graph.group_count; ++a) {
    if (!graph.present[static_cast<std::size_t>(a)]) continue;
    for (int b = a + 1; b < graph.group_count; ++b) {
      if (!graph.present[static_cast<std::size_t>(b)]) continue;
      if (graph.channel[static_cast<std::size_t>(a)] != graph.channel[static_cast<std::size_t>(b)]) continue;
      const double w = group_coupling_mw(topology, gains, grouping, a, b);
      if (w >= threshold) connect(a, b, w);
    }
    for (int i = 0; i < graph.interferer_count; ++i) {
      const int v = graph.interferer_vertex(i);
      if (graph.channel[static_cast<std::size_t>(v)] != graph.channel[static_cast<std::size_t>(a)]) continue;
      const double w = interferer_coupling_mw(topology, gains, grouping, i, a);
      if (w >= threshold) connect(a, v, w);
    }
  }
  for (auto& n : graph.neighbors) std::sort(n.begin(), n.end());
  return graph;
}

std::vector<double> airtime_shares(const ConflictGraph& graph) {
  std::vector<double> share(static_cast<std::size_t>(graph.vertex_count()), 0.0);
  for (std::size_t v = 0; v < share.size(); ++v)
    if (graph.present[v]) share[v] = 1.0 / (1.0 + static_cast<double>(graph.neighbors[v].size()));
  return share;
}

double per_user_sinr(int user, int serving_group, const ConflictGraph& graph,
                     const Topology& topology, const LinkGains& gains, const Grouping& grouping,
                     const RadioConfig& radio) {
  const auto u = static_cast<Eigen::Index>(user);
  double signal = 0.0;
  for (int r : grouping.members(serving_group))
    signal = std::max(signal, dbm_to_mw(topology.rhs[static_cast<std::size_t>(r)].tx_power_dbm) *
                                  gains.rh_user(r, u));

  const int channel = graph.channel[static_cast<std::size_t>(serving_group)];
  double interference = 0.0;
  for (int g = 0; g < graph.group_count; ++g) {
    if (g == serving_group || !graph.present[static_cast<std::size_t>(g)]) continue;
    if (graph.channel[static_cast<std::size_t>(g)] != channel) continue;
    if (graph.adjacent(serving_group, g)) continue;  // defers under CSMA
    for (int r : grouping.members(g))
      interference += dbm_to_mw(topology.rhs[static_cast<std::size_t>(r)].tx_power_dbm) * gains.rh_user(r, u);
  }
  for (int i = 0; i < graph.interferer_count; ++i) {
    const int v = graph.interferer_vertex(i);
    if (graph.channel[static_cast<std::size_t>(v)] != channel) continue;
    if (graph.adjacent(serving_group, v)) continue;
    interference += dbm_to_mw(topology.interferers[static_cast<std::size_t>(i)].tx_power_dbm) *
                    gains.intf_user(i, u);
  }
  return signal / (dbm_to_mw(radio.noise_floor_dbm()) + interference);
}

StepOutcome simulate_step(const Topology& topology, const LinkGains& gains,
                          const ChannelPlan& plan, const Grouping& grouping,
                          const Association& association, const RadioConfig& radio,
                          const MacConfig& mac) {
  const ConflictGraph graph =
      build_conflict_graph(topology, gains, plan, grouping, association, radio.cca_threshold_dbm);
  const std::vector<double> share = airtime_shares(graph);

  std::vector<int> users_in_group(static_cast<std::size_t>(grouping.group_count()), 0);
  for (int g : association.user_group) ++users_in_group[static_cast<std::size_t>(g)];

  StepOutcome out;
  out.step_duration_ms = mac.step_duration_ms;
  out.per_group_airtime.assign(share.begin(), share.begin() + grouping.group_count());
  const std::size_t nu = topology.users.size();
  out.per_user_throughput_mbps.resize(nu);
  out.per_user_sinr.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    const int g = association.user_group[u];
    const double sinr =
        per_user_sinr(static_cast<int>(u), g, graph, topology, gains, grouping, radio);
    int streams = 0;
    for (int r : grouping.members(g)) streams += topology.rhs[static_cast<std::size_t>(r)].antennas;
    // Round-robin over cohorts of at most `streams` users.
    const double cohort_fraction =
        std::min(1.0, static_cast<double>(streams) / users_in_group[static_cast<std::size_t>(g)]);
    const double se = std::min(std::log2(1.0 + sinr), mac.se_cap_bps_hz);
    out.per_user_sinr[u] = sinr;
    out.per_user_throughput_mbps[u] = radio.bandwidth_mhz * mac.mac_efficiency * se *
                                      share[static_cast<std::size_t>(g)] * cohort_fraction;
  }
  return out;
}

StepOutcome simulate_step(const Topology& topology, const LinkGains& gains,
                          const ChannelPlan& plan, const Grouping& grouping,
                          const RadioConfig& radio, const MacConfig& mac) {
  return simulate_step(topology, gains, plan, grouping, associate_users(topology, gains, grouping),
                       radio, mac);
}

}  // namespace dmimo
