#include "dmimo/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dmimo {

ChannelPlan assign_all_same(int group_count) {
  return ChannelPlan(static_cast<std::size_t>(group_count), 1);
}

ChannelPlan assign_random(int group_count, int channels, Rng& rng) {
  if (channels < 1) throw std::invalid_argument("need at least one channel");
  std::uniform_int_distribution<int> pick(1, channels);
  ChannelPlan plan(static_cast<std::size_t>(group_count));
  for (auto& c : plan) c = pick(rng);
  return plan;
}

ChannelPlan assign_heuristic_pattern(const Topology& topology) {
  const int gcols = topology.group_grid_cols();
  const int grows = topology.group_grid_rows();
  if (gcols < 1 || grows < 1 || static_cast<int>(topology.groups.size()) != gcols * grows)
    throw std::invalid_argument("heuristic pattern needs groups laid out on a regular grid");
  const int k = topology.channels;
  if (k < 2) throw std::invalid_argument("heuristic pattern needs at least two channels");
  ChannelPlan plan(topology.groups.size());
  for (int r = 0; r < grows; ++r)
    for (int c = 0; c < gcols; ++c)
      plan[static_cast<std::size_t>(r * gcols + c)] = k >= 4 ? (r + 2 * c) % 4 + 1 : (r + c) % k + 1;
  return plan;
}

ChannelPlan assign_sensing(const Topology& topology, const LinkGains& gains,
                           const Grouping& grouping, const Association& association,
                           const ChannelPlan& current) {
  validate_plan(current, grouping.group_count(), topology.channels);
  const int groups = grouping.group_count();
  const int k = topology.channels;
  std::vector<bool> transmitting(static_cast<std::size_t>(groups), false);
  for (int g : association.user_group) transmitting[static_cast<std::size_t>(g)] = true;

  ChannelPlan next = current;
  for (int g = 0; g < groups; ++g) {
    std::vector<double> energy(static_cast<std::size_t>(k), 0.0);
    for (int c = 1; c <= k; ++c) {
      double loudest = 0.0;
      for (int probe : grouping.members(g)) {
        double sum = 0.0;
        for (int other = 0; other < groups; ++other) {
          if (other == g || !transmitting[static_cast<std::size_t>(other)]) continue;
          if (current[static_cast<std::size_t>(other)] != c) continue;
          for (int r : grouping.members(other))
            sum += dbm_to_mw(topology.rhs[static_cast<std::size_t>(r)].tx_power_dbm) * gains.rh_rh(r, probe);
        }
        for (std::size_t i = 0; i < topology.interferers.size(); ++i) {
          if (topology.interferers[i].channel != c) continue;
          sum += dbm_to_mw(topology.interferers[i].tx_power_dbm) *
                 gains.intf_rh(static_cast<Eigen::Index>(i), probe);
        }
        loudest = std::max(loudest, sum);
      }
      energy[static_cast<std::size_t>(c - 1)] = loudest;
    }
    // min_element returns the first minimum, i.e. the lowest channel on ties.
    next[static_cast<std::size_t>(g)] =
        static_cast<int>(std::min_element(energy.begin(), energy.end()) - energy.begin()) + 1;
  }
  return next;
}

ConflictWeights conflict_weights(const Topology& topology, const LinkGains& gains,
                                 const Grouping& grouping, const Association& association,
                                 double cca_threshold_dbm) {
  const int groups = grouping.group_count();
  const double threshold = dbm_to_mw(cca_threshold_dbm);
  ConflictWeights out;
  out.w.setZero(groups, groups);

  // hears[u][g]: user u receives some RH of group g above CCA.
  const std::size_t nu = topology.users.size();
  std::vector<std::vector<bool>> hears(nu, std::vector<bool>(static_cast<std::size_t>(groups), false));
  for (std::size_t u = 0; u < nu; ++u) {
    for (int g = 0; g < groups; ++g) {
      for (int r : grouping.members(g)) {
        if (dbm_to_mw(topology.rhs[static_cast<std::size_t>(r)].tx_power_dbm) *
                gains.rh_user(r, static_cast<Eigen::Index>(u)) >= threshold) {
          hears[u][static_cast<std::size_t>(g)] = true;
          break;
        }
      }
    }
  }

  for (int a = 0; a < groups; ++a) {
    for (int b = a + 1; b < groups; ++b) {
      int overlap = 0;
      for (std::size_t u = 0; u < nu; ++u) {
        const int g = association.user_group[u];
        if ((g == a && hears[u][static_cast<std::size_t>(b)]) ||
            (g == b && hears[u][static_cast<std::size_t>(a)]))
          ++overlap;
      }
      const double w = group_coupling_mw(topology, gains, grouping, a, b) * overlap;
      out.w(a, b) = w;
      out.w(b, a) = w;
    }
  }
  return out;
}

double coloring_objective(const ConflictWeights& weights, const ChannelPlan& plan) {
  double total = 0.0;
  const int n = weights.size();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (plan[static_cast<std::size_t>(a)] == plan[static_cast<std::size_t>(b)]) total += weights.w(a, b);
  return total;
}

HsumResult assign_hsum_detailed(const ConflictWeights& weights, int channels) {
  if (channels < 1) throw std::invalid_argument("need at least one channel");
  const int n = weights.size();
  HsumResult result;
  result.plan.assign(static_cast<std::size_t>(n), 0);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd degree = weights.w.rowwise().sum();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return degree(a) > degree(b); });

  // Cost of putting vertex v on colour c given the colours assigned so far.
  auto colour_cost = [&](int v, int c) {
    double cost = 0.0;
    for (int u = 0; u < n; ++u)
      if (u != v && result.plan[static_cast<std::size_t>(u)] == c) cost += weights.w(v, u);
    return cost;
  };

  for (int v : order) {
    int best = 1;
    double best_cost = colour_cost(v, 1);
    for (int c = 2; c <= channels; ++c) {
      const double cost = colour_cost(v, c);
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    result.plan[static_cast<std::size_t>(v)] = best;
  }
  result.greedy_objective = coloring_objective(weights, result.plan);
  result.objective_trace.push_back(result.greedy_objective);

  // Single-vertex recolouring to a local optimum, then the best joint recolouring of
  // two vertices; repeat until neither move helps.
  double objective = result.greedy_objective;
  for (;;) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int v = 0; v < n; ++v) {
        const int current = result.plan[static_cast<std::size_t>(v)];
        const double current_cost = colour_cost(v, current);
        int best = current;
        double best_cost = current_cost;
        for (int c = 1; c <= channels; ++c) {
          const double cost = colour_cost(v, c);
          if (cost < best_cost) {
            best_cost = cost;
            best = c;
          }
        }
        if (best != current) {
          result.plan[static_cast<std::size_t>(v)] = best;
          objective = coloring_objective(weights, result.plan);
          result.objective_trace.push_back(objective);
          improved = true;
        }
      }
    }

    ChannelPlan best_plan;
    double best_objective = objective;
    ChannelPlan trial = result.plan;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        const int cu = trial[static_cast<std::size_t>(u)], cv = trial[static_cast<std::size_t>(v)];
        for (int a = 1; a <= channels; ++a)
          for (int b = 1; b <= channels; ++b) {
            if (a == cu || b == cv) continue;  // single moves are already exhausted
            trial[static_cast<std::size_t>(u)] = a;
            trial[static_cast<std::size_t>(v)] = b;
            const double value = coloring_objective(weights, trial);
            if (value < best_objective - 1e-12) {
              best_objective = value;
              best_plan = trial;
            }
          }
        trial[static_cast<std::size_t>(u)] = cu;
        trial[static_cast<std::size_t>(v)] = cv;
      }
    if (best_plan.empty()) break;
    result.plan = std::move(best_plan);
    objective = best_objective;
    result.objective_trace.push_back(objective);
  }
  return result;
}

ChannelPlan assign_hsum(const ConflictWeights& weights, int channels) {
  return assign_hsum_detailed(weights, channels).plan;
}

Grouping grouping_adjacent(const Topology& topology) {
  if (topology.rhs.size() % 4 != 0) throw std::invalid_argument("RH count must be divisible by 4");
  for (const auto& g : topology.groups)
    if (g.members.size() != 4) throw std::invalid_argument("adjacent grouping needs 4-RH blocks");
  return Grouping::from_groups(topology.groups, static_cast<int>(topology.rhs.size()));
}

Grouping grouping_random(int rh_count, Rng& rng, int group_size) {
  if (group_size < 1 || rh_count % group_size != 0)
    throw std::invalid_argument("RH count must be divisible by the group size");
  std::vector<int> rhs(static_cast<std::size_t>(rh_count));
  std::iota(rhs.begin(), rhs.end(), 0);
  std::shuffle(rhs.begin(), rhs.end(), rng);
  std::vector<int> assignment(static_cast<std::size_t>(rh_count));
  for (std::size_t i = 0; i < rhs.size(); ++i)
    assignment[static_cast<std::size_t>(rhs[i])] = static_cast<int>(i) / group_size;
  return Grouping(std::move(assignment), rh_count / group_size);
}

}  // namespace dmimo
