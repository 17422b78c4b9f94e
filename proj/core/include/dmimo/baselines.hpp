#pragma once

#include <Eigen/Core>

#include "dmimo/mac.hpp"
#include "dmimo/radio.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

ChannelPlan assign_all_same(int group_count);
ChannelPlan assign_random(int group_count, int channels, Rng& rng);

// Reuse pattern over the group grid: channel = ((row + 2 col) mod 4) + 1 for K >= 4,
// which gives every group in the 8-neighbourhood a different channel. With K = 2 or 3
// it degrades to ((row + col) mod K) + 1.
ChannelPlan assign_heuristic_pattern(const Topology& topology);

// One synchronous round: every group measures, at its member RH that hears the most,
// the aggregate power per channel from the other transmitting groups and the
// interferers, then moves to the quietest channel (ties to the lowest channel).
ChannelPlan assign_sensing(const Topology& topology, const LinkGains& gains,
                           const Grouping& grouping, const Association& association,
                           const ChannelPlan& current);

// Symmetric group x group interference metric: strongest RH-pair coupling (mW)
// times the number of users of either group that hear the other group above CCA.
struct ConflictWeights {
  Eigen::MatrixXd w;
  int size() const { return static_cast<int>(w.rows()); }
};

ConflictWeights conflict_weights(const Topology& topology, const LinkGains& gains,
                                 const Grouping& grouping, const Association& association,
                                 double cca_threshold_dbm);

// Sum of weights over same-channel pairs.
double coloring_objective(const ConflictWeights& weights, const ChannelPlan& plan);

struct HsumResult {
  ChannelPlan plan;
  double greedy_objective = 0.0;
  std::vector<double> objective_trace;  // after greedy, then after every accepted move
};

// Minimum-sum weighted vertex colouring: greedy in descending weighted degree,
// then local search over single-vertex and two-vertex recolourings until no move
// lowers the objective.
HsumResult assign_hsum_detailed(const ConflictWeights& weights, int channels);
ChannelPlan assign_hsum(const ConflictWeights& weights, int channels);

// Adjacent grouping is the topology's block layout; requires 4 RHs per block.
Grouping grouping_adjacent(const Topology& topology);
// Seeded uniform partition into groups of `group_size`.
Grouping grouping_random(int rh_count, Rng& rng, int group_size = 4);

}  // namespace dmimo
