#pragma once

#include <span>
#include <vector>

namespace dmimo {

enum class MetricKind { kPercentile, kMean, kJain, kProduct, kLinear };

// What a scenario optimises. `linear` combines {mean, jain, percentile(p)} with weights.
struct MetricSpec {
  MetricKind kind = MetricKind::kPercentile;
  double percentile = 30.0;
  std::vector<double> weights;  // kLinear: weight per component (mean, jain, percentile)

  static MetricSpec percentile_of(double p);
  static MetricSpec mean();
  static MetricSpec jain();
  static MetricSpec product();
  static MetricSpec linear(std::vector<double> weights, double p = 30.0);

  void validate() const;
};

// Nearest-rank percentile: value at rank ceil(p/100 * n) of the ascending sort.
double percentile_throughput(std::span<const double> x, double p);
double mean_throughput(std::span<const double> x);
// (sum x)^2 / (n sum x^2); an all-zero vector counts as perfectly fair.
double jain_fairness(std::span<const double> x);
double scalarize(std::span<const double> x, const MetricSpec& spec);

// Trailing mean over min(window, available) points.
std::vector<double> moving_average(std::span<const double> series, int window = 50);

}  // namespace dmimo
