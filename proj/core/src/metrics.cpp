#include "dmimo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmimo {

namespace {

void require_valid(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("throughput vector must be non-empty");
  for (double v : x)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("throughputs must be finite and non-negative");
}

}  // namespace

MetricSpec MetricSpec::percentile_of(double p) {
  MetricSpec s;
  s.kind = MetricKind::kPercentile;
  s.percentile = p;
  return s;
}

MetricSpec MetricSpec::mean() {
  MetricSpec s;
  s.kind = MetricKind::kMean;
  return s;
}

MetricSpec MetricSpec::jain() {
  MetricSpec s;
  s.kind = MetricKind::kJain;
  return s;
}

MetricSpec MetricSpec::product() {
  MetricSpec s;
  s.kind = MetricKind::kProduct;
  return s;
}

MetricSpec MetricSpec::linear(std::vector<double> weights, double p) {
  MetricSpec s;
  s.kind = MetricKind::kLinear;
  s.weights = std::move(weights);
  s.percentile = p;
  return s;
}

void MetricSpec::validate() const {
  if ((kind == MetricKind::kPercentile || kind == MetricKind::kLinear) &&
      !(percentile > 0.0 && percentile < 100.0))
    throw std::invalid_argument("percentile must lie in (0, 100)");
  if (kind == MetricKind::kLinear) {
    if (weights.empty() || weights.size() > 3)
      throw std::invalid_argument("linear metric takes 1 to 3 weights (mean, jain, percentile)");
    for (double w : weights)
      if (!std::isfinite(w)) throw std::invalid_argument("linear weights must be finite");
  }
}

double percentile_throughput(std::span<const double> x, double p) {
  require_valid(x);
  if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentile must lie in (0, 100)");
  std::vector<double> sorted(x.begin(), x.end());
  const auto n = sorted.size();
  // p * n first: the product is exact for integer percentiles, p / 100 is not.
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

double mean_throughput(std::span<const double> x) {
  require_valid(x);
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double jain_fairness(std::span<const double> x) {
  require_valid(x);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(x.size()) * sum_sq);
}

double scalarize(std::span<const double> x, const MetricSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case MetricKind::kPercentile:
      return percentile_throughput(x, spec.percentile);
    case MetricKind::kMean:
      return mean_throughput(x);
    case MetricKind::kJain:
      return jain_fairness(x);
    case MetricKind::kProduct:
      return mean_throughput(x) * jain_fairness(x);
    case MetricKind::kLinear: {
      const double parts[3] = {mean_throughput(x), jain_fairness(x),
                               percentile_throughput(x, spec.percentile)};
      double total = 0.0;
      for (std::size_t i = 0; i < spec.weights.size(); ++i) total += spec.weights[i] * parts[i];
      return total;
    }
  }
  throw std::logic_error("unknown metric kind");
}

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<double> out(series.size());
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= w ? i + 1 - w : 0;
    // Summed per window rather than as a running total so that no drift accumulates.
    double sum = 0.0;
    for (std::size_t j = begin; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i + 1 - begin);
  }
  return out;
}

}  // namespace dmimo
