#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dmimo/metrics.hpp"
#include "dmimo/rng.hpp"

using namespace dmimo;

TEST(Percentile, NearestRank) {
  const std::vector<double> x{40, 10, 30, 20};
  EXPECT_DOUBLE_EQ(percentile_throughput(x, 30.0), 20.0);
  EXPECT_DOUBLE_EQ(percentile_throughput(std::vector<double>{5}, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(percentile_throughput(std::vector<double>{5}, 99.0), 5.0);
  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  EXPECT_DOUBLE_EQ(percentile_throughput(ramp, 10.0), 10.0);
  EXPECT_DOUBLE_EQ(percentile_throughput(ramp, 30.0), 30.0);
  EXPECT_DOUBLE_EQ(percentile_throughput(ramp, 70.0), 70.0);
  EXPECT_THROW(percentile_throughput(std::vector<double>{}, 30.0), std::invalid_argument);
}

TEST(Percentile, PermutationInvariantAndMonotone) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.0, 400.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(37);
    for (double& v : x) v = u(rng);
    std::vector<double> y = x;
    std::shuffle(y.begin(), y.end(), rng);
    std::vector<double> z = x;
    for (double& v : z) v += u(rng) * 0.1;
    for (double p : {10.0, 30.0, 50.0, 90.0}) {
      EXPECT_DOUBLE_EQ(percentile_throughput(x, p), percentile_throughput(y, p));
      EXPECT_GE(percentile_throughput(z, p), percentile_throughput(x, p));
    }
  }
}

TEST(Jain, WorkedExamples) {
  EXPECT_DOUBLE_EQ(jain_fairness(std::vector<double>{7, 7, 7, 7}), 1.0);
  EXPECT_DOUBLE_EQ(jain_fairness(std::vector<double>{1, 0, 0, 0}), 0.25);
  EXPECT_NEAR(jain_fairness(std::vector<double>{10, 10, 20}), 1600.0 / 1800.0, 1e-15);
  EXPECT_DOUBLE_EQ(jain_fairness(std::vector<double>{0, 0, 0}), 1.0);
  EXPECT_THROW(jain_fairness(std::vector<double>{}), std::invalid_argument);
}

TEST(Jain, BoundsScaleAndPermutation) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 40);
    for (double& v : x) v = u(rng);
    const double n = static_cast<double>(x.size());
    const double j = jain_fairness(x);
    EXPECT_GE(j, 1.0 / n - 1e-12);
    EXPECT_LE(j, 1.0 + 1e-12);
    std::vector<double> scaled = x;
    for (double& v : scaled) v *= 3.7;
    EXPECT_NEAR(jain_fairness(scaled), j, 1e-12);
    std::shuffle(scaled.begin(), scaled.end(), rng);
    EXPECT_NEAR(jain_fairness(scaled), j, 1e-12);
  }
}

TEST(Scalarize, ProductAndLinear) {
  EXPECT_DOUBLE_EQ(scalarize(std::vector<double>{100, 100}, MetricSpec::product()), 100.0);
  EXPECT_DOUBLE_EQ(scalarize(std::vector<double>{200, 0}, MetricSpec::product()), 50.0);
  const std::vector<double> x{3, 9, 27, 1};
  EXPECT_DOUBLE_EQ(scalarize(x, MetricSpec::linear({1, 0, 0})), mean_throughput(x));
  EXPECT_DOUBLE_EQ(scalarize(x, MetricSpec::linear({0, 1, 0})), jain_fairness(x));
  EXPECT_DOUBLE_EQ(scalarize(x, MetricSpec::linear({0, 0, 1}, 30.0)), percentile_throughput(x, 30.0));
  EXPECT_DOUBLE_EQ(scalarize(x, MetricSpec::mean()), 10.0);
  EXPECT_DOUBLE_EQ(scalarize(x, MetricSpec::percentile_of(30.0)), 3.0);
}

TEST(Scalarize, ProductNeverExceedsMean) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(16);
    for (double& v : x) v = u(rng);
    EXPECT_LE(scalarize(x, MetricSpec::product()), mean_throughput(x) + 1e-12);
  }
}

TEST(MetricSpec, Validation) {
  EXPECT_THROW(MetricSpec::percentile_of(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(MetricSpec::percentile_of(100.0).validate(), std::invalid_argument);
  EXPECT_THROW(MetricSpec::linear({1.0, std::nan("")}).validate(), std::invalid_argument);
  EXPECT_NO_THROW(MetricSpec::percentile_of(10.0).validate());
}

TEST(MovingAverage, WorkedExamples) {
  const std::vector<double> flat(20, 4.5);
  EXPECT_EQ(moving_average(flat, 5), flat);
  EXPECT_EQ(moving_average(std::vector<double>{0, 10}, 2), (std::vector<double>{0, 5}));
  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  const auto ma = moving_average(ramp, 50);
  ASSERT_EQ(ma.size(), 100u);
  EXPECT_DOUBLE_EQ(ma.back(), 75.5);
  EXPECT_DOUBLE_EQ(ma.front(), 1.0);
  EXPECT_THROW(moving_average(ramp, 0), std::invalid_argument);
}
