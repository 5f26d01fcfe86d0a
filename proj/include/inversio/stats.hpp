#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "inversio/transforms.hpp"

namespace inversio {

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct PermutationOptions {
  std::size_t permutations = 999;
  std::uint64_t seed = 0;
};

// Weighted two-sample Kolmogorov-Smirnov distance with a permutation p-value;
// (value, weight) pairs are permuted between the two samples.
TestOutcome ks_statistic(std::span<const double> xa, std::span<const double> wa, std::span<const double> xb,
                         std::span<const double> wb, const PermutationOptions& options = {});
TestOutcome ks_statistic(const WeightedSample& a, const WeightedSample& b, const PermutationOptions& options = {});

struct EnergyOptions {
  std::size_t permutations = 499;
  std::uint64_t seed = 0;
  // Metric min(|x - y|, cap); cap <= 0 means Euclidean.
  double cap = 0.0;
  // Larger samples are subsampled without replacement (the distance matrix is
  // stored in full). 0 disables.
  std::size_t max_points_per_side = 2000;
};

// Random subset of at most `cap` points, in original order.
WeightedSample subsample(const WeightedSample& s, std::size_t cap, std::uint64_t seed, std::uint64_t stream);

// Weighted energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic form)
// with a permutation p-value over `boot` relabelings.
TestOutcome energy_distance(const WeightedSample& a, const WeightedSample& b, std::size_t boot,
                            const EnergyOptions& options = {});

// Mean and standard error of a weighted sample of scalars with unit counting.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};
MeanEstimate mean_estimate(std::span<const double> values);

// Two-sided z-test of equal means for independent samples.
TestOutcome two_mean_test(std::span<const double> a, std::span<const double> b);

}  // namespace inversio
