#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sigverify {

using Matrix = std::vector<std::vector<double>>;  // row-major, one row per signature

struct WeightingConfig {
  int cluster_count = 2;         // K
  double minkowski_exponent = 2; // p
  int trials = 20;
  std::uint64_t seed = 0;
  int max_iterations = 100;
};

void validate(const WeightingConfig& config);

/// Within-cluster dispersions below this are raised to it before weighting.
inline constexpr double kDispersionFloor = 1e-12;

struct FeatureWeighting {
  // Indexed [cluster][feature]; from the last trial.
  Matrix centroids;
  Matrix dispersions;
  Matrix weights;
  std::vector<int> assignment;          // last trial, one cluster per row
  std::vector<double> averaged_weights; // per feature, mean over trials
};

/// Feature weights for one cluster from its per-feature dispersions:
/// W_v = 1 / sum_u (D_v / D_u)^(1 / (p - 1)), with D floored at
/// kDispersionFloor. The result lies on the probability simplex.
std::vector<double> minkowski_feature_weights(const std::vector<double>& dispersions,
                                              double p);

/// Minimiser of sum_i |x_i - c|^p over c (the mean for p = 2).
double minkowski_center(const std::vector<double>& values, double p);

/// Minkowski-weighted k-means over the rows of `matrix`.
///
/// Each trial starts from K distinct rows chosen at random and uniform
/// weights, then alternates: assign rows by sum_v W_kv^p |y_iv - C_kv|^p,
/// move centroids to per-cluster Minkowski centres, recompute D_kv and W_kv.
/// It stops when assignments stop changing or after max_iterations. An
/// emptied cluster is re-seeded from the row farthest from its centroid.
///
/// Each trial contributes the weights of its most populated cluster (ties to
/// the lower cluster index); averaged_weights is their mean over the trials.
/// K larger than the row count is clamped to the row count.
FeatureWeighting imwk_feature_weights(const Matrix& matrix,
                                      const WeightingConfig& config);

}  // namespace sigverify
