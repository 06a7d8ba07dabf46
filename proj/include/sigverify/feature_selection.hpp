#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sigverify/feature_weighting.hpp"

namespace sigverify {

struct FeatureSelectionConfig {
  double mom_constant = 1.0;
  std::optional<double> dbscan_eps;  // unset: auto_eps()
  int dbscan_min_pts = 3;
  double retention_ratio = 0.8;
  WeightingConfig weighting;
};

void validate(const FeatureSelectionConfig& config);

/// Writer-specific feature subset with the provenance of every stage.
/// Indices are 0-based columns of the original feature vector.
struct FeatureSelection {
  std::vector<std::size_t> selected;      // FS, by descending weight
  std::vector<double> weights;            // aligned with `selected`
  std::vector<double> mom_values;         // one per original feature
  std::vector<std::size_t> surviving;     // largest dispersion cluster, ascending
  std::vector<int> cluster_labels;        // per original feature
  double eps = 0.0;
  bool all_noise = false;
  std::size_t feature_count = 0;          // m of the training data
};

/// floor(retention_ratio * m), capped by the survivor count and at least 1.
std::size_t retained_feature_count(std::size_t feature_count,
                                   std::size_t surviving_count,
                                   double retention_ratio);

/// Dispersion per column, density clustering of the dispersions, then
/// Minkowski weighting of the largest cluster; keeps the heaviest features.
///
/// With a single training row no dispersion exists; every column then gets
/// dispersion 0, so they all share one cluster and receive equal weight.
FeatureSelection select_writer_features(const Matrix& train,
                                        const FeatureSelectionConfig& config);

}  // namespace sigverify
