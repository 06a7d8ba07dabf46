#include "sigverify/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sigverify/dbscan.hpp"
#include "sigverify/dispersion.hpp"
#include "sigverify/errors.hpp"

namespace sigverify {

void validate(const FeatureSelectionConfig& config) {
  if (!(config.mom_constant > 0.0) || !std::isfinite(config.mom_constant))
    throw ConfigError("MoM constant c must be > 0");
  if (config.dbscan_eps &&
      (!(*config.dbscan_eps >= 0.0) || !std::isfinite(*config.dbscan_eps)))
    throw ConfigError("dbscan eps must be a finite non-negative number");
  if (config.dbscan_min_pts < 1) throw ConfigError("dbscan min_pts must be >= 1");
  if (!(config.retention_ratio > 0.0 && config.retention_ratio <= 1.0))
    throw ConfigError("retention ratio must lie in (0, 1]");
  validate(config.weighting);
}

std::size_t retained_feature_count(std::size_t feature_count,
                                   std::size_t surviving_count,
                                   double retention_ratio) {
  // The small bias keeps e.g. 0.8 * 100 at 80 despite binary rounding.
  const auto target = static_cast<std::size_t>(
      std::floor(retention_ratio * static_cast<double>(feature_count) + 1e-9));
  return std::max<std::size_t>(1, std::min(target, surviving_count));
}

FeatureSelection select_writer_features(const Matrix& train,
                                        const FeatureSelectionConfig& config) {
  validate(config);
  if (train.empty()) throw ConfigError("feature selection needs training rows");
  const std::size_t m = train.front().size();
  if (m == 0) throw ConfigError("feature selection needs at least one feature");
  for (const auto& row : train)
    if (row.size() != m) throw DimensionError("ragged training matrix");

  FeatureSelection fs;
  fs.feature_count = m;
  fs.mom_values.assign(m, 0.0);
  if (train.size() >= 2) {
    std::vector<double> column(train.size());
    for (std::size_t v = 0; v < m; ++v) {
      for (std::size_t i = 0; i < train.size(); ++i) column[i] = train[i][v];
      fs.mom_values[v] = mom_dispersion(column, config.mom_constant);
    }
  }

  auto clustering =
      cluster_features_by_mom(fs.mom_values, config.dbscan_eps, config.dbscan_min_pts);
  fs.cluster_labels = std::move(clustering.labels);
  fs.surviving = std::move(clustering.surviving);
  fs.eps = clustering.eps;
  fs.all_noise = clustering.all_noise;

  Matrix reduced(train.size(), std::vector<double>(fs.surviving.size()));
  for (std::size_t i = 0; i < train.size(); ++i)
    for (std::size_t j = 0; j < fs.surviving.size(); ++j)
      reduced[i][j] = train[i][fs.surviving[j]];
  const auto weighting = imwk_feature_weights(reduced, config.weighting);

  std::vector<std::size_t> order(fs.surviving.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = weighting.averaged_weights[a];
    const double wb = weighting.averaged_weights[b];
    if (wa != wb) return wa > wb;
    return fs.surviving[a] < fs.surviving[b];
  });

  const std::size_t keep =
      retained_feature_count(m, fs.surviving.size(), config.retention_ratio);
  for (std::size_t r = 0; r < keep; ++r) {
    fs.selected.push_back(fs.surviving[order[r]]);
    fs.weights.push_back(weighting.averaged_weights[order[r]]);
  }
  return fs;
}

}  // namespace sigverify
