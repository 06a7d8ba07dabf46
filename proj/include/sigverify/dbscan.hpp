#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sigverify {

/// Density clustering of scalar values (DBSCAN on the real line).
///
/// Two values are neighbours when |a - b| <= eps; a point is a core point
/// when its neighbourhood, itself included, holds at least min_pts values.
/// Points are visited in index order, so border points reachable from two
/// clusters go to the one discovered first.
class Dbscan1D {
 public:
  static constexpr int kNoise = -1;

  Dbscan1D(double eps, int min_pts);

  /// One label per value: a cluster id counted from 0, or kNoise.
  std::vector<int> fit(std::span<const double> values) const;

  double eps() const { return eps_; }
  int min_pts() const { return min_pts_; }

 private:
  double eps_;
  int min_pts_;
};

struct FeatureClustering {
  std::vector<int> labels;              // per feature, Dbscan1D::kNoise for noise
  std::vector<std::size_t> surviving;   // ascending feature indices (0-based)
  double eps = 0.0;
  bool all_noise = false;               // fell back to every feature
};

/// Floor for the automatic neighbourhood radius.
inline constexpr double kAutoEpsFloor = 1e-12;

/// max(kAutoEpsFloor, 0.5 * sample standard deviation of the values).
double auto_eps(std::span<const double> values);

/// Groups features by their dispersion and keeps the most populated cluster.
/// Equal sizes go to the cluster with the smaller mean dispersion, then to
/// the one holding the smallest feature index. If everything is noise the
/// full feature set survives and `all_noise` is set.
FeatureClustering cluster_features_by_mom(std::span<const double> mom_values,
                                          std::optional<double> eps,
                                          int min_pts);

}  // namespace sigverify
