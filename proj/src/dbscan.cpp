#include "sigverify/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "sigverify/errors.hpp"

namespace sigverify {

Dbscan1D::Dbscan1D(double eps, int min_pts) : eps_(eps), min_pts_(min_pts) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw ConfigError("dbscan eps must be a finite non-negative number");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be at least 1");
}

std::vector<int> Dbscan1D::fit(std::span<const double> values) const {
  const std::size_t n = values.size();
  // Sorting lets every neighbourhood be a contiguous window [lo, hi).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<std::size_t> win_lo(n), win_hi(n);
  for (std::size_t r = 0, lo = 0, hi = 0; r < n; ++r) {
    const double v = values[order[r]];
    while (values[order[lo]] < v - eps_) ++lo;
    if (hi < r) hi = r;
    while (hi < n && values[order[hi]] <= v + eps_) ++hi;
    win_lo[r] = lo;
    win_hi[r] = hi;
  }
  auto is_core = [&](std::size_t r) {
    return win_hi[r] - win_lo[r] >= static_cast<std::size_t>(min_pts_);
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (labels[start] != kUnvisited) continue;
    const std::size_t r0 = rank[start];
    if (!is_core(r0)) {
      labels[start] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    labels[start] = cluster;
    std::deque<std::size_t> frontier{r0};
    while (!frontier.empty()) {
      const std::size_t r = frontier.front();
      frontier.pop_front();
      if (!is_core(r)) continue;
      for (std::size_t q = win_lo[r]; q < win_hi[r]; ++q) {
        int& label = labels[order[q]];
        if (label == kNoise) label = cluster;  // border point
        if (label != kUnvisited) continue;
        label = cluster;
        frontier.push_back(q);
      }
    }
  }
  return labels;
}

double auto_eps(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return kAutoEpsFloor;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return std::max(kAutoEpsFloor, 0.5 * sd);
}

FeatureClustering cluster_features_by_mom(std::span<const double> mom_values,
                                          std::optional<double> eps,
                                          int min_pts) {
  if (mom_values.empty())
    throw ConfigError("feature clustering needs at least one feature");
  FeatureClustering result;
  result.eps = eps ? *eps : auto_eps(mom_values);
  result.labels = Dbscan1D(result.eps, min_pts).fit(mom_values);

  const int clusters =
      1 + *std::max_element(result.labels.begin(), result.labels.end());
  if (clusters <= 0) {
    result.all_noise = true;
    result.surviving.resize(mom_values.size());
    std::iota(result.surviving.begin(), result.surviving.end(), std::size_t{0});
    return result;
  }

  struct Summary {
    std::size_t size = 0;
    double sum = 0.0;
    std::size_t first = 0;
  };
  std::vector<Summary> summary(static_cast<std::size_t>(clusters));
  for (std::size_t f = mom_values.size(); f-- > 0;) {
    if (result.labels[f] == Dbscan1D::kNoise) continue;
    auto& s = summary[static_cast<std::size_t>(result.labels[f])];
    ++s.size;
    s.sum += mom_values[f];
    s.first = f;
  }
  auto better = [](const Summary& a, const Summary& b) {
    if (a.size != b.size) return a.size > b.size;
    const double mean_a = a.sum / static_cast<double>(a.size);
    const double mean_b = b.sum / static_cast<double>(b.size);
    if (mean_a != mean_b) return mean_a < mean_b;
    return a.first < b.first;
  };
  std::size_t winner = 0;
  for (std::size_t k = 1; k < summary.size(); ++k)
    if (better(summary[k], summary[winner])) winner = k;

  for (std::size_t f = 0; f < mom_values.size(); ++f)
    if (result.labels[f] == static_cast<int>(winner)) result.surviving.push_back(f);
  return result;
}

}  // namespace sigverify
