#include "sigverify/feature_weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  return p == 2.0 ? a * a : std::pow(a, p);
}

struct TrialResult {
  Matrix centroids;
  Matrix dispersions;
  Matrix weights;
  std::vector<int> assignment;
};

class MinkowskiKMeans {
 public:
  MinkowskiKMeans(const Matrix& rows, std::size_t k, double p, int max_iterations)
      : rows_(rows),
        n_(rows.size()),
        m_(rows.front().size()),
        k_(k),
        p_(p),
        max_iterations_(max_iterations) {}

  TrialResult run(std::mt19937_64& rng) const {
    TrialResult t;
    // Seed centroids with K distinct rows.
    std::vector<std::size_t> idx(n_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_ - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    t.centroids.resize(k_);
    for (std::size_t c = 0; c < k_; ++c) t.centroids[c] = rows_[idx[c]];
    t.weights.assign(k_, std::vector<double>(m_, 1.0 / static_cast<double>(m_)));
    t.dispersions.assign(k_, std::vector<double>(m_, 0.0));
    t.assignment.assign(n_, -1);

    for (int iter = 0; iter < max_iterations_; ++iter) {
      bool changed = assign(t);
      reseed_empty(t);
      update_centroids(t);
      update_weights(t);
      if (!changed && iter > 0) break;
    }
    return t;
  }

 private:
  double distance(const std::vector<double>& row, const TrialResult& t,
                  std::size_t c) const {
    double d = 0.0;
    for (std::size_t v = 0; v < m_; ++v)
      d += abs_pow(t.weights[c][v], p_) * abs_pow(row[v] - t.centroids[c][v], p_);
    return d;
  }

  bool assign(TrialResult& t) const {
    bool changed = false;
    for (std::size_t i = 0; i < n_; ++i) {
      int best = 0;
      double best_d = distance(rows_[i], t, 0);
      for (std::size_t c = 1; c < k_; ++c) {
        const double d = distance(rows_[i], t, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (t.assignment[i] != best) {
        t.assignment[i] = best;
        changed = true;
      }
    }
    return changed;
  }

  void reseed_empty(TrialResult& t) const {
    for (std::size_t c = 0; c < k_; ++c) {
      if (std::find(t.assignment.begin(), t.assignment.end(),
                    static_cast<int>(c)) != t.assignment.end())
        continue;
      // Farthest row from its own centroid, taken from a cluster that can
      // spare it.
      std::vector<std::size_t> sizes(k_, 0);
      for (int a : t.assignment) ++sizes[static_cast<std::size_t>(a)];
      std::size_t far_row = n_;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const auto own = static_cast<std::size_t>(t.assignment[i]);
        if (sizes[own] < 2) continue;
        const double d = distance(rows_[i], t, own);
        if (d > far_d) {
          far_d = d;
          far_row = i;
        }
      }
      if (far_row == n_) continue;
      t.assignment[far_row] = static_cast<int>(c);
      t.centroids[c] = rows_[far_row];
    }
  }

  void update_centroids(TrialResult& t) const {
    std::vector<double> column;
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t v = 0; v < m_; ++v) {
        column.clear();
        for (std::size_t i = 0; i < n_; ++i)
          if (t.assignment[i] == static_cast<int>(c)) column.push_back(rows_[i][v]);
        if (!column.empty()) t.centroids[c][v] = minkowski_center(column, p_);
      }
    }
  }

  void update_weights(TrialResult& t) const {
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t v = 0; v < m_; ++v) {
        double d = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
          if (t.assignment[i] == static_cast<int>(c))
            d += abs_pow(rows_[i][v] - t.centroids[c][v], p_);
        t.dispersions[c][v] = d;
      }
      t.weights[c] = minkowski_feature_weights(t.dispersions[c], p_);
    }
  }

  const Matrix& rows_;
  std::size_t n_, m_, k_;
  double p_;
  int max_iterations_;
};

}  // namespace

void validate(const WeightingConfig& config) {
  if (config.cluster_count < 1) throw ConfigError("cluster count K must be >= 1");
  if (!(config.minkowski_exponent > 1.0) || !std::isfinite(config.minkowski_exponent))
    throw ConfigError("Minkowski exponent p must be > 1");
  if (config.trials < 1) throw ConfigError("weighting trials must be >= 1");
  if (config.max_iterations < 1)
    throw ConfigError("weighting iterations must be >= 1");
}

std::vector<double> minkowski_feature_weights(const std::vector<double>& dispersions,
                                              double p) {
  const double exponent = 1.0 / (p - 1.0);
  std::vector<double> floored(dispersions.size());
  std::transform(dispersions.begin(), dispersions.end(), floored.begin(),
                 [](double d) { return std::max(d, kDispersionFloor); });
  std::vector<double> w(floored.size());
  for (std::size_t v = 0; v < floored.size(); ++v) {
    double denom = 0.0;
    for (double du : floored) denom += std::pow(floored[v] / du, exponent);
    w[v] = 1.0 / denom;
  }
  return w;
}

double minkowski_center(const std::vector<double>& values, double p) {
  if (values.empty()) return 0.0;
  if (p == 2.0)
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  // Convex in c for p > 1; golden-section search on [min, max].
  auto cost = [&](double c) {
    double s = 0.0;
    for (double x : values) s += abs_pow(x - c, p);
    return s;
  };
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = cost(a), fb = cost(b);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
       ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = cost(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = cost(b);
    }
  }
  return 0.5 * (lo + hi);
}

FeatureWeighting imwk_feature_weights(const Matrix& matrix,
                                      const WeightingConfig& config) {
  validate(config);
  if (matrix.empty() || matrix.front().empty())
    throw ConfigError("feature weighting needs at least one row and one feature");
  const std::size_t m = matrix.front().size();
  for (const auto& row : matrix)
    if (row.size() != m) throw DimensionError("ragged matrix in feature weighting");

  const std::size_t k =
      std::min(static_cast<std::size_t>(config.cluster_count), matrix.size());
  MinkowskiKMeans kmeans(matrix, k, config.minkowski_exponent, config.max_iterations);
  std::mt19937_64 rng(config.seed);

  FeatureWeighting out;
  out.averaged_weights.assign(m, 0.0);
  for (int trial = 0; trial < config.trials; ++trial) {
    TrialResult t = kmeans.run(rng);
    std::vector<std::size_t> sizes(k, 0);
    for (int a : t.assignment) ++sizes[static_cast<std::size_t>(a)];
    const auto majority = static_cast<std::size_t>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t v = 0; v < m; ++v) out.averaged_weights[v] += t.weights[majority][v];
    if (trial + 1 == config.trials) {
      out.centroids = std::move(t.centroids);
      out.dispersions = std::move(t.dispersions);
      out.weights = std::move(t.weights);
      out.assignment = std::move(t.assignment);
    }
  }
  for (auto& w : out.averaged_weights) w /= static_cast<double>(config.trials);
  return out;
}

}  // namespace sigverify
