#include <doctest.h>

#include <random>

#include "sigverify/errors.hpp"
#include "sigverify/symbolic_model.hpp"

using namespace sigverify;

namespace {

FeatureSelection all_features(std::size_t m) {
  FeatureSelection fs;
  fs.feature_count = m;
  for (std::size_t v = 0; v < m; ++v) fs.selected.push_back(v);
  return fs;
}

IntervalFeature trapezoid(double mean, double std, double eta) {
  return {0, mean, std, mean - eta * std, mean + eta * std};
}

}  // namespace

TEST_CASE("interval construction uses the population std") {
  const auto model = build_interval_model({{8}, {10}, {12}}, all_features(1), 3.0, "W");
  REQUIRE(model.features.size() == 1);
  const auto& f = model.features[0];
  CHECK(f.mean == 10.0);
  CHECK(f.std == doctest::Approx(1.632993161855452).epsilon(1e-15));
  CHECK(f.lower == doctest::Approx(5.101020514433644).epsilon(1e-15));
  CHECK(f.upper == doctest::Approx(14.898979485566356).epsilon(1e-15));
  CHECK(model.eta == 3.0);
  CHECK(model.writer_id == "W");
}

TEST_CASE("single training row gives a degenerate interval") {
  const auto model = build_interval_model({{7}}, all_features(1), 2.5);
  const auto& f = model.features[0];
  CHECK(f.mean == 7.0);
  CHECK(f.std == 0.0);
  CHECK(f.lower == 7.0);
  CHECK(f.upper == 7.0);
  CHECK(feature_membership(7.0, f) == 1.0);
  CHECK(feature_membership(7.0 + 1e-12, f) == 1.0);
  CHECK(feature_membership(7.001, f) == 0.0);
}

TEST_CASE("intervals follow the selected columns in selection order") {
  FeatureSelection fs;
  fs.selected = {2, 0};
  const auto model = build_interval_model({{1, 100, 5}, {3, 100, 7}}, fs, 2.0);
  CHECK(model.features[0].feature_index == 2);
  CHECK(model.features[0].mean == 6.0);
  CHECK(model.features[1].mean == 2.0);
}

TEST_CASE("scaling a feature scales its interval") {
  const auto a = build_interval_model({{1.5}, {2.0}, {4.0}}, all_features(1), 2.0);
  const auto b = build_interval_model({{3.0}, {4.0}, {8.0}}, all_features(1), 2.0);
  CHECK(b.features[0].mean == doctest::Approx(2 * a.features[0].mean));
  CHECK(b.features[0].std == doctest::Approx(2 * a.features[0].std));
  CHECK(b.features[0].lower == doctest::Approx(2 * a.features[0].lower));
  CHECK(b.features[0].upper == doctest::Approx(2 * a.features[0].upper));
}

TEST_CASE("eta must exceed one") {
  CHECK_THROWS_AS(build_interval_model({{1}, {2}}, all_features(1), 1.0), ModelError);
  CHECK_THROWS_AS(build_interval_model({{1}, {2}}, all_features(1), 0.5), ModelError);
}

TEST_CASE("trapezoidal membership") {
  const auto f = trapezoid(10, 2, 3);  // support [4, 16], plateau [8, 12]
  CHECK(feature_membership(10, f) == 1.0);
  CHECK(feature_membership(8, f) == 1.0);
  CHECK(feature_membership(12, f) == 1.0);
  CHECK(feature_membership(3, f) == 0.0);
  CHECK(feature_membership(17, f) == 0.0);
  CHECK(feature_membership(6, f) == 0.5);
  CHECK(feature_membership(14, f) == 0.5);
  CHECK(feature_membership(4, f) == 0.0);
  CHECK(feature_membership(16, f) == 0.0);
  CHECK(feature_membership(5, f) == 0.25);
}

TEST_CASE("membership shape on dense grids") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mean(-50, 50), spread(0.01, 10), eta(1.05, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = trapezoid(mean(rng), spread(rng), eta(rng));
    const double lo = f.lower - f.std, hi = f.upper + f.std;
    const int points = 2000;
    const double step = (hi - lo) / points;
    double prev = feature_membership(lo, f);
    for (int i = 1; i <= points; ++i) {
      const double t = lo + i * step;
      const double mu = feature_membership(t, f);
      CHECK(mu >= 0.0);
      CHECK(mu <= 1.0);
      if (t <= f.mean) CHECK(mu >= prev);
      if (t - step >= f.mean) CHECK(mu <= prev);
      if (std::abs(t - f.mean) <= f.std) CHECK(mu == 1.0);
      prev = mu;
    }
  }
}

TEST_CASE("fuzzy similarity aggregates by the mean") {
  IntervalModel model;
  model.eta = 3;
  model.features = {trapezoid(10, 2, 3), trapezoid(0, 1, 3)};
  model.features[1].feature_index = 1;
  CHECK(fuzzy_similarity(std::vector<double>{10, 0}, model) == 1.0);
  CHECK(fuzzy_similarity(std::vector<double>{10, -2}, model) == 0.75);
  CHECK(fuzzy_similarity(std::vector<double>{100, -100}, model) == 0.0);
  CHECK(fuzzy_similarity_full(std::vector<double>{6, -2}, model) == 0.5);
  CHECK_THROWS_AS(fuzzy_similarity(std::vector<double>{1}, model), DimensionError);
  CHECK_THROWS_AS(fuzzy_similarity_full(std::vector<double>{1}, model), DimensionError);
}

TEST_CASE("training mean vector scores one and scaling leaves scores unchanged") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix train(5, std::vector<double>(6));
    for (auto& row : train)
      for (auto& v : row) v = 3.0 * normal(rng);
    const auto fs = all_features(6);
    const auto model = build_interval_model(train, fs, 2.0);
    std::vector<double> mean(6, 0.0);
    for (const auto& row : train)
      for (std::size_t v = 0; v < 6; ++v) mean[v] += row[v] / 5.0;
    CHECK(fuzzy_similarity(mean, model) == 1.0);

    std::vector<double> probe(6);
    for (auto& v : probe) v = 3.0 * normal(rng);
    const double a = 0.5 + trial;
    Matrix scaled = train;
    for (auto& row : scaled) row[2] *= a;
    auto scaled_probe = probe;
    scaled_probe[2] *= a;
    const auto scaled_model = build_interval_model(scaled, fs, 2.0);
    CHECK(fuzzy_similarity(scaled_probe, scaled_model) ==
          doctest::Approx(fuzzy_similarity(probe, model)).epsilon(1e-12));
  }
}
