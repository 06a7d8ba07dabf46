#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sigverify/feature_selection.hpp"

namespace sigverify {

/// One selected feature as an interval: valid limits [lower, upper] around
/// the training mean, with the trapezoid plateau at mean +/- std.
struct IntervalFeature {
  std::size_t feature_index = 0;
  double mean = 0.0;
  double std = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct IntervalModel {
  std::string writer_id;
  double eta = 0.0;
  std::vector<IntervalFeature> features;  // aligned with FeatureSelection::selected
};

/// Relative tolerance for the zero-width (std == 0) plateau.
inline constexpr double kDegenerateTolerance = 1e-9;

/// `train` rows hold the full feature vectors; only the selected columns are
/// read. Population standard deviation, so a single row gives std == 0.
/// Throws ModelError unless eta > 1.
IntervalModel build_interval_model(const Matrix& train, const FeatureSelection& fs,
                                   double eta, std::string writer_id = {});

/// Trapezoidal membership of a crisp value.
double feature_membership(double value, const IntervalFeature& feature);

/// Mean membership of `reduced`, a vector already projected onto the model's
/// features. Throws DimensionError on length mismatch.
double fuzzy_similarity(std::span<const double> reduced, const IntervalModel& model);

/// Same, reading the selected columns straight from a full feature vector.
double fuzzy_similarity_full(std::span<const double> features,
                             const IntervalModel& model);

}  // namespace sigverify
