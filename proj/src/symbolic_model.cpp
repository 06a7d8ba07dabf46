#include "sigverify/symbolic_model.hpp"

#include <algorithm>
#include <cmath>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

IntervalModel build_interval_model(const Matrix& train, const FeatureSelection& fs,
                                   double eta, std::string writer_id) {
  if (!(eta > 1.0) || !std::isfinite(eta))
    throw ModelError("eta must be > 1, got " + format_double(eta));
  if (train.empty()) throw ModelError("interval model needs training rows");
  if (fs.selected.empty()) throw ModelError("interval model needs selected features");

  IntervalModel model;
  model.writer_id = std::move(writer_id);
  model.eta = eta;
  model.features.reserve(fs.selected.size());
  const auto n = static_cast<double>(train.size());
  for (std::size_t index : fs.selected) {
    double sum = 0.0;
    for (const auto& row : train) {
      if (index >= row.size())
        throw DimensionError("feature " + std::to_string(index + 1) +
                             " outside training vector of length " +
                             std::to_string(row.size()));
      sum += row[index];
    }
    IntervalFeature f;
    f.feature_index = index;
    f.mean = sum / n;
    double ss = 0.0;
    for (const auto& row : train) ss += (row[index] - f.mean) * (row[index] - f.mean);
    f.std = std::sqrt(ss / n);
    f.lower = f.mean - eta * f.std;
    f.upper = f.mean + eta * f.std;
    model.features.push_back(f);
  }
  return model;
}

double feature_membership(double value, const IntervalFeature& f) {
  if (f.std == 0.0) {
    const double tol = kDegenerateTolerance * std::max(1.0, std::abs(f.mean));
    return std::abs(value - f.mean) <= tol ? 1.0 : 0.0;
  }
  const double plateau_lo = f.mean - f.std;
  const double plateau_hi = f.mean + f.std;
  if (value >= plateau_lo && value <= plateau_hi) return 1.0;
  if (value < f.lower || value > f.upper) return 0.0;
  const double mu = value < plateau_lo ? (value - f.lower) / (plateau_lo - f.lower)
                                       : (f.upper - value) / (f.upper - plateau_hi);
  return std::clamp(mu, 0.0, 1.0);
}

double fuzzy_similarity(std::span<const double> reduced, const IntervalModel& model) {
  if (reduced.size() != model.features.size())
    throw DimensionError("similarity needs " + std::to_string(model.features.size()) +
                         " values, got " + std::to_string(reduced.size()));
  if (model.features.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < reduced.size(); ++k)
    sum += feature_membership(reduced[k], model.features[k]);
  return sum / static_cast<double>(model.features.size());
}

double fuzzy_similarity_full(std::span<const double> features,
                             const IntervalModel& model) {
  if (model.features.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : model.features) {
    if (f.feature_index >= features.size())
      throw DimensionError("feature " + std::to_string(f.feature_index + 1) +
                           " outside probe of length " +
                           std::to_string(features.size()));
    sum += feature_membership(features[f.feature_index], f);
  }
  return sum / static_cast<double>(model.features.size());
}

}  // namespace sigverify
