#pragma once

#include <span>
#include <string>
#include <vector>

#include "sigverify/symbolic_model.hpp"

namespace sigverify {

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct ErrorRates {
  double far = 0.0;
  double frr = 0.0;
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::vector<RocPoint> roc;  // one point per distinct score, ascending
};

/// mean - alpha * population std. Throws CalibrationError on an empty list
/// or negative alpha.
double decision_threshold(std::span<const double> train_similarities, double alpha);

/// A score is accepted when score >= threshold. Throws MetricError when
/// either list is empty.
ErrorRates compute_far_frr(const ScoreSet& scores, double threshold);

/// Sweeps every distinct score (plus accept-all / reject-all sentinels). An
/// exact FAR == FRR at a swept point wins; otherwise the crossing is linearly
/// interpolated between the two sweep points where FAR - FRR changes sign.
EerResult compute_eer(const ScoreSet& scores);

/// ROC points as `threshold,far,frr` CSV with a header line.
std::string format_roc_csv(std::span<const RocPoint> roc);

struct GridSpec {
  std::vector<double> eta_values;
  std::vector<double> alpha_values;

  /// eta 1.25..4.0 and alpha 0..20, both in steps of 0.25.
  static GridSpec defaults();
  /// Inclusive arithmetic range; steps are counted, not accumulated.
  static std::vector<double> range(double first, double last, double step);
};

void validate(const GridSpec& grid);

struct CalibrationResult {
  double eta = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  /// max(FAR, FRR) on the validation data at theta; minimal over the grid.
  double achieved_eer = 0.0;
  /// Interpolated EER of the validation scores under the chosen eta.
  double validation_eer = 0.0;
  std::vector<RocPoint> roc;
  std::vector<double> train_similarities;
};

struct CalibratedModel {
  CalibrationResult calibration;
  IntervalModel model;
};

/// Grid search over (eta, alpha). For each eta the interval model is built
/// from `train`; theta comes from the training similarities, FRR from the
/// validation genuines and FAR from the impostor pool. The pair with the
/// lowest max(FAR, FRR) wins. Among equal errors the threshold with the
/// widest margin min(lowest genuine - theta, theta - highest impostor) is
/// preferred, then the smaller eta, then the smaller alpha. All matrices hold
/// full feature vectors.
CalibratedModel calibrate_writer(const Matrix& train, const FeatureSelection& fs,
                                 const Matrix& validation_genuine,
                                 const Matrix& impostor_pool, const GridSpec& grid,
                                 const std::string& writer_id = {});

}  // namespace sigverify
