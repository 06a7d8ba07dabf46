#include "sigverify/verifier.hpp"

#include <cmath>
#include <utility>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

namespace {

template <typename F>
auto run_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const EnrollmentError&) {
    throw;
  } catch (const Error& e) {
    throw EnrollmentError(stage, e.what());
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finaliser
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void validate(const EnrollmentConfig& config) {
  validate(config.selection);
  validate(config.grid);
  if (config.split.validation_count && *config.split.validation_count < 1)
    throw ConfigError("validation count must be >= 1");
  if (config.split.pool_per_writer < 1)
    throw ConfigError("calibration pool size per writer must be >= 1");
}

void validate(const WriterModel& model) {
  const auto where = "model '" + model.writer_id + "': ";
  if (model.interval_model.features.size() != model.selection.selected.size())
    throw ModelError(where + "interval features and selection differ in length");
  for (std::size_t k = 0; k < model.selection.selected.size(); ++k) {
    const std::size_t index = model.selection.selected[k];
    if (model.interval_model.features[k].feature_index != index)
      throw ModelError(where + "interval feature " + std::to_string(k) +
                       " is not aligned with the selection");
    if (index >= model.feature_count)
      throw ModelError(where + "selected feature outside the feature count");
  }
  if (model.selection.selected.empty()) throw ModelError(where + "empty selection");
  if (!std::isfinite(model.theta)) throw ModelError(where + "theta is not finite");
  if (!(model.eta > 1.0)) throw ModelError(where + "eta must be > 1");
  if (!(model.alpha >= 0.0)) throw ModelError(where + "alpha must be >= 0");
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::genuine ? "genuine" : "forgery";
}

std::string format_decision(const Decision& d) {
  std::string out = d.writer_id;
  out += ',';
  out += to_string(d.verdict);
  out += ',';
  out += format_double(d.score);
  out += ',';
  out += format_double(d.threshold);
  return out;
}

WriterModel enroll_split(const ProtocolSplit& split, std::size_t feature_count,
                         const EnrollmentConfig& config, std::uint64_t seed,
                         Provenance provenance) {
  run_stage("config", [&] {
    validate(config);
    return 0;
  });
  const Matrix train = feature_rows(split.train_genuine);
  const Matrix validation = feature_rows(split.validation_genuine);
  const Matrix pool = feature_rows(split.impostor_calibration_pool);

  auto selection_config = config.selection;
  selection_config.weighting.seed = derive_seed(seed, config.selection.weighting.seed);
  FeatureSelection fs = run_stage(
      "selection", [&] { return select_writer_features(train, selection_config); });
  CalibratedModel calibrated = run_stage("calibration", [&] {
    return calibrate_writer(train, fs, validation, pool, config.grid, split.writer_id);
  });

  WriterModel model;
  model.writer_id = split.writer_id;
  model.feature_count = feature_count;
  model.selection = std::move(fs);
  model.interval_model = std::move(calibrated.model);
  model.eta = calibrated.calibration.eta;
  model.alpha = calibrated.calibration.alpha;
  model.theta = calibrated.calibration.theta;
  model.achieved_error = calibrated.calibration.achieved_eer;
  model.validation_eer = calibrated.calibration.validation_eer;
  model.provenance = std::move(provenance);
  model.provenance.category = split.category.name();
  model.provenance.seed = seed;
  model.provenance.config = config;
  return model;
}

WriterModel enroll_writer(const FeatureDataset& dataset, std::string_view writer_id,
                          const ProtocolCategory& category,
                          const EnrollmentConfig& config, std::uint64_t seed,
                          std::string created) {
  const ProtocolSplit split = run_stage("split", [&] {
    return split_protocol(dataset, writer_id, category, config.split, seed);
  });
  Provenance provenance;
  provenance.dataset = dataset.name;
  provenance.created = std::move(created);
  return enroll_split(split, dataset.feature_count, config, seed, std::move(provenance));
}

Decision verify_signature(std::span<const double> features, const WriterModel& model) {
  if (features.size() != model.feature_count)
    throw DimensionError("writer '" + model.writer_id + "' expects " +
                         std::to_string(model.feature_count) + " features, probe has " +
                         std::to_string(features.size()));
  Decision d;
  d.writer_id = model.writer_id;
  d.threshold = model.theta;
  double sum = 0.0;
  for (const auto& f : model.interval_model.features) {
    sum += feature_membership(features[f.feature_index], f);
    ++d.membership_evaluations;
  }
  d.score = model.interval_model.features.empty()
                ? 0.0
                : sum / static_cast<double>(model.interval_model.features.size());
  d.verdict = d.score >= d.threshold ? Verdict::genuine : Verdict::forgery;
  return d;
}

}  // namespace sigverify
