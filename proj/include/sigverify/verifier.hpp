#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "sigverify/calibration.hpp"
#include "sigverify/dataset.hpp"
#include "sigverify/feature_selection.hpp"
#include "sigverify/symbolic_model.hpp"

namespace sigverify {

struct EnrollmentConfig {
  FeatureSelectionConfig selection;
  GridSpec grid = GridSpec::defaults();
  SplitOptions split;
};

void validate(const EnrollmentConfig& config);

/// Independent seed for sub-stream `stream` of `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct Provenance {
  std::string dataset;
  std::string category;
  std::uint64_t seed = 0;
  std::string created;  // ISO-8601 UTC, supplied by the caller
  EnrollmentConfig config;
};

/// Knowledge-base entry for one writer.
struct WriterModel {
  std::string writer_id;
  std::size_t feature_count = 0;  // length of the vectors it was enrolled on
  FeatureSelection selection;
  IntervalModel interval_model;
  double eta = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  double achieved_error = 0.0;
  double validation_eer = 0.0;
  Provenance provenance;
};

/// Throws ModelError when the model's internal relations do not hold.
void validate(const WriterModel& model);

enum class Verdict { genuine, forgery };

std::string_view to_string(Verdict verdict);

struct Decision {
  Verdict verdict = Verdict::forgery;
  double score = 0.0;
  double threshold = 0.0;
  std::string writer_id;
  std::size_t membership_evaluations = 0;
};

/// `writer_id,verdict,score,threshold`
std::string format_decision(const Decision& decision);

/// Selection on the training split, then grid calibration. Failures surface
/// as EnrollmentError tagged with the stage ("split", "selection",
/// "calibration").
WriterModel enroll_split(const ProtocolSplit& split, std::size_t feature_count,
                         const EnrollmentConfig& config, std::uint64_t seed,
                         Provenance provenance);

WriterModel enroll_writer(const FeatureDataset& dataset, std::string_view writer_id,
                          const ProtocolCategory& category,
                          const EnrollmentConfig& config, std::uint64_t seed,
                          std::string created = {});

/// Projects `features` onto the writer's selected features and compares the
/// fuzzy similarity with theta (accept on >=). One membership evaluation per
/// selected feature. Throws DimensionError when the vector length differs
/// from the length the model was enrolled on.
Decision verify_signature(std::span<const double> features, const WriterModel& model);

}  // namespace sigverify
