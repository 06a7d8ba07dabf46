#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sigverify/calibration.hpp"
#include "sigverify/dataset.hpp"
#include "sigverify/verifier.hpp"

namespace sigverify {

struct BenchmarkSpec {
  std::vector<ProtocolCategory> categories;
  EnrollmentConfig config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Outcome for one writer in one category.
struct WriterResult {
  std::string category;
  std::string writer_id;
  bool skipped = false;
  std::string skip_reason;

  double far = 0.0;
  double frr = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  std::size_t fs_size = 0;
  double writer_eer = 0.0;  // interpolated, from this writer's test scores

  std::size_t genuine_accepted = 0;
  std::size_t genuine_rejected = 0;
  std::size_t impostor_accepted = 0;
  std::size_t impostor_rejected = 0;
  std::vector<double> genuine_scores;
  std::vector<double> impostor_scores;

  /// (FAR + FRR) / 2 at the writer's own threshold.
  double error() const { return 0.5 * (far + frr); }
};

struct CategorySummary {
  std::string category;
  std::size_t writers_enrolled = 0;
  std::size_t writers_skipped = 0;
  // Score-pooled interpolated EER over every enrolled writer's test scores.
  double pooled_eer = 0.0;
  double pooled_eer_threshold = 0.0;
  // Decision-level rates at each writer's own threshold, averaged.
  double mean_far = 0.0;
  double mean_frr = 0.0;
  double median_writer_error = 0.0;  // median of the per-writer EERs
  std::vector<RocPoint> roc;
};

struct RuntimeStats {
  double enroll_seconds = 0.0;
  double verify_seconds = 0.0;
  std::size_t verifications = 0;
};

struct EvaluationReport {
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<WriterResult> writers;      // category-major, writers in file order
  std::vector<CategorySummary> categories;
  RuntimeStats runtime;
  bool complete = true;                   // false when any writer was skipped
};

/// Categories from `candidates` for which at least one writer can be split.
std::vector<ProtocolCategory> feasible_categories(
    const FeatureDataset& dataset, const std::vector<ProtocolCategory>& candidates,
    const SplitOptions& options);

/// Enrolls every writer under every category (fresh seeded split each time),
/// verifies its test genuine and impostor signatures and aggregates the
/// results. Writers that cannot be enrolled are kept as skipped entries.
/// Identical inputs give identical reports regardless of `threads`.
EvaluationReport run_benchmark(const FeatureDataset& dataset, const BenchmarkSpec& spec);

/// Per-writer error histogram: `bin_lower,bin_upper,writers` over [0, 1].
std::string format_error_histogram(const EvaluationReport& report,
                                   const std::string& category, int bins = 20);

std::string format_report_table(const EvaluationReport& report);
std::string format_report_csv(const EvaluationReport& report);
std::string format_per_writer_csv(const EvaluationReport& report);

/// Writes report.txt, report.csv, per_writer.csv, roc_<category>.csv and
/// histogram_<category>.csv into `directory` (created if needed). Every file
/// is written atomically. Throws Error when the directory is unwritable.
void render_report(const EvaluationReport& report, const std::filesystem::path& directory);

}  // namespace sigverify
