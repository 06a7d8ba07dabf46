#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sigverify {

enum class SampleLabel { genuine, skilled_forgery };

std::string_view to_string(SampleLabel label);

struct SignatureSample {
  std::string writer_id;
  std::string sample_id;
  SampleLabel label = SampleLabel::genuine;
  std::vector<double> features;
};

struct WriterRecord {
  std::string writer_id;
  std::vector<SignatureSample> genuine;
  std::vector<SignatureSample> forgeries;
};

/// Signatures of every writer as fixed-length global feature vectors.
///
/// All vectors share `feature_count` entries and contain only finite values;
/// writer ids are unique. Writers keep the order in which they first appear
/// in the source file, and so do the samples of each writer.
struct FeatureDataset {
  std::string name;
  std::size_t feature_count = 0;
  std::vector<WriterRecord> writers;

  const WriterRecord* find_writer(std::string_view writer_id) const;
  std::size_t sample_count() const;
};

/// Throws LoadError when any dataset invariant is violated.
void validate(const FeatureDataset& dataset);

/// Reads the `writer_id,sample_id,label,f1,...,fm` CSV format. Errors name the
/// offending line.
FeatureDataset load_feature_dataset(const std::filesystem::path& path);
FeatureDataset parse_feature_dataset(std::string_view text, std::string name);

/// Writes the same format; feature values use shortest round-trip decimals so
/// a reload is bit-exact.
std::string format_feature_dataset(const FeatureDataset& dataset);
void save_feature_dataset(const FeatureDataset& dataset,
                          const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation protocol

enum class ForgeryKind { skilled, random };

/// S_n (skilled forgeries as impostors) or R_n (other writers' genuine
/// signatures as impostors), where n is the number of training signatures.
struct ProtocolCategory {
  ForgeryKind kind = ForgeryKind::skilled;
  int training_count = 1;

  /// Accepts "S_05", "S5", "r_20", ...
  static ProtocolCategory parse(std::string_view text);
  std::string name() const;  // "S_05"

  friend bool operator==(const ProtocolCategory&,
                         const ProtocolCategory&) = default;
};

struct ProtocolSplit {
  std::string writer_id;
  ProtocolCategory category;
  std::vector<SignatureSample> train_genuine;
  std::vector<SignatureSample> validation_genuine;
  std::vector<SignatureSample> test_genuine;
  std::vector<SignatureSample> test_impostor;
  std::vector<SignatureSample> impostor_calibration_pool;
};

struct SplitOptions {
  /// Unset: 10 when the writer has room for it plus one test signature,
  /// otherwise half of the genuine signatures left after training.
  std::optional<int> validation_count;
  /// Calibration impostors drawn from each other writer.
  int pool_per_writer = 1;
};

/// Validation count actually used for a writer with `genuine_available`
/// signatures. Throws ProtocolError when the category does not fit.
int resolve_validation_count(int genuine_available, int training_count,
                             std::optional<int> requested);

/// Train and validation signatures follow file order; only the selection of
/// other writers' signatures (R_n impostors, calibration pool) is shuffled.
ProtocolSplit split_protocol(const FeatureDataset& dataset,
                             std::string_view writer_id,
                             const ProtocolCategory& category,
                             const SplitOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  int writers = 20;
  int genuine_per_writer = 20;
  int forgeries_per_writer = 20;
  int feature_count = 40;
  /// Standard deviation of every genuine feature around the writer mean.
  double genuine_scale = 1.0;
  /// Forgery shift per feature, in units of genuine_scale.
  double forgery_offset = 6.0;
  /// Standard deviation of the per-writer feature means.
  double writer_spread = 10.0;
};

void validate(const SyntheticSpec& spec);

/// Each writer gets per-feature means drawn once; genuine signatures are
/// Gaussian around them. Forgeries come from the same Gaussian shifted by
/// forgery_offset * genuine_scale along a random per-writer sign pattern.
FeatureDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Row-major copy of the sample features.
std::vector<std::vector<double>> feature_rows(
    std::span<const SignatureSample> samples);

}  // namespace sigverify
