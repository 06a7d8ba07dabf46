#include "sigverify/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct CellTiming {
  double enroll = 0.0;
  double verify = 0.0;
  std::size_t verifications = 0;
};

WriterResult evaluate_writer(const FeatureDataset& dataset, const WriterRecord& writer,
                             const ProtocolCategory& category,
                             const EnrollmentConfig& config, std::uint64_t seed,
                             CellTiming& timing) {
  WriterResult r;
  r.category = category.name();
  r.writer_id = writer.writer_id;

  const auto enroll_start = Clock::now();
  ProtocolSplit split;
  WriterModel model;
  try {
    split = split_protocol(dataset, writer.writer_id, category, config.split, seed);
    Provenance provenance;
    provenance.dataset = dataset.name;
    model = enroll_split(split, dataset.feature_count, config, seed, provenance);
  } catch (const ProtocolError& e) {
    r.skipped = true;
    r.skip_reason = std::string("split: ") + e.what();
    return r;
  } catch (const Error& e) {
    r.skipped = true;
    r.skip_reason = e.what();
    return r;
  }
  timing.enroll = seconds_since(enroll_start);

  r.theta = model.theta;
  r.eta = model.eta;
  r.alpha = model.alpha;
  r.fs_size = model.selection.selected.size();

  const auto verify_start = Clock::now();
  for (const auto& s : split.test_genuine) {
    const auto d = verify_signature(s.features, model);
    r.genuine_scores.push_back(d.score);
    if (d.verdict == Verdict::genuine)
      ++r.genuine_accepted;
    else
      ++r.genuine_rejected;
  }
  for (const auto& s : split.test_impostor) {
    const auto d = verify_signature(s.features, model);
    r.impostor_scores.push_back(d.score);
    if (d.verdict == Verdict::genuine)
      ++r.impostor_accepted;
    else
      ++r.impostor_rejected;
  }
  timing.verify = seconds_since(verify_start);
  timing.verifications = split.test_genuine.size() + split.test_impostor.size();

  r.frr = static_cast<double>(r.genuine_rejected) /
          static_cast<double>(split.test_genuine.size());
  r.far = static_cast<double>(r.impostor_accepted) /
          static_cast<double>(split.test_impostor.size());
  r.writer_eer = compute_eer({r.genuine_scores, r.impostor_scores}).eer;
  return r;
}

CategorySummary summarize(const std::string& name,
                          const std::vector<WriterResult>& results) {
  CategorySummary s;
  s.category = name;
  ScoreSet pooled;
  std::vector<double> errors;
  for (const auto& r : results) {
    if (r.category != name) continue;
    if (r.skipped) {
      ++s.writers_skipped;
      continue;
    }
    ++s.writers_enrolled;
    s.mean_far += r.far;
    s.mean_frr += r.frr;
    errors.push_back(r.writer_eer);
    pooled.genuine.insert(pooled.genuine.end(), r.genuine_scores.begin(),
                          r.genuine_scores.end());
    pooled.impostor.insert(pooled.impostor.end(), r.impostor_scores.begin(),
                           r.impostor_scores.end());
  }
  if (s.writers_enrolled == 0) {
    const double nan = std::nan("");
    s.pooled_eer = s.pooled_eer_threshold = s.mean_far = s.mean_frr =
        s.median_writer_error = nan;
    return s;
  }
  s.mean_far /= static_cast<double>(s.writers_enrolled);
  s.mean_frr /= static_cast<double>(s.writers_enrolled);
  s.median_writer_error = median(std::move(errors));
  auto eer = compute_eer(pooled);
  s.pooled_eer = eer.eer;
  s.pooled_eer_threshold = eer.threshold;
  s.roc = std::move(eer.roc);
  return s;
}

std::string fixed(double v, int precision = 4) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot write '" + path.string() + "': " + ec.message());
}

}  // namespace

std::vector<ProtocolCategory> feasible_categories(
    const FeatureDataset& dataset, const std::vector<ProtocolCategory>& candidates,
    const SplitOptions& options) {
  std::vector<ProtocolCategory> out;
  for (const auto& c : candidates) {
    for (const auto& w : dataset.writers) {
      try {
        split_protocol(dataset, w.writer_id, c, options, 0);
        out.push_back(c);
        break;
      } catch (const ProtocolError&) {
      }
    }
  }
  return out;
}

EvaluationReport run_benchmark(const FeatureDataset& dataset, const BenchmarkSpec& spec) {
  validate(spec.config);
  if (spec.categories.empty()) throw ConfigError("benchmark needs at least one category");

  EvaluationReport report;
  report.dataset = dataset.name;
  report.seed = spec.seed;

  const std::size_t writers = dataset.writers.size();
  const std::size_t cells = spec.categories.size() * writers;
  report.writers.resize(cells);
  std::vector<CellTiming> timing(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      const std::size_t c = cell / writers;
      const std::size_t w = cell % writers;
      const std::uint64_t seed = derive_seed(derive_seed(spec.seed, c), w);
      report.writers[cell] = evaluate_writer(dataset, dataset.writers[w],
                                             spec.categories[c], spec.config, seed,
                                             timing[cell]);
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(cells)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& t : timing) {
    report.runtime.enroll_seconds += t.enroll;
    report.runtime.verify_seconds += t.verify;
    report.runtime.verifications += t.verifications;
  }
  for (const auto& r : report.writers)
    if (r.skipped) report.complete = false;
  for (const auto& c : spec.categories)
    report.categories.push_back(summarize(c.name(), report.writers));
  return report;
}

std::string format_error_histogram(const EvaluationReport& report,
                                   const std::string& category, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const auto& r : report.writers) {
    if (r.category != category || r.skipped) continue;
    auto bin = static_cast<std::size_t>(std::floor(r.writer_eer * bins));
    counts[std::min(bin, counts.size() - 1)]++;
  }
  std::string out = "bin_lower,bin_upper,writers\n";
  for (int b = 0; b < bins; ++b) {
    out += format_double(static_cast<double>(b) / bins) + "," +
           format_double(static_cast<double>(b + 1) / bins) + "," +
           std::to_string(counts[static_cast<std::size_t>(b)]) + "\n";
  }
  return out;
}

std::string format_report_table(const EvaluationReport& report) {
  std::string out = "dataset: " + report.dataset + "   seed: " +
                    std::to_string(report.seed) + "   (all rates are fractions, not percent)\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %16s %8s %8s\n", "category",
                "EER", "meanFAR", "meanFRR", "medianWriterEER", "writers", "skipped");
  out += line;
  for (const auto& c : report.categories) {
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %16s %8zu %8zu\n",
                  c.category.c_str(), fixed(c.pooled_eer).c_str(),
                  fixed(c.mean_far).c_str(), fixed(c.mean_frr).c_str(),
                  fixed(c.median_writer_error).c_str(), c.writers_enrolled,
                  c.writers_skipped);
    out += line;
  }
  // Comparison row: one EER column per category.
  out += "\n";
  std::string header = "method";
  std::string row = "writer-specific fuzzy similarity";
  const std::size_t width = row.size();
  header.resize(width, ' ');
  for (const auto& c : report.categories) {
    std::snprintf(line, sizeof line, " %8s", c.category.c_str());
    header += line;
    std::snprintf(line, sizeof line, " %8s", fixed(c.pooled_eer).c_str());
    row += line;
  }
  out += header + "\n" + row + "\n";
  if (!report.complete) out += "\nincomplete: some writers were skipped (see per_writer.csv)\n";
  return out;
}

std::string format_report_csv(const EvaluationReport& report) {
  std::string out =
      "category,pooled_eer,pooled_eer_threshold,mean_far,mean_frr,median_writer_error,"
      "writers,skipped\n";
  for (const auto& c : report.categories) {
    out += c.category + "," + format_double(c.pooled_eer) + "," +
           format_double(c.pooled_eer_threshold) + "," + format_double(c.mean_far) + "," +
           format_double(c.mean_frr) + "," + format_double(c.median_writer_error) + "," +
           std::to_string(c.writers_enrolled) + "," + std::to_string(c.writers_skipped) +
           "\n";
  }
  return out;
}

std::string format_per_writer_csv(const EvaluationReport& report) {
  std::string out = "category,writer_id,far,frr,theta,eta,alpha,fs_size\n";
  for (const auto& r : report.writers) {
    out += r.category + "," + r.writer_id + ",";
    if (r.skipped) {
      out += "nan,nan,nan,nan,nan,0\n";
      continue;
    }
    out += format_double(r.far) + "," + format_double(r.frr) + "," +
           format_double(r.theta) + "," + format_double(r.eta) + "," +
           format_double(r.alpha) + "," + std::to_string(r.fs_size) + "\n";
  }
  return out;
}

void render_report(const EvaluationReport& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec || !std::filesystem::is_directory(directory))
    throw Error("cannot create output directory '" + directory.string() + "'");
  write_atomic(directory / "report.txt", format_report_table(report));
  write_atomic(directory / "report.csv", format_report_csv(report));
  write_atomic(directory / "per_writer.csv", format_per_writer_csv(report));
  for (const auto& c : report.categories) {
    write_atomic(directory / ("roc_" + c.category + ".csv"), format_roc_csv(c.roc));
    write_atomic(directory / ("histogram_" + c.category + ".csv"),
                 format_error_histogram(report, c.category));
  }
}

}  // namespace sigverify
