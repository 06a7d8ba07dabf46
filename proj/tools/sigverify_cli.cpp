// sigverify: enrollment, verification, benchmarking and synthetic data.
//
// Exit codes: 0 success / genuine verdict, 1 runtime error, 2 usage error,
// 3 forgery verdict. Results go to stdout, diagnostics to stderr.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sigverify/benchmark.hpp"
#include "sigverify/dataset.hpp"
#include "sigverify/errors.hpp"
#include "sigverify/model_store.hpp"
#include "sigverify/numeric_text.hpp"
#include "sigverify/verifier.hpp"

namespace sv = sigverify;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitForgery = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every tunable knob, with the library defaults.
struct Knobs {
  double mom_constant = 1.0;
  std::string dbscan_eps = "auto";
  int dbscan_min_pts = 3;
  double retention_ratio = 0.8;
  int cluster_count = 2;
  double minkowski_exponent = 2.0;
  int trials = 20;
  std::uint64_t weighting_seed = 0;
  double eta_min = 1.25, eta_max = 4.0, eta_step = 0.25;
  double alpha_min = 0.0, alpha_max = 20.0, alpha_step = 0.25;
  std::string validation_count = "auto";
  int pool_per_writer = 1;

  void add_to(CLI::App& app) {
    app.add_option("--mom-constant", mom_constant, "Dispersion constant c")
        ->capture_default_str();
    app.add_option("--dbscan-eps", dbscan_eps,
                   "DBSCAN radius, or 'auto' (half the std of the dispersions)")
        ->capture_default_str();
    app.add_option("--dbscan-min-pts", dbscan_min_pts, "DBSCAN core-point size")
        ->capture_default_str();
    app.add_option("--retention-ratio", retention_ratio,
                   "Fraction of the m features kept per writer")
        ->capture_default_str();
    app.add_option("--cluster-count", cluster_count, "k-means clusters K for weighting")
        ->capture_default_str();
    app.add_option("--minkowski-exponent", minkowski_exponent, "Minkowski exponent p")
        ->capture_default_str();
    app.add_option("--trials", trials, "Weighting trials averaged")->capture_default_str();
    app.add_option("--weighting-seed", weighting_seed, "Extra seed for the weighting")
        ->capture_default_str();
    app.add_option("--eta-min", eta_min, "Smallest interval width eta")->capture_default_str();
    app.add_option("--eta-max", eta_max, "Largest eta")->capture_default_str();
    app.add_option("--eta-step", eta_step, "eta grid step")->capture_default_str();
    app.add_option("--alpha-min", alpha_min, "Smallest threshold factor alpha")
        ->capture_default_str();
    app.add_option("--alpha-max", alpha_max, "Largest alpha")->capture_default_str();
    app.add_option("--alpha-step", alpha_step, "alpha grid step")->capture_default_str();
    app.add_option("--validation-count", validation_count,
                   "Validation genuines per writer, or 'auto'")
        ->capture_default_str();
    app.add_option("--pool-per-writer", pool_per_writer,
                   "Calibration impostors drawn from each other writer")
        ->capture_default_str();
  }

  sv::EnrollmentConfig config() const {
    sv::EnrollmentConfig c;
    c.selection.mom_constant = mom_constant;
    if (dbscan_eps != "auto") {
      auto v = sv::parse_double(dbscan_eps);
      if (!v) throw UsageError("--dbscan-eps must be a number or 'auto'");
      c.selection.dbscan_eps = *v;
    }
    c.selection.dbscan_min_pts = dbscan_min_pts;
    c.selection.retention_ratio = retention_ratio;
    c.selection.weighting.cluster_count = cluster_count;
    c.selection.weighting.minkowski_exponent = minkowski_exponent;
    c.selection.weighting.trials = trials;
    c.selection.weighting.seed = weighting_seed;
    if (validation_count != "auto") {
      try {
        std::size_t used = 0;
        c.split.validation_count = std::stoi(validation_count, &used);
        if (used != validation_count.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw UsageError("--validation-count must be an integer or 'auto'");
      }
    }
    c.split.pool_per_writer = pool_per_writer;
    try {
      c.grid.eta_values = sv::GridSpec::range(eta_min, eta_max, eta_step);
      c.grid.alpha_values = sv::GridSpec::range(alpha_min, alpha_max, alpha_step);
      sv::validate(c);
    } catch (const sv::ConfigError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

std::string utc_timestamp(const std::string& requested) {
  if (!requested.empty()) return requested;
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<sv::ProtocolCategory> parse_categories(const std::vector<std::string>& raw) {
  std::vector<sv::ProtocolCategory> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string token;
    while (std::getline(ss, token, ','))
      if (!token.empty()) {
        try {
          out.push_back(sv::ProtocolCategory::parse(token));
        } catch (const sv::ProtocolError& e) {
          throw UsageError(e.what());
        }
      }
  }
  return out;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  sv::SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  try {
    sv::validate(a.spec);
  } catch (const sv::SpecError& e) {
    throw UsageError(e.what());
  }
  auto dataset = sv::generate_synthetic(a.spec, a.seed);
  sv::save_feature_dataset(dataset, a.out);
  std::cout << a.out << "," << dataset.writers.size() << "," << dataset.sample_count()
            << "," << dataset.feature_count << "\n";
  return kExitOk;
}

// --- enroll ------------------------------------------------------------------

struct EnrollArgs {
  std::string dataset, out, category = "S_05", writer, timestamp;
  std::uint64_t seed = 0;
  Knobs knobs;
};

int cmd_enroll(const EnrollArgs& a) {
  const auto config = a.knobs.config();
  const auto category = parse_categories({a.category}).at(0);
  const auto dataset = sv::load_feature_dataset(a.dataset);
  const std::string created = utc_timestamp(a.timestamp);

  if (!a.writer.empty() && !dataset.find_writer(a.writer))
    throw sv::UnknownWriterError("unknown writer '" + a.writer + "' in " + a.dataset);

  std::vector<sv::WriterModel> store;
  if (std::filesystem::exists(a.out)) store = sv::load_models(a.out);

  std::cout << "writer_id,fs_size,eta,alpha,theta\n";
  std::size_t enrolled = 0;
  for (std::size_t w = 0; w < dataset.writers.size(); ++w) {
    const auto& id = dataset.writers[w].writer_id;
    if (!a.writer.empty() && id != a.writer) continue;
    sv::WriterModel model;
    try {
      model = sv::enroll_writer(dataset, id, category, config,
                                sv::derive_seed(a.seed, w), created);
    } catch (const sv::EnrollmentError& e) {
      // With an explicit writer the failure is fatal; otherwise skip it.
      if (!a.writer.empty() || e.stage() != "split") throw;
      std::cerr << "skipping " << id << ": " << e.what() << "\n";
      continue;
    }
    std::cout << id << "," << model.selection.selected.size() << ","
              << sv::format_double(model.eta) << "," << sv::format_double(model.alpha)
              << "," << sv::format_double(model.theta) << "\n";
    std::erase_if(store, [&](const sv::WriterModel& m) { return m.writer_id == id; });
    store.push_back(std::move(model));
    ++enrolled;
  }
  if (enrolled == 0)
    throw sv::Error("no writer in " + a.dataset + " is eligible for " + category.name());
  sv::save_models(store, a.out);
  return kExitOk;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string models, probe, writer;
};

struct Probe {
  std::string writer_id;
  std::vector<double> features;
};

Probe read_probe(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sv::LoadError("cannot open probe '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("writer_id,", 0) == 0) continue;
    Probe p;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, p.writer_id, ',');
    std::getline(ss, field, ',');  // sample_id
    std::size_t column = 2;
    while (std::getline(ss, field, ',')) {
      ++column;
      // Rows copied from a dataset file carry a label column.
      if (column == 3 && (field == "genuine" || field == "forgery")) continue;
      auto v = sv::parse_double(field);
      if (!v)
        throw sv::LoadError(path + ": line " + std::to_string(line_no) + ": column " +
                            std::to_string(column) + " is not a finite number");
      p.features.push_back(*v);
    }
    if (p.features.empty())
      throw sv::LoadError(path + ": line " + std::to_string(line_no) + ": no features");
    return p;
  }
  throw sv::LoadError(path + ": no signature row");
}

int cmd_verify(const VerifyArgs& a) {
  const auto store = sv::load_models(a.models);
  const auto probe = read_probe(a.probe);
  const std::string& claimed = a.writer.empty() ? probe.writer_id : a.writer;
  const auto& model = sv::find_model(store, claimed);
  const auto decision = sv::verify_signature(probe.features, model);
  std::cout << sv::format_decision(decision) << "\n";
  return decision.verdict == sv::Verdict::genuine ? kExitOk : kExitForgery;
}

// --- benchmark -----------------------------------------------------------------

struct BenchArgs {
  std::string dataset, out = "bench_out";
  std::vector<std::string> categories;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  Knobs knobs;
};

int cmd_benchmark(const BenchArgs& a) {
  sv::BenchmarkSpec spec;
  spec.config = a.knobs.config();
  spec.seed = a.seed;
  spec.threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto dataset = sv::load_feature_dataset(a.dataset);
  if (a.categories.empty()) {
    spec.categories = sv::feasible_categories(
        dataset, parse_categories({"S_01,S_05,R_01,R_05"}), spec.config.split);
    if (spec.categories.empty())
      throw sv::Error("no default category is feasible for " + a.dataset);
  } else {
    spec.categories = parse_categories(a.categories);
  }
  const auto report = sv::run_benchmark(dataset, spec);
  sv::render_report(report, a.out);
  std::cout << sv::format_report_csv(report);
  std::cerr << "enroll " << report.runtime.enroll_seconds << " s, verify "
            << report.runtime.verify_seconds << " s over " << report.runtime.verifications
            << " verifications; reports in " << a.out << "\n";
  if (!report.complete) std::cerr << "warning: some writers were skipped\n";
  return kExitOk;
}

// --- features ------------------------------------------------------------------

struct FeaturesArgs {
  std::string dataset, category = "S_05", writer;
  std::uint64_t seed = 0;
  Knobs knobs;
};

int cmd_features(const FeaturesArgs& a) {
  const auto config = a.knobs.config();
  const auto category = parse_categories({a.category}).at(0);
  const auto dataset = sv::load_feature_dataset(a.dataset);
  if (!a.writer.empty() && !dataset.find_writer(a.writer))
    throw sv::UnknownWriterError("unknown writer '" + a.writer + "' in " + a.dataset);
  for (std::size_t w = 0; w < dataset.writers.size(); ++w) {
    const auto& id = dataset.writers[w].writer_id;
    if (!a.writer.empty() && id != a.writer) continue;
    sv::ProtocolSplit split;
    try {
      split = sv::split_protocol(dataset, id, category, config.split,
                                 sv::derive_seed(a.seed, w));
    } catch (const sv::ProtocolError& e) {
      if (!a.writer.empty()) throw;
      std::cerr << "skipping " << id << ": " << e.what() << "\n";
      continue;
    }
    auto selection_config = config.selection;
    selection_config.weighting.seed =
        sv::derive_seed(sv::derive_seed(a.seed, w), config.selection.weighting.seed);
    const auto fs =
        sv::select_writer_features(sv::feature_rows(split.train_genuine), selection_config);
    std::cout << id << "\t[";
    for (std::size_t k = 0; k < fs.selected.size(); ++k)
      std::cout << (k ? ";" : "") << fs.selected[k] + 1;
    std::cout << "]\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Writer-specific online signature verification"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic feature dataset");
  synth_cmd->add_option("--writers", synth.spec.writers)->capture_default_str();
  synth_cmd->add_option("--genuine", synth.spec.genuine_per_writer)->capture_default_str();
  synth_cmd->add_option("--forgeries", synth.spec.forgeries_per_writer)->capture_default_str();
  synth_cmd->add_option("--features", synth.spec.feature_count)->capture_default_str();
  synth_cmd->add_option("--sigma", synth.spec.genuine_scale, "Genuine scale")
      ->capture_default_str();
  synth_cmd->add_option("--delta", synth.spec.forgery_offset,
                        "Forgery shift per feature, in units of --sigma")
      ->capture_default_str();
  synth_cmd->add_option("--spread", synth.spec.writer_spread,
                        "Std of per-writer feature means")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out)->required();

  EnrollArgs enroll;
  auto* enroll_cmd = app.add_subcommand("enroll", "Enroll writers into a model store");
  enroll_cmd->add_option("--dataset", enroll.dataset)->required();
  enroll_cmd->add_option("--category", enroll.category, "S_n or R_n")->capture_default_str();
  enroll_cmd->add_option("--out", enroll.out, "Model store (JSON)")->required();
  enroll_cmd->add_option("--writer", enroll.writer, "Enroll only this writer");
  enroll_cmd->add_option("--seed", enroll.seed)->capture_default_str();
  enroll_cmd->add_option("--timestamp", enroll.timestamp,
                         "Creation time recorded in provenance (default: "
                         "SOURCE_DATE_EPOCH or now)");
  enroll.knobs.add_to(*enroll_cmd);

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Verify one signature against a store");
  verify_cmd->add_option("--models", verify.models)->required();
  verify_cmd->add_option("--probe", verify.probe,
                         "CSV row writer_id,sample_id[,label],f1,...,fm (header optional)")
      ->required();
  verify_cmd->add_option("--writer", verify.writer, "Claimed writer (default: probe row)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Evaluate every writer per category");
  bench_cmd->add_option("--dataset", bench.dataset)->required();
  bench_cmd->add_option("--category", bench.categories,
                        "Categories (repeatable or comma-separated; default "
                        "S_01,S_05,R_01,R_05 where feasible)");
  bench_cmd->add_option("--out", bench.out, "Report directory")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0: hardware)")
      ->capture_default_str();
  bench.knobs.add_to(*bench_cmd);

  FeaturesArgs features;
  auto* features_cmd =
      app.add_subcommand("features", "Print ranked writer-specific feature indices");
  features_cmd->add_option("--dataset", features.dataset)->required();
  features_cmd->add_option("--category", features.category)->capture_default_str();
  features_cmd->add_option("--writer", features.writer);
  features_cmd->add_option("--seed", features.seed)->capture_default_str();
  features.knobs.add_to(*features_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*enroll_cmd) return cmd_enroll(enroll);
    if (*verify_cmd) return cmd_verify(verify);
    if (*bench_cmd) return cmd_benchmark(bench);
    if (*features_cmd) return cmd_features(features);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
