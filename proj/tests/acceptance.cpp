// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// Criterion 9 runs on the feature file named by SIGVERIFY_MCYT_CSV when set,
// otherwise on an MCYT-shaped synthetic stand-in.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sigverify/benchmark.hpp"
#include "sigverify/dispersion.hpp"
#include "sigverify/errors.hpp"
#include "sigverify/feature_weighting.hpp"
#include "sigverify/model_store.hpp"
#include "sigverify/symbolic_model.hpp"
#include "support/oracles.hpp"

using namespace sigverify;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the first few are reported.
struct Checker {
  bool ok = true;
  int failures = 0;
  std::ostringstream notes;
  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures++ < 3) notes << " [" << what << "]";
  }
  Outcome done(const std::string& summary) const {
    std::string detail = summary;
    if (!ok) detail += "; " + std::to_string(failures) + " failed checks:" + notes.str();
    return {ok, detail};
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome mom_oracle() {
  Checker c;
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(2, 12);
  std::normal_distribution<double> normal(0, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(size(rng)));
    for (auto& v : x) v = trial % 4 == 0 ? std::round(normal(rng)) : normal(rng);
    const double got = mom_dispersion(x);
    const double want = oracle::mom(x);
    worst = std::max(worst, std::abs(got - want));
    c.expect(std::abs(got - want) <= 1e-12, "oracle trial " + std::to_string(trial));
  }

  // Dyadic values keep every difference exact, so equality must be exact.
  std::uniform_int_distribution<int> ticks(-4000, 4000), scale(-16, 16);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(size(rng)));
    for (auto& v : x) v = ticks(rng) / 8.0;
    const double t = ticks(rng) / 8.0;
    int a = 0;
    while (a == 0) a = scale(rng);
    auto shifted = x, scaled = x;
    for (auto& v : shifted) v += t;
    for (auto& v : scaled) v *= a;
    const double base = mom_dispersion(x);
    c.expect(mom_dispersion(shifted) == base, "translation trial " + std::to_string(trial));
    c.expect(mom_dispersion(scaled) == std::abs(a) * base,
             "scale trial " + std::to_string(trial));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  return c.done("max oracle deviation " + fmt(worst) + ", 200 exact (x, t, a) triples, " +
                fmt(elapsed) + " s");
}

// 2 -------------------------------------------------------------------------

Outcome weight_simplex() {
  Checker c;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> rows(2, 30), cols(1, 20), clusters(1, 4);
  std::uniform_real_distribution<double> spread(0.1, 10);
  std::normal_distribution<double> normal(0, 1);
  const double exponents[] = {1.5, 2.0, 3.0};
  double worst = 0.0;
  int k1_runs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rows(rng));
    const auto m = static_cast<std::size_t>(cols(rng));
    std::vector<double> sd(m);
    for (auto& s : sd) s = spread(rng);
    Matrix x(n, std::vector<double>(m));
    for (auto& row : x)
      for (std::size_t v = 0; v < m; ++v) row[v] = sd[v] * normal(rng);
    WeightingConfig config;
    config.cluster_count = trial % 3 == 0 ? 1 : clusters(rng);
    config.minkowski_exponent = exponents[trial % 3];
    config.trials = 5;
    config.seed = static_cast<std::uint64_t>(trial);
    const auto w = imwk_feature_weights(x, config);
    const std::string tag = "trial " + std::to_string(trial);
    for (const auto& cluster : w.weights) {
      double sum = 0.0;
      for (double v : cluster) {
        c.expect(v >= 0.0, tag + " negative weight");
        sum += v;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
      c.expect(std::abs(sum - 1.0) <= 1e-9, tag + " sum " + fmt(sum));
    }
    double avg_sum = 0.0;
    for (double v : w.averaged_weights) avg_sum += v;
    c.expect(std::abs(avg_sum - 1.0) <= 1e-9, tag + " averaged sum");

    if (w.weights.size() == 1) {
      ++k1_runs;
      const auto& d = w.dispersions[0];
      const auto& wt = w.weights[0];
      for (std::size_t u = 0; u < m; ++u)
        for (std::size_t v = 0; v < m; ++v) {
          if (d[u] < d[v]) c.expect(wt[u] > wt[v], tag + " anti-monotonicity");
          if (d[u] == d[v]) c.expect(wt[u] == wt[v], tag + " equal dispersions");
        }
    }
  }
  const auto hand = minkowski_feature_weights({1.0, 3.0}, 2.0);
  c.expect(hand.size() == 2 && hand[0] == 0.75 && hand[1] == 0.25, "D=(1,3) hand case");
  return c.done("200 matrices, max |sum-1| " + fmt(worst) + ", " + std::to_string(k1_runs) +
                " K=1 runs, D=(1,3) -> (" + fmt(hand[0]) + ", " + fmt(hand[1]) + ")");
}

// 3 -------------------------------------------------------------------------

Outcome membership_shape() {
  Checker c;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> mean(-100, 100), spread(1e-3, 20), width(1.05, 6);
  const int points = 10000;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double m = mean(rng), s = spread(rng), eta = width(rng);
    const IntervalFeature f{0, m, s, m - eta * s, m + eta * s};
    const std::string tag = "feature " + std::to_string(trial);
    const double lo = f.lower - s, hi = f.upper + s;
    const double step = (hi - lo) / (points - 1);
    const double ramp = (eta - 1.0) * s;
    double prev = feature_membership(lo, f);
    for (int i = 0; i < points; ++i) {
      const double t = lo + i * step;
      const double mu = feature_membership(t, f);
      c.expect(mu >= 0.0 && mu <= 1.0, tag + " range");
      if (std::abs(t - m) <= s) c.expect(mu == 1.0, tag + " plateau");
      if (t <= f.lower || t >= f.upper) c.expect(mu == 0.0, tag + " outside support");
      if (i > 0) {
        const double ratio = std::abs(mu - prev) / (10.0 * step / ramp);
        worst_ratio = std::max(worst_ratio, ratio);
        c.expect(ratio < 1.0, tag + " jump");
      }
      prev = mu;
    }
    c.expect(feature_membership(f.lower, f) == 0.0, tag + " lower boundary");
    c.expect(feature_membership(f.upper, f) == 0.0, tag + " upper boundary");
  }
  const double hand = feature_membership(6.0, IntervalFeature{0, 10, 2, 4, 16});
  c.expect(hand == 0.5, "(10, 2, 3, 6) -> " + fmt(hand));
  return c.done("100 features x 10^4 points, largest jump " + fmt(worst_ratio) +
                " of the bound, (m=10, s=2, eta=3, t=6) -> " + fmt(hand));
}

// 4 -------------------------------------------------------------------------

Outcome eer_oracle() {
  Checker c;
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> size(1, 20), level(0, 20);
  std::uniform_real_distribution<double> u(0, 1), shift(-0.5, 0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> gen(static_cast<std::size_t>(size(rng)));
    std::vector<double> imp(static_cast<std::size_t>(size(rng)));
    const double d = shift(rng);
    const bool ties = trial % 2 == 0;
    for (auto& s : gen) s = ties ? level(rng) / 20.0 : u(rng) + d;
    for (auto& s : imp) s = ties ? level(rng) / 20.0 : u(rng);
    const double got = compute_eer({gen, imp}).eer;
    const double want = oracle::eer(gen, imp);
    worst = std::max(worst, std::abs(got - want));
    c.expect(std::abs(got - want) <= 1e-9, "set " + std::to_string(trial));
  }
  const double separable = compute_eer({{0.9, 0.8, 0.95}, {0.1, 0.3}}).eer;
  const double identical = compute_eer({{0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}}).eer;
  c.expect(separable == 0.0, "separable -> " + fmt(separable));
  c.expect(std::abs(identical - 0.5) <= 1e-12, "identical -> " + fmt(identical));
  return c.done("500 score sets, max oracle deviation " + fmt(worst) + ", separable " +
                fmt(separable) + ", identical " + fmt(identical));
}

// 5 / 6 ---------------------------------------------------------------------

BenchmarkSpec s05_spec(std::uint64_t seed) {
  BenchmarkSpec spec;
  spec.categories = {ProtocolCategory::parse("S_05")};
  spec.seed = seed;
  return spec;
}

Outcome separable_end_to_end() {
  Checker c;
  const auto start = Clock::now();
  SyntheticSpec data;  // 20 writers, 20 + 20 signatures, m = 40, delta = 6
  const auto dataset = generate_synthetic(data, 42);
  const auto report = run_benchmark(dataset, s05_spec(42));
  const double elapsed = seconds_since(start);
  const auto& s = report.categories.at(0);
  c.expect(report.complete, "all writers enrolled");
  c.expect(s.pooled_eer == 0.0, "pooled EER " + fmt(s.pooled_eer));
  c.expect(s.mean_far == 0.0, "mean FAR " + fmt(s.mean_far));
  c.expect(s.mean_frr == 0.0, "mean FRR " + fmt(s.mean_frr));
  c.expect(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  return c.done("S_05 pooled EER " + fmt(s.pooled_eer) + ", mean FAR " + fmt(s.mean_far) +
                ", mean FRR " + fmt(s.mean_frr) + ", " + fmt(elapsed) + " s");
}

Outcome chance_level() {
  Checker c;
  SyntheticSpec data;
  data.forgery_offset = 0.0;
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto report = run_benchmark(generate_synthetic(data, seed), s05_spec(seed));
    const double eer = report.categories.at(0).pooled_eer;
    lo = std::min(lo, eer);
    hi = std::max(hi, eer);
    c.expect(eer >= 0.4 && eer <= 0.6, "seed " + std::to_string(seed) + " EER " + fmt(eer));
  }
  return c.done("delta=0, 10 seeds, S_05 pooled EER in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

// 7 -------------------------------------------------------------------------

WriterModel enroll_with_ratio(const FeatureDataset& dataset, double ratio) {
  EnrollmentConfig config;
  config.selection.retention_ratio = ratio;
  config.selection.dbscan_eps = 1e9;  // one cluster, so retention alone fixes |FS|
  return enroll_writer(dataset, "W1", ProtocolCategory::parse("S_05"), config, 7);
}

Outcome linear_verification() {
  Checker c;
  SyntheticSpec data;
  data.writers = 4;
  data.feature_count = 100;
  const auto dataset = generate_synthetic(data, 7);

  std::mt19937_64 rng(707);
  std::normal_distribution<double> normal(0, 10);
  auto probe = [&] {
    std::vector<double> v(100);
    for (auto& x : v) x = normal(rng);
    return v;
  };

  for (const auto& w : dataset.writers) {
    const auto model =
        enroll_writer(dataset, w.writer_id, ProtocolCategory::parse("S_05"), {}, 3);
    for (const auto& s : w.forgeries)
      c.expect(verify_signature(s.features, model).membership_evaluations ==
                   model.selection.selected.size(),
               w.writer_id + " counter");
  }

  const auto half = enroll_with_ratio(dataset, 0.4);
  const auto full = enroll_with_ratio(dataset, 0.8);
  c.expect(half.selection.selected.size() == 40, "|FS| 40");
  c.expect(full.selection.selected.size() == 80, "|FS| 80");
  for (int i = 0; i < 100; ++i) {
    const auto p = probe();
    c.expect(verify_signature(p, full).membership_evaluations ==
                 2 * verify_signature(p, half).membership_evaluations,
             "doubling");
  }

  std::vector<double> latencies;
  double sink = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = probe();
    const auto start = Clock::now();
    sink += verify_signature(p, full).score;
    latencies.push_back(seconds_since(start));
  }
  std::sort(latencies.begin(), latencies.end());
  const double median = latencies[latencies.size() / 2];
  const double worst = latencies.back();
  c.expect(median < 1e-3, "median latency " + fmt(median) + " s");
  return c.done("counter = |FS| for every decision, 40 -> 80 doubles it, |FS|=80 median " +
                fmt(median * 1e6) + " us (max " + fmt(worst * 1e6) + " us, checksum " +
                fmt(sink) + ")");
}

// 8 -------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

Outcome determinism() {
  Checker c;
  SyntheticSpec data;
  data.writers = 8;
  data.forgery_offset = 2.0;
  const auto dataset = generate_synthetic(data, 8);
  const auto dir = std::filesystem::temp_directory_path() / "sigverify_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto enroll_all = [&](const std::filesystem::path& path) {
    std::vector<WriterModel> models;
    for (std::size_t w = 0; w < dataset.writers.size(); ++w)
      models.push_back(enroll_writer(dataset, dataset.writers[w].writer_id,
                                     ProtocolCategory::parse("S_05"), {},
                                     derive_seed(8, w), "2026-01-01T00:00:00Z"));
    save_models(models, path);
    return models;
  };
  const auto models = enroll_all(dir / "a.json");
  enroll_all(dir / "b.json");
  const auto store_a = read_file(dir / "a.json");
  c.expect(!store_a.empty() && store_a == read_file(dir / "b.json"), "model stores differ");

  BenchmarkSpec spec;
  spec.categories = {ProtocolCategory::parse("S_05"), ProtocolCategory::parse("R_05")};
  spec.seed = 8;
  render_report(run_benchmark(dataset, spec), dir / "run_a");
  render_report(run_benchmark(dataset, spec), dir / "run_b");
  int csv_files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "run_a")) {
    if (entry.path().extension() != ".csv") continue;
    ++csv_files;
    const auto name = entry.path().filename();
    c.expect(read_file(entry.path()) == read_file(dir / "run_b" / name),
             name.string() + " differs");
  }

  const auto loaded = load_models(dir / "a.json");
  std::mt19937_64 rng(808);
  std::normal_distribution<double> normal(0, 10);
  std::uniform_int_distribution<std::size_t> pick(0, models.size() - 1);
  int accepted = 0;
  for (int i = 0; i < 100; ++i) {
    // Mix near-genuine probes with random ones so both verdicts occur.
    const std::size_t w = pick(rng);
    std::vector<double> p = dataset.writers[w].genuine[static_cast<std::size_t>(i % 20)].features;
    if (i % 2) for (auto& v : p) v += normal(rng);
    const auto a = verify_signature(p, models[w]);
    const auto b = verify_signature(p, find_model(loaded, models[w].writer_id));
    accepted += a.verdict == Verdict::genuine;
    c.expect(a.verdict == b.verdict && a.score == b.score && a.threshold == b.threshold &&
                 a.membership_evaluations == b.membership_evaluations,
             "probe " + std::to_string(i));
  }
  std::filesystem::remove_all(dir);
  return c.done("byte-identical store and " + std::to_string(csv_files) +
                " benchmark CSVs; 100 probes (" + std::to_string(accepted) +
                " accepted) decide identically after reload");
}

// 9 -------------------------------------------------------------------------

Outcome dataset_reproduction() {
  Checker c;
  FeatureDataset dataset;
  std::string source;
  if (const char* path = std::getenv("SIGVERIFY_MCYT_CSV"); path && *path) {
    dataset = load_feature_dataset(path);
    source = std::string("feature file ") + path;
  } else {
    SyntheticSpec data;
    data.writers = 100;
    data.genuine_per_writer = 25;
    data.forgeries_per_writer = 25;
    data.feature_count = 100;
    data.forgery_offset = 1.5;
    dataset = generate_synthetic(data, 1);
    source = "MCYT-shaped synthetic stand-in (100 writers, 25+25, m=100, delta=1.5)";
  }
  BenchmarkSpec spec;
  for (const char* name : {"S_01", "S_05", "S_20", "R_01", "R_05", "R_20"})
    spec.categories.push_back(ProtocolCategory::parse(name));
  spec.seed = 1;
  spec.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto report = run_benchmark(dataset, spec);

  c.expect(report.complete, "some writers were skipped");
  const auto table = format_report_table(report);
  c.expect(table.find("writer-specific fuzzy similarity") != std::string::npos,
           "comparison row");
  std::string eers;
  for (const auto& s : report.categories) {
    c.expect(s.pooled_eer <= 0.5, s.category + " EER above chance");
    eers += " " + s.category + "=" + fmt(s.pooled_eer);
  }
  const double m1 = report.categories[0].median_writer_error;
  const double m5 = report.categories[1].median_writer_error;
  const double m20 = report.categories[2].median_writer_error;
  c.expect(m1 >= m5 && m5 >= m20, "median per-writer EER not nonincreasing");
  return c.done(source + "; pooled EER" + eers + "; median writer EER S_01 " + fmt(m1) +
                ", S_05 " + fmt(m5) + ", S_20 " + fmt(m20));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"MoM oracle equivalence", mom_oracle},
      {"weight simplex and monotonicity", weight_simplex},
      {"membership function", membership_shape},
      {"EER oracle", eer_oracle},
      {"separable end to end", separable_end_to_end},
      {"chance-level end to end", chance_level},
      {"linear verification", linear_verification},
      {"determinism and persistence", determinism},
      {"dataset reproduction", dataset_reproduction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
