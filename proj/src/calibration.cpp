#include "sigverify/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> similarities(const Matrix& rows, const IntervalModel& model) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(fuzzy_similarity_full(r, model));
  return out;
}

}  // namespace

double decision_threshold(std::span<const double> train_similarities, double alpha) {
  if (train_similarities.empty())
    throw CalibrationError("threshold needs at least one training similarity");
  if (!(alpha >= 0.0)) throw CalibrationError("alpha must be >= 0");
  const double mean = mean_of(train_similarities);
  return mean - alpha * population_std(train_similarities, mean);
}

ErrorRates compute_far_frr(const ScoreSet& scores, double threshold) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw MetricError("FAR/FRR need non-empty genuine and impostor scores");
  std::size_t accepted = 0, rejected = 0;
  for (double s : scores.impostor)
    if (s >= threshold) ++accepted;
  for (double s : scores.genuine)
    if (s < threshold) ++rejected;
  return {static_cast<double>(accepted) / static_cast<double>(scores.impostor.size()),
          static_cast<double>(rejected) / static_cast<double>(scores.genuine.size())};
}

EerResult compute_eer(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw MetricError("EER needs non-empty genuine and impostor scores");
  std::vector<double> gen = scores.genuine, imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size());
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto ng = static_cast<double>(gen.size());
  const auto ni = static_cast<double>(imp.size());
  EerResult result;
  result.roc.reserve(thresholds.size());
  for (double t : thresholds) {
    // FAR: impostors >= t; FRR: genuines < t.
    const auto below_imp = std::lower_bound(imp.begin(), imp.end(), t) - imp.begin();
    const auto below_gen = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    result.roc.push_back({t, (ni - static_cast<double>(below_imp)) / ni,
                          static_cast<double>(below_gen) / ng});
  }

  // Sweep with sentinels: accept-all then the scores then reject-all.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<RocPoint> sweep;
  sweep.reserve(result.roc.size() + 2);
  sweep.push_back({-inf, 1.0, 0.0});
  sweep.insert(sweep.end(), result.roc.begin(), result.roc.end());
  sweep.push_back({inf, 0.0, 1.0});

  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double diff = sweep[i].far - sweep[i].frr;
    if (diff == 0.0) {
      result.eer = sweep[i].far;
      result.threshold = sweep[i].threshold;
      return result;
    }
    if (diff < 0.0) {
      // Sign change between i - 1 (diff > 0, since sweep[0] has diff 1) and i.
      const auto& a = sweep[i - 1];
      const auto& b = sweep[i];
      const double da = a.far - a.frr;
      const double lambda = da / (da - diff);
      result.eer = a.far + lambda * (b.far - a.far);
      if (std::isinf(a.threshold))
        result.threshold = b.threshold;
      else if (std::isinf(b.threshold))
        result.threshold = a.threshold;
      else
        result.threshold = a.threshold + lambda * (b.threshold - a.threshold);
      return result;
    }
  }
  // Unreachable: the reject-all sentinel has diff -1.
  return result;
}

std::string format_roc_csv(std::span<const RocPoint> roc) {
  std::string out = "threshold,far,frr\n";
  for (const auto& p : roc) {
    out += format_double(p.threshold);
    out += ',';
    out += format_double(p.far);
    out += ',';
    out += format_double(p.frr);
    out += '\n';
  }
  return out;
}

GridSpec GridSpec::defaults() {
  return {range(1.25, 4.0, 0.25), range(0.0, 20.0, 0.25)};
}

std::vector<double> GridSpec::range(double first, double last, double step) {
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(first) ||
      !std::isfinite(last) || last < first)
    throw ConfigError("invalid grid range");
  const auto count =
      static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i)
    values[i] = first + static_cast<double>(i) * step;
  return values;
}

void validate(const GridSpec& grid) {
  if (grid.eta_values.empty() || grid.alpha_values.empty())
    throw ConfigError("calibration grid must not be empty");
  for (double eta : grid.eta_values)
    if (!(eta > 1.0) || !std::isfinite(eta))
      throw ConfigError("grid eta values must be > 1");
  for (double alpha : grid.alpha_values)
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw ConfigError("grid alpha values must be >= 0");
}

CalibratedModel calibrate_writer(const Matrix& train, const FeatureSelection& fs,
                                 const Matrix& validation_genuine,
                                 const Matrix& impostor_pool, const GridSpec& grid,
                                 const std::string& writer_id) {
  validate(grid);
  if (train.empty()) throw CalibrationError("calibration needs training rows");
  if (validation_genuine.empty())
    throw CalibrationError("calibration needs validation genuine samples");
  if (impostor_pool.empty())
    throw CalibrationError("calibration needs an impostor pool");

  struct Best {
    double error = std::numeric_limits<double>::infinity();
    double margin = -std::numeric_limits<double>::infinity();
    std::size_t eta_index = 0;
    double alpha = 0.0;
    double theta = 0.0;
  } best;

  std::vector<IntervalModel> models;
  std::vector<ScoreSet> score_sets;
  std::vector<std::vector<double>> train_sims;
  models.reserve(grid.eta_values.size());
  for (std::size_t e = 0; e < grid.eta_values.size(); ++e) {
    models.push_back(build_interval_model(train, fs, grid.eta_values[e], writer_id));
    train_sims.push_back(similarities(train, models.back()));
    score_sets.push_back({similarities(validation_genuine, models.back()),
                          similarities(impostor_pool, models.back())});
  }

  for (std::size_t e = 0; e < grid.eta_values.size(); ++e) {
    const auto& scores = score_sets[e];
    const double lowest_genuine =
        *std::min_element(scores.genuine.begin(), scores.genuine.end());
    const double highest_impostor =
        *std::max_element(scores.impostor.begin(), scores.impostor.end());
    for (double alpha : grid.alpha_values) {
      const double theta = decision_threshold(train_sims[e], alpha);
      const auto rates = compute_far_frr(scores, theta);
      const double error = std::max(rates.far, rates.frr);
      const double margin =
          std::min(lowest_genuine - theta, theta - highest_impostor);
      bool better = error < best.error;
      if (error == best.error) {
        if (margin != best.margin)
          better = margin > best.margin;
        else if (grid.eta_values[e] != grid.eta_values[best.eta_index])
          better = grid.eta_values[e] < grid.eta_values[best.eta_index];
        else
          better = alpha < best.alpha;
      }
      if (better) best = {error, margin, e, alpha, theta};
    }
  }

  CalibratedModel out;
  out.model = std::move(models[best.eta_index]);
  auto& c = out.calibration;
  c.eta = grid.eta_values[best.eta_index];
  c.alpha = best.alpha;
  c.theta = best.theta;
  c.achieved_eer = best.error;
  auto eer = compute_eer(score_sets[best.eta_index]);
  c.validation_eer = eer.eer;
  c.roc = std::move(eer.roc);
  c.train_similarities = std::move(train_sims[best.eta_index]);
  return out;
}

}  // namespace sigverify
