#include "sigverify/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

namespace {

bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

std::string_view to_string(SampleLabel label) {
  return label == SampleLabel::genuine ? "genuine" : "forgery";
}

const WriterRecord* FeatureDataset::find_writer(std::string_view writer_id) const {
  for (const auto& w : writers)
    if (w.writer_id == writer_id) return &w;
  return nullptr;
}

std::size_t FeatureDataset::sample_count() const {
  std::size_t total = 0;
  for (const auto& w : writers) total += w.genuine.size() + w.forgeries.size();
  return total;
}

void validate(const FeatureDataset& dataset) {
  if (dataset.feature_count == 0)
    throw LoadError("dataset '" + dataset.name + "' has no features");
  std::set<std::string_view> writer_ids;
  for (const auto& writer : dataset.writers) {
    if (!writer_ids.insert(writer.writer_id).second)
      throw LoadError("duplicate writer id '" + writer.writer_id + "'");
    std::set<std::string_view> sample_ids;
    auto check = [&](const SignatureSample& s) {
      if (s.writer_id != writer.writer_id)
        throw LoadError("sample '" + s.sample_id + "' filed under writer '" +
                        writer.writer_id + "'");
      if (!sample_ids.insert(s.sample_id).second)
        throw LoadError("duplicate sample '" + writer.writer_id + "/" +
                        s.sample_id + "'");
      if (s.features.size() != dataset.feature_count)
        throw LoadError("sample '" + writer.writer_id + "/" + s.sample_id +
                        "' has " + std::to_string(s.features.size()) +
                        " features, expected " +
                        std::to_string(dataset.feature_count));
      for (double v : s.features)
        if (!std::isfinite(v))
          throw LoadError("sample '" + writer.writer_id + "/" + s.sample_id +
                          "' has a non-finite feature");
    };
    for (const auto& s : writer.genuine) check(s);
    for (const auto& s : writer.forgeries) check(s);
  }
}

FeatureDataset parse_feature_dataset(std::string_view text, std::string name) {
  FeatureDataset dataset;
  dataset.name = std::move(name);

  std::unordered_map<std::string, std::size_t> writer_index;
  std::set<std::pair<std::string, std::string>> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 4 || fields[0] != "writer_id" ||
          fields[1] != "sample_id" || fields[2] != "label")
        throw LoadError(line_error(
            line_no, "expected header 'writer_id,sample_id,label,f1,...'"));
      dataset.feature_count = fields.size() - 3;
      have_header = true;
      continue;
    }

    if (fields.size() != dataset.feature_count + 3)
      throw LoadError(line_error(
          line_no, "expected " + std::to_string(dataset.feature_count + 3) +
                       " columns, found " + std::to_string(fields.size())));

    SignatureSample sample;
    sample.writer_id = std::string(fields[0]);
    sample.sample_id = std::string(fields[1]);
    if (!valid_id(sample.writer_id))
      throw LoadError(line_error(line_no, "invalid writer id '" +
                                              sample.writer_id + "'"));
    if (!valid_id(sample.sample_id))
      throw LoadError(line_error(line_no, "invalid sample id '" +
                                              sample.sample_id + "'"));
    if (fields[2] == "genuine") {
      sample.label = SampleLabel::genuine;
    } else if (fields[2] == "forgery") {
      sample.label = SampleLabel::skilled_forgery;
    } else {
      throw LoadError(line_error(
          line_no, "label must be 'genuine' or 'forgery', found '" +
                       std::string(fields[2]) + "'"));
    }
    sample.features.reserve(dataset.feature_count);
    for (std::size_t f = 3; f < fields.size(); ++f) {
      auto v = parse_double(fields[f]);
      if (!v)
        throw LoadError(line_error(
            line_no, "column " + std::to_string(f + 1) +
                         " is not a finite number: '" + std::string(fields[f]) +
                         "'"));
      sample.features.push_back(*v);
    }
    if (!seen.emplace(sample.writer_id, sample.sample_id).second)
      throw LoadError(line_error(line_no, "duplicate sample '" +
                                              sample.writer_id + "/" +
                                              sample.sample_id + "'"));

    auto [it, inserted] =
        writer_index.try_emplace(sample.writer_id, dataset.writers.size());
    if (inserted) dataset.writers.push_back(WriterRecord{sample.writer_id, {}, {}});
    auto& writer = dataset.writers[it->second];
    if (sample.label == SampleLabel::genuine)
      writer.genuine.push_back(std::move(sample));
    else
      writer.forgeries.push_back(std::move(sample));
  }
  if (!have_header) throw LoadError("line 1: missing header");
  validate(dataset);
  return dataset;
}

FeatureDataset load_feature_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_feature_dataset(buffer.str(), path.stem().string());
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

std::string format_feature_dataset(const FeatureDataset& dataset) {
  std::string out = "writer_id,sample_id,label";
  for (std::size_t f = 1; f <= dataset.feature_count; ++f)
    out += ",f" + std::to_string(f);
  out += '\n';
  auto row = [&](const SignatureSample& s) {
    out += s.writer_id;
    out += ',';
    out += s.sample_id;
    out += ',';
    out += to_string(s.label);
    for (double v : s.features) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  };
  for (const auto& w : dataset.writers) {
    for (const auto& s : w.genuine) row(s);
    for (const auto& s : w.forgeries) row(s);
  }
  return out;
}

void save_feature_dataset(const FeatureDataset& dataset,
                          const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write dataset '" + path.string() + "'");
    out << format_feature_dataset(dataset);
    if (!out) throw LoadError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

ProtocolCategory ProtocolCategory::parse(std::string_view text) {
  auto fail = [&] {
    return ProtocolError("invalid category '" + std::string(text) +
                         "' (expected S_n or R_n)");
  };
  if (text.size() < 2) throw fail();
  ProtocolCategory c;
  switch (text.front()) {
    case 'S':
    case 's':
      c.kind = ForgeryKind::skilled;
      break;
    case 'R':
    case 'r':
      c.kind = ForgeryKind::random;
      break;
    default:
      throw fail();
  }
  std::string_view digits = text.substr(1);
  if (!digits.empty() && digits.front() == '_') digits.remove_prefix(1);
  if (digits.empty() || digits.size() > 6 ||
      !std::all_of(digits.begin(), digits.end(),
                   [](unsigned char ch) { return std::isdigit(ch); }))
    throw fail();
  c.training_count = std::stoi(std::string(digits));
  if (c.training_count < 1) throw fail();
  return c;
}

std::string ProtocolCategory::name() const {
  std::string n = std::to_string(training_count);
  if (n.size() < 2) n.insert(0, "0");
  return std::string(kind == ForgeryKind::skilled ? "S_" : "R_") + n;
}

int resolve_validation_count(int genuine_available, int training_count,
                             std::optional<int> requested) {
  int validation = 0;
  if (requested) {
    validation = *requested;
    if (validation < 1)
      throw ProtocolError("validation count must be at least 1");
  } else if (training_count + 10 + 1 <= genuine_available) {
    validation = 10;
  } else {
    validation = std::max(1, (genuine_available - training_count) / 2);
  }
  const int required = training_count + validation + 1;
  if (genuine_available < required)
    throw ProtocolError("insufficient genuine samples: required " +
                        std::to_string(required) + " (" +
                        std::to_string(training_count) + " train + " +
                        std::to_string(validation) + " validation + 1 test), available " +
                        std::to_string(genuine_available));
  return validation;
}

ProtocolSplit split_protocol(const FeatureDataset& dataset,
                             std::string_view writer_id,
                             const ProtocolCategory& category,
                             const SplitOptions& options, std::uint64_t seed) {
  const WriterRecord* writer = dataset.find_writer(writer_id);
  if (!writer)
    throw ProtocolError("unknown writer '" + std::string(writer_id) + "'");
  if (options.pool_per_writer < 0)
    throw ProtocolError("calibration pool size must be non-negative");

  const int n = category.training_count;
  const int available = static_cast<int>(writer->genuine.size());
  const int validation =
      resolve_validation_count(available, n, options.validation_count);

  ProtocolSplit split;
  split.writer_id = writer->writer_id;
  split.category = category;
  const auto& g = writer->genuine;
  split.train_genuine.assign(g.begin(), g.begin() + n);
  split.validation_genuine.assign(g.begin() + n, g.begin() + n + validation);
  split.test_genuine.assign(g.begin() + n + validation, g.end());

  if (category.kind == ForgeryKind::skilled) {
    if (writer->forgeries.empty())
      throw ProtocolError("insufficient forgery samples: required 1, available 0");
    split.test_impostor = writer->forgeries;
  }

  // Other writers in file order; each gets its own shuffled genuine order so
  // the draw for one writer does not depend on the sizes of the others.
  std::mt19937_64 rng(seed);
  for (const auto& other : dataset.writers) {
    if (other.writer_id == writer->writer_id || other.genuine.empty()) continue;
    std::vector<std::size_t> order(other.genuine.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t next = 0;
    if (category.kind == ForgeryKind::random)
      split.test_impostor.push_back(other.genuine[order[next++]]);
    for (int k = 0; k < options.pool_per_writer; ++k) {
      // Reuse the test draw only when the writer has nothing else to offer.
      const std::size_t pick =
          next < order.size() ? order[next++] : order[k % order.size()];
      split.impostor_calibration_pool.push_back(other.genuine[pick]);
    }
  }
  if (category.kind == ForgeryKind::random && split.test_impostor.empty())
    throw ProtocolError(
        "insufficient writers: random-forgery categories need at least one "
        "other writer with genuine samples");
  return split;
}

// ---------------------------------------------------------------------------

void validate(const SyntheticSpec& spec) {
  if (spec.writers < 1) throw SpecError("writers must be positive");
  if (spec.genuine_per_writer < 1)
    throw SpecError("genuine count must be positive");
  if (spec.forgeries_per_writer < 0)
    throw SpecError("forgery count must be non-negative");
  if (spec.feature_count < 1) throw SpecError("feature count must be positive");
  if (!(spec.genuine_scale > 0.0) || !std::isfinite(spec.genuine_scale))
    throw SpecError("genuine scale must be positive");
  if (!std::isfinite(spec.forgery_offset) || spec.forgery_offset < 0.0)
    throw SpecError("forgery offset must be non-negative");
  if (!std::isfinite(spec.writer_spread) || spec.writer_spread < 0.0)
    throw SpecError("writer spread must be non-negative");
}

FeatureDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto m = static_cast<std::size_t>(spec.feature_count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  FeatureDataset dataset;
  dataset.name = "synthetic";
  dataset.feature_count = m;
  dataset.writers.reserve(static_cast<std::size_t>(spec.writers));

  for (int w = 0; w < spec.writers; ++w) {
    WriterRecord writer;
    writer.writer_id = "W" + std::to_string(w + 1);
    std::vector<double> mean(m), shift(m);
    for (auto& v : mean) v = spec.writer_spread * unit(rng);
    for (auto& v : shift)
      v = (coin(rng) ? 1.0 : -1.0) * spec.forgery_offset * spec.genuine_scale;

    auto draw = [&](bool forged, int index) {
      SignatureSample s;
      s.writer_id = writer.writer_id;
      s.label = forged ? SampleLabel::skilled_forgery : SampleLabel::genuine;
      s.sample_id = (forged ? "f" : "g") + std::to_string(index + 1);
      s.features.resize(m);
      for (std::size_t f = 0; f < m; ++f)
        s.features[f] = mean[f] + (forged ? shift[f] : 0.0) +
                        spec.genuine_scale * unit(rng);
      return s;
    };
    for (int i = 0; i < spec.genuine_per_writer; ++i)
      writer.genuine.push_back(draw(false, i));
    for (int i = 0; i < spec.forgeries_per_writer; ++i)
      writer.forgeries.push_back(draw(true, i));
    dataset.writers.push_back(std::move(writer));
  }
  return dataset;
}

std::vector<std::vector<double>> feature_rows(
    std::span<const SignatureSample> samples) {
  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.features);
  return rows;
}

}  // namespace sigverify
