#include "sigverify/model_store.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sigverify/errors.hpp"
#include "sigverify/numeric_text.hpp"

namespace sigverify {

namespace {

using json = nlohmann::ordered_json;

json real(double v) { return format_double(v); }

json reals(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(real(x));
  return arr;
}

json indices(std::span<const std::size_t> v) {
  json arr = json::array();
  for (std::size_t x : v) arr.push_back(x + 1);
  return arr;
}

json config_to_json(const EnrollmentConfig& c) {
  const auto& s = c.selection;
  json selection = {
      {"mom_constant", real(s.mom_constant)},
      {"dbscan_eps", s.dbscan_eps ? real(*s.dbscan_eps) : json("auto")},
      {"dbscan_min_pts", s.dbscan_min_pts},
      {"retention_ratio", real(s.retention_ratio)},
      {"weighting",
       {{"cluster_count", s.weighting.cluster_count},
        {"minkowski_exponent", real(s.weighting.minkowski_exponent)},
        {"trials", s.weighting.trials},
        {"seed", s.weighting.seed},
        {"max_iterations", s.weighting.max_iterations}}}};
  json split = {{"validation_count", c.split.validation_count
                                         ? json(*c.split.validation_count)
                                         : json("auto")},
                {"pool_per_writer", c.split.pool_per_writer}};
  return {{"selection", selection},
          {"grid", {{"eta", reals(c.grid.eta_values)}, {"alpha", reals(c.grid.alpha_values)}}},
          {"split", split}};
}

// Field access that reports the JSON path of whatever is wrong.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  Reader at(std::string_view key) const {
    const std::string p = path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    if (!node_.is_object()) fail(path_, "expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) fail(p, "missing field");
    return Reader(*it, p);
  }
  Reader at(std::size_t i) const {
    return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }
  bool has(std::string_view key) const {
    return node_.is_object() && node_.contains(key);
  }
  std::size_t size() const {
    if (!node_.is_array()) fail(path_, "expected an array");
    return node_.size();
  }
  bool is_string(std::string_view value) const {
    return node_.is_string() && node_.get<std::string>() == value;
  }

  double real() const {
    if (!node_.is_string()) fail(path_, "expected a decimal string");
    auto v = parse_double(node_.get<std::string>());
    if (!v) fail(path_, "not a finite decimal number");
    return *v;
  }
  std::string text() const {
    if (!node_.is_string()) fail(path_, "expected a string");
    return node_.get<std::string>();
  }
  bool boolean() const {
    if (!node_.is_boolean()) fail(path_, "expected a boolean");
    return node_.get<bool>();
  }
  std::int64_t integer() const {
    if (!node_.is_number_integer()) fail(path_, "expected an integer");
    return node_.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer() const {
    if (!node_.is_number_unsigned() && !(node_.is_number_integer() && integer() >= 0))
      fail(path_, "expected a non-negative integer");
    return node_.get<std::uint64_t>();
  }
  std::size_t index() const {
    const auto v = integer();
    if (v < 1) fail(path_, "feature indices start at 1");
    return static_cast<std::size_t>(v - 1);
  }

  std::vector<double> reals() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).real();
    return out;
  }
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).index();
    return out;
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw StoreError(path + ": " + what);
  }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

EnrollmentConfig config_from_json(const Reader& r) {
  EnrollmentConfig c;
  const auto s = r.at("selection");
  c.selection.mom_constant = s.at("mom_constant").real();
  const auto eps = s.at("dbscan_eps");
  if (!eps.is_string("auto")) c.selection.dbscan_eps = eps.real();
  c.selection.dbscan_min_pts = static_cast<int>(s.at("dbscan_min_pts").integer());
  c.selection.retention_ratio = s.at("retention_ratio").real();
  const auto w = s.at("weighting");
  c.selection.weighting.cluster_count = static_cast<int>(w.at("cluster_count").integer());
  c.selection.weighting.minkowski_exponent = w.at("minkowski_exponent").real();
  c.selection.weighting.trials = static_cast<int>(w.at("trials").integer());
  c.selection.weighting.seed = w.at("seed").unsigned_integer();
  c.selection.weighting.max_iterations = static_cast<int>(w.at("max_iterations").integer());
  const auto g = r.at("grid");
  c.grid.eta_values = g.at("eta").reals();
  c.grid.alpha_values = g.at("alpha").reals();
  const auto sp = r.at("split");
  const auto vc = sp.at("validation_count");
  if (!vc.is_string("auto")) c.split.validation_count = static_cast<int>(vc.integer());
  c.split.pool_per_writer = static_cast<int>(sp.at("pool_per_writer").integer());
  return c;
}

json model_to_json(const WriterModel& m) {
  const auto& fs = m.selection;
  json intervals = json::array();
  for (const auto& f : m.interval_model.features)
    intervals.push_back({{"feature", f.feature_index + 1},
                         {"mean", real(f.mean)},
                         {"std", real(f.std)},
                         {"lower", real(f.lower)},
                         {"upper", real(f.upper)}});
  json labels = json::array();
  for (int l : fs.cluster_labels) labels.push_back(l);
  return {{"writer_id", m.writer_id},
          {"feature_count", m.feature_count},
          {"eta", real(m.eta)},
          {"alpha", real(m.alpha)},
          {"theta", real(m.theta)},
          {"achieved_error", real(m.achieved_error)},
          {"validation_eer", real(m.validation_eer)},
          {"selection",
           {{"selected", indices(fs.selected)},
            {"weights", reals(fs.weights)},
            {"mom_values", reals(fs.mom_values)},
            {"surviving", indices(fs.surviving)},
            {"cluster_labels", labels},
            {"eps", real(fs.eps)},
            {"all_noise", fs.all_noise}}},
          {"intervals", intervals},
          {"provenance",
           {{"dataset", m.provenance.dataset},
            {"category", m.provenance.category},
            {"seed", m.provenance.seed},
            {"created", m.provenance.created},
            {"config", config_to_json(m.provenance.config)}}}};
}

WriterModel model_from_json(const Reader& r) {
  WriterModel m;
  m.writer_id = r.at("writer_id").text();
  m.feature_count = static_cast<std::size_t>(r.at("feature_count").unsigned_integer());
  m.eta = r.at("eta").real();
  m.alpha = r.at("alpha").real();
  m.theta = r.at("theta").real();
  m.achieved_error = r.at("achieved_error").real();
  m.validation_eer = r.at("validation_eer").real();

  const auto s = r.at("selection");
  auto& fs = m.selection;
  fs.selected = s.at("selected").indices();
  fs.weights = s.at("weights").reals();
  fs.mom_values = s.at("mom_values").reals();
  fs.surviving = s.at("surviving").indices();
  const auto labels = s.at("cluster_labels");
  for (std::size_t i = 0; i < labels.size(); ++i)
    fs.cluster_labels.push_back(static_cast<int>(labels.at(i).integer()));
  fs.eps = s.at("eps").real();
  fs.all_noise = s.at("all_noise").boolean();
  fs.feature_count = m.feature_count;
  if (fs.weights.size() != fs.selected.size())
    Reader::fail(s.path() + ".weights", "length differs from selected");

  m.interval_model.writer_id = m.writer_id;
  m.interval_model.eta = m.eta;
  const auto intervals = r.at("intervals");
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto iv = intervals.at(k);
    IntervalFeature f;
    f.feature_index = iv.at("feature").index();
    f.mean = iv.at("mean").real();
    f.std = iv.at("std").real();
    f.lower = iv.at("lower").real();
    f.upper = iv.at("upper").real();
    if (f.std < 0.0) Reader::fail(iv.path() + ".std", "negative standard deviation");
    m.interval_model.features.push_back(f);
  }

  const auto p = r.at("provenance");
  m.provenance.dataset = p.at("dataset").text();
  m.provenance.category = p.at("category").text();
  m.provenance.seed = p.at("seed").unsigned_integer();
  m.provenance.created = p.at("created").text();
  m.provenance.config = config_from_json(p.at("config"));

  try {
    validate(m);
  } catch (const ModelError& e) {
    Reader::fail(r.path(), e.what());
  }
  return m;
}

}  // namespace

std::string serialize_models(std::span<const WriterModel> models) {
  json doc;
  doc["schema_version"] = kModelStoreSchemaVersion;
  doc["models"] = json::array();
  for (const auto& m : models) doc["models"].push_back(model_to_json(m));
  return doc.dump(2) + "\n";
}

std::vector<WriterModel> deserialize_models(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw StoreError(std::string("corrupted model store: ") + e.what());
  }
  const Reader root(doc, "");
  const auto version = root.at("schema_version").integer();
  if (version != kModelStoreSchemaVersion)
    Reader::fail("schema_version", "unsupported version " + std::to_string(version) +
                                       " (expected " +
                                       std::to_string(kModelStoreSchemaVersion) + ")");
  const auto list = root.at("models");
  std::vector<WriterModel> models;
  models.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    models.push_back(model_from_json(list.at(i)));
    for (std::size_t j = 0; j + 1 < models.size(); ++j)
      if (models[j].writer_id == models.back().writer_id)
        Reader::fail(list.at(i).path() + ".writer_id",
                     "duplicate writer '" + models.back().writer_id + "'");
  }
  return models;
}

void save_models(std::span<const WriterModel> models, const std::filesystem::path& path) {
  const std::string text = serialize_models(models);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write model store '" + path.string() + "'");
    out << text;
    if (!out) throw StoreError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<WriterModel> load_models(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open model store '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_models(buffer.str());
}

const WriterModel& find_model(std::span<const WriterModel> models,
                              std::string_view writer_id) {
  for (const auto& m : models)
    if (m.writer_id == writer_id) return m;
  throw UnknownWriterError("unknown writer '" + std::string(writer_id) + "'");
}

}  // namespace sigverify
