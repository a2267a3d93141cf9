// Copyright 2026 The nodewatt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nodewatt/model_file.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "nodewatt/error.hpp"

namespace nodewatt::app {

using json = nlohmann::json;

namespace {

// ----------------------------------------------------------------- writing

json scaler_json(const std::optional<Scaler> &s) {
  if (!s) return nullptr;
  json features = json::array();
  for (std::size_t j = 0; j < s->features.size(); ++j) {
    features.push_back({{"name", s->feature_names[j]},
                        {"min", s->features[j].min},
                        {"max", s->features[j].max}});
  }
  return {{"features", std::move(features)},
          {"target", {{"min", s->target.min}, {"max", s->target.max}}}};
}

json vec_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

json lstm_json(const lstm::LstmModel &m, json &hyper) {
  const auto &c = m.config;
  hyper = {{"epochs", c.epochs},
           {"learning_rate", c.learning_rate},
           {"hidden_size", c.hidden_size},
           {"grad_clip_norm", c.grad_clip_norm},
           {"seed", c.seed}};
  const auto &p = m.params;
  return {{"n_features", p.n_features()},
          {"hidden_size", p.hidden_size()},
          {"W", vec_json(p.W())},
          {"U", vec_json(p.U())},
          {"b", vec_json(p.b())},
          {"w_out", vec_json(p.w_out())},
          {"b_out", p.b_out()}};
}

json gbt_json(const gbt::GbtModel &m, json &hyper) {
  const auto &c = m.config;
  hyper = {{"n_estimators", c.n_estimators},
           {"learning_rate", c.learning_rate},
           {"max_depth", c.max_depth},
           {"min_samples_leaf", c.min_samples_leaf}};
  json trees = json::array();
  for (const auto &t : m.trees) {
    json nodes = json::array();
    for (const auto &n : t.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"gain", n.gain},
                       {"n_samples", n.n_samples}});
    }
    trees.push_back({{"max_depth", t.max_depth}, {"nodes", std::move(nodes)}});
  }
  return {{"n_features", m.n_features},
          {"base_prediction", m.base_prediction},
          {"learning_rate", m.learning_rate},
          {"importances", m.importances},
          {"has_splits", m.has_splits},
          {"trees", std::move(trees)}};
}

// ----------------------------------------------------------------- reading

[[noreturn]] void schema(const std::string &what) {
  fail(ErrorKind::schema, "model file: " + what);
}

const json &field(const json &obj, const char *key) {
  if (!obj.is_object()) schema(std::string("expected an object around '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

double real(const json &obj, const char *key, bool allow_null = false) {
  const auto &v = field(obj, key);
  if (allow_null && v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) schema(std::string("field '") + key + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(std::string("field '") + key + "' is not finite");
  return d;
}

std::uint64_t uint(const json &obj, const char *key) {
  const auto &v = field(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema(std::string("field '") + key + "' is not a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::int64_t sint(const json &obj, const char *key) {
  const auto &v = field(obj, key);
  if (!v.is_number_integer()) schema(std::string("field '") + key + "' is not an integer");
  return v.get<std::int64_t>();
}

std::string text(const json &obj, const char *key) {
  const auto &v = field(obj, key);
  if (!v.is_string()) schema(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

bool boolean(const json &obj, const char *key) {
  const auto &v = field(obj, key);
  if (!v.is_boolean()) schema(std::string("field '") + key + "' is not a boolean");
  return v.get<bool>();
}

std::vector<double> reals(const json &obj, const char *key, std::size_t expect) {
  const auto &v = field(obj, key);
  if (!v.is_array()) schema(std::string("field '") + key + "' is not an array");
  if (v.size() != expect) {
    schema(std::string("field '") + key + "' has " + std::to_string(v.size()) +
           " values, expected " + std::to_string(expect));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto &e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      schema(std::string("non-finite entry in '") + key + "'");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::optional<Scaler> scaler_from(const json &j, const std::vector<std::string> &names) {
  if (j.is_null()) return std::nullopt;
  Scaler s;
  const auto &feats = field(j, "features");
  if (!feats.is_array() || feats.size() != names.size()) {
    schema("scaler feature count does not match feature_names");
  }
  for (std::size_t k = 0; k < feats.size(); ++k) {
    const auto name = text(feats[k], "name");
    if (name != names[k]) schema("scaler feature '" + name + "' out of order");
    const MinMax mm{real(feats[k], "min"), real(feats[k], "max")};
    if (mm.min > mm.max) schema("scaler min exceeds max for '" + name + "'");
    s.feature_names.push_back(name);
    s.features.push_back(mm);
  }
  const auto &t = field(j, "target");
  s.target = MinMax{real(t, "min"), real(t, "max")};
  if (s.target.min > s.target.max) schema("scaler target min exceeds max");
  return s;
}

lstm::LstmModel lstm_from(const json &params, const json &hyper, std::size_t F) {
  lstm::LstmModel m;
  auto &c = m.config;
  c.epochs = uint(hyper, "epochs");
  c.learning_rate = real(hyper, "learning_rate");
  c.hidden_size = uint(hyper, "hidden_size");
  c.grad_clip_norm = real(hyper, "grad_clip_norm");
  c.seed = uint(hyper, "seed");

  const auto H = uint(params, "hidden_size");
  if (uint(params, "n_features") != F) schema("parameter n_features disagrees with feature_names");
  if (H == 0 || H > 4096) schema("hidden_size out of range");
  m.params = lstm::LstmParams(F, H);
  auto copy = [](const std::vector<double> &src, std::span<double> dst) {
    std::copy(src.begin(), src.end(), dst.begin());
  };
  copy(reals(params, "W", 4 * H * F), m.params.W());
  copy(reals(params, "U", 4 * H * H), m.params.U());
  copy(reals(params, "b", 4 * H), m.params.b());
  copy(reals(params, "w_out", H), m.params.w_out());
  m.params.b_out() = real(params, "b_out");
  return m;
}

gbt::GbtModel gbt_from(const json &params, const json &hyper, std::size_t F) {
  gbt::GbtModel m;
  auto &c = m.config;
  c.n_estimators = uint(hyper, "n_estimators");
  c.learning_rate = real(hyper, "learning_rate");
  c.max_depth = uint(hyper, "max_depth");
  c.min_samples_leaf = uint(hyper, "min_samples_leaf");

  if (uint(params, "n_features") != F) schema("parameter n_features disagrees with feature_names");
  m.n_features = F;
  m.base_prediction = real(params, "base_prediction");
  m.learning_rate = real(params, "learning_rate");
  if (!(m.learning_rate > 0.0 && m.learning_rate <= 1.0)) schema("learning_rate outside (0,1]");
  m.importances = reals(params, "importances", F);
  m.has_splits = boolean(params, "has_splits");

  const auto &trees = field(params, "trees");
  if (!trees.is_array()) schema("'trees' is not an array");
  if (trees.size() != c.n_estimators) schema("tree count differs from n_estimators");
  for (const auto &tj : trees) {
    gbt::RegressionTree t;
    t.max_depth = uint(tj, "max_depth");
    const auto &nodes = field(tj, "nodes");
    if (!nodes.is_array() || nodes.empty()) schema("tree without nodes");
    const auto count = static_cast<std::int64_t>(nodes.size());
    for (std::int64_t k = 0; k < count; ++k) {
      const auto &nj = nodes[static_cast<std::size_t>(k)];
      gbt::TreeNode n;
      n.feature = static_cast<int>(sint(nj, "feature"));
      n.threshold = real(nj, "threshold");
      n.left = static_cast<int>(sint(nj, "left"));
      n.right = static_cast<int>(sint(nj, "right"));
      n.value = real(nj, "value");
      n.gain = real(nj, "gain");
      n.n_samples = uint(nj, "n_samples");
      if (!n.is_leaf()) {
        // Children always follow their parent, which rules out cycles.
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= F) schema("split feature out of range");
        if (n.left <= k || n.right <= k || n.left >= count || n.right >= count || n.left == n.right) {
          schema("malformed tree links");
        }
      } else if (n.feature != gbt::TreeNode::kLeaf) {
        schema("negative feature index on an internal node");
      }
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

std::vector<LossPoint> history_from(const json &j) {
  if (!j.is_array()) schema("loss_history is not an array");
  std::vector<LossPoint> out;
  for (const auto &e : j) {
    if (!e.is_array() || e.size() != 2) schema("loss_history entries are [train, val] pairs");
    auto num = [](const json &v) {
      if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
      if (!v.is_number()) schema("loss_history entry is not a number");
      return v.get<double>();
    };
    out.push_back({num(e[0]), num(e[1])});
  }
  return out;
}

} // namespace

json metadata_json(const TrainingMetadata &m) {
  json history = json::array();
  for (const auto &p : m.loss_history) history.push_back({p.train_mse, p.val_mse});
  return {{"seed", m.seed},
          {"iterations", m.iterations},
          {"data_fingerprint", m.data_fingerprint},
          {"created_at", m.created_at},
          {"node", m.node},
          {"train_fraction", m.train_fraction},
          {"z_threshold", m.z_threshold},
          {"cleaned", m.cleaned},
          {"n_train", m.n_train},
          {"n_val", m.n_val},
          {"final_train_mse", m.final_train_mse},
          {"final_val_mse", m.final_val_mse},
          {"loss_history", std::move(history)}};
}

json to_json(const ModelFile &file) {
  json hyper;
  json params = std::holds_alternative<lstm::LstmModel>(file.model)
                    ? lstm_json(std::get<lstm::LstmModel>(file.model), hyper)
                    : gbt_json(std::get<gbt::GbtModel>(file.model), hyper);
  return {{"format_version", file.format_version},
          {"model_kind", std::string(to_string(kind_of(file.model)))},
          {"feature_names", feature_names_of(file.model)},
          {"window_len", window_len_of(file.model)},
          {"scaler", scaler_json(scaler_of(file.model))},
          {"hyperparameters", std::move(hyper)},
          {"parameters", std::move(params)},
          {"training_metadata", metadata_json(file.metadata)}};
}

ModelFile model_from_json(const json &j) {
  if (!j.is_object()) schema("top level is not an object");
  const auto version = sint(j, "format_version");
  if (version != kFormatVersion) {
    fail(ErrorKind::unsupported_version,
         "model file format_version " + std::to_string(version) +
             " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  ModelFile file;
  file.format_version = static_cast<int>(version);

  const auto kind_name = text(j, "model_kind");
  if (kind_name != "lstm" && kind_name != "gbt") schema("unknown model_kind '" + kind_name + "'");

  const auto &names_j = field(j, "feature_names");
  if (!names_j.is_array() || names_j.empty()) schema("feature_names must be a non-empty array");
  std::vector<std::string> names;
  for (const auto &n : names_j) {
    if (!n.is_string()) schema("feature name is not a string");
    names.push_back(n.get<std::string>());
  }
  const auto window_len = uint(j, "window_len");
  if (window_len == 0) schema("window_len must be positive");
  auto scaler = scaler_from(field(j, "scaler"), names);

  const auto &hyper = field(j, "hyperparameters");
  const auto &params = field(j, "parameters");
  if (kind_name == "lstm") {
    auto m = lstm_from(params, hyper, names.size());
    m.feature_names = names;
    m.window_len = window_len;
    m.scaler = std::move(scaler);
    file.model = std::move(m);
  } else {
    auto m = gbt_from(params, hyper, names.size());
    m.feature_names = names;
    m.window_len = window_len;
    m.scaler = std::move(scaler);
    file.model = std::move(m);
  }

  const auto &meta = field(j, "training_metadata");
  auto &md = file.metadata;
  md.seed = uint(meta, "seed");
  md.iterations = uint(meta, "iterations");
  md.data_fingerprint = text(meta, "data_fingerprint");
  md.created_at = text(meta, "created_at");
  md.node = text(meta, "node");
  md.train_fraction = real(meta, "train_fraction");
  md.z_threshold = real(meta, "z_threshold");
  md.cleaned = boolean(meta, "cleaned");
  md.n_train = uint(meta, "n_train");
  md.n_val = uint(meta, "n_val");
  md.final_train_mse = real(meta, "final_train_mse", true);
  md.final_val_mse = real(meta, "final_val_mse", true);
  md.loss_history = history_from(field(meta, "loss_history"));
  return file;
}

std::string serialize_model(const ModelFile &file) {
  return to_json(file).dump(1) + "\n";
}

ModelFile parse_model(std::string_view body) {
  json j;
  try {
    j = json::parse(body.begin(), body.end());
  } catch (const json::parse_error &e) {
    schema(std::string("not valid JSON (") + e.what() + ")");
  }
  try {
    return model_from_json(j);
  } catch (const json::exception &e) {
    schema(e.what());
  }
}

void save_model(const ModelFile &file, const std::filesystem::path &path) {
  const auto body = serialize_model(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string fingerprint_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string reproducible_timestamp() {
  std::int64_t secs = 0;
  if (const char *env = std::getenv("SOURCE_DATE_EPOCH")) {
    char *end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) secs = v;
  }
  const auto tp = std::chrono::sys_seconds{std::chrono::seconds{secs}};
  const auto days = std::chrono::floor<std::chrono::days>(tp);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{tp - days};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long long>(hms.hours().count()),
                static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

} // namespace nodewatt::app
