#include "locrank/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace locrank {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kDatasetFormat = "locrank.dataset";
constexpr const char* kModelFormat = "locrank.model";

/// Error raised while decoding one JSON value; the caller adds location.
struct FieldError : Error {
  FieldError(const std::string& field, const std::string& what)
      : Error(fmt::format("field '{}': {}", field, what)) {}
};

const json& require(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw FieldError(field, "missing");
  return *it;
}

std::string get_string(const json& obj, const char* field) {
  const auto& v = require(obj, field);
  if (!v.is_string()) throw FieldError(field, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* field) {
  const auto& v = require(obj, field);
  if (!v.is_boolean()) throw FieldError(field, "expected true/false");
  return v.get<bool>();
}

std::int64_t as_int(const json& v, const char* field) {
  if (!v.is_number_integer()) throw FieldError(field, "expected an integer");
  return v.get<std::int64_t>();
}

double as_double(const json& v, const char* field) {
  if (!v.is_number()) throw FieldError(field, "expected a number");
  return v.get<double>();
}

std::optional<int> get_optional_int(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return static_cast<int>(as_int(*it, field));
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw FieldError(key, fmt::format("unknown {} field", what));
  }
}

Item item_from_json(const json& j, std::size_t dim) {
  if (!j.is_object()) throw FieldError("items", "expected objects");
  reject_unknown(j,
                 {"item_id", "features", "clicked", "graded_label", "eligible_regions",
                  "logged_position", "true_relevance"},
                 "item");
  Item item;
  item.item_id = get_string(j, "item_id");
  const auto& feats = require(j, "features");
  if (!feats.is_array()) throw FieldError("features", "expected an array");
  if (feats.size() != dim) {
    throw FieldError("features",
                     fmt::format("item {} has {} features, header declares {}", item.item_id,
                                 feats.size(), dim));
  }
  item.features.reserve(dim);
  for (const auto& f : feats) item.features.push_back(as_double(f, "features"));
  item.clicked = get_bool(j, "clicked");
  item.graded_label = get_optional_int(j, "graded_label");
  item.logged_position = get_optional_int(j, "logged_position");
  item.true_relevance = get_optional_int(j, "true_relevance");
  if (const auto it = j.find("eligible_regions"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw FieldError("eligible_regions", "expected an array or null");
    std::set<LocaleCode> regions;
    for (const auto& r : *it) {
      if (!r.is_string()) throw FieldError("eligible_regions", "expected locale strings");
      regions.insert(r.get<std::string>());
    }
    item.eligible_regions = std::move(regions);
  }
  return item;
}

QueryGroup group_from_json(const json& j, std::size_t dim) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  reject_unknown(j, {"qid", "locale", "bucket", "items"}, "query");
  QueryGroup q;
  q.qid = get_string(j, "qid");
  const auto& loc = require(j, "locale");
  if (loc.is_string()) q.locale = loc.get<std::string>();
  else if (!loc.is_null()) throw FieldError("locale", "expected a string or null");
  try {
    q.frequency_bucket = parse_bucket(get_string(j, "bucket"));
  } catch (const FieldError&) {
    throw;
  } catch (const Error& e) {
    throw FieldError("bucket", e.what());
  }
  const auto& items = require(j, "items");
  if (!items.is_array()) throw FieldError("items", "expected an array");
  for (const auto& it : items) q.items.push_back(item_from_json(it, dim));
  return q;
}

ojson item_to_json(const Item& item) {
  ojson j;
  j["item_id"] = item.item_id;
  j["features"] = item.features;
  j["clicked"] = item.clicked;
  j["graded_label"] = item.graded_label ? ojson(*item.graded_label) : ojson(nullptr);
  if (item.eligible_regions) {
    j["eligible_regions"] = ojson(std::vector<std::string>(item.eligible_regions->begin(),
                                                           item.eligible_regions->end()));
  } else {
    j["eligible_regions"] = nullptr;
  }
  j["logged_position"] = item.logged_position ? ojson(*item.logged_position) : ojson(nullptr);
  j["true_relevance"] = item.true_relevance ? ojson(*item.true_relevance) : ojson(nullptr);
  return j;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

json parse_json_document(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(fmt::format("{}: malformed JSON: {}", source, e.what()));
  }
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  out.flush();
  if (!out) throw Error(fmt::format("{}: write failed", path.string()));
}

// ---------------------------------------------------------------------------
// Datasets

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  ojson header;
  header["format"] = kDatasetFormat;
  header["version"] = kDatasetFormatVersion;
  header["feature_dim"] = dataset.feature_dim;
  header["feature_names"] = dataset.feature_names;
  out += header.dump() + "\n";
  for (const auto& q : dataset.queries) {
    ojson j;
    j["qid"] = q.qid;
    j["locale"] = q.locale ? ojson(*q.locale) : ojson(nullptr);
    j["bucket"] = to_string(q.frequency_bucket);
    ojson items = ojson::array();
    for (const auto& item : q.items) items.push_back(item_to_json(item));
    j["items"] = std::move(items);
    out += j.dump() + "\n";
  }
  return out;
}

Dataset parse_dataset(std::istream& in, const std::string& source) {
  Dataset ds;
  std::map<std::string, std::size_t> qid_line;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    const bool has_newline = !in.eof();
    if (line.empty()) {
      if (!has_newline) break;
      throw Error(fmt::format("{}:{}: empty line", source, line_no));
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(fmt::format("{}:{}: malformed record ({})", source, line_no, e.what()));
    }
    try {
      if (!header_seen) {
        if (!j.is_object() || j.value("format", std::string()) != kDatasetFormat) {
          throw Error(fmt::format("missing header (expected format '{}')", kDatasetFormat));
        }
        const auto version = as_int(require(j, "version"), "version");
        if (version != kDatasetFormatVersion) {
          throw FieldError("version", fmt::format("unsupported version {}", version));
        }
        const auto dim = as_int(require(j, "feature_dim"), "feature_dim");
        if (dim < 0) throw FieldError("feature_dim", "must be >= 0");
        ds.feature_dim = static_cast<std::size_t>(dim);
        const auto& names = require(j, "feature_names");
        if (!names.is_array() || names.size() != ds.feature_dim) {
          throw FieldError("feature_names", "expected an array of feature_dim strings");
        }
        for (const auto& n : names) {
          if (!n.is_string()) throw FieldError("feature_names", "expected strings");
          ds.feature_names.push_back(n.get<std::string>());
        }
        header_seen = true;
        continue;
      }
      auto q = group_from_json(j, ds.feature_dim);
      qid_line.emplace(q.qid, line_no);
      ds.queries.push_back(std::move(q));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", source, line_no, e.what()));
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
    if (!has_newline) {
      throw Error(fmt::format("{}:{}: truncated record (no trailing newline)", source, line_no));
    }
  }
  if (!header_seen) throw Error(fmt::format("{}: missing header line", source));

  const auto violations = validate(ds);
  if (!violations.empty()) {
    std::string msg = fmt::format("{}: {} validation violation(s)", source, violations.size());
    for (const auto& v : violations) {
      const auto it = qid_line.find(v.qid);
      if (it != qid_line.end()) msg += fmt::format("\n  line {}: {}", it->second, describe(v));
      else msg += fmt::format("\n  {}", describe(v));
    }
    throw Error(msg);
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& path) {
  write_text(path, serialize_dataset(dataset));
}

Dataset read_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path.string()));
  return parse_dataset(in, path.string());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string dataset_digest(const Dataset& dataset) { return sha256_hex(serialize_dataset(dataset)); }

// ---------------------------------------------------------------------------
// Configs

namespace {

ojson train_config_json(const TrainConfig& c) {
  ojson j;
  j["lambda_rank"] = c.lambda_rank;
  j["lambda_list"] = c.lambda_list;
  j["tau"] = c.tau;
  j["eta"] = c.eta;
  ojson per = ojson::object();
  for (const auto& [loc, v] : c.per_locale_eta) per[loc] = v;
  j["per_locale_eta"] = std::move(per);
  j["epochs"] = c.epochs;
  j["warmup_epochs"] = c.warmup_epochs;
  j["learning_rate"] = c.learning_rate;
  j["l2"] = c.l2;
  j["seed"] = c.seed;
  j["init"] = to_string(c.init);
  j["semantic_feature"] = c.semantic_feature;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw Error("train config must be a JSON object");
  reject_unknown(j,
                 {"lambda_rank", "lambda_list", "tau", "eta", "per_locale_eta", "epochs",
                  "warmup_epochs", "learning_rate", "l2", "seed", "init", "semantic_feature"},
                 "train config");
  TrainConfig c;
  auto num = [&](const char* field, double& dst) {
    if (const auto it = j.find(field); it != j.end()) dst = as_double(*it, field);
  };
  auto integer = [&](const char* field, int& dst) {
    if (const auto it = j.find(field); it != j.end()) dst = static_cast<int>(as_int(*it, field));
  };
  num("lambda_rank", c.lambda_rank);
  num("lambda_list", c.lambda_list);
  num("tau", c.tau);
  num("eta", c.eta);
  num("learning_rate", c.learning_rate);
  num("l2", c.l2);
  integer("epochs", c.epochs);
  integer("warmup_epochs", c.warmup_epochs);
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw FieldError("seed", "expected an unsigned integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("init"); it != j.end()) {
    if (!it->is_string()) throw FieldError("init", "expected a string");
    c.init = parse_init(it->get<std::string>());
  }
  if (const auto it = j.find("semantic_feature"); it != j.end()) {
    if (!it->is_string()) throw FieldError("semantic_feature", "expected a string");
    c.semantic_feature = it->get<std::string>();
  }
  if (const auto it = j.find("per_locale_eta"); it != j.end()) {
    if (!it->is_object()) throw FieldError("per_locale_eta", "expected an object");
    for (const auto& [loc, v] : it->items()) c.per_locale_eta[loc] = as_double(v, "per_locale_eta");
  }
  c.check();
  return c;
}

ojson sim_config_json(const SimConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  ojson locales = ojson::array();
  for (const auto& l : c.locales) {
    ojson e;
    e["code"] = l.code;
    e["query_count"] = l.query_count;
    e["template_count"] = l.template_count;
    locales.push_back(std::move(e));
  }
  j["locales"] = std::move(locales);
  j["dominant_locale"] = c.dominant_locale;
  j["feature_names"] = c.feature_names;
  j["semantic_column"] = c.semantic_column;
  j["popularity_column"] = c.popularity_column;
  j["locale_column"] = c.locale_column;
  j["list_size"] = c.list_size;
  j["sessions_per_query"] = c.sessions_per_query;
  j["position_bias_exponent"] = c.position_bias_exponent;
  j["click_noise"] = c.click_noise;
  j["label_noise"] = c.label_noise;
  j["label_withhold_fraction"] = c.label_withhold_fraction;
  j["exposure_tilt"] = c.exposure_tilt;
  j["local_fraction"] = c.local_fraction;
  j["semantic_noise"] = c.semantic_noise;
  j["popularity_spread"] = c.popularity_spread;
  j["local_relevance"] = c.local_relevance;
  j["foreign_relevance"] = c.foreign_relevance;
  j["logging_popularity_weight"] = c.logging_popularity_weight;
  j["logging_semantic_weight"] = c.logging_semantic_weight;
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  if (!j.is_object()) throw Error("sim config must be a JSON object");
  reject_unknown(j,
                 {"seed", "locales", "dominant_locale", "feature_names", "semantic_column",
                  "popularity_column", "locale_column", "list_size", "sessions_per_query",
                  "position_bias_exponent", "click_noise", "label_noise", "label_withhold_fraction",
                  "exposure_tilt", "local_fraction", "semantic_noise", "popularity_spread",
                  "local_relevance", "foreign_relevance", "logging_popularity_weight",
                  "logging_semantic_weight"},
                 "sim config");
  SimConfig c;
  auto num = [&](const char* field, double& dst) {
    if (const auto it = j.find(field); it != j.end()) dst = as_double(*it, field);
  };
  auto integer = [&](const char* field, int& dst) {
    if (const auto it = j.find(field); it != j.end()) dst = static_cast<int>(as_int(*it, field));
  };
  auto column = [&](const char* field, std::size_t& dst) {
    if (const auto it = j.find(field); it != j.end()) {
      const auto v = as_int(*it, field);
      if (v < 0) throw FieldError(field, "must be >= 0");
      dst = static_cast<std::size_t>(v);
    }
  };
  auto probs = [&](const char* field, std::array<double, 4>& dst) {
    if (const auto it = j.find(field); it != j.end()) {
      if (!it->is_array() || it->size() != 4) throw FieldError(field, "expected 4 probabilities");
      for (std::size_t i = 0; i < 4; ++i) dst[i] = as_double((*it)[i], field);
    }
  };
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw FieldError("seed", "expected an unsigned integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("locales"); it != j.end()) {
    if (!it->is_array()) throw FieldError("locales", "expected an array");
    c.locales.clear();
    for (const auto& e : *it) {
      if (!e.is_object()) throw FieldError("locales", "expected objects");
      reject_unknown(e, {"code", "query_count", "template_count"}, "locale");
      c.locales.push_back({get_string(e, "code"),
                           static_cast<int>(as_int(require(e, "query_count"), "query_count")),
                           static_cast<int>(as_int(require(e, "template_count"), "template_count"))});
    }
  }
  if (const auto it = j.find("dominant_locale"); it != j.end()) {
    if (!it->is_string()) throw FieldError("dominant_locale", "expected a string");
    c.dominant_locale = it->get<std::string>();
  }
  if (const auto it = j.find("feature_names"); it != j.end()) {
    if (!it->is_array()) throw FieldError("feature_names", "expected an array");
    c.feature_names.clear();
    for (const auto& n : *it) {
      if (!n.is_string()) throw FieldError("feature_names", "expected strings");
      c.feature_names.push_back(n.get<std::string>());
    }
  }
  column("semantic_column", c.semantic_column);
  column("popularity_column", c.popularity_column);
  column("locale_column", c.locale_column);
  integer("list_size", c.list_size);
  integer("sessions_per_query", c.sessions_per_query);
  num("position_bias_exponent", c.position_bias_exponent);
  num("click_noise", c.click_noise);
  num("label_noise", c.label_noise);
  num("label_withhold_fraction", c.label_withhold_fraction);
  num("exposure_tilt", c.exposure_tilt);
  num("local_fraction", c.local_fraction);
  num("semantic_noise", c.semantic_noise);
  num("popularity_spread", c.popularity_spread);
  probs("local_relevance", c.local_relevance);
  probs("foreign_relevance", c.foreign_relevance);
  num("logging_popularity_weight", c.logging_popularity_weight);
  num("logging_semantic_weight", c.logging_semantic_weight);
  c.check();
  return c;
}

}  // namespace

std::string serialize_train_config(const TrainConfig& config) {
  return train_config_json(config).dump(2) + "\n";
}

TrainConfig parse_train_config(const std::string& text, const std::string& source) {
  const json j = parse_json_document(text, source);
  try {
    return train_config_from_json(j);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  }
}

TrainConfig read_train_config(const fs::path& path) {
  return parse_train_config(read_text(path), path.string());
}

void write_train_config(const TrainConfig& config, const fs::path& path) {
  write_text(path, serialize_train_config(config));
}

std::string serialize_sim_config(const SimConfig& config) {
  return sim_config_json(config).dump(2) + "\n";
}

SimConfig parse_sim_config(const std::string& text, const std::string& source) {
  const json j = parse_json_document(text, source);
  try {
    return sim_config_from_json(j);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  }
}

SimConfig read_sim_config(const fs::path& path) {
  return parse_sim_config(read_text(path), path.string());
}

void write_sim_config(const SimConfig& config, const fs::path& path) {
  write_text(path, serialize_sim_config(config));
}

// ---------------------------------------------------------------------------
// Models

std::string serialize_model(const ModelFile& file) {
  ojson j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["feature_names"] = file.model.feature_names();
  j["weights"] = file.model.weights();
  j["train_config"] = file.train_config ? train_config_json(*file.train_config) : ojson(nullptr);
  ojson prov;
  prov["variant"] = file.variant;
  prov["seed"] = file.seed;
  prov["dataset_digest"] = file.dataset_digest;
  j["provenance"] = std::move(prov);
  return j.dump(2) + "\n";
}

void write_model(const ModelFile& file, const fs::path& path) {
  write_text(path, serialize_model(file));
}

ModelFile read_model(const fs::path& path) {
  const std::string source = path.string();
  const json j = parse_json_document(read_text(path), source);
  try {
    if (!j.is_object() || j.value("format", std::string()) != kModelFormat) {
      throw Error(fmt::format("not a model file (expected format '{}')", kModelFormat));
    }
    reject_unknown(j, {"format", "version", "feature_names", "weights", "train_config", "provenance"},
                   "model");
    const auto version = as_int(require(j, "version"), "version");
    if (version != kModelFormatVersion) {
      throw FieldError("version", fmt::format("unsupported version {}", version));
    }
    std::vector<std::string> names;
    const auto& jn = require(j, "feature_names");
    if (!jn.is_array()) throw FieldError("feature_names", "expected an array");
    for (const auto& n : jn) {
      if (!n.is_string()) throw FieldError("feature_names", "expected strings");
      names.push_back(n.get<std::string>());
    }
    std::vector<double> weights;
    const auto& jw = require(j, "weights");
    if (!jw.is_array()) throw FieldError("weights", "expected an array");
    for (const auto& w : jw) weights.push_back(as_double(w, "weights"));

    ModelFile file;
    file.model = LinearModel(std::move(weights), std::move(names));
    if (const auto& tc = require(j, "train_config"); !tc.is_null()) {
      file.train_config = train_config_from_json(tc);
    }
    const auto& prov = require(j, "provenance");
    if (!prov.is_object()) throw FieldError("provenance", "expected an object");
    reject_unknown(prov, {"variant", "seed", "dataset_digest"}, "provenance");
    file.variant = get_string(prov, "variant");
    const auto& seed = require(prov, "seed");
    if (!seed.is_number_unsigned()) throw FieldError("seed", "expected an unsigned integer");
    file.seed = seed.get<std::uint64_t>();
    file.dataset_digest = get_string(prov, "dataset_digest");
    return file;
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  }
}

// ---------------------------------------------------------------------------
// History

std::string serialize_history(const TrainHistory& history) {
  std::string out = "epoch,eta_effective,pair_loss,list_loss,combined_loss,grad_norm\n";
  for (const auto& r : history.records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.epoch, r.eta_effective, r.pair_loss, r.list_loss,
                       r.combined_loss, r.grad_norm);
  }
  return out;
}

void write_history(const TrainHistory& history, const fs::path& path) {
  write_text(path, serialize_history(history));
}

TrainHistory read_history(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t line_no = 0;
  TrainHistory history;
  auto parse_double = [&](const std::string& cell, const char* field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(fmt::format("{}:{}: field '{}': bad number '{}'", path.string(), line_no, field, cell));
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "epoch,eta_effective,pair_loss,list_loss,combined_loss,grad_norm") {
        throw Error(fmt::format("{}:1: unexpected history header", path.string()));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) {
      throw Error(fmt::format("{}:{}: expected 6 columns, got {}", path.string(), line_no, cells.size()));
    }
    EpochRecord r;
    r.epoch = static_cast<int>(parse_double(cells[0], "epoch"));
    r.eta_effective = parse_double(cells[1], "eta_effective");
    r.pair_loss = parse_double(cells[2], "pair_loss");
    r.list_loss = parse_double(cells[3], "list_loss");
    r.combined_loss = parse_double(cells[4], "combined_loss");
    r.grad_norm = parse_double(cells[5], "grad_norm");
    history.records.push_back(r);
  }
  return history;
}

// ---------------------------------------------------------------------------
// Reports

namespace {
std::string metric_label(const MetricKey& key) {
  return fmt::format("{}@{}", to_string(key.metric), key.k);
}

MetricKey parse_metric_label(const std::string& label) {
  const auto at = label.find('@');
  if (at == std::string::npos) throw FieldError("values", fmt::format("bad metric label '{}'", label));
  MetricKey key;
  key.metric = parse_metric(label.substr(0, at));
  const std::string k = label.substr(at + 1);
  const auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), key.k);
  if (ec != std::errc() || ptr != k.data() + k.size()) {
    throw FieldError("values", fmt::format("bad metric label '{}'", label));
  }
  return key;
}
}  // namespace

std::string serialize_report(const EvalReport& report) {
  ojson j;
  j["ks"] = report.ks;
  ojson cells = ojson::array();
  for (const auto& [key, stat] : report.cells) {
    ojson c;
    c["locale"] = key.locale;
    c["bucket"] = key.bucket;
    c["metric"] = to_string(key.metric.metric);
    c["k"] = key.metric.k;
    c["mean"] = stat.mean;
    c["count"] = stat.count;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  ojson per = ojson::array();
  for (const auto& [qid, s] : report.per_query) {
    ojson q;
    q["qid"] = qid;
    q["locale"] = s.locale;
    q["bucket"] = to_string(s.bucket);
    ojson values = ojson::object();
    for (const auto& [key, v] : s.values) values[metric_label(key)] = v;
    q["values"] = std::move(values);
    per.push_back(std::move(q));
  }
  j["per_query"] = std::move(per);
  return j.dump(1) + "\n";
}

void write_report(const EvalReport& report, const fs::path& path) {
  write_text(path, serialize_report(report));
}

EvalReport read_report(const fs::path& path) {
  const std::string source = path.string();
  const json j = parse_json_document(read_text(path), source);
  try {
    EvalReport report;
    for (const auto& k : require(j, "ks")) report.ks.push_back(static_cast<std::size_t>(as_int(k, "ks")));
    for (const auto& c : require(j, "cells")) {
      CellKey key{get_string(c, "locale"), get_string(c, "bucket"),
                  {parse_metric(get_string(c, "metric")),
                   static_cast<std::size_t>(as_int(require(c, "k"), "k"))}};
      report.cells[key] = CellStat{as_double(require(c, "mean"), "mean"),
                                   static_cast<std::size_t>(as_int(require(c, "count"), "count"))};
    }
    for (const auto& q : require(j, "per_query")) {
      QueryScores s;
      s.locale = get_string(q, "locale");
      s.bucket = parse_bucket(get_string(q, "bucket"));
      for (const auto& [label, v] : require(q, "values").items()) {
        s.values[parse_metric_label(label)] = as_double(v, "values");
      }
      report.per_query.emplace(get_string(q, "qid"), std::move(s));
    }
    return report;
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  }
}

std::string serialize_significance(const SignificanceResult& result) {
  ojson j;
  j["metric"] = to_string(result.metric);
  j["k"] = result.k;
  j["alpha"] = result.alpha;
  j["alternative"] = "greater";
  ojson rows = ojson::array();
  for (const auto& r : result.regions) {
    ojson row;
    row["locale"] = r.locale;
    row["n"] = r.n;
    row["mean_a"] = r.mean_a;
    row["mean_b"] = r.mean_b;
    row["delta"] = r.delta;
    row["raw_p"] = r.raw_p;
    row["adjusted_p"] = r.adjusted_p;
    row["reject"] = r.reject;
    row["no_signal"] = r.no_signal;
    row["stars"] = significance_stars(r.adjusted_p);
    rows.push_back(std::move(row));
  }
  j["regions"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace locrank
