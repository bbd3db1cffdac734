#include "locrank/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "json.hpp"

namespace locrank {

std::pair<Dataset, Dataset> split_by_qid(const Dataset& dataset, double train_ratio) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
    throw Error(fmt::format("train ratio must lie in [0,1], got {}", train_ratio));
  }
  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> by_locale;
  for (std::size_t i = 0; i < dataset.queries.size(); ++i) {
    const auto& q = dataset.queries[i];
    by_locale[q.locale.value_or(kNoLocale)].emplace_back(sha256_hex(q.qid), i);
  }
  std::vector<bool> to_train(dataset.queries.size(), false);
  for (auto& [locale, entries] : by_locale) {
    std::sort(entries.begin(), entries.end());
    const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * entries.size()));
    for (std::size_t r = 0; r < n_train; ++r) to_train[entries[r].second] = true;
  }
  Dataset train, eval;
  for (auto* part : {&train, &eval}) {
    part->feature_dim = dataset.feature_dim;
    part->feature_names = dataset.feature_names;
  }
  for (std::size_t i = 0; i < dataset.queries.size(); ++i) {
    (to_train[i] ? train : eval).queries.push_back(dataset.queries[i]);
  }
  return {std::move(train), std::move(eval)};
}

namespace {
std::map<std::string, std::size_t> locale_counts(const Dataset& ds) {
  std::map<std::string, std::size_t> counts;
  for (const auto& q : ds.queries) ++counts[q.locale.value_or(kNoLocale)];
  return counts;
}
}  // namespace

SimulateSummary run_simulate(const SimConfig& config, const fs::path& out_dir, double train_ratio) {
  const Dataset all = simulate(config);
  const auto [train, eval] = split_by_qid(all, train_ratio);

  fs::create_directories(out_dir);
  const std::string all_text = serialize_dataset(all);
  const std::string train_text = serialize_dataset(train);
  const std::string eval_text = serialize_dataset(eval);
  const std::string config_text = serialize_sim_config(config);
  write_text(out_dir / "all.jsonl", all_text);
  write_text(out_dir / "train.jsonl", train_text);
  write_text(out_dir / "eval.jsonl", eval_text);
  write_text(out_dir / "sim_config.json", config_text);

  nlohmann::ordered_json m;
  m["seed"] = config.seed;
  m["train_ratio"] = train_ratio;
  m["sim_config_sha256"] = sha256_hex(config_text);
  nlohmann::ordered_json files;
  const std::vector<std::pair<std::string, std::pair<const Dataset*, const std::string*>>> outputs = {
      {"all.jsonl", {&all, &all_text}},
      {"train.jsonl", {&train, &train_text}},
      {"eval.jsonl", {&eval, &eval_text}}};
  for (const auto& [name, data] : outputs) {
    nlohmann::ordered_json f;
    f["sha256"] = sha256_hex(*data.second);
    f["queries"] = data.first->queries.size();
    f["items"] = data.first->item_count();
    nlohmann::ordered_json per_locale = nlohmann::ordered_json::object();
    for (const auto& [loc, n] : locale_counts(*data.first)) per_locale[loc] = n;
    f["queries_per_locale"] = std::move(per_locale);
    files[name] = std::move(f);
  }
  m["files"] = std::move(files);

  SimulateSummary summary;
  summary.manifest = m.dump(2) + "\n";
  write_text(out_dir / "manifest.json", summary.manifest);

  std::size_t clicked = 0, labeled = 0;
  for (const auto& q : all.queries) {
    labeled += q.has_graded_labels() ? 1 : 0;
    for (const auto& item : q.items) clicked += item.clicked ? 1 : 0;
  }
  summary.text = fmt::format(
      "simulated {} queries / {} items ({} clicked, {} queries with graded labels)\n"
      "train {} queries, eval {} queries -> {}\n",
      all.queries.size(), all.item_count(), clicked, labeled, train.queries.size(),
      eval.queries.size(), out_dir.string());
  return summary;
}

fs::path history_path_for(const fs::path& model_path) {
  fs::path p = model_path;
  p += ".history.csv";
  return p;
}

TrainSummary run_train(const fs::path& dataset_path, const TrainConfig& config, Variant variant,
                       const fs::path& model_path) {
  const Dataset ds = read_dataset(dataset_path);
  const TrainConfig effective = variant_config(variant, config);
  const auto result = train_variant(ds, variant, config);

  ModelFile file;
  file.model = result.model;
  file.train_config = effective;
  file.variant = to_string(variant);
  file.seed = effective.seed;
  file.dataset_digest = dataset_digest(ds);
  write_model(file, model_path);
  write_history(result.history, history_path_for(model_path));

  TrainSummary summary;
  summary.fallback_queries = result.fallback_queries;
  std::string& t = summary.text;
  t += fmt::format("variant {} on {} queries (D={})\n", to_string(variant), ds.queries.size(),
                   ds.feature_dim);
  if (variant != Variant::prod_baseline && result.fallback_queries > 0) {
    t += fmt::format("warning: {} queries lack graded labels; they use click supervision only\n",
                     result.fallback_queries);
  }
  t += fmt::format("{:>6} {:>8} {:>12} {:>12} {:>12} {:>12}\n", "epoch", "eta", "pair", "list",
                   "combined", "|grad|");
  for (const auto& r : result.history.records) {
    t += fmt::format("{:>6} {:>8.4f} {:>12.6f} {:>12.6f} {:>12.6f} {:>12.3e}\n", r.epoch,
                     r.eta_effective, r.pair_loss, r.list_loss, r.combined_loss, r.grad_norm);
  }
  t += fmt::format("model -> {}\nhistory -> {}\n", model_path.string(),
                   history_path_for(model_path).string());
  return summary;
}

namespace {
fs::path with_suffix(const fs::path& prefix, const char* suffix) {
  fs::path p = prefix;
  p += suffix;
  return p;
}

void check_compatible(const LinearModel& model, const Dataset& ds, const fs::path& model_path) {
  if (model.dim() != ds.feature_dim) {
    throw Error(fmt::format("{}: feature dimension mismatch: model D={}, dataset D={}",
                            model_path.string(), model.dim(), ds.feature_dim));
  }
  if (model.feature_names() != ds.feature_names) {
    throw Error(fmt::format("{}: model feature names do not match the dataset", model_path.string()));
  }
}
}  // namespace

std::string run_evaluate(const fs::path& dataset_path, const fs::path& model_path,
                         const std::vector<std::size_t>& ks, const fs::path& out_prefix) {
  const Dataset ds = read_dataset(dataset_path);
  const ModelFile mf = read_model(model_path);
  check_compatible(mf.model, ds, model_path);
  const EvalReport report = evaluate(ds, mf.model, ks);
  const std::string text = render_region_match(report) + "\n" + render_quality(report);
  write_report(report, with_suffix(out_prefix, ".json"));
  write_text(with_suffix(out_prefix, ".txt"), text);
  return text;
}

std::string run_compare(const fs::path& dataset_path, const fs::path& model_a,
                        const fs::path& model_b, Metric metric, std::size_t k, double alpha,
                        const CompareOptions& options, const fs::path& out_prefix) {
  const Dataset ds = read_dataset(dataset_path);
  const ModelFile a = read_model(model_a);
  const ModelFile b = read_model(model_b);
  check_compatible(a.model, ds, model_a);
  check_compatible(b.model, ds, model_b);
  const auto result = compare_models(ds, a.model, b.model, metric, k, alpha, options);
  const std::string text = render_significance(result);
  write_text(with_suffix(out_prefix, ".json"), serialize_significance(result));
  write_text(with_suffix(out_prefix, ".txt"), text);
  return text;
}

std::string run_inspect_weights(const fs::path& model_path, const fs::path& dataset_path,
                                const std::string& semantic_feature) {
  const Dataset ds = read_dataset(dataset_path);
  const ModelFile mf = read_model(model_path);
  check_compatible(mf.model, ds, model_path);
  const auto table = feature_importance(mf.model, ds);

  std::string out = fmt::format("{:>4}  {:<24} {:>12} {:>10} {:>12}\n", "rank", "feature", "weight",
                                "stddev", "importance");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    out += fmt::format("{:>4}  {:<24} {:>12.6f} {:>10.6f} {:>12.6f}{}\n", i + 1, row.name, row.weight,
                       row.stddev, row.importance, row.name == semantic_feature ? "  <-- semantic" : "");
  }
  if (ds.feature_index(semantic_feature)) {
    out += fmt::format("semantic feature '{}' ranks {} of {}\n", semantic_feature,
                       importance_rank(table, semantic_feature), table.size());
  }
  return out;
}

}  // namespace locrank
