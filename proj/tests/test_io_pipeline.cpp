#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "locrank/io.hpp"
#include "locrank/locale.hpp"
#include "locrank/pipeline.hpp"

using namespace locrank;
using fixture::item;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("locrank_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SimConfig small_sim() {
  SimConfig c;
  c.locales = {{"US", 50, 100}, {"JP", 21, 40}, {"FR", 20, 40}, {"DE", 19, 40}, {"GB", 23, 40}};
  return c;
}

Dataset parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "mem");
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("dataset round trip") {
  TempDir tmp("ds");
  auto ds = simulate(small_sim());
  // Awkward values that a lossy float printer would mangle.
  ds.queries[0].items[0].features[0] = 0.1 + 0.2;
  ds.queries[0].items[1].features[1] = -1e-310;
  ds.queries[1].locale.reset();
  ds.queries[1].items[0].eligible_regions = std::set<std::string>{};
  ds.queries[1].items[1].eligible_regions.reset();
  write_dataset(ds, tmp.path / "a.jsonl");
  const auto back = read_dataset(tmp.path / "a.jsonl");
  CHECK(back == ds);
  CHECK(bit_equal(back.queries[0].items[0].features, ds.queries[0].items[0].features));
  write_dataset(back, tmp.path / "b.jsonl");
  CHECK(read_text(tmp.path / "a.jsonl") == read_text(tmp.path / "b.jsonl"));
}

TEST_CASE("dataset parsing") {
  const std::string header =
      R"({"format":"locrank.dataset","version":1,"feature_dim":2,"feature_names":["x","y"]})";
  const std::string q1 =
      R"({"qid":"q1","locale":"JP","bucket":"head","items":[{"item_id":"a","features":[1,2],"clicked":true}]})";

  SUBCASE("missing eligible_regions means unknown") {
    const auto ds = parse_text(header + "\n" + q1 + "\n");
    REQUIRE(ds.queries.size() == 1);
    CHECK_FALSE(ds.queries[0].items[0].eligible_regions.has_value());
    CHECK(locale_matches(ds.queries[0]) == std::vector<int>{0});
  }
  SUBCASE("truncated last line names the line") {
    CHECK_THROWS_WITH_AS(parse_text(header + "\n" + q1), doctest::Contains("mem:2"), Error);
    CHECK_THROWS_WITH_AS(parse_text(header + "\n" + q1.substr(0, 40) + "\n"), doctest::Contains("mem:2"),
                         Error);
  }
  SUBCASE("dimension mismatch against the header") {
    std::string bad = q1;
    bad.replace(bad.find("[1,2]"), 5, "[1,2,3]");
    CHECK_THROWS_WITH_AS(parse_text(header + "\n" + bad + "\n"), doctest::Contains("mem:2"), Error);
  }
  SUBCASE("wrong field type names the field") {
    std::string bad = q1;
    bad.replace(bad.find("true"), 4, "\"yes\"");
    CHECK_THROWS_WITH_AS(parse_text(header + "\n" + bad + "\n"), doctest::Contains("clicked"), Error);
  }
}

TEST_CASE("dataset digest tracks content") {
  auto ds = simulate(small_sim());
  const auto d0 = dataset_digest(ds);
  CHECK(d0.size() == 64);
  CHECK(dataset_digest(ds) == d0);
  ds.queries[3].items[2].clicked = !ds.queries[3].items[2].clicked;
  CHECK(dataset_digest(ds) != d0);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("model round trip is bit exact") {
  TempDir tmp("model");
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n01;
  std::vector<double> w(7);
  for (auto& v : w) v = n01(rng) * 1e-3;
  w[3] = 5e-324;
  ModelFile mf;
  mf.model = LinearModel(w, {"a", "b", "c", "d", "e", "f", "g"});
  TrainConfig cfg;
  cfg.per_locale_eta["JP"] = 3.5;
  cfg.init = InitKind::small_uniform;
  mf.train_config = cfg;
  mf.variant = "la-mo";
  mf.seed = 18446744073709551615ULL;
  mf.dataset_digest = sha256_hex("x");
  write_model(mf, tmp.path / "m.json");
  const auto back = read_model(tmp.path / "m.json");
  CHECK(back == mf);
  CHECK(bit_equal(back.model.weights(), w));
  CHECK(serialize_model(back) == serialize_model(mf));
}

TEST_CASE("config files") {
  TempDir tmp("cfg");
  TrainConfig t;
  t.eta = 3.0;
  t.per_locale_eta = {{"JP", 2.5}, {"FR", 1.5}};
  write_train_config(t, tmp.path / "t.json");
  CHECK(read_train_config(tmp.path / "t.json") == t);

  SimConfig s = small_sim();
  s.local_relevance = {0.1, 0.2, 0.3, 0.4};
  write_sim_config(s, tmp.path / "s.json");
  CHECK(read_sim_config(tmp.path / "s.json") == s);

  CHECK(parse_train_config("{}", "mem") == TrainConfig{});
  CHECK(parse_train_config(R"({"eta": 4})", "mem").eta == 4.0);
  CHECK_THROWS_WITH_AS(parse_train_config(R"({"lambda_rank":0,"lambda_list":0})", "mem"),
                       doctest::Contains("lambda"), Error);
  CHECK_THROWS_WITH_AS(parse_train_config(R"({"etaa": 2})", "mem"), doctest::Contains("etaa"), Error);
  CHECK_THROWS_AS(parse_sim_config(R"({"list_size": "twenty"})", "mem"), Error);
}

TEST_CASE("history and report round trips") {
  TempDir tmp("hist");
  TrainConfig cfg;
  cfg.epochs = 6;
  const auto ds = simulate(small_sim());
  const auto r = train(ds, cfg);
  write_history(r.history, tmp.path / "h.csv");
  CHECK(read_history(tmp.path / "h.csv") == r.history);

  const std::vector<std::size_t> ks = {5, 20};
  const auto report = evaluate(ds, r.model, ks);
  write_report(report, tmp.path / "r.json");
  CHECK(read_report(tmp.path / "r.json") == report);
}

TEST_CASE("split by qid") {
  const auto ds = simulate(small_sim());
  const auto [train, eval] = split_by_qid(ds, 0.8);
  CHECK(train.queries.size() + eval.queries.size() == ds.queries.size());
  for (const auto& spec : small_sim().locales) {
    auto count = [&](const Dataset& d) {
      return std::count_if(d.queries.begin(), d.queries.end(),
                           [&](const QueryGroup& q) { return *q.locale == spec.code; });
    };
    CHECK(std::abs(static_cast<double>(count(train)) - 0.8 * spec.query_count) <= 1.0);
    CHECK(std::abs(static_cast<double>(count(eval)) - 0.2 * spec.query_count) <= 1.0);
  }
  CHECK(split_by_qid(ds, 0.8).first == train);
}

TEST_CASE("simulate workflow is reproducible and covers every locale") {
  TempDir a("sim_a"), b("sim_b");
  const auto sa = run_simulate(SimConfig{}, a.path, 0.8);
  const auto sb = run_simulate(SimConfig{}, b.path, 0.8);
  CHECK(sa.manifest == sb.manifest);
  CHECK(read_text(a.path / "manifest.json") == read_text(b.path / "manifest.json"));
  std::set<std::string> locales;
  for (const auto& q : read_dataset(a.path / "all.jsonl").queries) locales.insert(*q.locale);
  CHECK(locales == std::set<std::string>{"US", "JP", "FR", "DE", "GB"});
}

TEST_CASE("train, evaluate, compare and inspect workflows") {
  TempDir tmp("flow");
  auto sim = small_sim();
  sim.label_withhold_fraction = 0.3;
  run_simulate(sim, tmp.path, 0.8);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto mo = run_train(tmp.path / "train.jsonl", cfg, Variant::mo, tmp.path / "mo.json");
  CHECK(mo.fallback_queries > 0);
  CHECK(mo.text.find("warning") != std::string::npos);
  run_train(tmp.path / "train.jsonl", cfg, Variant::prod_baseline, tmp.path / "prod.json");
  CHECK(fs::exists(history_path_for(tmp.path / "mo.json")));

  const std::vector<std::size_t> ks = {5, 20};
  const auto text = run_evaluate(tmp.path / "eval.jsonl", tmp.path / "mo.json", ks, tmp.path / "ev");
  CHECK(text.find("JP") != std::string::npos);
  CHECK(fs::exists(tmp.path / "ev.json"));
  CHECK(fs::exists(tmp.path / "ev.txt"));

  run_compare(tmp.path / "eval.jsonl", tmp.path / "prod.json", tmp.path / "mo.json", Metric::ndcg, 20,
              0.05, {}, tmp.path / "cmp");
  CHECK(fs::exists(tmp.path / "cmp.txt"));

  const auto table = run_inspect_weights(tmp.path / "prod.json", tmp.path / "eval.jsonl", "semantic_similarity");
  CHECK(table.find("semantic_similarity") != std::string::npos);

  // A model over different columns is rejected.
  ModelFile other;
  other.model = LinearModel::zeros({"x", "y"});
  write_model(other, tmp.path / "other.json");
  CHECK_THROWS_WITH_AS(run_evaluate(tmp.path / "eval.jsonl", tmp.path / "other.json", ks, tmp.path / "x"),
                       doctest::Contains("dimension mismatch"), Error);
}
