#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "locrank/simulator.hpp"
#include "locrank/trainer.hpp"
#include "oracles.hpp"

using namespace locrank;
using fixture::item;

namespace {

/// Clicked items have a larger first feature; the second is noise.
Dataset separable(std::size_t queries, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<QueryGroup> groups;
  for (std::size_t q = 0; q < queries; ++q) {
    QueryGroup g;
    g.qid = "q" + std::to_string(q);
    g.locale = q % 2 == 0 ? "JP" : "US";
    for (int i = 0; i < 6; ++i) {
      const bool clicked = i < 2;
      g.items.push_back(item("d" + std::to_string(i), {clicked ? 1.0 : -1.0, noise(rng)}, clicked,
                             clicked ? 2 + i : i % 2, fixture::regions({i % 3 == 0 ? "JP" : "US"})));
    }
    groups.push_back(std::move(g));
  }
  return fixture::dataset(std::move(groups), 2);
}

SimConfig small_sim(std::uint64_t seed) {
  SimConfig c;
  c.seed = seed;
  c.locales = {{"US", 60, 200}, {"JP", 30, 60}, {"FR", 30, 60}};
  return c;
}

}  // namespace

TEST_CASE("separable clicks drive the pairwise loss below a tenth of its start") {
  TrainConfig cfg;
  cfg.lambda_list = 0.0;
  cfg.eta = 1.0;
  cfg.epochs = 200;
  cfg.learning_rate = 0.5;
  const auto r = train(separable(20, 1), cfg);
  const auto& h = r.history.records;
  CHECK(h.front().pair_loss == doctest::Approx(std::log(2.0)));
  CHECK(h.back().pair_loss < 0.1 * h.front().pair_loss);
  CHECK(r.model.weights()[0] > 0.0);
}

TEST_CASE("identical features give an exactly zero gradient") {
  QueryGroup g;
  g.qid = "q";
  g.items = {item("a", {0.4, -1.2}, true), item("b", {0.4, -1.2}, false)};
  TrainConfig cfg;
  cfg.init = InitKind::small_uniform;
  cfg.seed = 99;
  cfg.epochs = 5;
  const auto ds = fixture::dataset({g}, 2);
  const auto r = train(ds, cfg);
  cfg.epochs = 1;
  cfg.learning_rate = 1e-9;
  const auto start = train(ds, cfg).model.weights();
  CHECK(r.model.weights() == start);
  for (const auto& rec : r.history.records) CHECK(rec.grad_norm == 0.0);
}

TEST_CASE("epoch-1 loss does not depend on the warm-up length") {
  const auto ds = separable(10, 2);
  TrainConfig a;
  a.eta = 3.0;
  a.epochs = 8;
  a.warmup_epochs = 7;
  TrainConfig b = a;
  b.warmup_epochs = 0;
  const auto ha = train(ds, a).history.records;
  const auto hb = train(ds, b).history.records;
  CHECK(ha.front().eta_effective == 1.0);
  CHECK(hb.front().eta_effective > 1.0);
  // Zero init scores every item 0, so the epoch-1 loss is eta-independent up to rounding.
  CHECK(std::abs(ha.front().combined_loss - hb.front().combined_loss) < 1e-12);
  CHECK(hb.back().eta_effective == 3.0);
}

TEST_CASE("training is deterministic and the parallel kernel matches the serial one") {
  const auto ds = simulate(small_sim(5));
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.init = InitKind::small_uniform;
  cfg.seed = 4;
  const auto s1 = train(ds, cfg, {}, Execution::serial);
  const auto s2 = train(ds, cfg, {}, Execution::serial);
  const auto p = train(ds, cfg, {}, Execution::parallel);
  CHECK(s1.model == s2.model);
  CHECK(s1.model == p.model);
  CHECK(s1.history == p.history);

  const LinearModel m = s1.model;
  for (int epoch : {1, 7, 15}) {
    CHECK(epoch_gradient_serial(ds, m, cfg, epoch, {}) == epoch_gradient_parallel(ds, m, cfg, epoch, {}));
  }
}

TEST_CASE("small learning rate gives a nonincreasing loss at fixed eta") {
  const auto ds = simulate(small_sim(6));
  TrainConfig cfg;
  cfg.eta = 2.0;
  cfg.warmup_epochs = 0;
  cfg.epochs = 1;
  cfg.learning_rate = 1e-3;
  // Hold eta fixed by pinning the ramp: with E = 1 every epoch evaluates at the final eta.
  std::vector<double> losses;
  LinearModel m = LinearModel::zeros(ds.feature_names);
  for (int step = 0; step < 30; ++step) {
    const auto eg = epoch_gradient_serial(ds, m, cfg, 1, {});
    losses.push_back(eg.combined_loss_sum / static_cast<double>(eg.contributing));
    auto w = m.weights();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * eg.gradient[k];
    m = LinearModel(w, ds.feature_names);
  }
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1]);
}

TEST_CASE("masked columns stay at zero") {
  const auto ds = separable(10, 3);
  TrainConfig cfg;
  cfg.init = InitKind::small_uniform;
  cfg.epochs = 20;
  const auto r = train(ds, cfg, {true, false});
  CHECK(r.model.weights()[0] == 0.0);
  CHECK(r.model.weights()[1] != 0.0);
  CHECK_THROWS_AS(train(ds, cfg, {true}), Error);
}

TEST_CASE("variants") {
  const auto ds = simulate(small_sim(8));
  TrainConfig base;
  base.epochs = 20;
  base.init = InitKind::small_uniform;

  SUBCASE("prod freezes the semantic column") {
    const auto r = train_variant(ds, Variant::prod_baseline, base);
    CHECK(r.model.weights()[*ds.feature_index("semantic_similarity")] == 0.0);
    const auto cfg = variant_config(Variant::prod_baseline, base);
    CHECK(cfg.lambda_list == 0.0);
    CHECK(cfg.eta == 1.0);
  }
  SUBCASE("la-mo at eta 1 is mo") {
    base.eta = 1.0;
    const auto a = train_variant(ds, Variant::la_mo, base);
    const auto b = train_variant(ds, Variant::mo, base);
    CHECK(a.model == b.model);
    CHECK(a.history == b.history);
  }
  SUBCASE("spelling") {
    for (auto v : {Variant::prod_baseline, Variant::mo, Variant::la_mo}) {
      CHECK(parse_variant(to_string(v)) == v);
    }
    CHECK(std::string(to_string(Variant::la_mo)) == "la-mo");
    CHECK_THROWS_AS(parse_variant("lamo"), Error);
  }
}

TEST_CASE("datasets without any supervision are rejected") {
  QueryGroup g;
  g.qid = "q";
  g.items = {item("a", {1.0}, false), item("b", {2.0}, false)};
  TrainConfig cfg;
  cfg.epochs = 3;
  CHECK_THROWS_WITH_AS(train(fixture::dataset({g}, 1), cfg), doctest::Contains("no supervision"), Error);
}

TEST_CASE("divergence names the epoch") {
  const auto ds = separable(4, 4);
  TrainConfig cfg;
  cfg.init = InitKind::small_uniform;
  cfg.learning_rate = 1.0;
  cfg.l2 = 1e200;
  cfg.epochs = 5;
  CHECK_THROWS_WITH_AS(train(ds, cfg), doctest::Contains("diverged at epoch"), Error);
}

TEST_CASE("full withholding falls back to click supervision") {
  auto c = small_sim(10);
  c.label_withhold_fraction = 1.0;
  const auto ds = simulate(c);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto mo = train_variant(ds, Variant::mo, cfg);
  CHECK(mo.fallback_queries == ds.queries.size());
  auto click_only = variant_config(Variant::mo, cfg);
  click_only.lambda_list = 0.0;
  CHECK(train(ds, click_only).model == mo.model);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.check());
  auto bad = cfg;
  bad.lambda_rank = bad.lambda_list = 0.0;
  CHECK_THROWS_AS(bad.check(), Error);
  bad = cfg;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.check(), Error);
  bad = cfg;
  bad.eta = 0.9;
  CHECK_THROWS_AS(bad.check(), Error);
  bad = cfg;
  bad.warmup_epochs = bad.epochs;
  CHECK_THROWS_AS(bad.check(), Error);
  bad = cfg;
  bad.per_locale_eta["JP"] = 0.5;
  CHECK_THROWS_AS(bad.check(), Error);
  cfg.per_locale_eta["JP"] = 4.0;
  CHECK(cfg.eta_for("JP") == 4.0);
  CHECK(cfg.eta_for("US") == 2.0);
  CHECK(cfg.eta_for(std::nullopt) == 2.0);
}
