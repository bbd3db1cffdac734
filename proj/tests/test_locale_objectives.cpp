#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "locrank/locale.hpp"
#include "locrank/objectives.hpp"
#include "oracles.hpp"

using namespace locrank;
using fixture::item;

TEST_CASE("locale_match") {
  CHECK(locale_match("JP", fixture::regions({"JP", "US"})) == 1);
  CHECK(locale_match("FR", fixture::regions({"US"})) == 0);
  CHECK(locale_match(std::nullopt, fixture::regions({"US"})) == 0);
  CHECK(locale_match("US", std::nullopt) == 0);
  CHECK(locale_match("US", fixture::regions({})) == 0);
}

TEST_CASE("pair_weight") {
  CHECK(pair_weight(1, 0, 2.0) == 2.0);
  CHECK(pair_weight(1, 1, 2.0) == 1.0);
  CHECK(pair_weight(0, 0, 5.0) == 1.0);
  CHECK(pair_weight(0, 1, 5.0) == 1.0);
  for (int a : {0, 1})
    for (int b : {0, 1}) CHECK(pair_weight(a, b, 1.0) == 1.0);
  CHECK_THROWS_AS(pair_weight(1, 0, 0.5), Error);
}

TEST_CASE("boost_labels") {
  const std::vector<double> r = {3, 2, 0};
  const std::vector<int> m = {1, 0, 1};
  CHECK(boost_labels(r, m, 2.0) == std::vector<double>{6, 2, 0});
  CHECK(boost_labels(r, m, 1.0) == r);
  const std::vector<double> zeros = {0, 0};
  const std::vector<int> both = {1, 1};
  CHECK(boost_labels(zeros, both, 10.0) == zeros);
  const std::vector<int> short_m = {1};
  CHECK_THROWS_AS(boost_labels(r, short_m, 2.0), Error);
}

TEST_CASE("curriculum examples") {
  CHECK(effective_eta(10, {10, 0, 3.0}) == 3.0);
  CHECK(effective_eta(2, {10, 2, 3.0}) == 1.0);
  CHECK(effective_eta(6, {10, 2, 3.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(effective_eta(0, {10, 2, 3.0}), Error);
  CHECK_THROWS_AS(effective_eta(11, {10, 2, 3.0}), Error);
  CHECK_THROWS_AS(effective_eta(1, {10, 10, 3.0}), Error);
}

TEST_CASE("pairwise loss examples") {
  const std::vector<int> clicks = {1, 0};
  const std::vector<double> tied = {0.3, 0.3};
  CHECK(pairwise_loss(tied, clicks, PairWeights::uniform()).loss ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const std::vector<double> far = {20.0, 0.0};
  CHECK(pairwise_loss(far, clicks, PairWeights::uniform()).loss < 1e-8);

  const std::vector<int> all_clicked = {1, 1};
  CHECK(pairwise_loss(tied, all_clicked, PairWeights::uniform()).skipped);

  const std::vector<double> bad = {NAN, 0.0};
  CHECK_THROWS_AS(pairwise_loss(bad, clicks, PairWeights::uniform()), Error);
  CHECK_THROWS_AS(pairwise_loss(tied, clicks, PairWeights::dense(2, {1, -1, 1, 1})), Error);
}

TEST_CASE("pairwise loss matches the double-loop oracle with mixed weights") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::bernoulli_distribution coin(0.5);
  const std::vector<int> clicks = {1, 0, 1, 0};
  for (double eta : {1.0, 2.0, 5.0}) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> s(4);
      std::vector<int> m(4);
      for (std::size_t i = 0; i < 4; ++i) {
        s[i] = n01(rng);
        m[i] = coin(rng) ? 1 : 0;
      }
      const double got = pairwise_loss(s, clicks, PairWeights::from_matches(m, eta)).loss;
      const double want = oracle::pairwise_loss(
          s, clicks, [&](std::size_t i, std::size_t j) { return m[i] == 1 && m[j] == 0 ? eta : 1.0; });
      CHECK(std::abs(got - want) < 1e-12);
    }
  }
}

TEST_CASE("scaling every pair weight by a constant leaves the loss unchanged") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const std::vector<int> clicks = {1, 0, 0, 1, 0};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s(5), w(25), w3(25);
    for (auto& v : s) v = u(rng) * 3.0 - 3.0;
    for (std::size_t k = 0; k < 25; ++k) {
      w[k] = u(rng);
      w3[k] = 3.7 * w[k];
    }
    const auto a = pairwise_loss(s, clicks, PairWeights::dense(5, w));
    const auto b = pairwise_loss(s, clicks, PairWeights::dense(5, w3));
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  }
}

TEST_CASE("listnet target examples") {
  const std::vector<double> flat = {2, 2, 2};
  for (double tau : {0.1, 1.0, 7.0}) {
    for (double p : listnet_target(flat, tau)) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  const std::vector<double> r = {3, 0};
  const auto p = listnet_target(r, 1.0);
  CHECK(p[0] == doctest::Approx(0.952574).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.047426).epsilon(1e-5));
  CHECK(std::abs(p[0] - std::exp(3.0) / (std::exp(3.0) + 1.0)) < 1e-15);
  CHECK(listnet_target(r, 0.01)[0] > 1.0 - 1e-10);
  CHECK_THROWS_AS(listnet_target(r, 0.0), Error);

  const std::vector<double> big = {3000, 0};  // no overflow with max subtraction
  CHECK(listnet_target(big, 1.0)[0] == 1.0);
}

TEST_CASE("listnet loss examples") {
  const std::vector<double> s = {0.7, 0.7, 0.7, 0.7};
  const std::vector<double> u = {0.25, 0.25, 0.25, 0.25};
  CHECK(listnet_loss(s, u).loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<double> peaked = {60.0, 0.0, 0.0};
  const std::vector<double> onehot = {1.0, 0.0, 0.0};
  CHECK(listnet_loss(peaked, onehot).loss < 1e-20);

  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> sc(5), r(5);
    for (std::size_t i = 0; i < 5; ++i) {
      sc[i] = n01(rng);
      r[i] = std::floor(std::abs(n01(rng)) * 2.0);
    }
    const auto p = listnet_target(r, 1.0);
    CHECK(std::abs(listnet_loss(sc, p).loss - oracle::listnet_loss(sc, p)) < 1e-12);
  }
  const std::vector<double> bad = {INFINITY, 0.0};
  const std::vector<double> half = {0.5, 0.5};
  CHECK_THROWS_AS(listnet_loss(bad, half), Error);
}

TEST_CASE("listnet loss is shift invariant in the scores") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> s(6), t(6), r(6);
    for (std::size_t i = 0; i < 6; ++i) {
      s[i] = n01(rng);
      t[i] = s[i] + 4.25;
      r[i] = static_cast<double>(rep % 4 == 0 ? 1 : i % 4);
    }
    const auto p = listnet_target(r, 1.0);
    CHECK(listnet_loss(s, p).loss == doctest::Approx(listnet_loss(t, p).loss).epsilon(1e-12));
  }
}

TEST_CASE("score gradients match finite differences") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 6;
    std::vector<double> s(n), r(n);
    std::vector<int> clicks(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = n01(rng);
      r[i] = static_cast<double>((i * 7 + rep) % 4);
      clicks[i] = i % 2 == 0 ? 1 : 0;
      m[i] = (i + rep) % 3 == 0 ? 1 : 0;
    }
    const auto w = PairWeights::from_matches(m, 3.0);
    const auto p = listnet_target(boost_labels(r, m, 3.0), 1.0);
    const auto pr = pairwise_loss(s, clicks, w);
    const auto lr = listnet_loss(s, p);
    const auto fd_pair =
        oracle::finite_difference([&](const std::vector<double>& x) { return pairwise_loss(x, clicks, w).loss; }, s);
    const auto fd_list =
        oracle::finite_difference([&](const std::vector<double>& x) { return listnet_loss(x, p).loss; }, s);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(pr.score_gradient[i] == doctest::Approx(fd_pair[i]).epsilon(1e-6));
      CHECK(lr.score_gradient[i] == doctest::Approx(fd_list[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("combined loss") {
  TrainConfig cfg;
  cfg.lambda_rank = 0.7;
  cfg.lambda_list = 1.3;
  cfg.tau = 0.8;

  QueryGroup g;
  g.qid = "q";
  g.locale = "JP";
  g.items = {item("a", {0.2, -0.1, 0.5}, true, 3, fixture::regions({"JP"})),
             item("b", {0.9, 0.3, -0.2}, false, 1, fixture::regions({"US"})),
             item("c", {-0.4, 0.8, 0.1}, true, 2, std::nullopt),
             item("d", {0.1, 0.1, 0.1}, false, 0, fixture::regions({"JP", "US"})),
             item("e", {0.6, -0.7, 0.3}, false, 2, fixture::regions({"FR"}))};
  const LinearModel model({0.4, -0.3, 0.9}, {"f0", "f1", "f2"});
  const auto s = model.score_group(g);
  const std::vector<int> clicks = {1, 0, 1, 0, 0};
  const std::vector<double> labels = {3, 1, 2, 0, 2};

  SUBCASE("eta = 1 recovers the base objectives") {
    const auto got = combined_loss(g, model, cfg, 1.0);
    const double base = cfg.lambda_rank * oracle::pairwise_loss(s, clicks, [](auto, auto) { return 1.0; }) +
                        cfg.lambda_list * oracle::listnet_loss(s, oracle::softmax_target(labels, cfg.tau));
    CHECK(std::abs(got.loss - base) < 1e-12);
  }
  SUBCASE("eta = 2 equals the hand composition of the pieces") {
    const std::vector<int> m = {1, 0, 0, 1, 0};
    CHECK(locale_matches(g) == m);
    const auto pr = pairwise_loss(s, clicks, PairWeights::from_matches(m, 2.0));
    const auto lr = listnet_loss(s, listnet_target(boost_labels(labels, m, 2.0), cfg.tau));
    const auto got = combined_loss(g, model, cfg, 2.0);
    CHECK(std::abs(got.loss - (0.7 * pr.loss + 1.3 * lr.loss)) < 1e-12);
    CHECK(got.has_pair);
    CHECK(got.has_list);
  }
  SUBCASE("groups without graded labels use the pair term only") {
    for (auto& it : g.items) it.graded_label.reset();
    const auto got = combined_loss(g, model, cfg, 2.0);
    const auto pr = pairwise_loss(s, clicks, PairWeights::from_matches(locale_matches(g), 2.0));
    CHECK(got.listwise_fallback);
    CHECK_FALSE(got.has_list);
    CHECK(std::abs(got.loss - 0.7 * pr.loss) < 1e-12);
  }
  SUBCASE("uniform labels drop the list term") {
    for (auto& it : g.items) it.graded_label = 2;
    const auto got = combined_loss(g, model, cfg, 2.0);
    CHECK_FALSE(got.has_list);
    CHECK_FALSE(got.listwise_fallback);
  }
  SUBCASE("no clicks drops the pair term") {
    for (auto& it : g.items) it.clicked = false;
    const auto got = combined_loss(g, model, cfg, 2.0);
    CHECK_FALSE(got.has_pair);
    CHECK(got.has_list);
  }
  SUBCASE("both lambdas zero is rejected") {
    cfg.lambda_rank = 0.0;
    cfg.lambda_list = 0.0;
    CHECK_THROWS_AS(combined_loss(g, model, cfg, 1.0), Error);
  }
}

TEST_CASE("all-unmatched groups recover the base objectives for any eta") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = oracle::random_group(rng, 8, 4);
    for (auto& it : g.items) it.eligible_regions = fixture::regions({"US"});
    const LinearModel model({0.3, -0.2, 0.5, 0.1}, {"a", "b", "c", "d"});
    TrainConfig cfg;
    const auto base = combined_loss(g, model, cfg, 1.0);
    const auto boosted = combined_loss(g, model, cfg, 5.0);
    CHECK(std::abs(base.loss - boosted.loss) < 1e-12);
  }
}
