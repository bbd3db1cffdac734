#include "locrank/objectives.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "locrank/locale.hpp"

namespace locrank {

namespace {

// log(1 + exp(-delta)) without overflow for large |delta|.
double softplus_neg(double delta) {
  return std::max(0.0, -delta) + std::log1p(std::exp(-std::abs(delta)));
}

// sigma(-delta) = 1 / (1 + exp(delta)).
double sigmoid_neg(double delta) {
  if (delta >= 0.0) {
    const double e = std::exp(-delta);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(delta));
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(fmt::format("{}[{}] is not finite", what, i));
  }
}

}  // namespace

PairWeights PairWeights::dense(std::size_t n, std::vector<double> values) {
  if (n == 0 || values.size() != n * n) {
    throw Error(fmt::format("dense pair weights need n*n values (n={}, got {})", n, values.size()));
  }
  PairWeights w;
  w.n_ = n;
  w.values_ = std::move(values);
  return w;
}

PairWeights PairWeights::from_matches(std::span<const int> matches, double eta) {
  const std::size_t n = matches.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) values[i * n + j] = pair_weight(matches[i], matches[j], eta);
  }
  return dense(n, std::move(values));
}

PairwiseLossResult pairwise_loss(std::span<const double> scores, std::span<const int> clicks,
                                 const PairWeights& weights) {
  const std::size_t n = scores.size();
  if (n == 0 || clicks.size() != n) {
    throw Error(fmt::format("pairwise_loss: {} scores vs {} clicks", n, clicks.size()));
  }
  if (!weights.is_uniform() && weights.size() != n) {
    throw Error(fmt::format("pairwise_loss: pair weights sized {} for {} items", weights.size(), n));
  }
  require_finite(scores, "score");

  PairwiseLossResult r;
  r.score_gradient.assign(n, 0.0);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (clicks[i] ? pos : neg).push_back(i);
  r.pair_count = pos.size() * neg.size();
  if (pos.empty() || neg.empty()) {
    r.skipped = true;
    return r;
  }

  double total = 0.0;
  for (std::size_t i : pos) {
    for (std::size_t j : neg) {
      const double w = weights.at(i, j);
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(fmt::format("pair weight ({},{}) = {} is not a finite nonnegative value", i, j, w));
      }
      const double delta = scores[i] - scores[j];
      total += w * softplus_neg(delta);
      r.weight_sum += w;
      const double g = w * sigmoid_neg(delta);
      r.score_gradient[i] -= g;
      r.score_gradient[j] += g;
    }
  }
  if (r.weight_sum <= 0.0) {
    r.skipped = true;
    r.score_gradient.assign(n, 0.0);
    return r;
  }
  r.loss = total / r.weight_sum;
  for (auto& g : r.score_gradient) g /= r.weight_sum;
  return r;
}

std::vector<double> listnet_target(std::span<const double> labels, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(fmt::format("temperature tau must be > 0, got {}", tau));
  }
  if (labels.empty()) throw Error("listnet_target: empty label vector");
  require_finite(labels, "label");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0.0) throw Error(fmt::format("label[{}] = {} is negative", i, labels[i]));
  }
  const double top = *std::max_element(labels.begin(), labels.end());
  std::vector<double> p(labels.size());
  double z = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p[i] = std::exp((labels[i] - top) / tau);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

ListwiseLossResult listnet_loss(std::span<const double> scores, std::span<const double> target) {
  const std::size_t n = scores.size();
  if (n == 0 || target.size() != n) {
    throw Error(fmt::format("listnet_loss: {} scores vs {} targets", n, target.size()));
  }
  require_finite(scores, "score");
  require_finite(target, "target");

  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - top);
  const double log_z = top + std::log(z);

  ListwiseLossResult r;
  r.target.assign(target.begin(), target.end());
  r.score_gradient.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_q = scores[i] - log_z;
    r.loss -= target[i] * log_q;
    r.score_gradient[i] = std::exp(log_q) - target[i];
  }
  return r;
}

bool labels_uniform(std::span<const double> labels) {
  return std::all_of(labels.begin(), labels.end(),
                     [&](double v) { return v == labels.front(); });
}

std::vector<double> project_to_weights(const QueryGroup& group, std::span<const double> score_gradient,
                                       std::size_t dim) {
  std::vector<double> g(dim, 0.0);
  for (std::size_t i = 0; i < group.items.size(); ++i) {
    const double gi = score_gradient[i];
    if (gi == 0.0) continue;
    const auto& x = group.items[i].features;
    for (std::size_t k = 0; k < dim; ++k) g[k] += gi * x[k];
  }
  return g;
}

CombinedLossResult combined_loss(const QueryGroup& group, const LinearModel& model,
                                 const TrainConfig& config, double eta_effective) {
  if (config.lambda_rank < 0.0 || config.lambda_list < 0.0 ||
      config.lambda_rank + config.lambda_list <= 0.0) {
    throw Error("lambda_rank and lambda_list must be >= 0 and not both 0");
  }
  const std::size_t n = group.items.size();
  const std::size_t dim = model.dim();
  const auto scores = model.score_group(group);
  const auto matches = locale_matches(group);

  CombinedLossResult out;
  std::vector<double> score_grad(n, 0.0);

  if (config.lambda_rank > 0.0) {
    std::vector<int> clicks(n);
    for (std::size_t i = 0; i < n; ++i) clicks[i] = group.items[i].clicked ? 1 : 0;
    const auto pr = pairwise_loss(scores, clicks, PairWeights::from_matches(matches, eta_effective));
    if (!pr.skipped) {
      out.has_pair = true;
      out.pair_loss = pr.loss;
      out.loss += config.lambda_rank * pr.loss;
      for (std::size_t i = 0; i < n; ++i) score_grad[i] += config.lambda_rank * pr.score_gradient[i];
    }
  }

  if (config.lambda_list > 0.0) {
    std::vector<double> labels;
    labels.reserve(n);
    for (const auto& item : group.items) {
      if (!item.graded_label) break;
      labels.push_back(static_cast<double>(*item.graded_label));
    }
    if (labels.size() != n) {
      out.listwise_fallback = true;
    } else if (!labels_uniform(labels)) {
      const auto boosted = boost_labels(labels, matches, eta_effective);
      const auto lr = listnet_loss(scores, listnet_target(boosted, config.tau));
      out.has_list = true;
      out.list_loss = lr.loss;
      out.loss += config.lambda_list * lr.loss;
      for (std::size_t i = 0; i < n; ++i) score_grad[i] += config.lambda_list * lr.score_gradient[i];
    }
  }

  out.gradient = project_to_weights(group, score_grad, dim);
  return out;
}

}  // namespace locrank
