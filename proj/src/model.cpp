#include "locrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

namespace locrank {

LinearModel::LinearModel(std::vector<double> weights, std::vector<std::string> feature_names)
    : weights_(std::move(weights)), feature_names_(std::move(feature_names)) {
  if (weights_.size() != feature_names_.size()) {
    throw Error(fmt::format("model has {} weights but {} feature names", weights_.size(),
                            feature_names_.size()));
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!std::isfinite(weights_[k])) {
      throw Error(fmt::format("model weight {} ('{}') is not finite", k, feature_names_[k]));
    }
  }
}

LinearModel LinearModel::zeros(std::vector<std::string> feature_names) {
  std::vector<double> w(feature_names.size(), 0.0);
  return LinearModel(std::move(w), std::move(feature_names));
}

double LinearModel::score(std::span<const double> features) const {
  if (features.size() != weights_.size()) {
    throw Error(fmt::format("feature dimension mismatch: model expects D={}, got D={}",
                            weights_.size(), features.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * features[k];
  return s;
}

std::vector<double> LinearModel::score_group(const QueryGroup& group) const {
  std::vector<double> scores;
  scores.reserve(group.items.size());
  for (const auto& item : group.items) scores.push_back(score(item.features));
  return scores;
}

std::vector<std::size_t> rank_by_scores(const QueryGroup& group, std::span<const double> scores) {
  if (scores.size() != group.items.size()) {
    throw Error(fmt::format("qid={}: {} scores for {} items", group.qid, scores.size(),
                            group.items.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return group.items[a].item_id < group.items[b].item_id;
  });
  return order;
}

std::vector<std::size_t> rank(const LinearModel& model, const QueryGroup& group) {
  const auto scores = model.score_group(group);
  return rank_by_scores(group, scores);
}

std::vector<FeatureImportance> feature_importance(const LinearModel& model,
                                                  const Dataset& dataset) {
  const std::size_t dim = model.dim();
  if (dataset.feature_dim != dim) {
    throw Error(fmt::format("feature dimension mismatch: model expects D={}, dataset has D={}",
                            dim, dataset.feature_dim));
  }
  if (dataset.feature_names != model.feature_names()) {
    throw Error("model feature names do not match dataset feature names");
  }

  // Two-pass mean / variance per column.
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  std::size_t count = 0;
  for (const auto& q : dataset.queries) {
    for (const auto& item : q.items) {
      for (std::size_t k = 0; k < dim; ++k) mean[k] += item.features[k];
      ++count;
    }
  }
  if (count == 0) throw Error("feature importance needs a nonempty dataset");
  for (auto& m : mean) m /= static_cast<double>(count);
  for (const auto& q : dataset.queries) {
    for (const auto& item : q.items) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = item.features[k] - mean[k];
        var[k] += d * d;
      }
    }
  }

  std::vector<FeatureImportance> table(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    auto& row = table[k];
    row.index = k;
    row.name = model.feature_names()[k];
    row.weight = model.weights()[k];
    row.stddev = std::sqrt(var[k] / static_cast<double>(count));
    row.importance = std::abs(row.weight) * row.stddev;
  }
  std::stable_sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
    return a.importance > b.importance;
  });
  return table;
}

std::size_t importance_rank(const std::vector<FeatureImportance>& table,
                            const std::string& feature_name) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].name == feature_name) return i + 1;
  }
  throw Error(fmt::format("feature '{}' not in importance table", feature_name));
}

}  // namespace locrank
