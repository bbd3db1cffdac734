#pragma once

#include <span>
#include <string>
#include <vector>

#include "locrank/core.hpp"

namespace locrank {

/// Linear scorer s(q,d) = w . phi(q,d). There is no bias term: every loss and
/// metric in the toolkit is invariant to a constant score offset.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::vector<double> weights, std::vector<std::string> feature_names);

  /// All-zero model over the given feature names.
  static LinearModel zeros(std::vector<std::string> feature_names);

  std::size_t dim() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  double score(std::span<const double> features) const;
  /// Scores for every item of a group, in item order.
  std::vector<double> score_group(const QueryGroup& group) const;

  bool operator==(const LinearModel&) const = default;

 private:
  std::vector<double> weights_;
  std::vector<std::string> feature_names_;
};

/// Item indices ordered by descending score; ties go to the lexicographically
/// smaller item_id.
std::vector<std::size_t> rank_by_scores(const QueryGroup& group, std::span<const double> scores);
std::vector<std::size_t> rank(const LinearModel& model, const QueryGroup& group);

struct FeatureImportance {
  std::size_t index = 0;
  std::string name;
  double weight = 0.0;
  double stddev = 0.0;
  double importance = 0.0;  // |weight| * stddev
};

/// Standardized weight magnitudes, sorted by descending importance
/// (ties by ascending feature index). Stddev is the population stddev of each
/// column over every item in the dataset.
std::vector<FeatureImportance> feature_importance(const LinearModel& model,
                                                  const Dataset& dataset);

/// 1-based position of `feature_name` in an importance table.
std::size_t importance_rank(const std::vector<FeatureImportance>& table,
                            const std::string& feature_name);

}  // namespace locrank
