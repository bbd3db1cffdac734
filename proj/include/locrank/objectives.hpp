#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "locrank/core.hpp"
#include "locrank/model.hpp"
#include "locrank/train_config.hpp"

namespace locrank {

/// Weights w_ij over clicked (i) x unclicked (j) pairs. Either uniform, or a
/// dense n x n row-major matrix indexed by item position.
class PairWeights {
 public:
  static PairWeights uniform() { return PairWeights{}; }
  static PairWeights dense(std::size_t n, std::vector<double> values);
  /// w_ij from locale match indicators and boost factor.
  static PairWeights from_matches(std::span<const int> matches, double eta);

  bool is_uniform() const { return n_ == 0; }
  double at(std::size_t i, std::size_t j) const { return n_ == 0 ? 1.0 : values_[i * n_ + j]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct PairwiseLossResult {
  double loss = 0.0;
  std::vector<double> score_gradient;  // d loss / d s, length n
  std::vector<double> gradient;        // d loss / d w, length D (empty without features)
  std::size_t pair_count = 0;
  double weight_sum = 0.0;
  bool skipped = false;
};

struct ListwiseLossResult {
  double loss = 0.0;
  std::vector<double> score_gradient;
  std::vector<double> gradient;
  std::vector<double> target;
  bool skipped = false;
  std::string skip_reason;
};

/// Weighted RankNet loss, normalized by the total pair weight. Skipped (zero
/// loss and gradient) when either side of the click partition is empty.
PairwiseLossResult pairwise_loss(std::span<const double> scores, std::span<const int> clicks,
                                 const PairWeights& weights);

/// Softmax of labels / tau with max subtraction.
std::vector<double> listnet_target(std::span<const double> labels, double tau);

/// Top-1 ListNet cross-entropy -sum p log softmax(s). Gradient wrt scores is q - p.
ListwiseLossResult listnet_loss(std::span<const double> scores, std::span<const double> target);

/// True when every label equals the first one (no graded signal).
bool labels_uniform(std::span<const double> labels);

/// Maps a score-space gradient g to weight space: X^T g.
std::vector<double> project_to_weights(const QueryGroup& group, std::span<const double> score_gradient,
                                       std::size_t dim);

struct CombinedLossResult {
  double loss = 0.0;
  std::vector<double> gradient;
  bool has_pair = false;
  bool has_list = false;
  bool listwise_fallback = false;  // group lacked a complete set of graded labels
  double pair_loss = 0.0;
  double list_loss = 0.0;

  bool contributes() const { return has_pair || has_list; }
};

/// lambda_rank * locale-weighted RankNet + lambda_list * locale-shaped ListNet
/// for one group at boost factor `eta_effective`. The list term needs a graded
/// label on every item and is dropped when the labels carry no signal; the pair
/// term is dropped when the group has no clicked or no unclicked items.
CombinedLossResult combined_loss(const QueryGroup& group, const LinearModel& model,
                                 const TrainConfig& config, double eta_effective);

}  // namespace locrank
