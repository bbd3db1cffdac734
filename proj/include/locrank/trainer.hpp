#pragma once

#include <string>
#include <vector>

#include "locrank/core.hpp"
#include "locrank/model.hpp"
#include "locrank/objectives.hpp"
#include "locrank/train_config.hpp"

namespace locrank {

enum class Variant { prod_baseline, mo, la_mo };

/// CLI spelling: "prod", "mo", "la-mo".
const char* to_string(Variant variant);
Variant parse_variant(const std::string& text);

/// Per-query kernels either run on one thread or fan out over OpenMP threads.
/// Both paths reduce in query order and give bit-identical results.
enum class Execution { serial, parallel };

struct EpochRecord {
  int epoch = 0;
  double eta_effective = 1.0;
  double pair_loss = 0.0;      // mean over queries with a pair term
  double list_loss = 0.0;      // mean over queries with a list term
  double combined_loss = 0.0;  // mean over contributing queries
  double grad_norm = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  bool operator==(const TrainHistory&) const = default;
};

/// Sum of per-query objective terms at fixed weights.
struct EpochGradient {
  std::vector<double> gradient;  // mean over contributing queries, masked columns zeroed
  double pair_loss_sum = 0.0;
  double list_loss_sum = 0.0;
  double combined_loss_sum = 0.0;
  std::size_t pair_queries = 0;
  std::size_t list_queries = 0;
  std::size_t contributing = 0;
  std::size_t fallback_queries = 0;  // groups lacking complete graded labels

  bool operator==(const EpochGradient&) const = default;
};

/// Full-batch objective and gradient for one epoch. `mask[k]` true freezes
/// column k. Serial reference kernel.
EpochGradient epoch_gradient_serial(const Dataset& dataset, const LinearModel& model,
                                    const TrainConfig& config, int epoch,
                                    const std::vector<bool>& mask);
/// OpenMP kernel; same reduction order as the serial one.
EpochGradient epoch_gradient_parallel(const Dataset& dataset, const LinearModel& model,
                                      const TrainConfig& config, int epoch,
                                      const std::vector<bool>& mask);

struct TrainResult {
  LinearModel model;
  TrainHistory history;
  std::size_t fallback_queries = 0;
};

/// Deterministic full-batch gradient descent on the locale-aware objective
/// with the curriculum-scheduled boost factor.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::vector<bool>& mask = {}, Execution exec = Execution::parallel);

/// Config of a compared variant derived from a shared base config.
TrainConfig variant_config(Variant variant, const TrainConfig& base);

/// Trains Prod (click-only, semantic column frozen at 0), MO (eta = 1) or
/// LA-MO (eta from the base config).
TrainResult train_variant(const Dataset& dataset, Variant variant, const TrainConfig& base,
                          Execution exec = Execution::parallel);

}  // namespace locrank
