#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "locrank/evalstats.hpp"
#include "locrank/io.hpp"
#include "locrank/simulator.hpp"
#include "locrank/trainer.hpp"

// File-level workflows behind the `locrank` subcommands. Each one reads its
// inputs, writes its outputs and returns the human-readable summary the CLI
// prints.

namespace locrank {

/// Deterministic per-locale split: queries are ordered by SHA-256 of their qid
/// and the first round(ratio * n) of each locale go to train. Both halves keep
/// the original query order.
std::pair<Dataset, Dataset> split_by_qid(const Dataset& dataset, double train_ratio);

struct SimulateSummary {
  std::string text;
  std::string manifest;
};

/// Writes all.jsonl, train.jsonl, eval.jsonl, sim_config.json, manifest.json into out_dir.
SimulateSummary run_simulate(const SimConfig& config, const fs::path& out_dir, double train_ratio);

struct TrainSummary {
  std::string text;
  std::size_t fallback_queries = 0;
};

/// Trains a variant and writes the model file plus `<model>.history.csv`.
TrainSummary run_train(const fs::path& dataset_path, const TrainConfig& config, Variant variant,
                       const fs::path& model_path);

fs::path history_path_for(const fs::path& model_path);

/// Writes `<out>.json` (full report) and `<out>.txt` (region match + quality tables).
std::string run_evaluate(const fs::path& dataset_path, const fs::path& model_path,
                         const std::vector<std::size_t>& ks, const fs::path& out_prefix);

/// Writes `<out>.json` and `<out>.txt`; model_a is the baseline.
std::string run_compare(const fs::path& dataset_path, const fs::path& model_a,
                        const fs::path& model_b, Metric metric, std::size_t k, double alpha,
                        const CompareOptions& options, const fs::path& out_prefix);

/// Feature-importance table with the semantic column's rank highlighted.
std::string run_inspect_weights(const fs::path& model_path, const fs::path& dataset_path,
                                const std::string& semantic_feature);

}  // namespace locrank
