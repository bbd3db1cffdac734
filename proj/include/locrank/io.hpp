#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "locrank/core.hpp"
#include "locrank/evalstats.hpp"
#include "locrank/model.hpp"
#include "locrank/simulator.hpp"
#include "locrank/train_config.hpp"
#include "locrank/trainer.hpp"

namespace locrank {

namespace fs = std::filesystem;

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// Dataset files are JSON Lines. Line 1 is a header
//   {"format":"locrank.dataset","version":1,"feature_dim":D,"feature_names":[...]}
// and every following line is one query group
//   {"qid":..,"locale":..|null,"bucket":"head|torso|tail|unknown","items":[
//     {"item_id":..,"features":[..D..],"clicked":bool,"graded_label":int|null,
//      "eligible_regions":[..]|null,"logged_position":int|null,"true_relevance":int|null}]}
// Nullable item fields may also be omitted; an omitted or null eligible_regions
// means the regions are unknown.

/// Canonical text of a dataset file.
std::string serialize_dataset(const Dataset& dataset);
/// Parses dataset text; `source` names the input in error messages.
Dataset parse_dataset(std::istream& in, const std::string& source);

void write_dataset(const Dataset& dataset, const fs::path& path);
/// Parses and validates; any violation is reported with its line number.
Dataset read_dataset(const fs::path& path);

/// Hex SHA-256 of the canonical serialization.
std::string dataset_digest(const Dataset& dataset);
std::string sha256_hex(const std::string& bytes);

struct ModelFile {
  LinearModel model;
  std::optional<TrainConfig> train_config;
  std::string variant;  // empty when not produced by train_variant
  std::uint64_t seed = 0;
  std::string dataset_digest;

  bool operator==(const ModelFile&) const = default;
};

std::string serialize_model(const ModelFile& file);
void write_model(const ModelFile& file, const fs::path& path);
ModelFile read_model(const fs::path& path);

/// Config files are JSON objects; omitted keys take the defaults, unknown keys
/// are rejected.
std::string serialize_train_config(const TrainConfig& config);
TrainConfig parse_train_config(const std::string& text, const std::string& source);
TrainConfig read_train_config(const fs::path& path);
void write_train_config(const TrainConfig& config, const fs::path& path);

std::string serialize_sim_config(const SimConfig& config);
SimConfig parse_sim_config(const std::string& text, const std::string& source);
SimConfig read_sim_config(const fs::path& path);
void write_sim_config(const SimConfig& config, const fs::path& path);

/// CSV: epoch,eta_effective,pair_loss,list_loss,combined_loss,grad_norm
std::string serialize_history(const TrainHistory& history);
void write_history(const TrainHistory& history, const fs::path& path);
TrainHistory read_history(const fs::path& path);

std::string serialize_report(const EvalReport& report);
void write_report(const EvalReport& report, const fs::path& path);
EvalReport read_report(const fs::path& path);

std::string serialize_significance(const SignificanceResult& result);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace locrank
