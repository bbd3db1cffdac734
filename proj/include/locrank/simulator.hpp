#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "locrank/core.hpp"
#include "locrank/model.hpp"

namespace locrank {

struct LocaleSpec {
  LocaleCode code;
  int query_count = 0;
  int template_count = 0;

  bool operator==(const LocaleSpec&) const = default;
};

/// Synthetic multi-locale click-log generator settings.
///
/// Templates belong to one home locale and are eligible only there. Every
/// query list mixes `local_fraction` home-locale templates with foreign ones
/// (dominant-locale templates for a minority locale, minority-locale
/// templates for the dominant one). Relevance to the query is drawn from
/// `local_relevance` or `foreign_relevance`, so local templates are
/// stochastically more relevant. The logging policy ranks by popularity,
/// which carries an extra `exposure_tilt` for dominant-locale templates.
struct SimConfig {
  std::uint64_t seed = 42;
  std::vector<LocaleSpec> locales = {
      {"US", 900, 3000}, {"JP", 400, 600}, {"FR", 400, 600}, {"DE", 400, 600}, {"GB", 400, 600}};
  LocaleCode dominant_locale = "US";

  /// Column names; length is D. Extra columns beyond the designated ones are
  /// filled with relevance-weak or pure-noise signals.
  std::vector<std::string> feature_names = {"semantic_similarity", "popularity",
                                            "locale_match", "visual_quality", "freshness"};
  std::size_t semantic_column = 0;
  std::size_t popularity_column = 1;
  std::size_t locale_column = 2;

  int list_size = 20;
  int sessions_per_query = 8;
  double position_bias_exponent = 1.0;  // gamma: examination at rank k is (1/k)^gamma
  double click_noise = 0.05;            // epsilon
  double label_noise = 0.1;             // probability of a +-1 label perturbation
  double label_withhold_fraction = 0.1; // queries whose graded labels are dropped
  double exposure_tilt = 1.5;           // delta: popularity bonus of dominant-locale templates

  double local_fraction = 0.5;
  double semantic_noise = 0.35;   // stddev of the noise on the semantic feature
  double popularity_spread = 0.5; // stddev of the untilted popularity
  std::array<double, 4> local_relevance = {0.25, 0.30, 0.27, 0.18};
  std::array<double, 4> foreign_relevance = {0.45, 0.30, 0.17, 0.08};

  double logging_popularity_weight = 1.0;
  double logging_semantic_weight = 0.2;

  std::size_t feature_dim() const { return feature_names.size(); }
  /// Throws Error naming the offending field.
  void check() const;

  bool operator==(const SimConfig&) const = default;
};

/// Attraction (click probability once examined) for relevance grades 0..3
/// before click noise is blended in.
inline constexpr std::array<double, 4> kRelevanceClickProb = {0.0, 0.2, 0.5, 0.9};

/// Corpus with features and true relevance; no clicks, positions or labels.
Dataset generate_corpus(const SimConfig& config);

/// Popularity-heavy logging policy described by the config.
LinearModel logging_model(const SimConfig& config);

/// Position-biased click logs. Every item gets the logged_position it holds
/// under `logging`; an item is clicked if any session clicked it.
Dataset simulate_logs(const Dataset& corpus, const LinearModel& logging, const SimConfig& config);

/// Graded labels from true relevance with +-1 perturbations (pointing inward
/// at the scale boundaries) and per-query withholding.
Dataset corrupt_labels(const Dataset& corpus, const SimConfig& config);

/// generate_corpus -> simulate_logs(logging_model) -> corrupt_labels.
Dataset simulate(const SimConfig& config);

}  // namespace locrank
