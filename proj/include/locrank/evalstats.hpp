#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locrank/core.hpp"
#include "locrank/model.hpp"
#include "locrank/trainer.hpp"

namespace locrank {

// ---------------------------------------------------------------------------
// Per-list metrics. `ranking` is a permutation of item indices, best first;
// `relevance` is indexed by item. Positions past the end of a short list count
// as zero gain / non-match, so every @K metric divides by K.
// ---------------------------------------------------------------------------

/// Fraction of the top K whose eligible regions contain the query locale.
double local_at_k(const QueryGroup& group, std::span<const std::size_t> ranking, std::size_t k);

/// DCG with gain 2^rel - 1 and discount log2(rank + 1), over the ideal DCG of
/// the same list. 0 when the list has no positive gain.
double ndcg_at_k(std::span<const std::size_t> ranking, std::span<const int> relevance, std::size_t k);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Items with relevance >= threshold count as relevant.
PrecisionRecall precision_recall_at_k(std::span<const std::size_t> ranking,
                                      std::span<const int> relevance, std::size_t k,
                                      int relevance_threshold = 2);

/// Ground truth for quality metrics: true_relevance when every item has it,
/// else graded_label when every item has it, else nullopt.
std::optional<std::vector<int>> ground_truth(const QueryGroup& group);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Metric { local, ndcg, precision, recall };

const char* to_string(Metric metric);
Metric parse_metric(const std::string& text);

struct MetricKey {
  Metric metric = Metric::local;
  std::size_t k = 0;
  auto operator<=>(const MetricKey&) const = default;
};

/// Locale label used in reports for queries without a locale.
inline constexpr const char* kNoLocale = "(none)";

struct CellKey {
  std::string locale;
  std::string bucket;  // head/torso/tail/unknown, or "all"
  MetricKey metric;
  auto operator<=>(const CellKey&) const = default;
};

struct CellStat {
  double mean = 0.0;
  std::size_t count = 0;
  bool operator==(const CellStat&) const = default;
};

struct QueryScores {
  std::string locale;
  FrequencyBucket bucket = FrequencyBucket::unknown;
  std::map<MetricKey, double> values;  // quality metrics absent without ground truth
  bool operator==(const QueryScores&) const = default;
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::map<CellKey, CellStat> cells;
  std::map<std::string, QueryScores> per_query;  // keyed by qid

  bool operator==(const EvalReport&) const = default;
};

/// Per-query metric values for one list under `model`.
QueryScores score_query(const QueryGroup& group, const LinearModel& model,
                        std::span<const std::size_t> ks, bool quality_metrics);

/// All metrics (Local%, NDCG, precision, recall) at every K, aggregated by
/// locale x bucket. `exec` picks the OpenMP kernel or the serial reference.
EvalReport evaluate(const Dataset& dataset, const LinearModel& model,
                    std::span<const std::size_t> ks, Execution exec = Execution::parallel);

/// {5, 20}
std::span<const std::size_t> default_ks();

/// Local%@K only, in the region match layout.
EvalReport region_match_report(const Dataset& dataset, const LinearModel& model,
                               std::span<const std::size_t> ks = default_ks(),
                               Execution exec = Execution::parallel);

/// Mean of one metric over every query of a locale (all buckets).
double locale_mean(const EvalReport& report, const std::string& locale, Metric metric, std::size_t k);

// ---------------------------------------------------------------------------
// Significance
// ---------------------------------------------------------------------------

/// W+ : sum of the (average) ranks of |d| over positive differences, zeros dropped.
double signed_rank_statistic(std::span<const double> diffs);

/// Exact one-sided P(W+ >= observed) under the sign-flip null, zeros dropped.
/// Counts sign assignments with a dynamic program over doubled ranks.
double wilcoxon_exact_p(std::span<const double> diffs);

/// Normal approximation with tie and continuity corrections.
double wilcoxon_normal_p(std::span<const double> diffs);

/// Largest nonzero-count for which wilcoxon_signed_rank uses the exact null.
inline constexpr std::size_t kWilcoxonExactMax = 25;

/// One-sided (greater) paired signed-rank test. Throws "no signal" when every
/// difference is zero.
double wilcoxon_signed_rank(std::span<const double> diffs);

struct BhEntry {
  double adjusted_p = 1.0;
  bool reject = false;
};

/// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<BhEntry> benjamini_hochberg(std::span<const double> raw_ps, double alpha = 0.05);

struct RegionSignificance {
  std::string locale;
  std::size_t n = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta = 0.0;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
  bool reject = false;
  bool no_signal = false;  // every paired difference was zero
};

struct SignificanceResult {
  Metric metric = Metric::ndcg;
  std::size_t k = 0;
  double alpha = 0.05;
  std::vector<RegionSignificance> regions;  // sorted by locale code
};

struct CompareOptions {
  /// Drop queries whose top-`overlap_k` item sets under the two models have
  /// Jaccard overlap >= this value.
  std::optional<double> max_overlap;
  std::size_t overlap_k = 20;
};

/// Jaccard overlap of the top-K item sets of two rankings.
double top_k_overlap(std::span<const std::size_t> ranking_a, std::span<const std::size_t> ranking_b,
                     std::size_t k);

/// Paired one-sided test of "b > a" per locale, BH-corrected across locales.
SignificanceResult compare_models(const Dataset& dataset, const LinearModel& model_a,
                                  const LinearModel& model_b, Metric metric, std::size_t k,
                                  double alpha = 0.05, const CompareOptions& options = {});

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, "†" p<0.10, else "".
std::string significance_stars(double p);

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

/// One row per (locale, bucket): "US head 46.0 / 45.9" (percent, one decimal per K).
std::string render_region_match_row(const std::string& locale, const std::string& bucket,
                                    std::span<const double> rates);
std::string render_region_match(const EvalReport& report);
/// Per-locale precision / recall / NDCG at the largest K.
std::string render_quality(const EvalReport& report);
std::string render_significance(const SignificanceResult& result);

}  // namespace locrank
