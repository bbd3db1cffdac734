#include "locrank/evalstats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <set>

#include <fmt/core.h>

#include "locrank/locale.hpp"

namespace locrank {

double local_at_k(const QueryGroup& group, std::span<const std::size_t> ranking, std::size_t k) {
  if (k == 0) throw Error("local_at_k: K must be >= 1");
  std::size_t hits = 0;
  const std::size_t top = std::min(k, ranking.size());
  for (std::size_t r = 0; r < top; ++r) {
    hits += static_cast<std::size_t>(
        locale_match(group.locale, group.items[ranking[r]].eligible_regions));
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at_k(std::span<const std::size_t> ranking, std::span<const int> relevance, std::size_t k) {
  if (k == 0) throw Error("ndcg_at_k: K must be >= 1");
  auto gain = [](int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; };
  auto discount = [](std::size_t r) { return 1.0 / std::log2(static_cast<double>(r) + 2.0); };

  double dcg = 0.0;
  const std::size_t top = std::min(k, ranking.size());
  for (std::size_t r = 0; r < top; ++r) dcg += gain(relevance[ranking[r]]) * discount(r);

  std::vector<int> ideal(relevance.begin(), relevance.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) idcg += gain(ideal[r]) * discount(r);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

PrecisionRecall precision_recall_at_k(std::span<const std::size_t> ranking,
                                      std::span<const int> relevance, std::size_t k,
                                      int relevance_threshold) {
  if (k == 0) throw Error("precision_recall_at_k: K must be >= 1");
  std::size_t total = 0;
  for (int rel : relevance) total += rel >= relevance_threshold ? 1 : 0;
  std::size_t hits = 0;
  const std::size_t top = std::min(k, ranking.size());
  for (std::size_t r = 0; r < top; ++r) hits += relevance[ranking[r]] >= relevance_threshold ? 1 : 0;
  PrecisionRecall pr;
  pr.precision = static_cast<double>(hits) / static_cast<double>(k);
  pr.recall = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  return pr;
}

std::optional<std::vector<int>> ground_truth(const QueryGroup& group) {
  auto collect = [&](auto field) -> std::optional<std::vector<int>> {
    std::vector<int> out;
    out.reserve(group.items.size());
    for (const auto& item : group.items) {
      const auto& v = item.*field;
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  };
  if (auto truth = collect(&Item::true_relevance)) return truth;
  return collect(&Item::graded_label);
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::local: return "local";
    case Metric::ndcg: return "ndcg";
    case Metric::precision: return "precision";
    case Metric::recall: return "recall";
  }
  return "?";
}

Metric parse_metric(const std::string& text) {
  if (text == "local") return Metric::local;
  if (text == "ndcg") return Metric::ndcg;
  if (text == "precision") return Metric::precision;
  if (text == "recall") return Metric::recall;
  throw Error(fmt::format("unknown metric '{}' (expected local|ndcg|precision|recall)", text));
}

std::span<const std::size_t> default_ks() {
  static constexpr std::array<std::size_t, 2> ks = {5, 20};
  return ks;
}

QueryScores score_query(const QueryGroup& group, const LinearModel& model,
                        std::span<const std::size_t> ks, bool quality_metrics) {
  QueryScores out;
  out.locale = group.locale.value_or(kNoLocale);
  out.bucket = group.frequency_bucket;
  const auto ranking = rank(model, group);
  const auto truth = quality_metrics ? ground_truth(group) : std::nullopt;
  for (std::size_t k : ks) {
    out.values[{Metric::local, k}] = local_at_k(group, ranking, k);
    if (truth) {
      out.values[{Metric::ndcg, k}] = ndcg_at_k(ranking, *truth, k);
      const auto pr = precision_recall_at_k(ranking, *truth, k);
      out.values[{Metric::precision, k}] = pr.precision;
      out.values[{Metric::recall, k}] = pr.recall;
    }
  }
  return out;
}

namespace {

EvalReport build_report(const Dataset& dataset, const LinearModel& model,
                        std::span<const std::size_t> ks, bool quality, Execution exec) {
  if (model.dim() != dataset.feature_dim) {
    throw Error(fmt::format("feature dimension mismatch: model expects D={}, dataset has D={}",
                            model.dim(), dataset.feature_dim));
  }
  for (std::size_t k : ks) {
    if (k == 0) throw Error("cutoffs K must be >= 1");
  }
  const std::size_t count = dataset.queries.size();
  std::vector<QueryScores> scores(count);
  if (exec == Execution::serial) {
    for (std::size_t q = 0; q < count; ++q) scores[q] = score_query(dataset.queries[q], model, ks, quality);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(count); ++q) {
      try {
        scores[q] = score_query(dataset.queries[q], model, ks, quality);
      } catch (...) {
#pragma omp critical(locrank_eval_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  std::map<CellKey, double> sums;
  for (std::size_t q = 0; q < count; ++q) {
    const auto& s = scores[q];
    for (const auto& [key, value] : s.values) {
      for (const std::string& bucket : {std::string(to_string(s.bucket)), std::string("all")}) {
        const CellKey cell{s.locale, bucket, key};
        sums[cell] += value;
        ++report.cells[cell].count;
      }
    }
    report.per_query.emplace(dataset.queries[q].qid, s);
  }
  for (auto& [cell, stat] : report.cells) stat.mean = sums[cell] / static_cast<double>(stat.count);
  return report;
}

}  // namespace

EvalReport evaluate(const Dataset& dataset, const LinearModel& model,
                    std::span<const std::size_t> ks, Execution exec) {
  return build_report(dataset, model, ks, true, exec);
}

EvalReport region_match_report(const Dataset& dataset, const LinearModel& model,
                               std::span<const std::size_t> ks, Execution exec) {
  return build_report(dataset, model, ks, false, exec);
}

double locale_mean(const EvalReport& report, const std::string& locale, Metric metric, std::size_t k) {
  const auto it = report.cells.find(CellKey{locale, "all", {metric, k}});
  if (it == report.cells.end()) {
    throw Error(fmt::format("report has no {}@{} cell for locale {}", to_string(metric), k, locale));
  }
  return it->second.mean;
}

// ---------------------------------------------------------------------------

namespace {

struct SignedRanks {
  std::vector<std::uint64_t> doubled_ranks;  // 2 * average rank of |d|
  std::vector<bool> positive;
  std::vector<std::size_t> tie_sizes;
};

SignedRanks signed_ranks(std::span<const double> diffs) {
  std::vector<double> nonzero;
  for (double d : diffs) {
    if (!std::isfinite(d)) throw Error("wilcoxon: differences must be finite");
    if (d != 0.0) nonzero.push_back(d);
  }
  const std::size_t n = nonzero.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(nonzero[a]) < std::abs(nonzero[b]);
  });

  SignedRanks out;
  out.doubled_ranks.resize(n);
  out.positive.resize(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) ++j;
    // Positions i..j (0-based) share the average of ranks i+1..j+1.
    const std::uint64_t doubled = (i + 1) + (j + 1);
    for (std::size_t t = i; t <= j; ++t) {
      out.doubled_ranks[order[t]] = doubled;
      out.positive[order[t]] = nonzero[order[t]] > 0.0;
    }
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

std::uint64_t observed_doubled(const SignedRanks& sr) {
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < sr.doubled_ranks.size(); ++i) {
    if (sr.positive[i]) w += sr.doubled_ranks[i];
  }
  return w;
}

}  // namespace

double signed_rank_statistic(std::span<const double> diffs) {
  return static_cast<double>(observed_doubled(signed_ranks(diffs))) / 2.0;
}

double wilcoxon_exact_p(std::span<const double> diffs) {
  const auto sr = signed_ranks(diffs);
  const std::size_t n = sr.doubled_ranks.size();
  if (n == 0) throw Error("wilcoxon: no signal (all differences are zero)");
  if (n > 62) throw Error(fmt::format("wilcoxon exact null limited to 62 nonzero pairs, got {}", n));

  // counts[s] = number of sign assignments whose doubled positive-rank sum is s.
  std::uint64_t max_sum = 0;
  for (auto r : sr.doubled_ranks) max_sum += r;
  std::vector<std::uint64_t> counts(max_sum + 1, 0);
  counts[0] = 1;
  std::uint64_t reach = 0;
  for (auto r : sr.doubled_ranks) {
    for (std::uint64_t s = reach + 1; s-- > 0;) {
      if (counts[s]) counts[s + r] += counts[s];
    }
    reach += r;
  }
  const std::uint64_t observed = observed_doubled(sr);
  std::uint64_t tail = 0;
  for (std::uint64_t s = observed; s <= max_sum; ++s) tail += counts[s];
  return std::ldexp(static_cast<double>(tail), -static_cast<int>(n));
}

double wilcoxon_normal_p(std::span<const double> diffs) {
  const auto sr = signed_ranks(diffs);
  const auto n = static_cast<double>(sr.doubled_ranks.size());
  if (n == 0) throw Error("wilcoxon: no signal (all differences are zero)");
  double tie_term = 0.0;
  for (auto t : sr.tie_sizes) {
    const auto tt = static_cast<double>(t);
    tie_term += tt * tt * tt - tt;
  }
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double w = static_cast<double>(observed_doubled(sr)) / 2.0;
  if (var <= 0.0) return w > mean ? 0.0 : 1.0;
  const double z = (w - mean - 0.5) / std::sqrt(var);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double wilcoxon_signed_rank(std::span<const double> diffs) {
  const auto nonzero = static_cast<std::size_t>(
      std::count_if(diffs.begin(), diffs.end(), [](double d) { return d != 0.0; }));
  if (nonzero == 0) throw Error("wilcoxon: no signal (all differences are zero)");
  return nonzero <= kWilcoxonExactMax ? wilcoxon_exact_p(diffs) : wilcoxon_normal_p(diffs);
}

std::vector<BhEntry> benjamini_hochberg(std::span<const double> raw_ps, double alpha) {
  const std::size_t m = raw_ps.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(raw_ps[i] >= 0.0 && raw_ps[i] <= 1.0)) {
      throw Error(fmt::format("benjamini_hochberg: p[{}] = {} outside [0,1]", i, raw_ps[i]));
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw_ps[a] < raw_ps[b]; });

  std::vector<BhEntry> out(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double scaled = static_cast<double>(m) / static_cast<double>(r + 1) * raw_ps[order[r]];
    running = std::min(running, std::min(scaled, 1.0));
    out[order[r]].adjusted_p = running;
    out[order[r]].reject = running <= alpha;
  }
  return out;
}

double top_k_overlap(std::span<const std::size_t> ranking_a, std::span<const std::size_t> ranking_b,
                     std::size_t k) {
  const std::set<std::size_t> a(ranking_a.begin(), ranking_a.begin() + std::min(k, ranking_a.size()));
  const std::set<std::size_t> b(ranking_b.begin(), ranking_b.begin() + std::min(k, ranking_b.size()));
  std::size_t common = 0;
  for (auto v : a) common += b.contains(v) ? 1 : 0;
  const std::size_t uni = a.size() + b.size() - common;
  return uni ? static_cast<double>(common) / static_cast<double>(uni) : 1.0;
}

SignificanceResult compare_models(const Dataset& dataset, const LinearModel& model_a,
                                  const LinearModel& model_b, Metric metric, std::size_t k,
                                  double alpha, const CompareOptions& options) {
  if (k == 0) throw Error("compare_models: K must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(fmt::format("alpha must lie in (0,1), got {}", alpha));
  for (const auto* m : {&model_a, &model_b}) {
    if (m->dim() != dataset.feature_dim) {
      throw Error(fmt::format("feature dimension mismatch: model expects D={}, dataset has D={}",
                              m->dim(), dataset.feature_dim));
    }
  }
  const std::array<std::size_t, 1> ks = {k};
  const bool quality = metric != Metric::local;

  struct Paired {
    std::vector<double> a, b;
  };
  std::map<std::string, Paired> by_locale;
  for (const auto& group : dataset.queries) {
    const std::string locale = group.locale.value_or(kNoLocale);
    auto& slot = by_locale[locale];
    if (options.max_overlap) {
      const double overlap = top_k_overlap(rank(model_a, group), rank(model_b, group), options.overlap_k);
      if (overlap >= *options.max_overlap) continue;
    }
    const auto sa = score_query(group, model_a, ks, quality);
    const auto sb = score_query(group, model_b, ks, quality);
    const auto ia = sa.values.find({metric, k});
    const auto ib = sb.values.find({metric, k});
    if (ia == sa.values.end() || ib == sb.values.end()) continue;
    slot.a.push_back(ia->second);
    slot.b.push_back(ib->second);
  }

  SignificanceResult result;
  result.metric = metric;
  result.k = k;
  result.alpha = alpha;
  std::vector<double> raw;
  for (const auto& [locale, paired] : by_locale) {
    RegionSignificance row;
    row.locale = locale;
    row.n = paired.a.size();
    std::vector<double> diffs(row.n);
    for (std::size_t i = 0; i < row.n; ++i) {
      row.mean_a += paired.a[i];
      row.mean_b += paired.b[i];
      diffs[i] = paired.b[i] - paired.a[i];
    }
    if (row.n) {
      row.mean_a /= static_cast<double>(row.n);
      row.mean_b /= static_cast<double>(row.n);
    }
    row.delta = row.mean_b - row.mean_a;
    row.no_signal = std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; });
    row.raw_p = row.no_signal ? 1.0 : wilcoxon_signed_rank(diffs);
    raw.push_back(row.raw_p);
    result.regions.push_back(row);
  }
  const auto adjusted = benjamini_hochberg(raw, alpha);
  for (std::size_t i = 0; i < result.regions.size(); ++i) {
    result.regions[i].adjusted_p = adjusted[i].adjusted_p;
    result.regions[i].reject = adjusted[i].reject;
  }
  return result;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.10) return "†";
  return "";
}

// ---------------------------------------------------------------------------

std::string render_region_match_row(const std::string& locale, const std::string& bucket,
                                    std::span<const double> rates) {
  std::string row = fmt::format("{} {}", locale, bucket);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    row += fmt::format("{}{:.1f}", i == 0 ? " " : " / ", 100.0 * rates[i]);
  }
  return row;
}

namespace {
std::vector<std::string> report_locales(const EvalReport& report) {
  std::set<std::string> locales;
  for (const auto& [cell, stat] : report.cells) locales.insert(cell.locale);
  return {locales.begin(), locales.end()};
}
}  // namespace

std::string render_region_match(const EvalReport& report) {
  std::string header = "# region match rate (%)  locale bucket";
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    header += fmt::format("{}@{}", i == 0 ? " " : " / ", report.ks[i]);
  }
  std::string out = header + "\n";
  for (const auto& locale : report_locales(report)) {
    for (const char* bucket : {"head", "torso", "tail", "unknown", "all"}) {
      std::vector<double> rates;
      for (std::size_t k : report.ks) {
        const auto it = report.cells.find(CellKey{locale, bucket, {Metric::local, k}});
        if (it == report.cells.end()) break;
        rates.push_back(it->second.mean);
      }
      if (rates.size() != report.ks.size()) continue;
      out += render_region_match_row(locale, bucket, rates) + "\n";
    }
  }
  return out;
}

std::string render_quality(const EvalReport& report) {
  if (report.ks.empty()) return {};
  const std::size_t k = *std::max_element(report.ks.begin(), report.ks.end());
  std::string out = fmt::format("# {:<8} {:>6} {:>12} {:>10} {:>8}\n", "locale", "n",
                                fmt::format("Prec.@{}", k), fmt::format("Recall@{}", k),
                                fmt::format("NDCG@{}", k));
  for (const auto& locale : report_locales(report)) {
    auto cell = [&](Metric m) -> const CellStat* {
      const auto it = report.cells.find(CellKey{locale, "all", {m, k}});
      return it == report.cells.end() ? nullptr : &it->second;
    };
    const auto* p = cell(Metric::precision);
    const auto* r = cell(Metric::recall);
    const auto* g = cell(Metric::ndcg);
    if (!p || !r || !g) continue;
    out += fmt::format("  {:<8} {:>6} {:>12.4f} {:>10.4f} {:>8.4f}\n", locale, g->count, p->mean,
                       r->mean, g->mean);
  }
  return out;
}

std::string render_significance(const SignificanceResult& result) {
  std::string out = fmt::format(
      "# {}@{} paired Wilcoxon signed-rank (one-sided, B > A), Benjamini-Hochberg at alpha={}\n",
      to_string(result.metric), result.k, result.alpha);
  out += fmt::format("  {:<8} {:>6} {:>9} {:>9} {:>9} {:>10} {:>10} {:<4} {}\n", "region", "n",
                     "A", "B", "delta", "raw_p", "adj_p", "sig", "reject");
  for (const auto& row : result.regions) {
    out += fmt::format("  {:<8} {:>6} {:>9.4f} {:>9.4f} {:>+9.4f} {:>10.4g} {:>10.4g} {:<4} {}\n",
                       row.locale, row.n, row.mean_a, row.mean_b, row.delta, row.raw_p,
                       row.adjusted_p, significance_stars(row.adjusted_p),
                       row.no_signal ? "no signal" : (row.reject ? "yes" : "no"));
  }
  return out;
}

}  // namespace locrank
