#include "locrank/trainer.hpp"

#include <cmath>
#include <random>

#include <fmt/core.h>

#include "locrank/locale.hpp"

namespace locrank {

const char* to_string(InitKind init) {
  return init == InitKind::zeros ? "zeros" : "small_uniform";
}

InitKind parse_init(const std::string& text) {
  if (text == "zeros") return InitKind::zeros;
  if (text == "small_uniform") return InitKind::small_uniform;
  throw Error(fmt::format("init: unknown value '{}' (expected zeros|small_uniform)", text));
}

void TrainConfig::check() const {
  auto fail = [](const char* field, const std::string& why) {
    throw Error(fmt::format("train config field '{}': {}", field, why));
  };
  if (!(lambda_rank >= 0.0)) fail("lambda_rank", "must be >= 0");
  if (!(lambda_list >= 0.0)) fail("lambda_list", "must be >= 0");
  if (!(lambda_rank + lambda_list > 0.0)) fail("lambda_rank", "lambda_rank + lambda_list must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau", "must be > 0");
  if (!(eta >= 1.0) || !std::isfinite(eta)) fail("eta", "must be >= 1");
  for (const auto& [loc, v] : per_locale_eta) {
    if (!(v >= 1.0) || !std::isfinite(v)) fail("per_locale_eta", fmt::format("{} must be >= 1", loc));
  }
  if (epochs < 1) fail("epochs", "must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) fail("warmup_epochs", "must lie in [0, epochs)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be > 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) fail("l2", "must be >= 0");
}

double TrainConfig::eta_for(const std::optional<LocaleCode>& locale) const {
  if (locale) {
    if (auto it = per_locale_eta.find(*locale); it != per_locale_eta.end()) return it->second;
  }
  return eta;
}

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::prod_baseline: return "prod";
    case Variant::mo: return "mo";
    case Variant::la_mo: return "la-mo";
  }
  return "?";
}

Variant parse_variant(const std::string& text) {
  if (text == "prod" || text == "prod_baseline") return Variant::prod_baseline;
  if (text == "mo") return Variant::mo;
  if (text == "la-mo" || text == "la_mo") return Variant::la_mo;
  throw Error(fmt::format("unknown variant '{}' (expected prod|mo|la-mo)", text));
}

namespace {

CurriculumSchedule schedule_for(const TrainConfig& config, double final_eta) {
  return CurriculumSchedule{config.epochs, config.warmup_epochs, final_eta, RampShape::linear};
}

CombinedLossResult query_terms(const QueryGroup& group, const LinearModel& model,
                               const TrainConfig& config, int epoch) {
  const double eta = effective_eta(epoch, schedule_for(config, config.eta_for(group.locale)));
  return combined_loss(group, model, config, eta);
}

void accumulate(EpochGradient& acc, const CombinedLossResult& r) {
  if (r.listwise_fallback) ++acc.fallback_queries;
  if (!r.contributes()) return;
  ++acc.contributing;
  acc.combined_loss_sum += r.loss;
  if (r.has_pair) {
    ++acc.pair_queries;
    acc.pair_loss_sum += r.pair_loss;
  }
  if (r.has_list) {
    ++acc.list_queries;
    acc.list_loss_sum += r.list_loss;
  }
  for (std::size_t k = 0; k < acc.gradient.size(); ++k) acc.gradient[k] += r.gradient[k];
}

void finish(EpochGradient& acc, const std::vector<bool>& mask) {
  if (acc.contributing > 0) {
    for (auto& g : acc.gradient) g /= static_cast<double>(acc.contributing);
  }
  for (std::size_t k = 0; k < mask.size() && k < acc.gradient.size(); ++k) {
    if (mask[k]) acc.gradient[k] = 0.0;
  }
}

}  // namespace

EpochGradient epoch_gradient_serial(const Dataset& dataset, const LinearModel& model,
                                    const TrainConfig& config, int epoch,
                                    const std::vector<bool>& mask) {
  EpochGradient acc;
  acc.gradient.assign(model.dim(), 0.0);
  for (const auto& group : dataset.queries) accumulate(acc, query_terms(group, model, config, epoch));
  finish(acc, mask);
  return acc;
}

EpochGradient epoch_gradient_parallel(const Dataset& dataset, const LinearModel& model,
                                      const TrainConfig& config, int epoch,
                                      const std::vector<bool>& mask) {
  const auto count = static_cast<std::ptrdiff_t>(dataset.queries.size());
  std::vector<CombinedLossResult> per_query(dataset.queries.size());
  // Exceptions must not escape the parallel region; keep the first one.
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t q = 0; q < count; ++q) {
    try {
      per_query[q] = query_terms(dataset.queries[q], model, config, epoch);
    } catch (...) {
#pragma omp critical(locrank_epoch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  EpochGradient acc;
  acc.gradient.assign(model.dim(), 0.0);
  for (const auto& r : per_query) accumulate(acc, r);
  finish(acc, mask);
  return acc;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, const std::vector<bool>& mask,
                  Execution exec) {
  config.check();
  if (const auto violations = validate(dataset); !violations.empty()) {
    throw Error(fmt::format("dataset invalid ({} violations), first: {}", violations.size(),
                            describe(violations.front())));
  }
  const std::size_t dim = dataset.feature_dim;
  if (!mask.empty() && mask.size() != dim) {
    throw Error(fmt::format("feature mask has {} entries for D={}", mask.size(), dim));
  }
  auto frozen = [&](std::size_t k) { return !mask.empty() && mask[k]; };

  std::vector<double> w(dim, 0.0);
  if (config.init == InitKind::small_uniform) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-0.01, 0.01);
    for (auto& v : w) v = dist(rng);
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (frozen(k)) w[k] = 0.0;
  }

  TrainResult result;
  result.history.records.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const LinearModel current(w, dataset.feature_names);
    const auto eg = exec == Execution::serial
                        ? epoch_gradient_serial(dataset, current, config, epoch, mask)
                        : epoch_gradient_parallel(dataset, current, config, epoch, mask);
    if (eg.contributing == 0) throw Error("no supervision: no query contributes a loss term");
    if (epoch == 1) result.fallback_queries = eg.fallback_queries;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.eta_effective = effective_eta(epoch, schedule_for(config, config.eta));
    rec.pair_loss = eg.pair_queries ? eg.pair_loss_sum / static_cast<double>(eg.pair_queries) : 0.0;
    rec.list_loss = eg.list_queries ? eg.list_loss_sum / static_cast<double>(eg.list_queries) : 0.0;
    rec.combined_loss = eg.combined_loss_sum / static_cast<double>(eg.contributing);
    double norm2 = 0.0;
    for (double g : eg.gradient) norm2 += g * g;
    rec.grad_norm = std::sqrt(norm2);
    if (!std::isfinite(rec.combined_loss) || !std::isfinite(rec.grad_norm)) {
      throw Error(fmt::format("training diverged at epoch {} (loss {})", epoch, rec.combined_loss));
    }
    result.history.records.push_back(rec);

    for (std::size_t k = 0; k < dim; ++k) {
      if (frozen(k)) continue;
      w[k] -= config.learning_rate * (eg.gradient[k] + config.l2 * w[k]);
      if (!std::isfinite(w[k])) {
        throw Error(fmt::format("training diverged at epoch {}: weight '{}' is not finite", epoch,
                                dataset.feature_names[k]));
      }
    }
  }
  result.model = LinearModel(std::move(w), dataset.feature_names);
  return result;
}

TrainConfig variant_config(Variant variant, const TrainConfig& base) {
  TrainConfig cfg = base;
  switch (variant) {
    case Variant::prod_baseline:
      cfg.lambda_list = 0.0;
      if (cfg.lambda_rank <= 0.0) cfg.lambda_rank = 1.0;
      [[fallthrough]];
    case Variant::mo:
      cfg.eta = 1.0;
      cfg.per_locale_eta.clear();
      break;
    case Variant::la_mo:
      break;
  }
  return cfg;
}

TrainResult train_variant(const Dataset& dataset, Variant variant, const TrainConfig& base,
                          Execution exec) {
  const TrainConfig cfg = variant_config(variant, base);
  std::vector<bool> mask;
  if (variant == Variant::prod_baseline) {
    const auto col = dataset.feature_index(cfg.semantic_feature);
    if (!col) {
      throw Error(fmt::format("prod baseline needs the semantic feature column '{}'",
                              cfg.semantic_feature));
    }
    mask.assign(dataset.feature_dim, false);
    mask[*col] = true;
  }
  return train(dataset, cfg, mask, exec);
}

}  // namespace locrank
