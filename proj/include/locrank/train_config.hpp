#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "locrank/core.hpp"

namespace locrank {

enum class InitKind { zeros, small_uniform };

const char* to_string(InitKind init);
InitKind parse_init(const std::string& text);

struct TrainConfig {
  double lambda_rank = 1.0;
  double lambda_list = 1.0;
  double tau = 1.0;
  double eta = 2.0;
  std::map<LocaleCode, double> per_locale_eta;  // overrides eta for listed locales
  int epochs = 50;
  int warmup_epochs = 0;
  double learning_rate = 0.1;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  InitKind init = InitKind::zeros;
  /// Column zeroed out by the click-only production baseline.
  std::string semantic_feature = "semantic_similarity";

  /// Throws Error naming the offending field.
  void check() const;
  /// Final boost factor for a query locale (per-locale override or global).
  double eta_for(const std::optional<LocaleCode>& locale) const;

  bool operator==(const TrainConfig&) const = default;
};

}  // namespace locrank
