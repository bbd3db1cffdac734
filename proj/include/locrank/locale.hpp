#pragma once

#include <optional>
#include <span>
#include <vector>

#include "locrank/core.hpp"

namespace locrank {

/// 1 iff the query locale is known, the regions are known, and the locale is
/// one of the regions.
int locale_match(const std::optional<LocaleCode>& query_locale, const RegionSet& eligible_regions);

/// Match indicators m_i for every item of a group.
std::vector<int> locale_matches(const QueryGroup& group);

/// Weight of a clicked-vs-unclicked pair: eta when only the clicked item
/// matches the locale, 1 otherwise.
double pair_weight(int match_pos, int match_neg, double eta);

/// r'_i = eta * r_i for locale-matching items. Zero labels stay zero.
std::vector<double> boost_labels(std::span<const double> labels, std::span<const int> matches,
                                 double eta);

enum class RampShape { linear };

struct CurriculumSchedule {
  int total_epochs = 1;
  int warmup_epochs = 0;
  double final_eta = 1.0;
  RampShape ramp = RampShape::linear;

  /// Throws on E < 1, warmup outside [0, E), or eta < 1.
  void check() const;
};

/// eta_e = 1 + rho_e * (eta - 1) where rho_e is 0 through warm-up, then rises
/// linearly to exactly 1 at the final epoch.
double effective_eta(int epoch, const CurriculumSchedule& schedule);

}  // namespace locrank
