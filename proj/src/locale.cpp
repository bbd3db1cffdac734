#include "locrank/locale.hpp"

#include <cmath>

#include <fmt/core.h>

namespace locrank {

int locale_match(const std::optional<LocaleCode>& query_locale, const RegionSet& eligible_regions) {
  if (!query_locale || !eligible_regions) return 0;
  return eligible_regions->contains(*query_locale) ? 1 : 0;
}

std::vector<int> locale_matches(const QueryGroup& group) {
  std::vector<int> m;
  m.reserve(group.items.size());
  for (const auto& item : group.items) m.push_back(locale_match(group.locale, item.eligible_regions));
  return m;
}

namespace {
void check_eta(double eta) {
  if (!(eta >= 1.0) || !std::isfinite(eta)) {
    throw Error(fmt::format("locale boost factor must be finite and >= 1, got {}", eta));
  }
}
}  // namespace

double pair_weight(int match_pos, int match_neg, double eta) {
  check_eta(eta);
  return (match_pos == 1 && match_neg == 0) ? eta : 1.0;
}

std::vector<double> boost_labels(std::span<const double> labels, std::span<const int> matches,
                                 double eta) {
  check_eta(eta);
  if (labels.size() != matches.size()) {
    throw Error(fmt::format("boost_labels: {} labels but {} match indicators", labels.size(),
                            matches.size()));
  }
  std::vector<double> out(labels.begin(), labels.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (matches[i] == 1) out[i] = eta * labels[i];
  }
  return out;
}

void CurriculumSchedule::check() const {
  if (total_epochs < 1) throw Error(fmt::format("total_epochs must be >= 1, got {}", total_epochs));
  if (warmup_epochs < 0 || warmup_epochs >= total_epochs) {
    throw Error(fmt::format("warmup_epochs must lie in [0, {}), got {}", total_epochs,
                            warmup_epochs));
  }
  check_eta(final_eta);
}

double effective_eta(int epoch, const CurriculumSchedule& schedule) {
  schedule.check();
  if (epoch < 1 || epoch > schedule.total_epochs) {
    throw Error(fmt::format("epoch {} outside [1, {}]", epoch, schedule.total_epochs));
  }
  if (epoch <= schedule.warmup_epochs) return 1.0;
  if (epoch == schedule.total_epochs) return schedule.final_eta;
  const double rho = static_cast<double>(epoch - schedule.warmup_epochs) /
                     static_cast<double>(schedule.total_epochs - schedule.warmup_epochs);
  return 1.0 + rho * (schedule.final_eta - 1.0);
}

}  // namespace locrank
