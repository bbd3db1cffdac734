#include "locrank/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <fmt/core.h>

namespace locrank {

namespace {

// Salts so each stage draws from its own reproducible stream.
constexpr std::uint64_t kCorpusSalt = 0x636f72707573ULL;
constexpr std::uint64_t kLogSalt = 0x6c6f6773ULL;
constexpr std::uint64_t kLabelSalt = 0x6c6162656c73ULL;

struct Template {
  std::string id;
  LocaleCode home;
  double popularity = 0.0;
};

int draw_grade(std::mt19937_64& rng, const std::array<double, 4>& probs) {
  std::discrete_distribution<int> dist(probs.begin(), probs.end());
  return dist(rng);
}

// Distinct indices from [0, pool) via partial Fisher-Yates.
std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng, std::size_t pool,
                                                    std::size_t count) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

void check_probs(const std::array<double, 4>& p, const char* field) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error(fmt::format("sim config field '{}': negative probability", field));
    total += v;
  }
  if (!(total > 0.0)) throw Error(fmt::format("sim config field '{}': probabilities sum to 0", field));
}

}  // namespace

void SimConfig::check() const {
  auto fail = [](const char* field, const std::string& why) {
    throw Error(fmt::format("sim config field '{}': {}", field, why));
  };
  if (locales.empty()) fail("locales", "must list at least one locale");
  std::set<LocaleCode> codes;
  for (const auto& l : locales) {
    if (l.code.empty()) fail("locales", "locale code must be nonempty");
    if (!codes.insert(l.code).second) fail("locales", fmt::format("duplicate locale '{}'", l.code));
    if (l.query_count < 0) fail("locales", fmt::format("{} query_count must be >= 0", l.code));
    if (l.template_count < list_size) {
      fail("locales", fmt::format("{} template_count {} < list_size {}", l.code, l.template_count,
                                  list_size));
    }
  }
  if (!codes.contains(dominant_locale)) fail("dominant_locale", "must appear in locales");
  const std::size_t dim = feature_names.size();
  if (dim < 3) fail("feature_names", "need at least 3 feature columns");
  if (semantic_column >= dim || popularity_column >= dim || locale_column >= dim) {
    fail("semantic_column", "designated columns must be < D");
  }
  if (semantic_column == popularity_column || semantic_column == locale_column ||
      popularity_column == locale_column) {
    fail("semantic_column", "designated columns must be distinct");
  }
  if (list_size < 1) fail("list_size", "must be >= 1");
  if (sessions_per_query < 1) fail("sessions_per_query", "must be >= 1");
  if (!(position_bias_exponent > 0.0)) fail("position_bias_exponent", "must be > 0");
  if (!(click_noise >= 0.0 && click_noise < 1.0)) fail("click_noise", "must lie in [0, 1)");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) fail("label_noise", "must lie in [0, 1]");
  if (!(label_withhold_fraction >= 0.0 && label_withhold_fraction <= 1.0)) {
    fail("label_withhold_fraction", "must lie in [0, 1]");
  }
  if (!(exposure_tilt >= 0.0)) fail("exposure_tilt", "must be >= 0");
  if (!(local_fraction >= 0.0 && local_fraction <= 1.0)) fail("local_fraction", "must lie in [0, 1]");
  if (!(semantic_noise >= 0.0)) fail("semantic_noise", "must be >= 0");
  if (!(popularity_spread >= 0.0)) fail("popularity_spread", "must be >= 0");
  check_probs(local_relevance, "local_relevance");
  check_probs(foreign_relevance, "foreign_relevance");
}

Dataset generate_corpus(const SimConfig& config) {
  config.check();
  std::mt19937_64 rng(config.seed ^ kCorpusSalt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Template pools per locale, in config order.
  std::vector<std::vector<Template>> pools;
  for (const auto& spec : config.locales) {
    const double tilt = spec.code == config.dominant_locale ? config.exposure_tilt : 0.0;
    std::vector<Template> pool;
    pool.reserve(static_cast<std::size_t>(spec.template_count));
    for (int t = 0; t < spec.template_count; ++t) {
      pool.push_back({fmt::format("{}-t{:05d}", spec.code, t), spec.code,
                      config.popularity_spread * gauss(rng) + tilt});
    }
    pools.push_back(std::move(pool));
  }

  const std::size_t dim = config.feature_dim();
  std::vector<int> extra_columns;
  for (std::size_t k = 0; k < dim; ++k) {
    if (k != config.semantic_column && k != config.popularity_column && k != config.locale_column) {
      extra_columns.push_back(static_cast<int>(k));
    }
  }

  Dataset ds;
  ds.feature_dim = dim;
  ds.feature_names = config.feature_names;
  const auto n = static_cast<std::size_t>(config.list_size);

  for (std::size_t li = 0; li < config.locales.size(); ++li) {
    const auto& spec = config.locales[li];
    const bool dominant = spec.code == config.dominant_locale;

    // Foreign candidates: the dominant pool for minority locales, every other
    // pool for the dominant locale.
    std::vector<const Template*> foreign;
    for (std::size_t lj = 0; lj < pools.size(); ++lj) {
      if (lj == li) continue;
      if (dominant || config.locales[lj].code == config.dominant_locale) {
        for (const auto& t : pools[lj]) foreign.push_back(&t);
      }
    }
    std::size_t n_local = static_cast<std::size_t>(std::lround(config.local_fraction * n));
    if (foreign.size() < n - n_local) n_local = n - foreign.size();

    std::vector<double> frequency;
    const std::size_t first_query = ds.queries.size();
    for (int qi = 0; qi < spec.query_count; ++qi) {
      QueryGroup q;
      q.qid = fmt::format("{}-q{:05d}", spec.code, qi);
      q.locale = spec.code;
      frequency.push_back(std::exp(1.5 * gauss(rng)));

      std::vector<const Template*> chosen;
      for (std::size_t t : sample_without_replacement(rng, pools[li].size(), n_local)) {
        chosen.push_back(&pools[li][t]);
      }
      for (std::size_t t : sample_without_replacement(rng, foreign.size(), n - n_local)) {
        chosen.push_back(foreign[t]);
      }
      std::shuffle(chosen.begin(), chosen.end(), rng);

      for (const Template* t : chosen) {
        const bool local = t->home == spec.code;
        Item item;
        item.item_id = t->id;
        item.eligible_regions = std::set<LocaleCode>{t->home};
        const int rel = draw_grade(rng, local ? config.local_relevance : config.foreign_relevance);
        item.true_relevance = rel;
        item.features.assign(dim, 0.0);
        item.features[config.semantic_column] = rel / 3.0 + config.semantic_noise * gauss(rng);
        item.features[config.popularity_column] = t->popularity;
        item.features[config.locale_column] = local ? 1.0 : 0.0;
        for (std::size_t e = 0; e < extra_columns.size(); ++e) {
          // First extra column is a weak relevance signal, the rest are noise.
          item.features[extra_columns[e]] = e == 0 ? 0.25 * rel + gauss(rng) : unit(rng);
        }
        q.items.push_back(std::move(item));
      }
      ds.queries.push_back(std::move(q));
    }

    // Frequency terciles within the locale.
    const std::size_t count = ds.queries.size() - first_query;
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frequency[a] > frequency[b]; });
    for (std::size_t r = 0; r < count; ++r) {
      const auto bucket = r * 3 < count       ? FrequencyBucket::head
                          : r * 3 < 2 * count ? FrequencyBucket::torso
                                              : FrequencyBucket::tail;
      ds.queries[first_query + order[r]].frequency_bucket = bucket;
    }
  }
  return ds;
}

LinearModel logging_model(const SimConfig& config) {
  config.check();
  std::vector<double> w(config.feature_dim(), 0.0);
  w[config.popularity_column] = config.logging_popularity_weight;
  w[config.semantic_column] = config.logging_semantic_weight;
  return LinearModel(std::move(w), config.feature_names);
}

Dataset simulate_logs(const Dataset& corpus, const LinearModel& logging, const SimConfig& config) {
  config.check();
  std::mt19937_64 rng(config.seed ^ kLogSalt);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset out = corpus;
  for (auto& q : out.queries) {
    for (const auto& item : q.items) {
      if (!item.true_relevance) {
        throw Error(fmt::format("qid={} item={}: simulate_logs needs true_relevance", q.qid,
                                item.item_id));
      }
    }
    const auto order = rank(logging, q);
    for (auto& item : q.items) item.clicked = false;
    for (std::size_t r = 0; r < order.size(); ++r) {
      q.items[order[r]].logged_position = static_cast<int>(r + 1);
    }
    for (int s = 0; s < config.sessions_per_query; ++s) {
      for (std::size_t r = 0; r < order.size(); ++r) {
        auto& item = q.items[order[r]];
        const double exam = std::pow(1.0 / static_cast<double>(r + 1), config.position_bias_exponent);
        const double attract = config.click_noise +
                               (1.0 - config.click_noise) * kRelevanceClickProb[*item.true_relevance];
        // Draw unconditionally so the stream does not depend on earlier clicks.
        if (unit(rng) < exam * attract) item.clicked = true;
      }
    }
  }
  return out;
}

Dataset corrupt_labels(const Dataset& corpus, const SimConfig& config) {
  config.check();
  std::mt19937_64 rng(config.seed ^ kLabelSalt);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset out = corpus;
  for (auto& q : out.queries) {
    const bool withhold = unit(rng) < config.label_withhold_fraction;
    for (auto& item : q.items) {
      if (!item.true_relevance) {
        throw Error(fmt::format("qid={} item={}: corrupt_labels needs true_relevance", q.qid,
                                item.item_id));
      }
      int label = *item.true_relevance;
      const bool flip = unit(rng) < config.label_noise;
      const bool up = unit(rng) < 0.5;
      if (flip) {
        if (label == 0) label = 1;
        else if (label == 3) label = 2;
        else label += up ? 1 : -1;
      }
      if (withhold) item.graded_label.reset();
      else item.graded_label = label;
    }
  }
  return out;
}

Dataset simulate(const SimConfig& config) {
  const Dataset corpus = generate_corpus(config);
  const Dataset logs = simulate_logs(corpus, logging_model(config), config);
  return corrupt_labels(logs, config);
}

}  // namespace locrank
