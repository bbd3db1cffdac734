#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace locrank {

/// Base error for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LocaleCode = std::string;
using FeatureVector = std::vector<double>;

/// Eligible regions of a template. `std::nullopt` marks metadata that is
/// unknown, which is distinct from a known-but-empty set.
using RegionSet = std::optional<std::set<LocaleCode>>;

enum class FrequencyBucket { head, torso, tail, unknown };

const char* to_string(FrequencyBucket bucket);
FrequencyBucket parse_bucket(const std::string& text);

struct Item {
  std::string item_id;
  FeatureVector features;
  bool clicked = false;
  std::optional<int> graded_label;
  RegionSet eligible_regions;
  std::optional<int> logged_position;
  std::optional<int> true_relevance;

  bool operator==(const Item&) const = default;
};

struct QueryGroup {
  std::string qid;
  std::optional<LocaleCode> locale;
  std::vector<Item> items;
  FrequencyBucket frequency_bucket = FrequencyBucket::unknown;

  std::size_t size() const { return items.size(); }
  /// True when at least one item carries a graded label.
  bool has_graded_labels() const;

  bool operator==(const QueryGroup&) const = default;
};

struct Dataset {
  std::vector<QueryGroup> queries;
  std::size_t feature_dim = 0;
  std::vector<std::string> feature_names;

  std::size_t item_count() const;
  /// Index of the named feature column, or nullopt.
  std::optional<std::size_t> feature_index(const std::string& name) const;

  bool operator==(const Dataset&) const = default;
};

struct Violation {
  std::string qid;
  std::string item_id;  // empty for query- or dataset-level violations
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Collects every invariant violation of `dataset`. Never throws.
std::vector<Violation> validate(const Dataset& dataset);

std::string describe(const Violation& violation);

struct PairPartition {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

/// Splits item indices into clicked and unclicked sets, preserving order.
PairPartition partition_pairs(const QueryGroup& group);

}  // namespace locrank
