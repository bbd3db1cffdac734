#include "locrank/core.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include <fmt/core.h>

namespace locrank {

const char* to_string(FrequencyBucket bucket) {
  switch (bucket) {
    case FrequencyBucket::head: return "head";
    case FrequencyBucket::torso: return "torso";
    case FrequencyBucket::tail: return "tail";
    case FrequencyBucket::unknown: return "unknown";
  }
  return "unknown";
}

FrequencyBucket parse_bucket(const std::string& text) {
  if (text == "head") return FrequencyBucket::head;
  if (text == "torso") return FrequencyBucket::torso;
  if (text == "tail") return FrequencyBucket::tail;
  if (text == "unknown") return FrequencyBucket::unknown;
  throw Error(fmt::format("unknown frequency bucket '{}'", text));
}

bool QueryGroup::has_graded_labels() const {
  for (const auto& item : items) {
    if (item.graded_label) return true;
  }
  return false;
}

std::size_t Dataset::item_count() const {
  std::size_t total = 0;
  for (const auto& q : queries) total += q.items.size();
  return total;
}

std::optional<std::size_t> Dataset::feature_index(const std::string& name) const {
  for (std::size_t k = 0; k < feature_names.size(); ++k) {
    if (feature_names[k] == name) return k;
  }
  return std::nullopt;
}

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  auto add = [&out](std::string qid, std::string item_id, std::string msg) {
    out.push_back({std::move(qid), std::move(item_id), std::move(msg)});
  };

  if (dataset.feature_names.size() != dataset.feature_dim) {
    add("", "", fmt::format("feature_names has {} entries but feature_dim is {}",
                            dataset.feature_names.size(), dataset.feature_dim));
  }

  std::unordered_set<std::string> qids;
  for (const auto& q : dataset.queries) {
    if (!qids.insert(q.qid).second) add(q.qid, "", "duplicate qid");
    if (q.items.empty()) add(q.qid, "", "query group has no items");

    std::unordered_set<std::string> ids;
    std::set<int> positions;
    for (const auto& item : q.items) {
      if (!ids.insert(item.item_id).second) add(q.qid, item.item_id, "duplicate item_id in group");
      if (item.features.size() != dataset.feature_dim) {
        add(q.qid, item.item_id,
            fmt::format("feature length {} != feature_dim {}", item.features.size(),
                        dataset.feature_dim));
      }
      for (std::size_t k = 0; k < item.features.size(); ++k) {
        if (!std::isfinite(item.features[k])) {
          add(q.qid, item.item_id, fmt::format("feature {} is not finite", k));
        }
      }
      if (item.graded_label && (*item.graded_label < 0 || *item.graded_label > 3)) {
        add(q.qid, item.item_id,
            fmt::format("graded_label {} outside [0,3]", *item.graded_label));
      }
      if (item.true_relevance && (*item.true_relevance < 0 || *item.true_relevance > 3)) {
        add(q.qid, item.item_id,
            fmt::format("true_relevance {} outside [0,3]", *item.true_relevance));
      }
      if (item.logged_position) {
        if (*item.logged_position < 1) {
          add(q.qid, item.item_id,
              fmt::format("logged_position {} is not >= 1", *item.logged_position));
        } else if (!positions.insert(*item.logged_position).second) {
          add(q.qid, item.item_id,
              fmt::format("logged_position {} repeated in group", *item.logged_position));
        }
      }
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  if (v.qid.empty()) return v.message;
  if (v.item_id.empty()) return fmt::format("qid={}: {}", v.qid, v.message);
  return fmt::format("qid={} item={}: {}", v.qid, v.item_id, v.message);
}

PairPartition partition_pairs(const QueryGroup& group) {
  PairPartition parts;
  for (std::size_t i = 0; i < group.items.size(); ++i) {
    (group.items[i].clicked ? parts.positives : parts.negatives).push_back(i);
  }
  return parts;
}

}  // namespace locrank
