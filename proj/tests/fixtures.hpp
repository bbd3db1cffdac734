#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "locrank/core.hpp"

namespace fixture {

inline locrank::Item item(std::string id, std::vector<double> features, bool clicked,
                          std::optional<int> label = std::nullopt,
                          locrank::RegionSet regions = std::nullopt) {
  locrank::Item it;
  it.item_id = std::move(id);
  it.features = std::move(features);
  it.clicked = clicked;
  it.graded_label = label;
  it.eligible_regions = std::move(regions);
  return it;
}

inline locrank::RegionSet regions(std::initializer_list<const char*> codes) {
  std::set<std::string> s;
  for (const char* c : codes) s.insert(c);
  return s;
}

inline locrank::Dataset dataset(std::vector<locrank::QueryGroup> groups, std::size_t dim) {
  locrank::Dataset ds;
  ds.feature_dim = dim;
  for (std::size_t k = 0; k < dim; ++k) ds.feature_names.push_back("f" + std::to_string(k));
  ds.queries = std::move(groups);
  return ds;
}

}  // namespace fixture
