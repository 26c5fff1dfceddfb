#pragma once

#include <string>

#include <json.hpp>

#include "cartsel/importance.hpp"
#include "cartsel/selection.hpp"

namespace cartsel {

using json = nlohmann::ordered_json;

/// {framework, n_total, n_min, subset, root}; internal nodes are
/// {var, threshold, left, right}, leaves {value, count}. Variables are 0-based.
json tree_to_json(const Tree& tree);
Tree tree_from_json(const json& doc);

json importance_to_json(const ImportanceReport& rep);
/// Two-row layout: variables ordered by rank, then their rank.
std::string importance_table(const ImportanceReport& rep, const std::vector<std::string>& names);

json subset_to_json(const VariableSubset& s, const std::vector<std::string>& names);
json family_to_json(const SubsetFamily& fam, const std::vector<std::string>& names);

/// {chosen: {alpha, beta, subset, tree}, holdout_risk, grid_map, K, ...}.
json selection_to_json(const SelectionResult& res, const Dataset& ds);

/// Beta rows by alpha columns, each cell the selected subset label.
std::string grid_map_markdown(const SelectionResult& res);

}  // namespace cartsel
