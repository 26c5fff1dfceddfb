#include "cartsel/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace cartsel {

namespace {

json node_to_json(const Tree& t, std::size_t v) {
  const Node& n = t.nodes[v];
  if (n.is_leaf()) return json{{"value", n.value}, {"count", n.count}};
  return json{{"var", n.var},
              {"threshold", n.threshold},
              {"left", node_to_json(t, static_cast<std::size_t>(n.left))},
              {"right", node_to_json(t, static_cast<std::size_t>(n.right))}};
}

std::int32_t node_from_json(const json& j, Tree& t) {
  const auto id = static_cast<std::int32_t>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("var")) {
    const auto var = j.at("var").get<std::int32_t>();
    if (var < 0) throw DataError("tree json: negative split variable");
    t.nodes.back().var = var;
    t.nodes.back().threshold = j.at("threshold").get<double>();
    const std::int32_t l = node_from_json(j.at("left"), t);
    const std::int32_t r = node_from_json(j.at("right"), t);
    Node& n = t.nodes[static_cast<std::size_t>(id)];
    n.left = l;
    n.right = r;
    n.count = t.nodes[static_cast<std::size_t>(l)].count + t.nodes[static_cast<std::size_t>(r)].count;
  } else {
    t.nodes.back().value = j.at("value").get<double>();
    t.nodes.back().count = j.at("count").get<std::size_t>();
  }
  return id;
}

}  // namespace

json tree_to_json(const Tree& tree) {
  json doc;
  doc["framework"] = to_string(tree.framework);
  doc["n_total"] = tree.n_total;
  doc["n_min"] = tree.n_min;
  doc["subset"] = tree.subset.members();
  doc["root"] = node_to_json(tree, 0);
  return doc;
}

Tree tree_from_json(const json& doc) {
  Tree t;
  t.framework = parse_framework(doc.at("framework").get<std::string>());
  t.n_total = doc.at("n_total").get<std::size_t>();
  t.n_min = doc.at("n_min").get<std::size_t>();
  t.subset = VariableSubset(doc.at("subset").get<std::vector<std::size_t>>());
  node_from_json(doc.at("root"), t);
  for (const Node& n : t.nodes)
    if (!n.is_leaf() && !t.subset.contains(static_cast<std::size_t>(n.var)))
      throw DataError("tree json: split variable outside subset");
  return t;
}

json importance_to_json(const ImportanceReport& rep) {
  return json{{"scores", rep.scores}, {"ranking", rep.ranking}};
}

std::string importance_table(const ImportanceReport& rep, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "| Variable |";
  for (std::size_t j : rep.ranking) os << ' ' << names[j] << " |";
  os << "\n|---|";
  for (std::size_t k = 0; k < rep.ranking.size(); ++k) os << "---|";
  os << "\n| Rank |";
  for (std::size_t k = 0; k < rep.ranking.size(); ++k) os << ' ' << k + 1 << " |";
  os << "\n| Score |";
  for (std::size_t j : rep.ranking) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.1f |", rep.scores[j]);
    os << buf;
  }
  os << '\n';
  return os.str();
}

json subset_to_json(const VariableSubset& s, const std::vector<std::string>& names) {
  json arr = json::array();
  for (std::size_t j : s.members()) arr.push_back(names[j]);
  return arr;
}

json family_to_json(const SubsetFamily& fam, const std::vector<std::string>& names) {
  json sets = json::array();
  for (const auto& s : fam.sets) sets.push_back(subset_to_json(s, names));
  json log = json::array();
  for (const auto& st : fam.log)
    log.push_back({{"variable", names[st.variable]},
                   {"accepted", st.accepted},
                   {"base_contrast", st.base_contrast},
                   {"candidate_contrast", st.candidate_contrast},
                   {"statistic", st.statistic},
                   {"rule", st.rule}});
  return json{{"sets", sets}, {"log", log}};
}

json selection_to_json(const SelectionResult& res, const Dataset& ds) {
  json doc;
  doc["chosen"] = {{"alpha", res.alpha},
                   {"beta", res.beta},
                   {"subset", subset_to_json(res.subset, ds.names())},
                   {"tree", tree_to_json(res.tree)}};
  doc["holdout_risk"] = res.holdout_risk;
  json grid = json::array();
  for (const auto& e : res.family.entries)
    grid.push_back({{"alpha", e.alpha},
                    {"beta", e.beta},
                    {"subset", subset_to_json(res.family_subsets[e.model], ds.names())}});
  doc["grid_map"] = grid;
  doc["K"] = res.family.K();
  doc["subsets_processed"] = res.subsets_processed;
  doc["importance"] = importance_to_json(res.importance);
  if (res.pstar) doc["pstar"] = family_to_json(*res.pstar, ds.names());
  return doc;
}

std::string grid_map_markdown(const SelectionResult& res) {
  std::vector<double> alphas, betas;
  for (const auto& e : res.family.entries) {
    if (std::find(alphas.begin(), alphas.end(), e.alpha) == alphas.end()) alphas.push_back(e.alpha);
    if (std::find(betas.begin(), betas.end(), e.beta) == betas.end()) betas.push_back(e.beta);
  }
  std::ostringstream os;
  os << "| beta \\ alpha |";
  for (double a : alphas) os << ' ' << a << " |";
  os << "\n|---|";
  for (std::size_t k = 0; k < alphas.size(); ++k) os << "---|";
  os << '\n';
  for (double b : betas) {
    os << "| " << b << " |";
    for (double a : alphas) {
      for (const auto& e : res.family.entries)
        if (e.alpha == a && e.beta == b) os << ' ' << res.family_subsets[e.model].label() << " |";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cartsel
