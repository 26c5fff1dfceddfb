#include <doctest.h>

#include "cartsel/serialize.hpp"

using namespace cartsel;

TEST_CASE("tree JSON round trip keeps every prediction") {
  const Dataset ds = gen_breiman(300, 2);
  Rows rows(300);
  for (std::size_t i = 0; i < 300; ++i) rows[i] = i;
  const Tree t = grow_maximal(ds, rows, VariableSubset({0, 2, 5}), 5, Framework::Regression);
  const json doc = tree_to_json(t);
  CHECK(doc["framework"] == "regression");
  CHECK(doc["subset"] == json::array({0, 2, 5}));
  const Tree back = tree_from_json(json::parse(doc.dump()));
  CHECK(back.leaf_count() == t.leaf_count());
  CHECK(back.subset == t.subset);
  for (std::size_t i = 0; i < ds.n(); ++i) CHECK(back.predict(ds.row(i)) == t.predict(ds.row(i)));
  CHECK(tree_to_json(back).dump() == doc.dump());
}

TEST_CASE("tree_from_json rejects malformed documents") {
  CHECK_THROWS(tree_from_json(json::parse(R"({"framework":"regression"})")));
}

TEST_CASE("selection JSON layout") {
  const Dataset ds = gen_breiman(400, 3);
  RunConfig cfg;
  cfg.seed = 3;
  const SelectionResult res = run_procedure(ds, cfg);
  const json doc = selection_to_json(res, ds);
  for (const char* key : {"chosen", "holdout_risk", "grid_map", "K", "subsets_processed", "importance", "pstar"})
    CHECK(doc.contains(key));
  CHECK(doc["chosen"].contains("tree"));
  CHECK(doc["grid_map"].size() == default_alpha_grid().size() * default_beta_grid().size());
  CHECK(doc["K"] == res.family.K());

  const std::string md = grid_map_markdown(res);
  CHECK(md.find(res.subset.label()) != std::string::npos);
  const std::string table = importance_table(res.importance, ds.names());
  CHECK(table.find("X") != std::string::npos);
}
