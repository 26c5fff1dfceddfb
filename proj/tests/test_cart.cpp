#include <doctest.h>

#include <random>

#include "cartsel/prune.hpp"
#include "oracles.hpp"

using namespace cartsel;

namespace {

// x1 = {0,0,1,1}, y = {0,0,1,1}; x2 constant.
Dataset four_rows(Framework fw = Framework::Regression) {
  return Dataset({0, 5, 0, 5, 1, 5, 1, 5}, 2, {0, 0, 1, 1}, fw);
}

const Rows kFour{0, 1, 2, 3};

void check_admissible(const Tree& t) {
  for (const Node& n : t.nodes)
    if (!n.is_leaf()) CHECK(t.subset.contains(static_cast<std::size_t>(n.var)));
}

}  // namespace

TEST_CASE("impurity examples") {
  const std::vector<double> a{0, 2};
  CHECK(impurity_regression(a, 2) == doctest::Approx(1.0));
  const std::vector<double> b{3, 3, 3};
  CHECK(impurity_regression(b, 3) == 0.0);
  const std::vector<double> c{0, 0, 2, 2};
  CHECK(impurity_regression(c, 4) == doctest::Approx(1.0));
  CHECK(impurity_gini(5, 5) == doctest::Approx(0.5));
  CHECK(impurity_gini(10, 0) == 0.0);
  CHECK(impurity_gini(1, 3) == doctest::Approx(0.375));
}

TEST_CASE("best_split examples") {
  const Dataset ds = four_rows();
  const auto s = best_split(ds, kFour, VariableSubset::all(2), Framework::Regression, 4);
  REQUIRE(s);
  CHECK(s->var == 0);
  CHECK(s->threshold == 0.5);
  CHECK(s->decrease == doctest::Approx(0.25));

  const Dataset flat({0, 1, 2, 3}, 1, {2, 2, 2, 2}, Framework::Regression);
  CHECK_FALSE(best_split(flat, kFour, VariableSubset::all(1), Framework::Regression, 4));

  const Dataset twins({0, 0, 0, 0, 1, 1, 1, 1}, 2, {0, 0, 1, 1}, Framework::Regression);
  const auto t = best_split(twins, kFour, VariableSubset::all(2), Framework::Regression, 4);
  REQUIRE(t);
  CHECK(t->var == 0);
}

TEST_CASE("best_split respects the subset and the minimum child size") {
  const Dataset ds = four_rows();
  CHECK_FALSE(best_split(ds, kFour, VariableSubset({1}), Framework::Regression, 4));
  CHECK_FALSE(best_split(ds, kFour, VariableSubset::all(2), Framework::Regression, 4, 3));
}

TEST_CASE("classification split decrease") {
  const Dataset ds = four_rows(Framework::Classification);
  const auto s = best_split(ds, kFour, VariableSubset::all(2), Framework::Classification, 4);
  REQUIRE(s);
  CHECK(s->var == 0);
  CHECK(s->decrease == doctest::Approx(0.5));  // root Gini 0.5, pure children
}

TEST_CASE("grow_maximal examples") {
  const Dataset ds = four_rows();
  const Tree t = grow_maximal(ds, kFour, VariableSubset::all(2), 2, Framework::Regression);
  CHECK(t.leaf_count() == 2);
  CHECK(t.nodes[static_cast<std::size_t>(t.nodes[0].left)].value == 0.0);
  CHECK(t.nodes[static_cast<std::size_t>(t.nodes[0].right)].value == 1.0);

  const Tree r = grow_maximal(ds, kFour, VariableSubset::all(2), 3, Framework::Regression);
  CHECK(r.leaf_count() == 1);
  CHECK(r.nodes[0].value == 0.5);

  const Dataset pure({0, 1, 2, 3}, 1, {1, 1, 1, 1}, Framework::Regression);
  CHECK(grow_maximal(pure, kFour, VariableSubset::all(1), 1, Framework::Regression).leaf_count() == 1);
}

TEST_CASE("predict routes ties to the left") {
  const Dataset ds = four_rows();
  const Tree t = grow_maximal(ds, kFour, VariableSubset::all(2), 1, Framework::Regression);
  const double at_zero[2] = {0.0, 9.0};
  const double at_threshold[2] = {0.5, 9.0};
  const double above[2] = {0.51, 9.0};
  CHECK(t.predict(at_zero) == 0.0);
  CHECK(t.predict(at_threshold) == 0.0);
  CHECK(t.predict(above) == 1.0);

  Tree root;
  root.nodes.emplace_back();
  root.nodes[0].value = 1.5;
  CHECK(root.predict(at_zero) == 1.5);
}

TEST_CASE("empirical_contrast examples") {
  const Dataset ds = four_rows();
  auto exact = [&](std::span<const double> x) { return x[0]; };
  CHECK(empirical_contrast(exact, ds, kFour) == 0.0);

  const Dataset cls({0, 0, 0, 0}, 1, {0, 1, 0, 0}, Framework::Classification);
  auto zero = [](std::span<const double>) { return 0.0; };
  CHECK(empirical_contrast(zero, cls, kFour) == 0.25);

  const Dataset reg({0, 0}, 1, {1, -1}, Framework::Regression);
  const Rows two{0, 1};
  CHECK(empirical_contrast(zero, reg, two) == 1.0);
}

TEST_CASE("refit_leaves examples") {
  const Dataset ds = four_rows();
  const Tree t = grow_maximal(ds, kFour, VariableSubset::all(2), 1, Framework::Regression);
  const Tree same = refit_leaves(t, ds, kFour, Framework::Regression);
  for (std::size_t v = 0; v < t.nodes.size(); ++v) CHECK(same.nodes[v].value == t.nodes[v].value);

  // Ten new rows: left leaf mean 0.2, right leaf mean 0.9.
  const Dataset fresh({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 1, {0, 0, 0, 0, 1, 1, 1, 1, 0.5, 1}, Framework::Regression);
  Tree one = grow_maximal(Dataset({0, 0, 1, 1}, 1, {0, 0, 1, 1}, Framework::Regression), kFour,
                          VariableSubset::all(1), 1, Framework::Regression);
  const Rows ten{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const Tree refit = refit_leaves(one, fresh, ten, Framework::Regression);
  CHECK(refit.nodes[static_cast<std::size_t>(refit.nodes[0].left)].value == doctest::Approx(0.2));
  CHECK(refit.nodes[static_cast<std::size_t>(refit.nodes[0].right)].value == doctest::Approx(0.9));

  const Rows left_only{0, 1};
  const Tree partial = refit_leaves(one, fresh, left_only, Framework::Regression);
  const Node& right = partial.nodes[static_cast<std::size_t>(partial.nodes[0].right)];
  CHECK(right.refit_empty);
  CHECK(right.value == 1.0);
}

TEST_CASE("prune_sequence examples") {
  Tree root;
  root.nodes.emplace_back();
  const Dataset ds = four_rows();
  root.subset = VariableSubset::all(2);
  const PrunedSequence a = prune_sequence(root, ds, kFour, Framework::Regression);
  CHECK(a.size() == 1);
  CHECK(a.criticals == std::vector<double>{0.0});

  const Tree two = grow_maximal(ds, kFour, VariableSubset::all(2), 1, Framework::Regression);
  const PrunedSequence b = prune_sequence(two, ds, kFour, Framework::Regression);
  REQUIRE(b.size() == 2);
  CHECK(b.leaves == std::vector<std::size_t>{2, 1});
  CHECK(b.criticals[0] == 0.0);
  CHECK(b.criticals[1] == doctest::Approx(0.25));
  CHECK(b.risks[1] == doctest::Approx(0.25));
}

TEST_CASE("subtree_at conventions") {
  std::mt19937_64 rng(3);
  const Dataset ds = oracle::random_small(rng, 60, 2, Framework::Regression, false);
  Rows all(60);
  for (std::size_t i = 0; i < 60; ++i) all[i] = i;
  const Tree full = grow_maximal(ds, all, VariableSubset::all(2), 2, Framework::Regression);
  const PrunedSequence seq = prune_sequence(full, ds, all, Framework::Regression);
  REQUIRE(seq.size() > 2);
  CHECK(subtree_at(seq, 0.0).leaf_count() == seq.leaves[0]);
  CHECK(subtree_at(seq, seq.criticals.back() * 1.5).leaf_count() == 1);
  for (std::size_t k = 1; k < seq.size(); ++k) {
    CHECK(seq.index_at(seq.criticals[k]) == k);
    CHECK(seq.index_at(std::nextafter(seq.criticals[k], 0.0)) == k - 1);
    CHECK(seq.criticals[k] > seq.criticals[k - 1]);
    CHECK(seq.leaves[k] < seq.leaves[k - 1]);
  }
  CHECK_THROWS_AS(seq.index_at(-1.0), DataError);
}

TEST_CASE("weakest-link chain matches subtree enumeration on random trees") {
  std::mt19937_64 rng(17);
  int trees = 0;
  while (trees < 30) {
    const Framework fw = trees % 2 ? Framework::Classification : Framework::Regression;
    const Dataset ds = oracle::random_small(rng, 40, 2, fw, trees % 3 == 0);
    Rows all(40);
    for (std::size_t i = 0; i < 40; ++i) all[i] = i;
    const Rows grow(all.begin(), all.begin() + 24), prune(all.begin() + 24, all.end());
    const Rows& g = trees % 4 < 2 ? all : grow;
    const Rows& q = trees % 4 < 2 ? all : prune;
    const Tree full = grow_maximal(ds, g, VariableSubset::all(2), 1, fw);
    if (full.leaf_count() < 4 || oracle::count_subtrees(full, 0, 500001) > 500000) continue;
    const auto r = oracle::check_pruning(ds, g, q, 1, 50);
    CHECK(r.mismatches == 0);
    ++trees;
  }
}

TEST_CASE("every grown tree splits only on its subset") {
  const Dataset ds = gen_breiman(400, 4);
  Rows all(400);
  for (std::size_t i = 0; i < 400; ++i) all[i] = i;
  for (const auto& s : {VariableSubset({0}), VariableSubset({1, 4}), VariableSubset({0, 2, 9})}) {
    const Tree t = grow_maximal(ds, all, s, 5, Framework::Regression);
    check_admissible(t);
    const PrunedSequence seq = prune_sequence(t, ds, all, Framework::Regression);
    for (std::size_t k = 0; k < seq.size(); ++k) check_admissible(seq.subtree(k));
  }
}

TEST_CASE("child sizes respect n_min") {
  const Dataset ds = gen_breiman(300, 8);
  Rows all(300);
  for (std::size_t i = 0; i < 300; ++i) all[i] = i;
  const Tree t = grow_maximal(ds, all, VariableSubset::all(10), 7, Framework::Regression);
  for (const Node& n : t.nodes) CHECK(n.count >= 7);
}

TEST_CASE("theoretical_nmin") {
  CHECK(theoretical_nmin(2.0, 0.0, 1000) == 1);
  CHECK(theoretical_nmin(1.0, 1.0, 100) ==
        static_cast<std::size_t>(std::ceil(24.0 * std::log(100.0))));
}
