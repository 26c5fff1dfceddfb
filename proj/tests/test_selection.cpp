#include <doctest.h>

#include <random>

#include "cartsel/selection.hpp"
#include "oracles.hpp"

using namespace cartsel;

namespace {

Rows range(std::size_t a, std::size_t b) {
  Rows r;
  for (std::size_t i = a; i < b; ++i) r.push_back(i);
  return r;
}

SampleSplit fixed_split(std::size_t n) {
  SampleSplit s;
  s.i1 = range(0, n / 2);
  s.i2 = range(n / 2, 3 * n / 4);
  s.i3 = range(3 * n / 4, n);
  return s;
}

// y = x1 exactly; x2 is noise, or a copy of x1 when `twin` is set.
Dataset step_data(std::size_t n, bool twin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> z;
  std::vector<double> x(n * 2), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = coin(rng) ? 1.0 : 0.0;
    x[2 * i + 1] = twin ? x[2 * i] : z(rng);
    y[i] = x[2 * i];
  }
  return Dataset(std::move(x), 2, std::move(y), Framework::Regression);
}

PenaltySpec base_spec(const Dataset& ds, const SampleSplit& split) {
  PenaltySpec s;
  s.method = split.method;
  s.n_eff = split.pruning_rows().size();
  s.p = ds.p();
  return s;
}

void check_same_chains(const Collection& a, const Collection& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.subsets[i] == b.subsets[i]);
    CHECK(a.chains[i].leaves == b.chains[i].leaves);
    CHECK(a.chains[i].criticals == b.chains[i].criticals);
    CHECK(a.chains[i].risks == b.chains[i].risks);
  }
}

}  // namespace

TEST_CASE("all_subsets order and cap") {
  const auto s = all_subsets(3);
  REQUIRE(s.size() == 7);
  CHECK(s[0] == VariableSubset({0}));
  CHECK(s[2] == VariableSubset({0, 1}));
  CHECK(s[6] == VariableSubset({0, 1, 2}));
  CHECK_THROWS_AS(all_subsets(21), CapError);
  CHECK_THROWS_AS(all_subsets(25, 20, false), CapError);
  CHECK(all_subsets(4, 3, true).size() == 15);
}

TEST_CASE("select_model picks the informative variable") {
  const Dataset ds = step_data(200, false, 1);
  const SampleSplit split = fixed_split(200);
  const Collection c = build_collection(ds, split, all_subsets(2), 1);
  const PenaltySpec spec = base_spec(ds, split);
  CHECK(c.subsets[select_model(c, spec).key.subset] == VariableSubset({0}));
}

TEST_CASE("huge beta leaves one variable") {
  const Dataset ds = gen_breiman(400, 3);
  const SampleSplit split = split_three(ds, {}, 3, Method::M1);
  const Collection c = build_collection(ds, split, all_subsets(10), 5);
  PenaltySpec spec = base_spec(ds, split);
  spec.beta = 1e9;
  CHECK(c.subsets[select_model(c, spec).key.subset].size() == 1);
}

TEST_CASE("ties prefer fewer variables, then fewer leaves, then the smaller subset") {
  const Dataset ds = step_data(120, true, 2);
  const SampleSplit split = fixed_split(120);
  const Collection c = build_collection(ds, split, all_subsets(2), 1);
  const ModelChoice m = select_model(c, base_spec(ds, split));
  CHECK(c.subsets[m.key.subset] == VariableSubset({0}));
  CHECK(c.chains[m.key.subset].leaves[m.key.k] == 2);
  CHECK(m.criterion == 0.0);
}

TEST_CASE("grid_select deduplicates into K models") {
  const Dataset ds = gen_breiman(400, 5);
  const SampleSplit split = split_three(ds, {}, 5, Method::M1);
  const Collection c = build_collection(ds, split, all_subsets(10), 5);
  const PenaltySpec spec = base_spec(ds, split);

  const auto one = grid_select(c, {1.0}, {2.0}, spec);
  CHECK(one.K() == 1);
  CHECK(one.entries.size() == 1);

  const auto same = grid_select(c, {0.1, 0.5}, {1e9, 2e9}, spec);
  CHECK(same.entries.size() == 4);
  CHECK(same.K() <= 2);

  const auto full = grid_select(c, default_alpha_grid(), default_beta_grid(), spec);
  CHECK(full.entries.size() == 130);
  CHECK(full.K() >= 1);
  CHECK(full.K() <= std::min<std::size_t>(130, c.total_models()));
  for (std::size_t j = 0; j < full.K(); ++j) {
    bool used = false;
    for (const auto& e : full.entries) used |= e.model == j;
    CHECK(used);
  }
  CHECK_THROWS_AS(grid_select(c, {}, {1.0}, spec), DataError);
}

TEST_CASE("final_holdout breaks equal risks toward the smaller model") {
  const Dataset ds = step_data(120, true, 4);
  const SampleSplit split = fixed_split(120);
  const Collection c = build_collection(ds, split, all_subsets(2), 1);
  // Models on {2} and {1}, same fitted values on every row.
  EstimatorFamily fam;
  fam.models = {{1, 0}, {0, 0}};
  fam.entries = {{0.0, 5.0, 0}, {1.0, 5.0, 1}, {0.5, 5.0, 1}};
  const SelectionResult r = final_holdout(c, fam, ds, split);
  CHECK(r.model_risks[0] == r.model_risks[1]);
  CHECK(r.subset == VariableSubset({0}));
  CHECK(r.alpha == 0.5);
  CHECK(r.beta == 5.0);
}

TEST_CASE("parallel kernels match the serial references") {
  const Dataset ds = gen_breiman(500, 6);
  const SampleSplit split = split_three(ds, {}, 6, Method::M1);
  const auto subsets = all_subsets(10);
  const Collection serial = build_collection_serial(ds, split, subsets, 5);
  for (int jobs : {1, 3, 8}) check_same_chains(serial, build_collection(ds, split, subsets, 5, jobs));

  const PenaltySpec spec = base_spec(ds, split);
  const auto a = grid_select_serial(serial, default_alpha_grid(), default_beta_grid(), spec);
  for (int jobs : {1, 4}) {
    const auto b = grid_select(serial, default_alpha_grid(), default_beta_grid(), spec, jobs);
    CHECK(a.models == b.models);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].model == b.entries[i].model);
  }
}

TEST_CASE("M2 collections prune on the growing rows") {
  const Dataset ds = gen_breiman(300, 7);
  const SampleSplit split = split_three(ds, default_fractions(Method::M2), 7, Method::M2);
  const Collection c = build_collection(ds, split, {VariableSubset({0, 1})}, 5);
  const auto& seq = c.chains[0];
  Rows grown = split.i1;
  const Tree full = grow_maximal(ds, grown, VariableSubset({0, 1}), 5, Framework::Regression);
  CHECK(seq.leaves[0] == full.leaf_count());
  CHECK(seq.risks[0] == doctest::Approx(empirical_contrast(full, ds, split.i1)));
}

TEST_CASE("relabelling the variables relabels the selection") {
  std::mt19937_64 rng(11);
  const Dataset ds = oracle::random_small(rng, 300, 3, Framework::Regression, false);
  const std::size_t perm[3] = {2, 0, 1};  // new column j holds old column perm[j]
  std::vector<double> x(300 * 3), y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    y[i] = ds.y(i);
    for (std::size_t j = 0; j < 3; ++j) x[i * 3 + j] = ds.x(i, perm[j]);
  }
  const Dataset moved(std::move(x), 3, std::move(y), Framework::Regression);

  RunConfig cfg;
  cfg.mode = Mode::Exhaustive;
  const SampleSplit split = split_three(ds, {}, 11, Method::M1);
  const auto a = run_procedure(ds, split, cfg);
  const auto b = run_procedure(moved, split, cfg);
  std::vector<std::size_t> back;
  for (std::size_t j : b.subset.members()) back.push_back(perm[j]);
  CHECK(VariableSubset(back) == a.subset);
  CHECK(b.holdout_risk == doctest::Approx(a.holdout_risk).epsilon(1e-12));
}

TEST_CASE("run_procedure is identical across job counts") {
  const Dataset ds = gen_breiman(400, 12);
  for (Mode mode : {Mode::Pstar, Mode::Exhaustive}) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.seed = 12;
    const auto a = run_procedure(ds, cfg);
    cfg.jobs = 4;
    const auto b = run_procedure(ds, cfg);
    CHECK(a.subset == b.subset);
    CHECK(a.holdout_risk == b.holdout_risk);
    CHECK(a.model_risks == b.model_risks);
    CHECK(a.family.models == b.family.models);
    CHECK(a.subsets_processed == (mode == Mode::Exhaustive ? 1023u : a.pstar->sets.size()));
  }
}

TEST_CASE("run_procedure refuses exhaustive mode past the cap") {
  const Dataset ds = gen_breiman(100, 1, std::sqrt(2.0), 21);
  RunConfig cfg;
  cfg.mode = Mode::Exhaustive;
  CHECK_THROWS_AS(run_procedure(ds, cfg), CapError);
}

TEST_CASE("parse_grid") {
  CHECK(parse_grid("0,1,2.5") == std::vector<double>{0, 1, 2.5});
  const auto g = parse_grid("1:100:3");
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(10.0));
  CHECK(g[2] == 100.0);
  CHECK(parse_grid("4:9:1") == std::vector<double>{4});
  CHECK_THROWS_AS(parse_grid("1,,2"), DataError);
  CHECK_THROWS_AS(parse_grid("-1,2"), DataError);
  CHECK_THROWS_AS(parse_grid("0:10:3"), DataError);
  CHECK_THROWS_AS(parse_grid("1:10"), DataError);
  CHECK_THROWS_AS(parse_grid("1:10:2.5"), DataError);
}

TEST_CASE("effective_nmin defaults") {
  RunConfig cfg;
  CHECK(effective_nmin(cfg, Framework::Regression) == 5);
  CHECK(effective_nmin(cfg, Framework::Classification) == 1);
  cfg.n_min = 9;
  CHECK(effective_nmin(cfg, Framework::Classification) == 9);
}
