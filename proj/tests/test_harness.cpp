#include <doctest.h>

#include <filesystem>

#include "cartsel/harness.hpp"

using namespace cartsel;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(std::vector<std::uint64_t> seeds) {
  ExperimentConfig c;
  c.n = 300;
  c.seeds = std::move(seeds);
  c.alpha_grid = {0.1, 5.0};
  c.beta_grid = {0.0, 1000.0};
  return c;
}

CellSummary cell(std::vector<std::size_t> members) {
  CellSummary s;
  s.counts.push_back({VariableSubset(std::move(members)), 3});
  s.total = 4;
  return s;
}

void check_same_run(const SeedRun& a, const SeedRun& b) {
  CHECK(a.seed == b.seed);
  CHECK(a.importance.scores == b.importance.scores);
  CHECK(a.grid == b.grid);
  CHECK(a.final_subset == b.final_subset);
  CHECK(a.holdout_risk == b.holdout_risk);
  CHECK(a.model_risks == b.model_risks);
  CHECK(a.pstar == b.pstar);
}

}  // namespace

TEST_CASE("check_expected_sizes flags only unexpected modal sizes") {
  ExperimentReport r;
  r.config.alpha_grid = {0.5, 2.0};
  r.config.beta_grid = {10.0, 20.0};
  r.grid_cells = {cell({0}), cell({0, 1}), cell({0, 1, 2, 3, 4, 5, 6}), cell({0, 1, 2, 3})};
  const auto flags = check_expected_sizes(r);
  REQUIRE(flags.size() == 2);
  CHECK(flags[0].alpha == 0.5);
  CHECK(flags[0].beta == 20.0);
  CHECK(flags[0].subset.size() == 2);
  CHECK(flags[1].alpha == 2.0);
  CHECK(flags[1].beta == 20.0);
  CHECK(r.grid_cells[0].frequency() == 0.75);
}

TEST_CASE("reproduce_example is deterministic and seed-order free") {
  const ExperimentReport a = reproduce_example(small_config({2, 1, 2}));
  REQUIRE(a.runs.size() == 2);
  CHECK(a.runs[0].seed == 1);
  CHECK(a.grid_cells.size() == 4);
  CHECK(a.final_summary.total == 2);

  ExperimentConfig par = small_config({1, 2});
  par.jobs = 2;
  const ExperimentReport b = reproduce_example(par);
  CHECK(report_json(a) == report_json(b));
}

TEST_CASE("adding a seed leaves the existing runs untouched") {
  const ExperimentReport a = reproduce_example(small_config({1, 2}));
  const ExperimentReport b = reproduce_example(small_config({1, 2, 3}));
  REQUIRE(b.runs.size() == 3);
  check_same_run(a.runs[0], b.runs[0]);
  check_same_run(a.runs[1], b.runs[1]);
}

TEST_CASE("write_report creates every table") {
  const ExperimentReport r = reproduce_example(small_config({4}));
  const fs::path dir = fs::temp_directory_path() / "cartsel_test_report";
  fs::remove_all(dir);
  write_report(r, dir);
  for (const char* stem : {"vi_table", "grid_table", "final_table"})
    for (const char* ext : {".json", ".csv", ".md"}) CHECK(fs::exists(dir / (std::string(stem) + ext)));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::file_size(dir / "report.json") > 0);
}
