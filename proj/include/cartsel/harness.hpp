#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cartsel/selection.hpp"

namespace cartsel {

struct ExperimentConfig {
  std::size_t n = 1000;
  std::vector<std::uint64_t> seeds;  // empty means 1..20
  SplitFractions fractions{};
  Method method = Method::M1;
  Mode mode = Mode::Pstar;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::vector<double> beta_grid = default_beta_grid();
  std::optional<std::size_t> n_min;
  ViMode vi = ViMode::Surrogate;
  PstarTest pstar_test = PstarTest::OneSe;
  bool force_exhaustive = false;
  int jobs = 1;
};

/// Everything kept from one seed's run.
struct SeedRun {
  std::uint64_t seed = 0;
  ImportanceReport importance;
  std::vector<VariableSubset> grid;  // alpha-major, one subset per grid point
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  VariableSubset final_subset;
  double holdout_risk = 0.0;
  std::vector<double> model_risks;
  std::size_t K = 0;
  std::size_t subsets_processed = 0;
  std::vector<VariableSubset> pstar;  // empty in exhaustive mode
};

struct SubsetCount {
  VariableSubset subset;
  std::size_t count = 0;
};

/// Modal subset of a cell plus the full distribution (most frequent first).
struct CellSummary {
  std::vector<SubsetCount> counts;
  std::size_t total = 0;
  const VariableSubset& modal() const { return counts.front().subset; }
  double frequency() const {
    return static_cast<double>(counts.front().count) / static_cast<double>(total);
  }
};

struct GridBin {
  std::string alpha_range;
  std::string beta_range;
  CellSummary summary;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t p = 0;
  std::vector<SeedRun> runs;  // sorted by seed
  std::vector<std::size_t> mean_rank_order;  // variables by average rank
  std::vector<std::size_t> modal_ranking;
  double modal_ranking_frequency = 0.0;
  std::vector<CellSummary> grid_cells;  // alpha-major, parallel to the grids
  std::vector<GridBin> grid_bins;
  CellSummary final_summary;
};

/// Runs the ten-variable example once per seed (in parallel over seeds) and
/// aggregates rankings, grid maps and final choices.
ExperimentReport reproduce_example(const ExperimentConfig& config);

struct SizeFlag {
  double alpha = 0.0;
  double beta = 0.0;
  VariableSubset subset;
};

/// Grid cells whose modal subset size is outside {1, 3, 5, 7, 10}.
std::vector<SizeFlag> check_expected_sizes(const ExperimentReport& report);

/// Writes vi_table, grid_table and final_table as .json/.csv/.md plus report.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// report.json content.
std::string report_json(const ExperimentReport& report);

}  // namespace cartsel
