#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cartsel/importance.hpp"
#include "cartsel/penalty.hpp"
#include "cartsel/prune.hpp"

namespace cartsel {

/// Raised when exhaustive mode is asked for more variables than the cap.
class CapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Exhaustive, Pstar };

/// Pruning chain per candidate subset, in the order the subsets were given.
struct Collection {
  std::vector<VariableSubset> subsets;
  std::vector<PrunedSequence> chains;

  std::size_t size() const { return subsets.size(); }
  /// Sum of chain lengths.
  std::size_t total_models() const;
  const PrunedSequence* find(const VariableSubset& s) const;
};

/// Every nonempty subset of {0..p-1}, ordered by bitmask.
std::vector<VariableSubset> all_subsets(std::size_t p, std::size_t cap = 20, bool force = false);

/// Grows T_max^(M) on i1 for each subset; M1 refits and prunes on i2, M2 prunes on i1.
Collection build_collection(const Dataset& ds, const SampleSplit& split,
                            const std::vector<VariableSubset>& subsets, std::size_t n_min,
                            int jobs = 1);
/// Single-threaded reference for build_collection.
Collection build_collection_serial(const Dataset& ds, const SampleSplit& split,
                                   const std::vector<VariableSubset>& subsets, std::size_t n_min);

std::size_t select_tree_index(const PrunedSequence& seq, const PenaltySpec& spec,
                              std::size_t m_size);
Tree select_tree(const PrunedSequence& seq, const PenaltySpec& spec, std::size_t m_size);

struct ModelKey {
  std::size_t subset = 0;  // index into the collection
  std::size_t k = 0;       // chain member
  auto operator<=>(const ModelKey&) const = default;
};

struct ModelChoice {
  ModelKey key;
  double criterion = 0.0;
};

/// Two-step penalized choice: T_M by the leaf coefficient for every M, then
/// the M minimizing contrast + penalty. Ties: smaller |M|, smaller |T|, then
/// lexicographic subset.
ModelChoice select_model(const Collection& collection, const PenaltySpec& spec);

struct GridEntry {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t model = 0;  // index into EstimatorFamily::models
};

struct EstimatorFamily {
  std::vector<GridEntry> entries;  // alpha-major grid order
  std::vector<ModelKey> models;    // distinct, in order of first appearance
  std::size_t K() const { return models.size(); }
};

EstimatorFamily grid_select(const Collection& collection, const std::vector<double>& alpha_grid,
                            const std::vector<double>& beta_grid, const PenaltySpec& spec_base,
                            int jobs = 1);
EstimatorFamily grid_select_serial(const Collection& collection,
                                   const std::vector<double>& alpha_grid,
                                   const std::vector<double>& beta_grid,
                                   const PenaltySpec& spec_base);

struct SelectionResult {
  double alpha = 0.0;
  double beta = 0.0;
  VariableSubset subset;
  Tree tree;
  std::size_t model = 0;
  double holdout_risk = 0.0;
  std::vector<double> model_risks;  // i3 contrast per distinct model
  EstimatorFamily family;
  std::vector<VariableSubset> family_subsets;  // subset of each distinct model
  std::size_t subsets_processed = 0;
  ImportanceReport importance;
  std::optional<SubsetFamily> pstar;
};

SelectionResult final_holdout(const Collection& collection, EstimatorFamily family,
                              const Dataset& ds, const SampleSplit& split);

std::vector<double> default_alpha_grid();
std::vector<double> default_beta_grid();

/// "a,b,c" or "min:max:count" (count points log-spaced from min > 0 to max).
std::vector<double> parse_grid(const std::string& text);

struct RunConfig {
  Method method = Method::M1;
  SplitFractions fractions{};
  std::uint64_t seed = 1;
  Mode mode = Mode::Pstar;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::vector<double> beta_grid = default_beta_grid();
  std::optional<std::size_t> n_min;  // 5 for regression, 1 for classification
  ViMode vi = ViMode::Surrogate;
  PstarTest pstar_test = PstarTest::OneSe;
  std::size_t exhaustive_cap = 20;
  bool force_exhaustive = false;
  std::optional<TheoreticalConstants> theoretical;
  bool sigma2_plugin = false;  // regression only; sets theoretical {sigma2_hat, 0, 0, 1}
  int jobs = 1;
};

std::size_t effective_nmin(const RunConfig& config, Framework framework);

/// Residual mean square of the maximal tree on all variables, on its growing rows.
double estimate_sigma2(const Dataset& ds, std::span<const RowIndex> rows, std::size_t n_min);

SelectionResult run_procedure(const Dataset& ds, const RunConfig& config);
SelectionResult run_procedure(const Dataset& ds, const SampleSplit& split,
                              const RunConfig& config);

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

}  // namespace cartsel
