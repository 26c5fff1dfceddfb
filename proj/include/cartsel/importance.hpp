#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cartsel/prune.hpp"

namespace cartsel {

enum class ViMode { Surrogate, PrimaryOnly };
enum class PstarTest { OneSe, Permutation };

/// Scores scaled so the largest is 100; ranking by decreasing score, ties by index.
struct ImportanceReport {
  std::vector<double> scores;
  std::vector<std::size_t> ranking;
};

ImportanceReport importance_from_raw(std::vector<double> raw);

/// Impurity-decrease importance over the internal nodes of `tree`, with the
/// node statistics recomputed on `rows`. The split variable is credited the
/// node's decrease; in surrogate mode every other variable is credited the
/// decrease of its surrogate split, the threshold split on that variable that
/// agrees best with the primary one.
ImportanceReport variable_importance(const Tree& tree, const Dataset& ds,
                                     std::span<const RowIndex> rows,
                                     ViMode mode = ViMode::Surrogate);

/// Grow/test rows for hold-out fits: (i1, i2) under M1; under M2 the first
/// and second halves of i1.
std::pair<Rows, Rows> holdout_rows(const SampleSplit& split);

/// CART fit grown on `grow`, pruned along its own weakest-link chain and cut
/// at the member with smallest contrast on `test` (smaller tree on ties).
struct HoldoutFit {
  PrunedSequence chain;
  std::size_t k = 0;
  double contrast = 0.0;
  std::vector<double> losses;  // per test row

  Tree tree() const { return chain.subtree(k); }
};

HoldoutFit holdout_fit(const Dataset& ds, std::span<const RowIndex> grow,
                       std::span<const RowIndex> test, const VariableSubset& subset,
                       std::size_t n_min);

/// Importance of the hold-out-pruned tree on all variables.
ImportanceReport split_importance(const Dataset& ds, const SampleSplit& split, std::size_t n_min,
                                  ViMode mode = ViMode::Surrogate);

struct PstarConfig {
  ViMode vi = ViMode::Surrogate;
  PstarTest test = PstarTest::OneSe;
  std::size_t n_min = 5;
  std::size_t permutations = 200;
  double level = 0.05;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct PstarStep {
  std::size_t variable = 0;
  bool accepted = false;
  double base_contrast = 0.0;
  double candidate_contrast = 0.0;
  double statistic = 0.0;  // standard error (one-se) or p-value (permutation)
  std::string rule;
};

struct SubsetFamily {
  std::vector<VariableSubset> sets;
  std::vector<PstarStep> log;
  ImportanceReport importance;
};

SubsetFamily build_pstar(const Dataset& ds, const SampleSplit& split, const PstarConfig& config);

std::string to_string(ViMode m);
std::string to_string(PstarTest t);
ViMode parse_vi_mode(const std::string& s);
PstarTest parse_pstar_test(const std::string& s);

}  // namespace cartsel
