#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cartsel/dataset.hpp"

namespace cartsel {

/// A nonempty set of variable indices, kept sorted.
class VariableSubset {
 public:
  VariableSubset() = default;
  explicit VariableSubset(std::vector<std::size_t> members);
  static VariableSubset all(std::size_t p);
  static VariableSubset from_mask(std::uint64_t mask);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(std::size_t j) const;
  VariableSubset with(std::size_t j) const;

  /// "{1,2,5}" with one-based indices.
  std::string label() const;

  auto operator<=>(const VariableSubset&) const = default;

 private:
  std::vector<std::size_t> members_;
};

struct Split {
  std::size_t var = 0;
  double threshold = 0.0;  // x[var] <= threshold goes left
  double decrease = 0.0;
};

/// Flat preorder node storage; node 0 is the root.
struct Node {
  static constexpr std::int32_t kNone = -1;

  std::int32_t var = kNone;  // kNone for leaves
  double threshold = 0.0;
  double decrease = 0.0;     // impurity decrease of the split on the growing rows
  std::int32_t left = kNone;
  std::int32_t right = kNone;
  double value = 0.0;        // fitted constant; for internal nodes the value if collapsed
  std::size_t count = 0;     // growing observations reaching the node
  bool refit_empty = false;  // set by refit_leaves when no fitting row reached the node
  Rows rows;                 // growing rows; leaves only

  bool is_leaf() const { return var == kNone; }
};

struct Tree {
  std::vector<Node> nodes;
  VariableSubset subset;
  Framework framework = Framework::Regression;
  std::size_t n_total = 0;
  std::size_t n_min = 1;

  std::size_t leaf_count() const;
  std::size_t leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
  double operator()(std::span<const double> x) const { return predict(x); }
};

double impurity_regression(std::span<const double> responses, std::size_t n_total);
double impurity_gini(std::size_t count0, std::size_t count1);

/// Mean (regression) or majority label with ties to 0 (classification).
double leaf_value(std::span<const double> responses, Framework framework);

/// Best admissible split on the variables of `subset`, or nothing when no
/// split has strictly positive impurity decrease. Only splits leaving at
/// least `n_min` rows on each side are considered. Ties go to the smallest
/// variable, then the smallest threshold.
std::optional<Split> best_split(const Dataset& ds, std::span<const RowIndex> rows,
                                const VariableSubset& subset, Framework framework,
                                std::size_t n_total, std::size_t n_min = 1);

Tree grow_maximal(const Dataset& ds, std::span<const RowIndex> rows,
                  const VariableSubset& subset, std::size_t n_min, Framework framework);

double predict(const Tree& tree, std::span<const double> x);

/// Mean of (y - pred(x))^2 over rows.
template <class Predictor>
double empirical_contrast(const Predictor& pred, const Dataset& ds,
                          std::span<const RowIndex> rows) {
  if (rows.empty()) throw DataError("empirical_contrast on empty row set");
  double sum = 0.0;
  for (RowIndex i : rows) {
    const double r = ds.y(i) - pred(ds.row(i));
    sum += r * r;
  }
  return sum / static_cast<double>(rows.size());
}

/// Per-observation losses (y - pred(x))^2, in row order.
template <class Predictor>
std::vector<double> pointwise_losses(const Predictor& pred, const Dataset& ds,
                                     std::span<const RowIndex> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (RowIndex i : rows) {
    const double r = ds.y(i) - pred(ds.row(i));
    out.push_back(r * r);
  }
  return out;
}

/// Re-estimates every node's constant on `rows`. Nodes no row reaches keep
/// their value and get refit_empty set.
Tree refit_leaves(const Tree& tree, const Dataset& ds, std::span<const RowIndex> rows,
                  Framework framework);

/// Theoretical minimum node size 24 rho^2 / sigma^2 log n, rounded up (at least 1).
std::size_t theoretical_nmin(double sigma2, double rho, std::size_t n);

}  // namespace cartsel
