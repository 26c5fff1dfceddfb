#pragma once

#include <limits>
#include <vector>

#include "cartsel/tree.hpp"

namespace cartsel {

/// Nested weakest-link chain T_0 > T_1 > ... > T_K (root only).
///
/// The chain is stored once: `base` is the start tree with every node's value
/// refit on the pruning rows, and `collapse_step[v]` is the first chain index
/// at which internal node v is a leaf (kNever for the base tree's leaves).
/// T_k is the base tree cut at every node with collapse_step <= k.
struct PrunedSequence {
  static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

  Tree base;
  std::vector<std::size_t> collapse_step;
  std::vector<double> criticals;     // lambda_0 = 0 < lambda_1 < ... (per-leaf, contrast units)
  std::vector<double> risks;         // contrast of T_k on the pruning rows
  std::vector<std::size_t> leaves;   // |T_k|
  std::size_t n_rows = 0;

  std::size_t size() const { return criticals.size(); }

  /// Largest k with criticals[k] <= lambda.
  std::size_t index_at(double lambda) const;

  Tree subtree(std::size_t k) const;
  std::size_t leaf_index(std::size_t k, std::span<const double> x) const;
  double predict(std::size_t k, std::span<const double> x) const;
};

PrunedSequence prune_sequence(const Tree& tree, const Dataset& ds, std::span<const RowIndex> rows,
                              Framework framework);

Tree subtree_at(const PrunedSequence& seq, double lambda);

/// Predictor view of one chain member; avoids materializing the subtree.
struct ChainMember {
  const PrunedSequence* seq;
  std::size_t k;
  double operator()(std::span<const double> x) const { return seq->predict(k, x); }
};

}  // namespace cartsel
