#include "cartsel/prune.hpp"

#include <algorithm>

namespace cartsel {

namespace {

std::size_t child(const Node& n, bool left) {
  return static_cast<std::size_t>(left ? n.left : n.right);
}

void gather_rows(const Tree& t, std::size_t v, Rows& out) {
  const Node& n = t.nodes[v];
  if (n.is_leaf()) {
    out.insert(out.end(), n.rows.begin(), n.rows.end());
    return;
  }
  gather_rows(t, child(n, true), out);
  gather_rows(t, child(n, false), out);
}

std::int32_t copy_cut(const PrunedSequence& seq, std::size_t k, std::size_t v, Tree& out) {
  const Node& src = seq.base.nodes[v];
  const auto id = static_cast<std::int32_t>(out.nodes.size());
  out.nodes.push_back(src);
  if (src.is_leaf()) return id;
  if (seq.collapse_step[v] <= k) {
    Node& n = out.nodes.back();
    n.var = Node::kNone;
    n.left = n.right = Node::kNone;
    n.threshold = 0.0;
    n.decrease = 0.0;
    gather_rows(seq.base, v, n.rows);
    std::sort(n.rows.begin(), n.rows.end());
    return id;
  }
  const std::int32_t l = copy_cut(seq, k, child(src, true), out);
  const std::int32_t r = copy_cut(seq, k, child(src, false), out);
  out.nodes[static_cast<std::size_t>(id)].left = l;
  out.nodes[static_cast<std::size_t>(id)].right = r;
  return id;
}

}  // namespace

std::size_t PrunedSequence::index_at(double lambda) const {
  if (lambda < 0.0) throw DataError("penalty per leaf must be nonnegative");
  auto it = std::upper_bound(criticals.begin(), criticals.end(), lambda);
  return static_cast<std::size_t>(it - criticals.begin()) - 1;
}

Tree PrunedSequence::subtree(std::size_t k) const {
  Tree out;
  out.subset = base.subset;
  out.framework = base.framework;
  out.n_total = base.n_total;
  out.n_min = base.n_min;
  copy_cut(*this, k, 0, out);
  return out;
}

std::size_t PrunedSequence::leaf_index(std::size_t k, std::span<const double> x) const {
  std::size_t v = 0;
  for (;;) {
    const Node& n = base.nodes[v];
    if (n.is_leaf() || collapse_step[v] <= k) return v;
    v = child(n, x[static_cast<std::size_t>(n.var)] <= n.threshold);
  }
}

double PrunedSequence::predict(std::size_t k, std::span<const double> x) const {
  return base.nodes[leaf_index(k, x)].value;
}

PrunedSequence prune_sequence(const Tree& tree, const Dataset& ds, std::span<const RowIndex> rows,
                              Framework framework) {
  if (tree.nodes.empty()) throw DataError("prune_sequence on empty tree");
  if (rows.empty()) throw DataError("prune_sequence needs pruning rows");

  PrunedSequence seq;
  seq.base = refit_leaves(tree, ds, rows, framework);
  seq.n_rows = rows.size();
  const auto& nodes = seq.base.nodes;
  const std::size_t m = nodes.size();
  seq.collapse_step.assign(m, PrunedSequence::kNever);

  // Loss of each node taken as a leaf, summed over the pruning rows.
  std::vector<double> loss(m, 0.0);
  for (RowIndex i : rows) {
    std::size_t v = 0;
    for (;;) {
      const double r = ds.y(i) - nodes[v].value;
      loss[v] += r * r;
      if (nodes[v].is_leaf()) break;
      v = child(nodes[v], ds.x(i, static_cast<std::size_t>(nodes[v].var)) <= nodes[v].threshold);
    }
  }

  // Branch losses and leaf counts of the current subtree, bottom-up. Preorder
  // storage puts children after their parent.
  std::vector<double> branch(m);
  std::vector<std::size_t> nleaves(m);
  std::vector<char> cut(m, 0);
  for (std::size_t v = 0; v < m; ++v) cut[v] = nodes[v].is_leaf();

  const double tol = 1e-12 * loss[0];
  const double n_rows = static_cast<double>(rows.size());

  auto accumulate = [&](std::size_t v) {
    if (cut[v]) {
      branch[v] = loss[v];
      nleaves[v] = 1;
    } else {
      const std::size_t l = child(nodes[v], true), r = child(nodes[v], false);
      branch[v] = branch[l] + branch[r];
      nleaves[v] = nleaves[l] + nleaves[r];
    }
  };

  // T_0: smallest subtree with minimal contrast.
  for (std::size_t v = m; v-- > 0;) {
    accumulate(v);
    if (!cut[v] && loss[v] - branch[v] <= tol) {
      cut[v] = 1;
      seq.collapse_step[v] = 0;
      accumulate(v);
    }
  }
  seq.criticals.push_back(0.0);
  seq.risks.push_back(branch[0] / n_rows);
  seq.leaves.push_back(nleaves[0]);

  std::vector<char> visible(m);
  while (!cut[0]) {
    for (std::size_t v = m; v-- > 0;) accumulate(v);
    std::fill(visible.begin(), visible.end(), 0);
    visible[0] = 1;
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < m; ++v) {
      if (!visible[v] || cut[v]) continue;
      visible[child(nodes[v], true)] = visible[child(nodes[v], false)] = 1;
      const double g = (loss[v] - branch[v]) / static_cast<double>(nleaves[v] - 1);
      weakest = std::min(weakest, g);
    }

    const double lambda = std::max(weakest, 0.0) / n_rows;
    const bool merge = lambda <= seq.criticals.back();
    const std::size_t step = merge ? seq.size() - 1 : seq.size();
    for (std::size_t v = 0; v < m; ++v) {
      if (!visible[v] || cut[v]) continue;
      const double g = (loss[v] - branch[v]) / static_cast<double>(nleaves[v] - 1);
      if (g <= weakest + tol) {
        cut[v] = 1;
        seq.collapse_step[v] = step;
      }
    }
    for (std::size_t v = m; v-- > 0;) accumulate(v);
    if (merge) {
      seq.risks.back() = branch[0] / n_rows;
      seq.leaves.back() = nleaves[0];
    } else {
      seq.criticals.push_back(lambda);
      seq.risks.push_back(branch[0] / n_rows);
      seq.leaves.push_back(nleaves[0]);
    }
  }
  return seq;
}

Tree subtree_at(const PrunedSequence& seq, double lambda) {
  return seq.subtree(seq.index_at(lambda));
}

}  // namespace cartsel
