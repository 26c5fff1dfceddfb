#include "cartsel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cartsel {

VariableSubset::VariableSubset(std::vector<std::size_t> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

VariableSubset VariableSubset::all(std::size_t p) {
  std::vector<std::size_t> m(p);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return VariableSubset(std::move(m));
}

VariableSubset VariableSubset::from_mask(std::uint64_t mask) {
  std::vector<std::size_t> m;
  for (std::size_t j = 0; j < 64; ++j)
    if (mask >> j & 1U) m.push_back(j);
  return VariableSubset(std::move(m));
}

bool VariableSubset::contains(std::size_t j) const {
  return std::binary_search(members_.begin(), members_.end(), j);
}

VariableSubset VariableSubset::with(std::size_t j) const {
  auto m = members_;
  m.push_back(j);
  return VariableSubset(std::move(m));
}

std::string VariableSubset::label() const {
  std::string s = "{";
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(members_[k] + 1);
  }
  return s + "}";
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  std::size_t k = 0;
  while (!nodes[k].is_leaf()) {
    const Node& n = nodes[k];
    k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.var)] <= n.threshold ? n.left
                                                                                    : n.right);
  }
  return k;
}

double predict(const Tree& tree, std::span<const double> x) { return tree.predict(x); }

double impurity_regression(std::span<const double> responses, std::size_t n_total) {
  if (responses.empty()) throw DataError("impurity of empty node");
  const double mean = std::accumulate(responses.begin(), responses.end(), 0.0) /
                      static_cast<double>(responses.size());
  double sse = 0.0;
  for (double y : responses) sse += (y - mean) * (y - mean);
  return sse / static_cast<double>(n_total);
}

double impurity_gini(std::size_t count0, std::size_t count1) {
  const std::size_t n = count0 + count1;
  if (n == 0) throw DataError("impurity of empty node");
  const double p0 = static_cast<double>(count0) / static_cast<double>(n);
  return 2.0 * p0 * (1.0 - p0);
}

double leaf_value(std::span<const double> responses, Framework framework) {
  if (responses.empty()) return 0.0;
  if (framework == Framework::Classification) {
    const auto ones = std::count(responses.begin(), responses.end(), 1.0);
    return 2 * ones > static_cast<std::ptrdiff_t>(responses.size()) ? 1.0 : 0.0;
  }
  return std::accumulate(responses.begin(), responses.end(), 0.0) /
         static_cast<double>(responses.size());
}

namespace {

// Relative slack under which two candidate decreases count as tied, and below
// which a regression decrease counts as zero.
constexpr double kTieTol = 1e-12;

struct Point {
  double x;
  double y;
  RowIndex row;
};

}  // namespace

std::optional<Split> best_split(const Dataset& ds, std::span<const RowIndex> rows,
                                const VariableSubset& subset, Framework framework,
                                std::size_t n_total, std::size_t n_min) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;
  n_min = std::max<std::size_t>(n_min, 1);
  if (2 * n_min > n) return std::nullopt;

  const double nd = static_cast<double>(n);
  const double weight = nd / static_cast<double>(n_total);

  // Scale used to reject rounding-level regression gains.
  double floor_gain = 0.0;
  double total = 0.0;
  std::size_t ones = 0;
  if (framework == Framework::Regression) {
    std::vector<double> ys;
    ys.reserve(n);
    for (RowIndex i : rows) ys.push_back(ds.y(i));
    floor_gain = kTieTol * impurity_regression(ys, n_total);
    if (floor_gain == 0.0) return std::nullopt;
    for (double y : ys) total += y;
  } else {
    for (RowIndex i : rows) ones += ds.y(i) == 1.0;
    if (ones == 0 || ones == n) return std::nullopt;
  }

  std::optional<Split> best;
  std::vector<Point> pts(n);
  for (std::size_t var : subset.members()) {
    for (std::size_t k = 0; k < n; ++k) pts[k] = {ds.x(rows[k], var), ds.y(rows[k]), rows[k]};
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
      return a.x < b.x || (a.x == b.x && a.row < b.row);
    });

    double left_sum = 0.0;
    std::size_t left_ones = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += pts[k].y;
      left_ones += pts[k].y == 1.0;
      if (pts[k].x == pts[k + 1].x) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < n_min || nr < n_min) continue;

      const double nld = static_cast<double>(nl);
      const double nrd = static_cast<double>(nr);
      double gain = 0.0;
      if (framework == Framework::Regression) {
        // SSE(t) - SSE(L) - SSE(R) = nl nr / n (mean_l - mean_r)^2
        const double diff = left_sum / nld - (total - left_sum) / nrd;
        gain = nld * nrd / nd * diff * diff / static_cast<double>(n_total);
        if (gain <= floor_gain) continue;
      } else {
        // Binary Gini: i(t) - wl i(l) - wr i(r) = 2 wl wr (p_l - p_r)^2
        const double pl = static_cast<double>(left_ones) / nld;
        const double pr = static_cast<double>(ones - left_ones) / nrd;
        gain = weight * 2.0 * (nld / nd) * (nrd / nd) * (pl - pr) * (pl - pr);
        if (gain <= 0.0) continue;
      }
      if (!best || gain > best->decrease * (1.0 + kTieTol)) {
        best = Split{var, 0.5 * (pts[k].x + pts[k + 1].x), gain};
      }
    }
  }
  return best;
}

namespace {

bool is_pure(const Dataset& ds, std::span<const RowIndex> rows) {
  const double y0 = ds.y(rows.front());
  return std::all_of(rows.begin(), rows.end(), [&](RowIndex i) { return ds.y(i) == y0; });
}

std::int32_t grow_node(Tree& tree, const Dataset& ds, Rows rows) {
  const auto id = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  {
    std::vector<double> ys;
    ys.reserve(rows.size());
    for (RowIndex i : rows) ys.push_back(ds.y(i));
    Node& node = tree.nodes.back();
    node.value = leaf_value(ys, tree.framework);
    node.count = rows.size();
  }

  std::optional<Split> split;
  if (rows.size() >= 2 && !is_pure(ds, rows))
    split = best_split(ds, rows, tree.subset, tree.framework, tree.n_total, tree.n_min);
  if (!split) {
    tree.nodes[static_cast<std::size_t>(id)].rows = std::move(rows);
    return id;
  }

  Rows left, right;
  for (RowIndex i : rows) (ds.x(i, split->var) <= split->threshold ? left : right).push_back(i);
  rows.clear();
  rows.shrink_to_fit();

  {
    Node& node = tree.nodes[static_cast<std::size_t>(id)];
    node.var = static_cast<std::int32_t>(split->var);
    node.threshold = split->threshold;
    node.decrease = split->decrease;
  }
  const std::int32_t l = grow_node(tree, ds, std::move(left));
  const std::int32_t r = grow_node(tree, ds, std::move(right));
  tree.nodes[static_cast<std::size_t>(id)].left = l;
  tree.nodes[static_cast<std::size_t>(id)].right = r;
  return id;
}

}  // namespace

Tree grow_maximal(const Dataset& ds, std::span<const RowIndex> rows,
                  const VariableSubset& subset, std::size_t n_min, Framework framework) {
  if (rows.empty()) throw DataError("grow_maximal needs at least one row");
  for (std::size_t j : subset.members())
    if (j >= ds.p()) throw DataError("subset variable out of range");
  Tree tree;
  tree.subset = subset;
  tree.framework = framework;
  tree.n_total = rows.size();
  tree.n_min = std::max<std::size_t>(n_min, 1);
  grow_node(tree, ds, Rows(rows.begin(), rows.end()));
  return tree;
}

Tree refit_leaves(const Tree& tree, const Dataset& ds, std::span<const RowIndex> rows,
                  Framework framework) {
  const std::size_t m = tree.nodes.size();
  std::vector<std::vector<double>> ys(m);
  for (RowIndex i : rows) {
    std::size_t k = 0;
    for (;;) {
      ys[k].push_back(ds.y(i));
      const Node& n = tree.nodes[k];
      if (n.is_leaf()) break;
      k = static_cast<std::size_t>(ds.x(i, static_cast<std::size_t>(n.var)) <= n.threshold
                                       ? n.left
                                       : n.right);
    }
  }
  Tree out = tree;
  for (std::size_t k = 0; k < m; ++k) {
    Node& n = out.nodes[k];
    n.refit_empty = ys[k].empty();
    if (!n.refit_empty) n.value = leaf_value(ys[k], framework);
  }
  return out;
}

std::size_t theoretical_nmin(double sigma2, double rho, std::size_t n) {
  if (!(sigma2 > 0.0)) throw DataError("theoretical_nmin needs sigma2 > 0");
  const double v = 24.0 * rho * rho / sigma2 * std::log(static_cast<double>(n));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

}  // namespace cartsel
