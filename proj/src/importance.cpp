#include "cartsel/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cartsel/parallel.hpp"

namespace cartsel {

ImportanceReport importance_from_raw(std::vector<double> raw) {
  ImportanceReport rep;
  const double top = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  rep.scores = std::move(raw);
  for (double& s : rep.scores) s = top > 0.0 ? 100.0 * s / top : 0.0;
  rep.ranking.resize(rep.scores.size());
  std::iota(rep.ranking.begin(), rep.ranking.end(), std::size_t{0});
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(), [&](std::size_t a, std::size_t b) {
    return rep.scores[a] > rep.scores[b];
  });
  return rep;
}

namespace {

double node_decrease(const Dataset& ds, const Rows& left, const Rows& right, Framework fw,
                     std::size_t n_total) {
  if (left.empty() || right.empty()) return 0.0;
  const double nl = static_cast<double>(left.size());
  const double nr = static_cast<double>(right.size());
  const double n = nl + nr;
  double a = 0.0, b = 0.0;
  for (RowIndex i : left) a += ds.y(i);
  for (RowIndex i : right) b += ds.y(i);
  const double diff = a / nl - b / nr;
  const double scale = fw == Framework::Regression ? nl * nr / n
                                                   : n * 2.0 * (nl / n) * (nr / n);
  return scale * diff * diff / static_cast<double>(n_total);
}

// Impurity decrease of the surrogate split on variable j: the threshold split
// on j that agrees best with the primary partition (either orientation;
// smallest threshold on ties).
double surrogate_decrease(const Dataset& ds, const Rows& rows, const std::vector<char>& goes_left,
                          std::size_t j, Framework fw, std::size_t n_total) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.x(rows[a], j) < ds.x(rows[b], j);
  });
  std::size_t total_left = 0;
  for (char g : goes_left) total_left += static_cast<std::size_t>(g);
  const std::size_t total_right = n - total_left;

  double best = -1.0;
  double threshold = 0.0;
  std::size_t pre_left = 0, pre_right = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    (goes_left[order[k]] ? pre_left : pre_right) += 1;
    const double lo = ds.x(rows[order[k]], j);
    const double hi = ds.x(rows[order[k + 1]], j);
    if (lo == hi) continue;
    const std::size_t agree = pre_left + (total_right - pre_right);
    const double a = static_cast<double>(agree) / static_cast<double>(n);
    if (std::max(a, 1.0 - a) > best) {
      best = std::max(a, 1.0 - a);
      threshold = 0.5 * (lo + hi);
    }
  }
  if (best < 0.0) return 0.0;  // constant at this node

  Rows left, right;
  for (RowIndex i : rows) (ds.x(i, j) <= threshold ? left : right).push_back(i);
  return node_decrease(ds, left, right, fw, n_total);
}

}  // namespace

ImportanceReport variable_importance(const Tree& tree, const Dataset& ds,
                                     std::span<const RowIndex> rows, ViMode mode) {
  if (tree.nodes.empty()) throw DataError("variable_importance on empty tree");
  const std::size_t m = tree.nodes.size();
  const std::size_t p = ds.p();

  std::vector<Rows> at(m);
  for (RowIndex i : rows) {
    std::size_t v = 0;
    for (;;) {
      at[v].push_back(i);
      const Node& n = tree.nodes[v];
      if (n.is_leaf()) break;
      v = static_cast<std::size_t>(ds.x(i, static_cast<std::size_t>(n.var)) <= n.threshold
                                       ? n.left
                                       : n.right);
    }
  }

  // Per-node credit rows, reduced serially below for a schedule-free sum.
  std::vector<std::vector<double>> credit(m, std::vector<double>(p, 0.0));
  for (std::size_t v = 0; v < m; ++v) {
    const Node& n = tree.nodes[v];
    if (n.is_leaf() || at[v].size() < 2) continue;
    const auto split_var = static_cast<std::size_t>(n.var);
    Rows left, right;
    std::vector<char> goes_left(at[v].size());
    for (std::size_t k = 0; k < at[v].size(); ++k) {
      goes_left[k] = ds.x(at[v][k], split_var) <= n.threshold;
      (goes_left[k] ? left : right).push_back(at[v][k]);
    }
    const double dec = node_decrease(ds, left, right, tree.framework, rows.size());
    credit[v][split_var] = dec;
    if (mode == ViMode::PrimaryOnly || dec == 0.0) continue;
    for (std::size_t j = 0; j < p; ++j) {
      if (j == split_var) continue;
      credit[v][j] = surrogate_decrease(ds, at[v], goes_left, j, tree.framework, rows.size());
    }
  }

  std::vector<double> raw(p, 0.0);
  for (std::size_t v = 0; v < m; ++v)
    for (std::size_t j = 0; j < p; ++j) raw[j] += credit[v][j];
  return importance_from_raw(std::move(raw));
}

std::pair<Rows, Rows> holdout_rows(const SampleSplit& split) {
  if (split.method == Method::M1) return {split.i1, split.i2};
  const std::size_t half = (split.i1.size() + 1) / 2;
  Rows grow(split.i1.begin(), split.i1.begin() + static_cast<std::ptrdiff_t>(half));
  Rows test(split.i1.begin() + static_cast<std::ptrdiff_t>(half), split.i1.end());
  if (test.empty()) test = grow;
  return {std::move(grow), std::move(test)};
}

HoldoutFit holdout_fit(const Dataset& ds, std::span<const RowIndex> grow,
                       std::span<const RowIndex> test, const VariableSubset& subset,
                       std::size_t n_min) {
  const Tree full = grow_maximal(ds, grow, subset, n_min, ds.framework());
  HoldoutFit fit;
  fit.chain = prune_sequence(full, ds, grow, ds.framework());
  fit.contrast = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fit.chain.size(); ++k) {
    const double c = empirical_contrast(ChainMember{&fit.chain, k}, ds, test);
    if (c <= fit.contrast) {
      fit.contrast = c;
      fit.k = k;
    }
  }
  fit.losses = pointwise_losses(ChainMember{&fit.chain, fit.k}, ds, test);
  return fit;
}

ImportanceReport split_importance(const Dataset& ds, const SampleSplit& split, std::size_t n_min,
                                  ViMode mode) {
  const auto [grow, test] = holdout_rows(split);
  const HoldoutFit fit = holdout_fit(ds, grow, test, VariableSubset::all(ds.p()), n_min);
  return variable_importance(fit.tree(), ds, grow, mode);
}

namespace {

double standard_error(const std::vector<double>& losses) {
  const double n = static_cast<double>(losses.size());
  if (losses.size() < 2) return 0.0;
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double ss = 0.0;
  for (double l : losses) ss += (l - mean) * (l - mean);
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

SubsetFamily build_pstar(const Dataset& ds, const SampleSplit& split, const PstarConfig& config) {
  SubsetFamily fam;
  fam.importance = split_importance(ds, split, config.n_min, config.vi);
  const auto& ranking = fam.importance.ranking;
  const auto [grow, test] = holdout_rows(split);

  VariableSubset current({ranking.front()});
  fam.sets.push_back(current);
  HoldoutFit base = holdout_fit(ds, grow, test, current, config.n_min);

  for (std::size_t r = 1; r < ranking.size(); ++r) {
    const std::size_t v = ranking[r];
    const VariableSubset candidate = current.with(v);
    HoldoutFit cand = holdout_fit(ds, grow, test, candidate, config.n_min);
    const double gain = base.contrast - cand.contrast;

    PstarStep step;
    step.variable = v;
    step.base_contrast = base.contrast;
    step.candidate_contrast = cand.contrast;
    if (config.test == PstarTest::OneSe) {
      step.rule = "one-se (interpretation)";
      step.statistic = standard_error(cand.losses);
      step.accepted = gain > step.statistic;
    } else {
      step.rule = "permutation (interpretation)";
      const std::size_t b_count = std::max<std::size_t>(config.permutations, 1);
      std::vector<double> null_gain(b_count);
      const std::uint64_t stream = derive_seed(config.seed, 2);
      parallel_for(b_count, config.jobs, [&](std::size_t b) {
        Rows order(ds.n());
        std::iota(order.begin(), order.end(), RowIndex{0});
        std::mt19937_64 rng(derive_seed(stream, r * b_count + b));
        std::shuffle(order.begin(), order.end(), rng);
        const Dataset permuted = ds.with_permuted_column(v, order);
        null_gain[b] = base.contrast -
                       holdout_fit(permuted, grow, test, candidate, config.n_min).contrast;
      });
      const auto exceed =
          std::count_if(null_gain.begin(), null_gain.end(), [&](double g) { return g >= gain; });
      step.statistic = static_cast<double>(exceed + 1) / static_cast<double>(b_count + 1);
      step.accepted = gain > 0.0 && step.statistic <= config.level;
    }
    fam.log.push_back(step);
    if (step.accepted) {
      current = candidate;
      base = std::move(cand);
      fam.sets.push_back(current);
    }
  }
  return fam;
}

std::string to_string(ViMode m) { return m == ViMode::Surrogate ? "surrogate" : "primary-only"; }
std::string to_string(PstarTest t) { return t == PstarTest::OneSe ? "one-se" : "permutation"; }

ViMode parse_vi_mode(const std::string& s) {
  if (s == "surrogate") return ViMode::Surrogate;
  if (s == "primary-only") return ViMode::PrimaryOnly;
  throw DataError("unknown --vi mode '" + s + "'");
}

PstarTest parse_pstar_test(const std::string& s) {
  if (s == "one-se") return PstarTest::OneSe;
  if (s == "permutation") return PstarTest::Permutation;
  throw DataError("unknown --pstar-test '" + s + "'");
}

}  // namespace cartsel
