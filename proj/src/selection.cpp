#include "cartsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cartsel/parallel.hpp"

namespace cartsel {

std::size_t Collection::total_models() const {
  std::size_t s = 0;
  for (const auto& c : chains) s += c.size();
  return s;
}

const PrunedSequence* Collection::find(const VariableSubset& s) const {
  for (std::size_t i = 0; i < subsets.size(); ++i)
    if (subsets[i] == s) return &chains[i];
  return nullptr;
}

std::vector<VariableSubset> all_subsets(std::size_t p, std::size_t cap, bool force) {
  if (p > cap && !force)
    throw CapError("exhaustive mode over " + std::to_string(p) +
                   " variables exceeds the cap of " + std::to_string(cap) +
                   " (use --force-exhaustive)");
  if (p >= 63) throw CapError("exhaustive mode supports at most 62 variables");
  std::vector<VariableSubset> out;
  const std::uint64_t end = std::uint64_t{1} << p;
  out.reserve(static_cast<std::size_t>(end - 1));
  for (std::uint64_t mask = 1; mask < end; ++mask) out.push_back(VariableSubset::from_mask(mask));
  return out;
}

namespace {

PrunedSequence chain_for(const Dataset& ds, const SampleSplit& split, const VariableSubset& s,
                         std::size_t n_min) {
  const Tree full = grow_maximal(ds, split.i1, s, n_min, ds.framework());
  return prune_sequence(full, ds, split.pruning_rows(), ds.framework());
}

void check_collection_inputs(const SampleSplit& split, const std::vector<VariableSubset>& subsets) {
  if (subsets.empty()) throw DataError("build_collection needs at least one subset");
  if (split.i1.empty() || split.pruning_rows().empty())
    throw DataError("build_collection needs growing and pruning rows");
}

}  // namespace

Collection build_collection_serial(const Dataset& ds, const SampleSplit& split,
                                   const std::vector<VariableSubset>& subsets,
                                   std::size_t n_min) {
  check_collection_inputs(split, subsets);
  Collection c;
  c.subsets = subsets;
  c.chains.reserve(subsets.size());
  for (const auto& s : subsets) c.chains.push_back(chain_for(ds, split, s, n_min));
  return c;
}

Collection build_collection(const Dataset& ds, const SampleSplit& split,
                            const std::vector<VariableSubset>& subsets, std::size_t n_min,
                            int jobs) {
  check_collection_inputs(split, subsets);
  Collection c;
  c.subsets = subsets;
  c.chains.resize(subsets.size());
  parallel_for(subsets.size(), jobs,
               [&](std::size_t i) { c.chains[i] = chain_for(ds, split, subsets[i], n_min); });
  return c;
}

std::size_t select_tree_index(const PrunedSequence& seq, const PenaltySpec& spec,
                              std::size_t m_size) {
  return seq.index_at(leaf_coefficient(spec, m_size));
}

Tree select_tree(const PrunedSequence& seq, const PenaltySpec& spec, std::size_t m_size) {
  return seq.subtree(select_tree_index(seq, spec, m_size));
}

namespace {

// Strict total order on candidate models at equal criterion.
bool tie_before(const Collection& c, const ModelKey& a, const ModelKey& b) {
  const auto& sa = c.subsets[a.subset];
  const auto& sb = c.subsets[b.subset];
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  const std::size_t ta = c.chains[a.subset].leaves[a.k];
  const std::size_t tb = c.chains[b.subset].leaves[b.k];
  if (ta != tb) return ta < tb;
  if (sa != sb) return sa < sb;
  return a < b;
}

}  // namespace

ModelChoice select_model(const Collection& collection, const PenaltySpec& spec) {
  if (collection.size() == 0) throw DataError("select_model on empty collection");
  validate(spec);
  std::optional<ModelChoice> best;
  for (std::size_t i = 0; i < collection.size(); ++i) {
    const auto& seq = collection.chains[i];
    const std::size_t m = collection.subsets[i].size();
    const std::size_t k = select_tree_index(seq, spec, m);
    const double crit = seq.risks[k] + penalty_value(spec, m, seq.leaves[k]);
    const ModelChoice cand{{i, k}, crit};
    if (!best || crit < best->criterion ||
        (crit == best->criterion && tie_before(collection, cand.key, best->key)))
      best = cand;
  }
  return *best;
}

namespace {

void check_grids(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DataError("alpha and beta grids must be nonempty");
  for (double v : a)
    if (!(v >= 0.0)) throw DataError("grid values must be >= 0");
  for (double v : b)
    if (!(v >= 0.0)) throw DataError("grid values must be >= 0");
}

EstimatorFamily dedup(const std::vector<double>& alpha_grid, const std::vector<double>& beta_grid,
                      const std::vector<ModelKey>& picks) {
  EstimatorFamily fam;
  std::map<ModelKey, std::size_t> index;
  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    for (std::size_t b = 0; b < beta_grid.size(); ++b) {
      const ModelKey& key = picks[a * beta_grid.size() + b];
      auto [it, inserted] = index.emplace(key, fam.models.size());
      if (inserted) fam.models.push_back(key);
      fam.entries.push_back({alpha_grid[a], beta_grid[b], it->second});
    }
  }
  return fam;
}

PenaltySpec at(const PenaltySpec& base, double alpha, double beta) {
  PenaltySpec s = base;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

}  // namespace

EstimatorFamily grid_select_serial(const Collection& collection,
                                   const std::vector<double>& alpha_grid,
                                   const std::vector<double>& beta_grid,
                                   const PenaltySpec& spec_base) {
  check_grids(alpha_grid, beta_grid);
  std::vector<ModelKey> picks;
  for (double a : alpha_grid)
    for (double b : beta_grid) picks.push_back(select_model(collection, at(spec_base, a, b)).key);
  return dedup(alpha_grid, beta_grid, picks);
}

EstimatorFamily grid_select(const Collection& collection, const std::vector<double>& alpha_grid,
                            const std::vector<double>& beta_grid, const PenaltySpec& spec_base,
                            int jobs) {
  check_grids(alpha_grid, beta_grid);
  const std::size_t nb = beta_grid.size();
  std::vector<ModelKey> picks(alpha_grid.size() * nb);
  parallel_for(picks.size(), jobs, [&](std::size_t i) {
    picks[i] = select_model(collection, at(spec_base, alpha_grid[i / nb], beta_grid[i % nb])).key;
  });
  return dedup(alpha_grid, beta_grid, picks);
}

SelectionResult final_holdout(const Collection& collection, EstimatorFamily family,
                              const Dataset& ds, const SampleSplit& split) {
  if (split.i3.empty()) throw DataError("final hold-out needs a nonempty i3");
  if (family.models.empty()) throw DataError("final hold-out on empty family");

  SelectionResult res;
  res.model_risks.reserve(family.K());
  for (const ModelKey& key : family.models)
    res.model_risks.push_back(
        empirical_contrast(ChainMember{&collection.chains[key.subset], key.k}, ds, split.i3));

  std::size_t win = 0;
  for (std::size_t j = 1; j < family.K(); ++j) {
    const double rj = res.model_risks[j], rw = res.model_risks[win];
    if (rj < rw || (rj == rw && tie_before(collection, family.models[j], family.models[win])))
      win = j;
  }
  res.model = win;
  res.holdout_risk = res.model_risks[win];

  bool found = false;
  for (const auto& e : family.entries) {
    if (e.model != win) continue;
    if (!found || e.alpha < res.alpha || (e.alpha == res.alpha && e.beta < res.beta)) {
      res.alpha = e.alpha;
      res.beta = e.beta;
      found = true;
    }
  }
  const ModelKey key = family.models[win];
  res.subset = collection.subsets[key.subset];
  res.tree = collection.chains[key.subset].subtree(key.k);
  for (const auto& m : family.models) res.family_subsets.push_back(collection.subsets[m.subset]);
  res.family = std::move(family);
  return res;
}

std::vector<double> default_alpha_grid() {
  return {0, 0.01, 0.05, 0.1, 0.3, 0.5, 1, 2, 5, 12, 30, 60, 120};
}

std::vector<double> default_beta_grid() {
  return {0, 10, 50, 100, 300, 700, 1300, 1700, 1900, 2500};
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size() || !std::isfinite(v) || v < 0.0)
      throw DataError("bad grid value '" + tok + "' in '" + text + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = text.find(sep, start);
    parts.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }

  std::vector<double> out;
  if (sep == ',') {
    for (const auto& t : parts) out.push_back(number(t));
    return out;
  }
  if (parts.size() != 3) throw DataError("grid range must be min:max:count, got '" + text + "'");
  const double lo = number(parts[0]), hi = number(parts[1]);
  const double count = number(parts[2]);
  if (!(lo > 0.0) || hi < lo || count < 1.0 || count != std::floor(count))
    throw DataError("grid range needs 0 < min <= max and an integer count >= 1");
  const auto m = static_cast<std::size_t>(count);
  if (m == 1) return {lo};
  for (std::size_t i = 0; i < m; ++i)
    out.push_back(i + 1 == m ? hi
                             : lo * std::pow(hi / lo, static_cast<double>(i) /
                                                          static_cast<double>(m - 1)));
  return out;
}

std::size_t effective_nmin(const RunConfig& config, Framework framework) {
  if (config.n_min) return std::max<std::size_t>(*config.n_min, 1);
  return framework == Framework::Regression ? 5 : 1;
}

double estimate_sigma2(const Dataset& ds, std::span<const RowIndex> rows, std::size_t n_min) {
  const Tree full = grow_maximal(ds, rows, VariableSubset::all(ds.p()), n_min, ds.framework());
  return empirical_contrast(full, ds, rows);
}

SelectionResult run_procedure(const Dataset& ds, const RunConfig& config) {
  return run_procedure(ds, split_three(ds, config.fractions, config.seed, config.method), config);
}

SelectionResult run_procedure(const Dataset& ds, const SampleSplit& split,
                              const RunConfig& config) {
  const std::size_t n_min = effective_nmin(config, ds.framework());

  std::vector<VariableSubset> subsets;
  std::optional<SubsetFamily> pstar;
  ImportanceReport importance;
  if (config.mode == Mode::Exhaustive) {
    subsets = all_subsets(ds.p(), config.exhaustive_cap, config.force_exhaustive);
    importance = split_importance(ds, split, n_min, config.vi);
  } else {
    PstarConfig pc;
    pc.vi = config.vi;
    pc.test = config.pstar_test;
    pc.n_min = n_min;
    pc.seed = config.seed;
    pc.jobs = config.jobs;
    pstar = build_pstar(ds, split, pc);
    subsets = pstar->sets;
    importance = pstar->importance;
  }

  const Collection collection = build_collection(ds, split, subsets, n_min, config.jobs);

  PenaltySpec base;
  base.framework = ds.framework();
  base.method = split.method;
  base.n_eff = split.pruning_rows().size();
  base.p = ds.p();
  base.theoretical = config.theoretical;
  if (config.sigma2_plugin && ds.framework() == Framework::Regression)
    base.theoretical = TheoreticalConstants{estimate_sigma2(ds, split.i1, n_min), 0.0, 0.0, 1.0};
  validate(base);

  EstimatorFamily family =
      grid_select(collection, config.alpha_grid, config.beta_grid, base, config.jobs);
  SelectionResult res = final_holdout(collection, std::move(family), ds, split);
  res.subsets_processed = collection.size();
  res.importance = std::move(importance);
  res.pstar = std::move(pstar);
  return res;
}

std::string to_string(Mode m) { return m == Mode::Exhaustive ? "exhaustive" : "pstar"; }

Mode parse_mode(const std::string& s) {
  if (s == "exhaustive") return Mode::Exhaustive;
  if (s == "pstar") return Mode::Pstar;
  throw DataError("unknown --mode '" + s + "'");
}

}  // namespace cartsel
