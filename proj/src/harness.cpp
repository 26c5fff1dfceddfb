#include "cartsel/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "cartsel/parallel.hpp"
#include "cartsel/serialize.hpp"

namespace cartsel {

namespace {

CellSummary summarize(const std::vector<VariableSubset>& xs) {
  std::map<VariableSubset, std::size_t> counts;
  for (const auto& s : xs) ++counts[s];
  CellSummary out;
  out.total = xs.size();
  for (const auto& [s, c] : counts) out.counts.push_back({s, c});
  std::stable_sort(out.counts.begin(), out.counts.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.subset.size() < b.subset.size();
  });
  return out;
}

struct Range {
  double lo, hi;  // (lo, hi]
  std::string label;
};

const std::vector<Range>& alpha_bins() {
  static const std::vector<Range> bins{{-1.0, 0.05, "<=0.05"},  {0.05, 0.1, "0.05-0.1"},
                                       {0.1, 2.0, "0.1-2"},     {2.0, 12.0, "2-12"},
                                       {12.0, 60.0, "12-60"},   {60.0, 1e300, ">60"}};
  return bins;
}

const std::vector<Range>& beta_bins() {
  static const std::vector<Range> bins{{-1.0, 100.0, "<=100"},      {100.0, 700.0, "100-700"},
                                       {700.0, 1300.0, "700-1300"}, {1300.0, 1700.0, "1300-1700"},
                                       {1700.0, 1900.0, "1700-1900"}, {1900.0, 1e300, ">1900"}};
  return bins;
}

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const Dataset ds = gen_breiman(config.n, seed);
  RunConfig rc;
  rc.method = config.method;
  rc.fractions = config.fractions;
  rc.seed = seed;
  rc.mode = config.mode;
  rc.alpha_grid = config.alpha_grid;
  rc.beta_grid = config.beta_grid;
  rc.n_min = config.n_min;
  rc.vi = config.vi;
  rc.pstar_test = config.pstar_test;
  rc.force_exhaustive = config.force_exhaustive;
  rc.jobs = 1;
  const SelectionResult res = run_procedure(ds, rc);

  SeedRun run;
  run.seed = seed;
  run.importance = res.importance;
  for (const auto& e : res.family.entries) run.grid.push_back(res.family_subsets[e.model]);
  run.alpha_hat = res.alpha;
  run.beta_hat = res.beta;
  run.final_subset = res.subset;
  run.holdout_risk = res.holdout_risk;
  run.model_risks = res.model_risks;
  run.K = res.family.K();
  run.subsets_processed = res.subsets_processed;
  if (res.pstar) run.pstar = res.pstar->sets;
  return run;
}

}  // namespace

ExperimentReport reproduce_example(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.config = config;
  if (rep.config.seeds.empty()) {
    rep.config.seeds.resize(20);
    std::iota(rep.config.seeds.begin(), rep.config.seeds.end(), std::uint64_t{1});
  }
  std::vector<std::uint64_t> seeds = rep.config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  rep.config.seeds = seeds;
  rep.p = 10;

  rep.runs.resize(seeds.size());
  parallel_for(seeds.size(), config.jobs,
               [&](std::size_t i) { rep.runs[i] = run_seed(rep.config, seeds[i]); });

  // Rankings.
  std::vector<double> rank_sum(rep.p, 0.0);
  std::map<std::vector<std::size_t>, std::size_t> ranking_counts;
  for (const auto& r : rep.runs) {
    for (std::size_t k = 0; k < r.importance.ranking.size(); ++k)
      rank_sum[r.importance.ranking[k]] += static_cast<double>(k);
    ++ranking_counts[r.importance.ranking];
  }
  rep.mean_rank_order.resize(rep.p);
  std::iota(rep.mean_rank_order.begin(), rep.mean_rank_order.end(), std::size_t{0});
  std::stable_sort(rep.mean_rank_order.begin(), rep.mean_rank_order.end(),
                   [&](std::size_t a, std::size_t b) { return rank_sum[a] < rank_sum[b]; });
  std::size_t best = 0;
  for (const auto& [ranking, c] : ranking_counts)
    if (c > best) {
      best = c;
      rep.modal_ranking = ranking;
    }
  rep.modal_ranking_frequency =
      static_cast<double>(best) / static_cast<double>(std::max<std::size_t>(rep.runs.size(), 1));

  // Grid cells and bins.
  const std::size_t na = rep.config.alpha_grid.size(), nb = rep.config.beta_grid.size();
  for (std::size_t c = 0; c < na * nb; ++c) {
    std::vector<VariableSubset> xs;
    for (const auto& r : rep.runs) xs.push_back(r.grid[c]);
    rep.grid_cells.push_back(summarize(xs));
  }
  for (const auto& ab : alpha_bins()) {
    for (const auto& bb : beta_bins()) {
      std::vector<VariableSubset> xs;
      for (std::size_t a = 0; a < na; ++a) {
        const double av = rep.config.alpha_grid[a];
        if (!(av > ab.lo && av <= ab.hi)) continue;
        for (std::size_t b = 0; b < nb; ++b) {
          const double bv = rep.config.beta_grid[b];
          if (!(bv > bb.lo && bv <= bb.hi)) continue;
          for (const auto& r : rep.runs) xs.push_back(r.grid[a * nb + b]);
        }
      }
      if (!xs.empty()) rep.grid_bins.push_back({ab.label, bb.label, summarize(xs)});
    }
  }

  std::vector<VariableSubset> finals;
  for (const auto& r : rep.runs) finals.push_back(r.final_subset);
  rep.final_summary = summarize(finals);
  return rep;
}

std::vector<SizeFlag> check_expected_sizes(const ExperimentReport& report) {
  static constexpr std::size_t expected[] = {1, 3, 5, 7, 10};
  std::vector<SizeFlag> flags;
  const std::size_t nb = report.config.beta_grid.size();
  for (std::size_t c = 0; c < report.grid_cells.size(); ++c) {
    const auto& s = report.grid_cells[c].modal();
    if (std::find(std::begin(expected), std::end(expected), s.size()) != std::end(expected))
      continue;
    flags.push_back({report.config.alpha_grid[c / nb], report.config.beta_grid[c % nb], s});
  }
  return flags;
}

namespace {

std::vector<std::string> breiman_names() {
  std::vector<std::string> names;
  for (int j = 1; j <= 10; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

json cell_json(const CellSummary& s) {
  json dist = json::array();
  for (const auto& c : s.counts)
    dist.push_back({{"subset", c.subset.label()}, {"count", c.count}});
  return json{{"modal", s.modal().label()}, {"frequency", s.frequency()}, {"distribution", dist}};
}

std::string pct(double f) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.0f%%", 100.0 * f);
  return buf;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json vi_json(const ExperimentReport& r, const std::vector<std::string>& names) {
  json per_seed = json::array();
  for (const auto& run : r.runs) {
    json ranking = json::array();
    for (std::size_t j : run.importance.ranking) ranking.push_back(names[j]);
    per_seed.push_back({{"seed", run.seed}, {"ranking", ranking}, {"scores", run.importance.scores}});
  }
  json modal = json::array(), mean = json::array();
  for (std::size_t j : r.modal_ranking) modal.push_back(names[j]);
  for (std::size_t j : r.mean_rank_order) mean.push_back(names[j]);
  return json{{"modal_ranking", modal},
              {"modal_frequency", r.modal_ranking_frequency},
              {"mean_rank_order", mean},
              {"seeds", per_seed}};
}

// First grid value at which the selected subset changes along one axis.
json breakpoints(const SeedRun& run, const std::vector<double>& alphas,
                 const std::vector<double>& betas, bool along_alpha) {
  json out = json::array();
  const std::size_t nb = betas.size();
  const std::size_t len = along_alpha ? alphas.size() : nb;
  auto at = [&](std::size_t k) -> const VariableSubset& {
    return along_alpha ? run.grid[k * nb] : run.grid[k];
  };
  for (std::size_t k = 0; k < len; ++k)
    if (k == 0 || at(k) != at(k - 1))
      out.push_back({{along_alpha ? "alpha" : "beta", along_alpha ? alphas[k] : betas[k]},
                     {"subset", at(k).label()}});
  return out;
}

json grid_json(const ExperimentReport& r) {
  const auto& alphas = r.config.alpha_grid;
  const auto& betas = r.config.beta_grid;
  json cells = json::array();
  for (std::size_t c = 0; c < r.grid_cells.size(); ++c) {
    json cell = cell_json(r.grid_cells[c]);
    cell["alpha"] = alphas[c / betas.size()];
    cell["beta"] = betas[c % betas.size()];
    cells.push_back(cell);
  }
  json bins = json::array();
  for (const auto& b : r.grid_bins) {
    json cell = cell_json(b.summary);
    cell["alpha_range"] = b.alpha_range;
    cell["beta_range"] = b.beta_range;
    bins.push_back(cell);
  }
  json per_seed = json::array();
  for (const auto& run : r.runs) {
    json grid = json::array();
    for (const auto& s : run.grid) grid.push_back(s.label());
    per_seed.push_back({{"seed", run.seed},
                        {"grid", grid},
                        {"alpha_breakpoints", breakpoints(run, alphas, betas, true)},
                        {"beta_breakpoints", breakpoints(run, alphas, betas, false)}});
  }
  json flags = json::array();
  for (const auto& f : check_expected_sizes(r))
    flags.push_back({{"alpha", f.alpha}, {"beta", f.beta}, {"subset", f.subset.label()}});
  return json{{"alpha_grid", alphas}, {"beta_grid", betas}, {"cells", cells},
              {"bins", bins},         {"seeds", per_seed},  {"size_flags", flags}};
}

json final_json(const ExperimentReport& r) {
  json per_seed = json::array();
  for (const auto& run : r.runs) {
    json row{{"seed", run.seed},
             {"alpha", run.alpha_hat},
             {"beta", run.beta_hat},
             {"subset", run.final_subset.label()},
             {"holdout_risk", run.holdout_risk},
             {"K", run.K},
             {"subsets_processed", run.subsets_processed}};
    if (!run.pstar.empty()) {
      json fam = json::array();
      for (const auto& s : run.pstar) fam.push_back(s.label());
      row["pstar"] = fam;
    }
    per_seed.push_back(row);
  }
  return json{{"modal", cell_json(r.final_summary)}, {"seeds", per_seed}};
}

json config_json(const ExperimentConfig& c) {
  return json{{"n", c.n},
              {"seeds", c.seeds},
              {"fractions", {c.fractions.f1, c.fractions.f2, c.fractions.f3}},
              {"method", to_string(c.method)},
              {"mode", to_string(c.mode)},
              {"alpha_grid", c.alpha_grid},
              {"beta_grid", c.beta_grid},
              {"n_min", c.n_min ? json(*c.n_min) : json(nullptr)},
              {"vi", to_string(c.vi)},
              {"pstar_test", to_string(c.pstar_test)}};
}

std::string vi_md(const ExperimentReport& r, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "## Variable importance\n\nModal ranking (" << pct(r.modal_ranking_frequency)
     << " of seeds):\n\n| Rank |";
  for (std::size_t k = 0; k < r.modal_ranking.size(); ++k) os << ' ' << k + 1 << " |";
  os << "\n|---|";
  for (std::size_t k = 0; k < r.modal_ranking.size(); ++k) os << "---|";
  os << "\n| Variable |";
  for (std::size_t j : r.modal_ranking) os << ' ' << names[j] << " |";
  os << "\n| Mean-rank order |";
  for (std::size_t j : r.mean_rank_order) os << ' ' << names[j] << " |";
  os << "\n\n### Per seed\n\n";
  for (const auto& run : r.runs) {
    os << "Seed " << run.seed << "\n\n" << importance_table(run.importance, names) << '\n';
  }
  return os.str();
}

std::string grid_md(const ExperimentReport& r) {
  const auto& alphas = r.config.alpha_grid;
  const auto& betas = r.config.beta_grid;
  std::ostringstream os;
  os << "## Grid map, modal subset per point\n\n| beta \\ alpha |";
  for (double a : alphas) os << ' ' << num(a) << " |";
  os << "\n|---|";
  for (std::size_t k = 0; k < alphas.size(); ++k) os << "---|";
  os << '\n';
  for (std::size_t b = 0; b < betas.size(); ++b) {
    os << "| " << num(betas[b]) << " |";
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const auto& cell = r.grid_cells[a * betas.size() + b];
      os << ' ' << cell.modal().label() << " (" << pct(cell.frequency()) << ") |";
    }
    os << '\n';
  }
  os << "\n## Binned\n\n| beta \\ alpha |";
  std::vector<std::string> acols, brows;
  for (const auto& bin : r.grid_bins) {
    if (std::find(acols.begin(), acols.end(), bin.alpha_range) == acols.end())
      acols.push_back(bin.alpha_range);
    if (std::find(brows.begin(), brows.end(), bin.beta_range) == brows.end())
      brows.push_back(bin.beta_range);
  }
  for (const auto& a : acols) os << ' ' << a << " |";
  os << "\n|---|";
  for (std::size_t k = 0; k < acols.size(); ++k) os << "---|";
  os << '\n';
  for (const auto& b : brows) {
    os << "| " << b << " |";
    for (const auto& a : acols) {
      for (const auto& bin : r.grid_bins)
        if (bin.alpha_range == a && bin.beta_range == b)
          os << ' ' << bin.summary.modal().label() << " (" << pct(bin.summary.frequency()) << ")";
      os << " |";
    }
    os << '\n';
  }
  const auto flags = check_expected_sizes(r);
  os << "\n## Sizes outside {1,3,5,7,10}\n\n";
  if (flags.empty()) os << "none\n";
  for (const auto& f : flags)
    os << "- alpha " << num(f.alpha) << ", beta " << num(f.beta) << ": " << f.subset.label()
       << '\n';
  return os.str();
}

std::string final_md(const ExperimentReport& r) {
  std::ostringstream os;
  os << "## Final selection\n\n| Seed | alpha | beta | Subset | Hold-out risk | K |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& run : r.runs) {
    char risk[32];
    std::snprintf(risk, sizeof risk, "%.4f", run.holdout_risk);
    os << "| " << run.seed << " | " << num(run.alpha_hat) << " | " << num(run.beta_hat) << " | "
       << run.final_subset.label() << " | " << risk << " | " << run.K << " |\n";
  }
  os << "\nModal final subset: " << r.final_summary.modal().label() << " ("
     << pct(r.final_summary.frequency()) << " of seeds)\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

}  // namespace

std::string report_json(const ExperimentReport& r) {
  const auto names = breiman_names();
  json doc{{"config", config_json(r.config)},
           {"vi_table", vi_json(r, names)},
           {"grid_table", grid_json(r)},
           {"final_table", final_json(r)}};
  return doc.dump(2) + '\n';
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto names = breiman_names();

  write_file(dir / "vi_table.json", vi_json(r, names).dump(2) + '\n');
  write_file(dir / "grid_table.json", grid_json(r).dump(2) + '\n');
  write_file(dir / "final_table.json", final_json(r).dump(2) + '\n');
  write_file(dir / "report.json", report_json(r));

  std::ostringstream vi;
  vi << "seed,variable,rank,score\n";
  for (const auto& run : r.runs)
    for (std::size_t k = 0; k < run.importance.ranking.size(); ++k) {
      const std::size_t j = run.importance.ranking[k];
      vi << run.seed << ',' << names[j] << ',' << k + 1 << ',' << json(run.importance.scores[j]).dump()
         << '\n';
    }
  write_file(dir / "vi_table.csv", vi.str());

  std::ostringstream grid;
  grid << "seed,alpha,beta,subset,size\n";
  const std::size_t nb = r.config.beta_grid.size();
  for (const auto& run : r.runs)
    for (std::size_t c = 0; c < run.grid.size(); ++c)
      grid << run.seed << ',' << json(r.config.alpha_grid[c / nb]).dump() << ','
           << json(r.config.beta_grid[c % nb]).dump() << ',' << quoted(run.grid[c].label()) << ','
           << run.grid[c].size() << '\n';
  write_file(dir / "grid_table.csv", grid.str());

  std::ostringstream fin;
  fin << "seed,alpha,beta,subset,holdout_risk,K,subsets_processed\n";
  for (const auto& run : r.runs)
    fin << run.seed << ',' << json(run.alpha_hat).dump() << ',' << json(run.beta_hat).dump() << ','
        << quoted(run.final_subset.label()) << ',' << json(run.holdout_risk).dump() << ',' << run.K
        << ',' << run.subsets_processed << '\n';
  write_file(dir / "final_table.csv", fin.str());

  write_file(dir / "vi_table.md", vi_md(r, names));
  write_file(dir / "grid_table.md", grid_md(r));
  write_file(dir / "final_table.md", final_md(r));
}

}  // namespace cartsel
