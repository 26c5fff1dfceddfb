// cartsel: simulate / importance / select / reproduce.
//
// Exit status: 0 success, 1 runtime failure, 2 usage error (bad flags, bad
// split for the method, exhaustive cap exceeded without --force-exhaustive).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cartsel/harness.hpp"
#include "cartsel/parallel.hpp"
#include "cartsel/serialize.hpp"

using namespace cartsel;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::size_t n = 1000;
  std::size_t p = 10;
  std::uint64_t seed = 1;
  std::size_t seeds = 20;
  std::string out;
  std::string input;
  std::string target = "y";
  std::string framework = "regression";
  std::string method = "m1";
  std::string mode = "pstar";
  std::string split;
  std::size_t nmin = 0;
  std::string alpha_grid = "0,0.01,0.05,0.1,0.3,0.5,1,2,5,12,30,60,120";
  std::string beta_grid = "0,10,50,100,300,700,1300,1700,1900,2500";
  std::string vi = "surrogate";
  std::string pstar_test = "one-se";
  int jobs = 0;
  bool force_exhaustive = false;
  std::string format = "json";
};

SplitFractions parse_split(const std::string& text, Method method) {
  if (text.empty()) return default_fractions(method);
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--split: bad number '" + tok + "'");
    }
  }
  if (v.size() != 3) throw UsageError("--split needs three comma-separated fractions");
  const SplitFractions fr{v[0], v[1], v[2]};
  try {
    validate_fractions(fr, method);
  } catch (const DataError& e) {
    throw UsageError(std::string("--split: ") + e.what());
  }
  return fr;
}

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

RunConfig run_config(const Options& o) {
  RunConfig rc;
  rc.method = as_usage([&] { return parse_method(o.method); });
  rc.fractions = parse_split(o.split, rc.method);
  rc.seed = o.seed;
  rc.mode = as_usage([&] { return parse_mode(o.mode); });
  rc.alpha_grid = as_usage([&] { return parse_grid(o.alpha_grid); });
  rc.beta_grid = as_usage([&] { return parse_grid(o.beta_grid); });
  if (o.nmin > 0) rc.n_min = o.nmin;
  rc.vi = as_usage([&] { return parse_vi_mode(o.vi); });
  rc.pstar_test = as_usage([&] { return parse_pstar_test(o.pstar_test); });
  rc.force_exhaustive = o.force_exhaustive;
  rc.jobs = o.jobs > 0 ? o.jobs : hardware_jobs();
  return rc;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << text;
}

void check_format(const Options& o) {
  if (o.format != "json" && o.format != "csv" && o.format != "md")
    throw UsageError("--format must be json, csv or md");
}

Dataset load_input(const Options& o) {
  const Framework fw = as_usage([&] { return parse_framework(o.framework); });
  return load_csv(o.input, o.target, fw);
}

int cmd_simulate(const Options& o) {
  if (o.out.empty()) throw UsageError("simulate needs --out");
  if (o.p < 10) throw UsageError("--p must be at least 10");
  if (o.n < 1) throw UsageError("--n must be at least 1");
  write_csv(gen_breiman(o.n, o.seed, 1.4142135623730951, o.p), o.out, o.target);
  return 0;
}

int cmd_importance(const Options& o) {
  check_format(o);
  const Dataset ds = load_input(o);
  const RunConfig rc = run_config(o);
  const SampleSplit split = split_three(ds, rc.fractions, rc.seed, rc.method);
  const ImportanceReport rep =
      split_importance(ds, split, effective_nmin(rc, ds.framework()), rc.vi);
  if (o.format == "md") {
    emit(o, importance_table(rep, ds.names()));
  } else if (o.format == "csv") {
    std::ostringstream os;
    os << "variable,rank,score\n";
    for (std::size_t k = 0; k < rep.ranking.size(); ++k)
      os << ds.names()[rep.ranking[k]] << ',' << k + 1 << ','
         << json(rep.scores[rep.ranking[k]]).dump() << '\n';
    emit(o, os.str());
  } else {
    json doc = importance_to_json(rep);
    json names = json::array();
    for (std::size_t j : rep.ranking) names.push_back(ds.names()[j]);
    doc["ranked_names"] = names;
    emit(o, doc.dump(2) + '\n');
  }
  return 0;
}

int cmd_select(const Options& o) {
  check_format(o);
  const Dataset ds = load_input(o);
  const RunConfig rc = run_config(o);
  const SelectionResult res = run_procedure(ds, rc);
  if (o.format == "md") {
    std::ostringstream os;
    os << "Selected subset: " << res.subset.label() << "\n\nalpha = " << res.alpha
       << ", beta = " << res.beta << ", hold-out risk = " << res.holdout_risk
       << ", K = " << res.family.K() << "\n\n"
       << grid_map_markdown(res);
    emit(o, os.str());
  } else if (o.format == "csv") {
    std::ostringstream os;
    os << "alpha,beta,subset\n";
    for (const auto& e : res.family.entries)
      os << json(e.alpha).dump() << ',' << json(e.beta).dump() << ",\""
         << res.family_subsets[e.model].label() << "\"\n";
    emit(o, os.str());
  } else {
    emit(o, selection_to_json(res, ds).dump(2) + '\n');
  }
  return 0;
}

int cmd_reproduce(const Options& o) {
  if (o.out.empty()) throw UsageError("reproduce needs --out DIR");
  if (o.seeds < 1) throw UsageError("--seeds must be at least 1");
  const RunConfig rc = run_config(o);
  ExperimentConfig ec;
  ec.n = o.n;
  for (std::size_t k = 0; k < o.seeds; ++k) ec.seeds.push_back(o.seed + k);
  ec.fractions = rc.fractions;
  ec.method = rc.method;
  ec.mode = rc.mode;
  ec.alpha_grid = rc.alpha_grid;
  ec.beta_grid = rc.beta_grid;
  ec.n_min = rc.n_min;
  ec.vi = rc.vi;
  ec.pstar_test = rc.pstar_test;
  ec.force_exhaustive = rc.force_exhaustive;
  ec.jobs = rc.jobs;
  const ExperimentReport rep = reproduce_example(ec);
  write_report(rep, o.out);
  std::cout << "final subset " << rep.final_summary.modal().label() << " in "
            << rep.final_summary.counts.front().count << "/" << rep.runs.size()
            << " seeds; tables written to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable selection through CART with penalized model selection"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Draw the ten-variable example to CSV");
  sim->add_option("--n", o.n, "Number of rows");
  sim->add_option("--p", o.p, "Number of variables (>= 10; extra ones are noise)");
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--out", o.out, "Output CSV")->required();
  sim->add_option("--target", o.target, "Response column name");

  auto add_data = [&](CLI::App* c) {
    c->add_option("--input", o.input, "Input CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--target", o.target, "Response column name");
    c->add_option("--framework", o.framework, "regression|classification");
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed (sample split, permutations)");
    c->add_option("--method", o.method, "m1|m2");
    c->add_option("--split", o.split,
                  "f1,f2,f3 (default 0.5,0.25,0.25 for m1, 0.75,0,0.25 for m2)");
    c->add_option("--nmin", o.nmin, "Minimum rows per child (0: 5 regression, 1 classification)");
    c->add_option("--vi", o.vi, "surrogate|primary-only");
    c->add_option("--jobs", o.jobs, "Worker threads (0: all available)");
  };
  auto add_select = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "exhaustive|pstar");
    c->add_option("--alpha-grid", o.alpha_grid, "Comma list or min:max:count (log-spaced)");
    c->add_option("--beta-grid", o.beta_grid, "Comma list or min:max:count (log-spaced)");
    c->add_option("--pstar-test", o.pstar_test, "one-se|permutation");
    c->add_flag("--force-exhaustive", o.force_exhaustive, "Allow exhaustive mode above 20 variables");
  };

  auto* imp = app.add_subcommand("importance", "Variable importance of the hold-out pruned tree");
  add_data(imp);
  add_run(imp);
  imp->add_option("--out", o.out, "Output file (default stdout)");
  imp->add_option("--format", o.format, "json|csv|md");

  auto* sel = app.add_subcommand("select", "Run the full selection procedure");
  add_data(sel);
  add_run(sel);
  add_select(sel);
  sel->add_option("--out", o.out, "Output file (default stdout)");
  sel->add_option("--format", o.format, "json|csv|md");

  auto* rep = app.add_subcommand("reproduce", "Multi-seed study of the ten-variable example");
  rep->add_option("--n", o.n, "Rows per seed");
  rep->add_option("--seeds", o.seeds, "Number of seeds, starting at --seed");
  add_run(rep);
  add_select(rep);
  rep->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*imp) return cmd_importance(o);
    if (*sel) return cmd_select(o);
    return cmd_reproduce(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const CapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
