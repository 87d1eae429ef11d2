// swo: command-line harness for the welfare-optimization toolkit.
//
//   swo ingest  --dataset german.data [--strict-facts]
//   swo table1  --dataset german.data [--strict]
//   swo post    --dataset german.data [--swf SPEC ...] [--strict]
//   swo inproc  --dataset german.data [--lambda2 0.1,1,10] [--strict]
//   swo solve   problem.csv --swf maximin --budget 30 [--oracle step=0.5]
//   swo swf-eval utilities.csv --swf gini
//   swo replay  swo-out/manifest.txt
//
// Exit codes: 0 success, 1 strict check failed, 2 I/O or config error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "swo/errors.hpp"
#include "swo/experiment.hpp"
#include "swo/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitError = 2;

struct Flags {
  std::string config_file;
  std::string dataset;
  std::string output;
  std::string seed;
  std::string splits;
  std::string budget;
  std::vector<std::string> swfs;
  std::string lambda2;
  std::vector<std::string> overrides;
  bool strict = false;
  bool strict_facts = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw swo::IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

swo::ExperimentConfig build_config(const Flags& f) {
  swo::ExperimentConfig cfg;
  if (!f.config_file.empty()) cfg.apply_text(read_file(f.config_file));
  if (!f.dataset.empty()) cfg.set("dataset", f.dataset);
  if (!f.output.empty()) cfg.set("output", f.output);
  if (!f.seed.empty()) cfg.set("seed", f.seed);
  if (!f.splits.empty()) cfg.set("splits", f.splits);
  if (!f.budget.empty()) cfg.set("budget", f.budget);
  if (!f.lambda2.empty()) cfg.set("lambda2", f.lambda2);
  if (!f.swfs.empty()) {
    std::string joined;
    for (const auto& s : f.swfs) joined += (joined.empty() ? "" : ";") + s;
    cfg.set("swf", joined);
  }
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw swo::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int report_checks(const std::vector<swo::CheckResult>& checks, bool strict) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cerr << (c.pass ? "[ok]   " : "[fail] ") << c.name;
    if (!c.detail.empty()) std::cerr << " (" << c.detail << ')';
    std::cerr << '\n';
    ok = ok && c.pass;
  }
  return strict && !ok ? kExitCheck : kExitOk;
}

int run_experiment(const std::string& command, swo::ExperimentConfig cfg, const Flags& f) {
  swo::RunContext ctx;
  ctx.command = command;
  ctx.config = std::move(cfg);
  int rc = kExitOk;
  if (command == "ingest") {
    const auto r = swo::run_ingest(ctx);
    std::cout << swo::facts_report(r.facts);
    rc = report_checks(swo::check_ingest(r), f.strict || f.strict_facts);
  } else if (command == "table1") {
    const auto r = swo::run_table1(ctx);
    std::cout << swo::group_report_table(r.aggregate);
    rc = report_checks(swo::check_table1(r), f.strict);
  } else if (command == "post") {
    const auto r = swo::run_post(ctx);
    std::cout << "swf,young_all,old_all,young_qualified,old_qualified\n";
    for (const auto& [swf, m] : r.means) {
      std::cout << swf;
      for (double v : m) std::cout << ',' << swo::text::format_fixed(v, 4);
      std::cout << '\n';
    }
    rc = report_checks(swo::check_post(r), f.strict);
  } else if (command == "inproc") {
    const auto r = swo::run_inproc(ctx);
    std::cout << "lambda2,swf,pr_gap,tpr_gap,accuracy\n";
    for (const auto& s : r.summary) {
      std::cout << swo::text::format_double(s.lambda2) << ',' << s.swf << ','
                << swo::text::format_fixed(s.pr_gap, 2) << ',' << swo::text::format_fixed(s.tpr_gap, 2)
                << ',' << swo::text::format_fixed(100.0 * s.accuracy, 2) << '\n';
    }
    rc = report_checks(swo::check_inproc(r), f.strict);
  } else {
    throw swo::ConfigError("unknown command '" + command + "'");
  }
  ctx.write_manifest();
  return rc;
}

double parse_oracle_step(const std::string& arg) {
  std::string_view v = swo::text::trim(arg);
  if (v.rfind("step=", 0) == 0) v.remove_prefix(5);
  try {
    const double step = swo::text::parse_double(v);
    if (!(step > 0.0)) throw std::invalid_argument("must be positive");
    return step;
  } catch (const std::invalid_argument& e) {
    throw swo::ConfigError("--oracle expects step=S with S > 0: " + std::string(e.what()));
  }
}

int run_solve(const std::string& problem_path, const std::string& swf, const std::string& budget_text,
              const std::string& oracle, const std::string& out_path, bool strict) {
  const auto table = swo::parse_problem_csv(read_file(problem_path));
  const auto spec = swo::SwfSpec::parse(swf);
  double budget = 0.0;
  try {
    budget = swo::text::parse_double(budget_text);
  } catch (const std::invalid_argument& e) {
    throw swo::ConfigError("--budget: " + std::string(e.what()));
  }
  const double step = oracle.empty() ? 0.0 : parse_oracle_step(oracle);
  const auto report = swo::solve_table(table, budget, spec, step);
  const auto csv = swo::solution_csv(table, report.solution);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw swo::IoError("cannot write " + out_path);
    out << csv;
  }
  std::cerr << swo::solve_diagnostics(report, spec);
  if (!report.oracle_ran) return kExitOk;
  const swo::AllocationProblem problem(table.p_hat, table.requests, budget);
  const double bound = swo::oracle_resolution_bound(problem, spec, report.solution.utility, step);
  const double scale = std::max(1.0, std::abs(report.oracle_objective));
  const bool within = report.oracle_gap <= 1e-9 * scale && -report.oracle_gap <= bound + 1e-9 * scale;
  std::cerr << "oracle_bound " << swo::text::format_double(bound) << '\n';
  std::cerr << "oracle_check " << (within ? "pass" : "fail") << '\n';
  return strict && !within ? kExitCheck : kExitOk;
}

int run_swf_eval(const std::string& path, const std::string& swf, const std::string& umax_path) {
  const auto spec = swo::SwfSpec::parse(swf);
  const auto u = swo::parse_utility_csv(read_file(path));
  std::vector<double> u_max;
  if (!umax_path.empty()) u_max = swo::parse_utility_csv(read_file(umax_path));
  std::cout << spec.to_string() << ' ' << swo::text::format_double(swo::evaluate(spec, u, u_max)) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-welfare optimization toolkit"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_file, "key=value config file");
    sub->add_option("--dataset", flags.dataset, "german.data path (falls back to $SWO_DATASET)");
    sub->add_option("--output", flags.output, "output directory");
    sub->add_option("--seed", flags.seed, "seed base; split k uses seed + k");
    sub->add_option("--splits", flags.splits, "number of train/test splits");
    sub->add_option("--budget", flags.budget, "loan budget");
    sub->add_option("--swf", flags.swfs, "SWF spec, repeatable (e.g. alpha:alpha=0.5)");
    sub->add_option("--lambda2", flags.lambda2, "comma-separated lambda2 grid");
    sub->add_option("--set", flags.overrides, "override any config key, KEY=VALUE");
    sub->add_flag("--strict", flags.strict, "exit 1 when a reproduction check fails");
  };

  std::map<std::string, CLI::App*> experiments;
  for (const auto& [name, help] :
       std::vector<std::pair<std::string, std::string>>{{"ingest", "load and encode the dataset, report facts"},
                                                        {"table1", "standard logistic regression group rates"},
                                                        {"post", "post-processing loan allocation"},
                                                        {"inproc", "in-processing training over the lambda2 grid"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    experiments[name] = sub;
  }
  experiments["ingest"]->add_flag("--strict-facts", flags.strict_facts, "exit 1 when dataset facts differ");

  std::string problem_path, solve_swf = "utilitarian", solve_budget, oracle, out_path;
  auto* solve = app.add_subcommand("solve", "solve an allocation problem from an id,pHat,request CSV");
  solve->add_option("problem", problem_path, "problem CSV")->required();
  solve->add_option("--swf", solve_swf, "SWF spec");
  solve->add_option("--budget", solve_budget, "budget B")->required();
  solve->add_option("--oracle", oracle, "cross-check with the grid oracle, step=S");
  solve->add_option("--out", out_path, "solution CSV path (default stdout)");
  solve->add_flag("--strict", flags.strict, "exit 1 when the oracle check fails");

  std::string utility_path, eval_swf, umax_path;
  auto* eval = app.add_subcommand("swf-eval", "evaluate an SWF on a utility CSV");
  eval->add_option("utilities", utility_path, "utility CSV")->required();
  eval->add_option("--swf", eval_swf, "SWF spec")->required();
  eval->add_option("--umax", umax_path, "per-player maximum utilities (kalai-smorodinsky)");

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.txt")->required();
  replay->add_option("--output", flags.output, "write to another directory");
  replay->add_flag("--strict", flags.strict, "exit 1 when a reproduction check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    for (const auto& [name, sub] : experiments) {
      if (sub->parsed()) return run_experiment(name, build_config(flags), flags);
    }
    if (solve->parsed()) return run_solve(problem_path, solve_swf, solve_budget, oracle, out_path, flags.strict);
    if (eval->parsed()) return run_swf_eval(utility_path, eval_swf, umax_path);
    if (replay->parsed()) {
      const auto text = read_file(manifest_path);
      std::string command;
      for (auto line : swo::text::split(text, '\n')) {
        line = swo::text::trim(line);
        if (line.rfind("command=", 0) == 0) command = std::string(swo::text::trim(line.substr(8)));
      }
      if (command.empty()) throw swo::ConfigError(manifest_path + ": no command= line");
      swo::ExperimentConfig cfg;
      cfg.apply_text(text);
      if (!flags.output.empty()) cfg.set("output", flags.output);
      return run_experiment(command, std::move(cfg), flags);
    }
  } catch (const swo::Error& e) {
    std::cerr << "swo: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "swo: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
