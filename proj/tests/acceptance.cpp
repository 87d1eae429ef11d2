// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance [--xfail NAME]...
//
// Exit status is 0 only when the set of failing criteria equals the --xfail
// set exactly; an unexpected pass is reported and also fails the run.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swo/alloc.hpp"
#include "swo/data.hpp"
#include "swo/errors.hpp"
#include "swo/experiment.hpp"
#include "swo/learn.hpp"
#include "swo/rng.hpp"
#include "swo/swf.hpp"
#include "swo/text.hpp"

using namespace swo;
namespace fs = std::filesystem;

namespace {

constexpr double kSwfRel = 1e-12;
constexpr int kSwfVectors = 1000;
constexpr std::size_t kSwfMaxN = 20;

constexpr int kAllocInstances = 50;
constexpr std::size_t kAllocMaxN = 4;
constexpr double kAllocStepFraction = 0.01;

constexpr int kPfReplacements = 10;
constexpr double kPfTol = 1e-9;

constexpr double kTable1Tol = 5.0;
constexpr double kYoungPr = 70.33, kOldPr = 82.14, kYoungTpr = 82.03, kOldTpr = 91.01;

constexpr double kInprocLambda2 = 1.0;
constexpr double kAccuracyDrop = 0.05;

constexpr int kGradPoints = 10;
constexpr double kGradRel = 1e-5;
constexpr double kFdStep = 1e-6;

constexpr double kFactsSeconds = 1.0;
constexpr double kSwfSeconds = 10.0;
constexpr double kAllocSeconds = 60.0;
constexpr double kPfSeconds = 1.0;
constexpr double kGradSeconds = 10.0;
constexpr double kIdentitySeconds = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) { return text::format_fixed(v, digits); }

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.dataset_path = SWO_DATA_FILE;
  return cfg;
}

RunContext quiet_context(const std::string& command, ExperimentConfig cfg) {
  RunContext ctx;
  ctx.command = command;
  ctx.config = std::move(cfg);
  ctx.write_files = false;
  return ctx;
}

void add_time(Outcome& o, double seconds, double limit) {
  o.detail += " time=" + fmt(seconds, 2) + "s";
  if (limit > 0 && seconds >= limit) {
    o.pass = false;
    o.detail += " (limit " + fmt(limit, 0) + "s)";
  }
}

// ---- dataset facts

Outcome dataset_facts_check() {
  auto ctx = quiet_context("ingest", base_config());
  const auto r = run_ingest(ctx);
  const auto& f = r.facts;
  const long yp = std::lround(100.0 * f.young_positive_share);
  const long op = std::lround(100.0 * f.old_positive_share);
  Outcome o;
  o.pass = f.records == 1000 && f.young == 548 && f.old == 452 && yp == 65 && op == 76;
  o.detail = "records=" + std::to_string(f.records) + " young=" + std::to_string(f.young) +
             " old=" + std::to_string(f.old) + " young_pos=" + std::to_string(yp) +
             "% old_pos=" + std::to_string(op) + "%";
  return o;
}

// ---- standard model group rates

Outcome table1_check() {
  auto ctx = quiet_context("table1", base_config());
  const auto r = run_table1(ctx);
  const auto& young = r.aggregate.rows.at(0);
  const auto& old = r.aggregate.rows.at(1);
  const double ypr = young.positive_rate.mean, opr = old.positive_rate.mean;
  const double ytpr = young.true_positive_rate.mean, otpr = old.true_positive_rate.mean;
  Outcome o;
  o.pass = std::fabs(ypr - kYoungPr) <= kTable1Tol && std::fabs(opr - kOldPr) <= kTable1Tol &&
           std::fabs(ytpr - kYoungTpr) <= kTable1Tol && std::fabs(otpr - kOldTpr) <= kTable1Tol &&
           opr > ypr && otpr > ytpr && r.per_split.size() == 5;
  o.detail = "PR young=" + fmt(ypr, 2) + " old=" + fmt(opr, 2) + " TPR young=" + fmt(ytpr, 2) +
             " old=" + fmt(otpr, 2) + " (tol " + fmt(kTable1Tol, 1) + ")";
  return o;
}

// ---- SWF evaluators

const std::vector<SwfSpec>& scalar_specs() {
  static const std::vector<SwfSpec> specs{
      SwfSpec::of(SwfFamily::Utilitarian),           SwfSpec::of(SwfFamily::RelativeRange),
      SwfSpec::of(SwfFamily::RelativeMeanDeviation), SwfSpec::of(SwfFamily::CoefficientOfVariation),
      SwfSpec::of(SwfFamily::Gini),                  SwfSpec::of(SwfFamily::Hoover),
      SwfSpec::of(SwfFamily::McLoone),               SwfSpec::of(SwfFamily::Maximin),
      SwfSpec::alpha_fairness(0.5),                  SwfSpec::alpha_fairness(2.0),
      SwfSpec::of(SwfFamily::ProportionalFairness),  SwfSpec::threshold(1.5)};
  return specs;
}

double direct_value(const SwfSpec& s, const std::vector<double>& u) {
  switch (s.family) {
    case SwfFamily::Utilitarian: return oracle::utilitarian(u);
    case SwfFamily::RelativeRange: return oracle::relative_range(u);
    case SwfFamily::RelativeMeanDeviation: return oracle::relative_mean_deviation(u);
    case SwfFamily::CoefficientOfVariation: return oracle::coefficient_of_variation(u);
    case SwfFamily::Gini: return oracle::gini(u);
    case SwfFamily::Hoover: return oracle::hoover(u);
    case SwfFamily::McLoone: return oracle::mcloone(u);
    case SwfFamily::Maximin: return oracle::maximin(u);
    case SwfFamily::AlphaFairness: return oracle::alpha_fairness(u, s.alpha, s.epsilon_clamp);
    case SwfFamily::ProportionalFairness: return oracle::proportional(u, s.epsilon_clamp);
    case SwfFamily::Threshold: return oracle::threshold(u, s.delta);
    default: throw UnsupportedFamily("no direct formula");
  }
}

Outcome swf_oracle_check() {
  Rng rng(7001);
  std::size_t comparisons = 0, value_failures = 0, property_failures = 0;
  std::set<std::string> families;
  auto draw = [&](std::size_t n) {
    std::vector<double> u(n);
    for (auto& v : u) v = rng.uniform(0.01, 10.0);
    return u;
  };
  auto expect = [&](bool ok) {
    if (!ok) ++property_failures;
  };

  for (int t = 0; t < kSwfVectors; ++t) {
    const std::size_t n = 1 + rng.index(kSwfMaxN);
    const auto u = draw(n);
    for (const auto& s : scalar_specs()) {
      ++comparisons;
      families.insert(std::string(family_name(s.family)));
      if (!oracle::close(evaluate(s, u), direct_value(s, u), kSwfRel)) ++value_failures;
    }

    // kalai-smorodinsky: on the ray and off it
    const auto u_max = draw(n);
    const double beta = rng.uniform(0.0, 1.0);
    std::vector<double> on(n);
    for (std::size_t i = 0; i < n; ++i) on[i] = beta * u_max[i];
    const auto ks = SwfSpec::of(SwfFamily::KalaiSmorodinsky);
    families.insert(std::string(family_name(ks.family)));
    comparisons += 2;
    if (!oracle::close(evaluate(ks, on, u_max), oracle::kalai_smorodinsky(on, u_max), kSwfRel)) ++value_failures;
    if (n >= 2) {
      auto off = on;
      off[n - 1] += 0.5 * u_max[n - 1] + 0.01;
      if (evaluate(ks, off, u_max) != oracle::kalai_smorodinsky(off, u_max)) ++value_failures;
    }

    // leximax against sorted comparison
    const auto v = draw(n);
    const auto c = leximax_compare(u, v);
    const int got = c < 0 ? -1 : (c > 0 ? 1 : 0);
    families.insert("leximax");
    ++comparisons;
    if (got != oracle::leximax(u, v)) ++value_failures;

    // properties
    auto perm = u;
    rng.shuffle(perm);
    for (const auto& s : scalar_specs()) expect(oracle::close(evaluate(s, u), evaluate(s, perm), 1e-12));
    expect(leximax_compare(u, perm) == std::strong_ordering::equal);
    const double k = rng.uniform(0.1, 20.0);
    auto ku = u;
    for (auto& x : ku) x *= k;
    for (auto f : {SwfFamily::RelativeRange, SwfFamily::RelativeMeanDeviation, SwfFamily::CoefficientOfVariation,
                   SwfFamily::Gini, SwfFamily::Hoover, SwfFamily::McLoone}) {
      expect(oracle::close(evaluate(SwfSpec::of(f), u), evaluate(SwfSpec::of(f), ku), 1e-11));
    }
    expect(oracle::close(eval_utilitarian(ku), k * eval_utilitarian(u), 1e-12));
    expect(oracle::close(eval_maximin(ku), k * eval_maximin(u), 1e-12));
    expect(eval_gini(u) <= 1.0);
    expect(eval_mcloone(u) > 0.0);
    expect(eval_hoover(u) <= 0.0);
    expect(eval_relative_range(u) <= 0.0);
    expect(oracle::close(eval_threshold(u, 0.0), eval_utilitarian(u), 1e-12));
    expect(oracle::close(eval_hoover(u) * 2.0 * static_cast<double>(n), eval_relative_mean_deviation(u), 1e-12));
  }
  const std::vector<double> flat(7, 2.5);
  expect(eval_gini(flat) == 1.0);
  expect(eval_hoover(flat) == 0.0);
  expect(eval_relative_range(flat) == 0.0);

  Outcome o;
  o.pass = value_failures == 0 && property_failures == 0 && families.size() == 13;
  o.detail = std::to_string(families.size()) + " families, " + std::to_string(comparisons) +
             " comparisons, value_failures=" + std::to_string(value_failures) +
             " property_failures=" + std::to_string(property_failures);
  return o;
}

// ---- allocation exactness

const std::vector<SwfSpec>& specialized_specs() {
  static const std::vector<SwfSpec> specs{
      SwfSpec::of(SwfFamily::Utilitarian),         SwfSpec::of(SwfFamily::Maximin),
      SwfSpec::of(SwfFamily::Leximax),             SwfSpec::alpha_fairness(0.5),
      SwfSpec::alpha_fairness(2.0),                SwfSpec::of(SwfFamily::ProportionalFairness),
      SwfSpec::of(SwfFamily::KalaiSmorodinsky)};
  return specs;
}

Outcome allocation_exactness_check() {
  Rng rng(7002);
  int done = 0, redraws = 0, failures = 0;
  double worst_gap = 0.0;
  std::string first_failure;
  while (done < kAllocInstances) {
    const std::size_t n = 1 + rng.index(kAllocMaxN);
    std::vector<double> p(n), r(n);
    for (auto& v : p) v = rng.uniform(0.05, 1.0);
    for (auto& v : r) v = rng.uniform(0.5, 10.0);
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    const AllocationProblem prob(p, r, rng.uniform(0.2, 0.9) * total);
    const double step = kAllocStepFraction * *std::max_element(r.begin(), r.end());
    if (oracle_grid_size(prob, step) > kMaxOracleGridPoints) {
      ++redraws;
      continue;
    }
    ++done;
    for (const auto& spec : specialized_specs()) {
      const auto s = solve(prob, spec);
      const auto g = brute_force_oracle(prob, spec, step);
      const double bound = oracle_resolution_bound(prob, spec, s.utility, step);
      bool ok = is_feasible(prob, s.granted);
      const double scale = std::max(1.0, std::fabs(g.objective));
      ok = ok && s.objective >= g.objective - 1e-9 * scale;
      ok = ok && s.objective - g.objective <= bound + 1e-12 * scale;
      if (spec.family == SwfFamily::Leximax) ok = ok && leximax_compare(s.utility, g.utility, 1e-9) >= 0;
      worst_gap = std::max(worst_gap, s.objective - g.objective - bound);
      if (!ok) {
        ++failures;
        if (first_failure.empty()) first_failure = " first=" + spec.to_string() + "/n=" + std::to_string(n);
      }
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = std::to_string(done) + " instances x " + std::to_string(specialized_specs().size()) +
             " solvers, failures=" + std::to_string(failures) + " redraws=" + std::to_string(redraws) +
             first_failure;
  return o;
}

// ---- proportional fairness invariance

Outcome proportional_invariance_check() {
  Rng rng(7003);
  const std::size_t n = 12;
  std::vector<double> p(n), r(n);
  for (auto& v : p) v = rng.uniform(0.01, 1.0);
  for (auto& v : r) v = rng.uniform(1.0, 100.0);
  const double budget = 0.5 * std::accumulate(r.begin(), r.end(), 0.0);
  const auto pf = SwfSpec::of(SwfFamily::ProportionalFairness);
  const auto base = solve(AllocationProblem(p, r, budget), pf).granted;
  double worst = 0.0;
  for (int k = 0; k < kPfReplacements; ++k) {
    std::vector<double> q(n);
    for (auto& v : q) v = rng.uniform(1e-3, 1.0);
    const auto d = solve(AllocationProblem(q, r, budget), pf).granted;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(d[i] - base[i]));
  }
  Outcome o;
  o.pass = worst <= kPfTol;
  o.detail = std::to_string(kPfReplacements) + " replacements, max |d - d0| = " + text::format_double(worst);
  return o;
}

// ---- post-processing directions

Outcome post_check() {
  auto ctx = quiet_context("post", base_config());
  const auto r = run_post(ctx);
  const auto& util = r.means.at(SwfSpec::of(SwfFamily::Utilitarian).to_string());
  const auto& pf = r.means.at(SwfSpec::of(SwfFamily::ProportionalFairness).to_string());
  const double util_gap = std::fabs(util[0] - util[1]);
  const double pf_gap = std::fabs(pf[0] - pf[1]);
  Outcome o;
  o.pass = util[1] > util[0] && pf_gap < util_gap;
  o.detail = "utilitarian young=" + fmt(util[0]) + " old=" + fmt(util[1]) + " gap=" + fmt(util_gap) +
             "; proportional gap=" + fmt(pf_gap);
  return o;
}

// ---- in-processing directions

Outcome inproc_check() {
  auto ctx = quiet_context("inproc", base_config());
  const auto r = run_inproc(ctx);
  const auto& base = r.summary.at(0);
  Outcome o;
  o.pass = true;
  o.detail = "standard pr_gap=" + fmt(base.pr_gap, 2) + " tpr_gap=" + fmt(base.tpr_gap, 2) + ";";
  std::size_t seen = 0;
  double worst_drop = 0.0;
  for (std::size_t k = 1; k < r.summary.size(); ++k) {
    const auto& s = r.summary[k];
    worst_drop = std::max(worst_drop, base.accuracy - s.accuracy);
    if (s.lambda2 != kInprocLambda2) continue;
    ++seen;
    const bool pr = s.pr_gap < base.pr_gap;
    const bool tpr = s.tpr_gap < base.tpr_gap;
    if (!pr || !tpr) o.pass = false;
    o.detail += " " + s.swf + " pr_gap=" + fmt(s.pr_gap, 2) + (pr ? "" : "!") + " tpr_gap=" + fmt(s.tpr_gap, 2) +
                (tpr ? "" : "!") + ";";
  }
  if (seen != 4) o.pass = false;
  if (worst_drop > kAccuracyDrop) o.pass = false;
  o.detail += " worst accuracy drop=" + fmt(100.0 * worst_drop, 2) + "pp";
  return o;
}

// ---- gradients

EncodedDataset first_split_train() {
  const auto records = load_german_credit(SWO_DATA_FILE);
  const auto plan = make_split(records.size(), 2023);
  return fit_standard_split(records, plan, TrainConfig{}).train;
}

Outcome gradient_check() {
  const auto data = first_split_train();
  const UtilityParams params;
  const TrainConfig defaults;
  const std::vector<SwfSpec> specs{SwfSpec::of(SwfFamily::Utilitarian), SwfSpec::alpha_fairness(0.5),
                                   SwfSpec::of(SwfFamily::ProportionalFairness), SwfSpec::of(SwfFamily::Maximin)};
  Rng rng(7004);
  std::size_t checked = 0, failures = 0;
  double worst = 0.0;
  // error relative to the largest gradient entry
  auto compare = [&](const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& grad) {
    const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-12);
    bool ok = true;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      Eigen::VectorXd up = theta, dn = theta;
      up(j) += kFdStep;
      dn(j) -= kFdStep;
      const double fd = (f(up) - f(dn)) / (2.0 * kFdStep);
      const double err = std::fabs(fd - grad(j)) / scale;
      worst = std::max(worst, err);
      if (err > kGradRel) ok = false;
    }
    ++checked;
    if (!ok) ++failures;
  };
  for (int t = 0; t < kGradPoints; ++t) {
    Eigen::VectorXd theta(data.x.cols());
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = rng.uniform(-0.3, 0.3);
    compare([&](const Eigen::VectorXd& th) { return objective::logistic_loss(data.x, data.y, th); }, theta,
            objective::logistic_loss_gradient(data.x, data.y, theta));
    for (const auto& spec : specs) {
      compare(
          [&](const Eigen::VectorXd& th) {
            return objective::smoothed_welfare(data.x, data.y, th, spec, defaults.kappa, params);
          },
          theta, objective::smoothed_welfare_gradient(data.x, data.y, theta, spec, defaults.kappa, params));
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = std::to_string(checked) + " gradients at " + std::to_string(kGradPoints) +
             " points, worst relative error=" + text::format_double(worst);
  return o;
}

// ---- lambda2 = 0

Outcome lambda2_zero_check() {
  const auto data = first_split_train();
  TrainConfig cfg;
  const auto base = train_standard(data.x, data.y, cfg);
  std::vector<SwfSpec> specs(scalar_specs());
  specs.push_back(SwfSpec::of(SwfFamily::Leximax));
  specs.push_back(SwfSpec::of(SwfFamily::KalaiSmorodinsky));
  std::size_t identical = 0;
  for (const auto& spec : specs) {
    cfg.swf = spec;
    cfg.lambda2 = 0.0;
    const auto m = train_in_processing(data.x, data.y, cfg);
    if (m.theta.size() == base.theta.size() &&
        std::memcmp(m.theta.data(), base.theta.data(), sizeof(double) * static_cast<std::size_t>(m.theta.size())) ==
            0) {
      ++identical;
    }
  }
  Outcome o;
  o.pass = identical == specs.size();
  o.detail = std::to_string(identical) + "/" + std::to_string(specs.size()) + " SWF tags bit-identical";
  return o;
}

// ---- replay

int run_cli(const std::string& args, std::string& output) {
  const std::string cmd = std::string("\"") + SWO_CLI + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return -1;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> report_files(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == "manifest.txt") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    files[rel] = os.str();
  }
  return files;
}

Outcome replay_check() {
  const fs::path root = fs::temp_directory_path() / ("swo-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"ingest", ""},
      {"table1", ""},
      {"post", ""},
      {"inproc", "--splits 1 --lambda2 0.1,1"},
  };
  Outcome o;
  o.pass = true;
  std::size_t compared = 0;
  for (const auto& [command, extra] : runs) {
    const auto a = root / (command + "-a");
    const auto b = root / (command + "-b");
    std::string log;
    bool ok = run_cli(command + " --dataset \"" + std::string(SWO_DATA_FILE) + "\" --output \"" + a.string() +
                          "\" " + extra,
                      log) == 0;
    ok = ok && run_cli("replay \"" + (a / "manifest.txt").string() + "\" --output \"" + b.string() + "\"", log) == 0;
    if (ok) {
      const auto fa = report_files(a);
      const auto fb = report_files(b);
      ok = !fa.empty() && fa == fb;
      compared += fa.size();
    }
    if (!ok) {
      o.pass = false;
      o.detail += " " + command + " differs;";
    }
  }
  fs::remove_all(root);
  o.detail = std::to_string(compared) + " report files byte-identical across ingest, table1, post, inproc;" + o.detail;
  return o;
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
  double time_limit;  // seconds, 0 when only minutes are promised
};

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> xfail;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--xfail") == 0 && i + 1 < argc) {
      xfail.insert(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--xfail NAME]...\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {"dataset-facts", dataset_facts_check, kFactsSeconds},
      {"table1", table1_check, 0},
      {"swf-oracle-suite", swf_oracle_check, kSwfSeconds},
      {"allocation-exactness", allocation_exactness_check, kAllocSeconds},
      {"proportional-invariance", proportional_invariance_check, kPfSeconds},
      {"post-processing-direction", post_check, 0},
      {"in-processing-direction", inproc_check, 0},
      {"gradient-correctness", gradient_check, kGradSeconds},
      {"lambda2-zero-identity", lambda2_zero_check, kIdentitySeconds},
      {"replay-determinism", replay_check, 0},
  };

  std::set<std::string> failed;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    add_time(o, secs, c.time_limit);
    if (!o.pass) failed.insert(c.name);
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
  }

  std::cout << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria pass\n";
  for (const auto& name : xfail) {
    if (!failed.count(name)) std::cout << "unexpected pass: " << name << '\n';
  }
  for (const auto& name : failed) {
    if (xfail.count(name)) std::cout << "expected failure: " << name << '\n';
  }
  return failed == xfail ? 0 : 1;
}
