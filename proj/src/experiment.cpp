#include "swo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "swo/errors.hpp"
#include "swo/text.hpp"

namespace swo {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer(RunContext& ctx, std::string name) : ctx_(ctx), name_(std::move(name)), start_(Clock::now()) {}
  ~StageTimer() {
    const auto ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    ctx_.stage_ms.emplace_back(name_, ms);
  }

 private:
  RunContext& ctx_;
  std::string name_;
  Clock::time_point start_;
};

std::string join_doubles(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += text::format_double(v[i]);
  }
  return out;
}

std::string file_tag(const SwfSpec& spec) {
  std::string s = spec.to_string();
  for (char& c : s) {
    if (c == ':' || c == '=' || c == ',') c = '_';
  }
  return s;
}

std::string opt_fixed(const std::optional<double>& v, int digits) {
  return v ? text::format_fixed(*v, digits) : "";
}

std::vector<CreditRecord> load_records(RunContext& ctx) {
  StageTimer t(ctx, "load");
  return load_german_credit(resolve_dataset(ctx.config));
}

std::vector<SplitPlan> plans_for(const ExperimentConfig& cfg) {
  return make_splits(kGermanRecordCount, cfg.n_splits, cfg.seed_base, cfg.budget);
}

std::vector<int> labels_of(const EncodedDataset& data) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < data.y.size(); ++i) out.push_back(data.y(i) > 0 ? 1 : -1);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string ExperimentConfig::to_text() const {
  std::map<std::string, std::string> kv;
  kv["dataset"] = dataset_path;
  kv["splits"] = std::to_string(n_splits);
  kv["seed"] = std::to_string(seed_base);
  std::string swf_list;
  for (std::size_t i = 0; i < swfs.size(); ++i) {
    if (i) swf_list += ';';
    swf_list += swfs[i].to_string();
  }
  kv["swf"] = swf_list;
  kv["lambda2"] = join_doubles(lambda2_grid, ',');
  kv["budget"] = text::format_double(budget);
  kv["c"] = text::format_double(train.c);
  kv["lambda1"] = text::format_double(train.lambda1);
  kv["kappa"] = text::format_double(train.kappa);
  kv["max_iter"] = std::to_string(train.max_iter);
  kv["step_scale"] = text::format_double(train.step_scale);
  kv["tolerance"] = text::format_double(train.tolerance);
  kv["output"] = output_dir;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  // the output location does not change any report content
  ExperimentConfig copy = *this;
  copy.output_dir.clear();
  return text::hex64(text::fnv1a64(copy.to_text()));
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = text::trim(key);
  value = text::trim(value);
  try {
    if (key == "dataset") {
      dataset_path = std::string(value);
    } else if (key == "splits") {
      const auto v = text::parse_int(value);
      if (v <= 0) throw ConfigError("splits must be positive");
      n_splits = static_cast<std::size_t>(v);
    } else if (key == "seed") {
      seed_base = std::stoull(std::string(value));
    } else if (key == "swf") {
      swfs.clear();
      for (auto item : text::split(value, ';')) {
        if (!text::trim(item).empty()) swfs.push_back(SwfSpec::parse(item));
      }
    } else if (key == "lambda2") {
      lambda2_grid.clear();
      for (auto item : text::split(value, ',')) {
        if (!text::trim(item).empty()) lambda2_grid.push_back(text::parse_double(item));
      }
    } else if (key == "budget") {
      budget = text::parse_double(value);
    } else if (key == "c") {
      train.c = text::parse_double(value);
    } else if (key == "lambda1") {
      train.lambda1 = text::parse_double(value);
    } else if (key == "kappa") {
      train.kappa = text::parse_double(value);
    } else if (key == "max_iter") {
      train.max_iter = static_cast<std::size_t>(text::parse_int(value));
    } else if (key == "step_scale") {
      train.step_scale = text::parse_double(value);
    } else if (key == "tolerance") {
      train.tolerance = text::parse_double(value);
    } else if (key == "output") {
      output_dir = std::string(value);
    } else {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw ConfigError("config key '" + std::string(key) + "': value out of range");
  }
}

void ExperimentConfig::apply_text(std::string_view content) {
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = text::trim(line.substr(0, eq));
    if (key == "command") continue;
    set(key, line.substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  if (n_splits == 0) throw ConfigError("splits must be positive");
  if (!(budget >= 0.0)) throw ConfigError("budget must be >= 0");
  for (double l : lambda2_grid) {
    if (!(l >= 0.0)) throw ConfigError("lambda2 values must be >= 0");
  }
  for (const auto& s : swfs) s.validate();
  train.validate();
}

std::filesystem::path resolve_dataset(const ExperimentConfig& config) {
  if (!config.dataset_path.empty()) return config.dataset_path;
  if (const char* env = std::getenv(kDatasetEnvVar.data()); env && *env) return env;
  throw ConfigError("no dataset path: pass --dataset, set dataset= in the config, or export " +
                    std::string(kDatasetEnvVar));
}

// ---------------------------------------------------------------------------
// Run context

std::string RunContext::provenance() const {
  return "# swo " + std::string(kToolkitVersion) + " command=" + command +
         " config_hash=" + config.hash() + " seed_base=" + std::to_string(config.seed_base) + "\n";
}

void RunContext::write_report(const std::string& relative, const std::string& body) {
  artifacts.push_back(relative);
  if (!write_files) return;
  const std::filesystem::path path = std::filesystem::path(config.output_dir) / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << provenance() << body;
  if (!out) throw IoError("failed writing " + path.string());
}

void RunContext::write_manifest() {
  if (!write_files) return;
  std::ostringstream os;
  os << "# swo run manifest\n";
  os << "# version=" << kToolkitVersion << '\n';
  os << "# config_hash=" << config.hash() << '\n';
  os << "command=" << command << '\n';
  os << config.to_text();
  os << "# split_seeds=";
  for (std::size_t k = 0; k < config.n_splits; ++k) os << (k ? "," : "") << config.seed_base + k;
  os << '\n';
  for (const auto& a : artifacts) os << "# artifact=" << a << '\n';
  for (const auto& [stage, ms] : stage_ms) os << "# stage_ms." << stage << '=' << text::format_fixed(ms, 1) << '\n';
  const std::filesystem::path path = std::filesystem::path(config.output_dir) / "manifest.txt";
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << os.str();
}

// ---------------------------------------------------------------------------
// ingest

std::string facts_report(const DatasetFacts& f) {
  std::ostringstream os;
  os << "records " << f.records << '\n';
  os << "young (age < 35) " << f.young << '\n';
  os << "old (age >= 35) " << f.old << '\n';
  os << "young positive share " << text::format_fixed(100.0 * f.young_positive_share, 2) << "%\n";
  os << "old positive share " << text::format_fixed(100.0 * f.old_positive_share, 2) << "%\n";
  return os.str();
}

IngestResult run_ingest(RunContext& ctx) {
  ctx.config.validate();
  const auto records = load_records(ctx);
  IngestResult result;
  result.facts = dataset_facts(records);
  const auto& f = result.facts;
  result.facts_match = f.records == 1000 && f.young == 548 && f.old == 452 &&
                       std::lround(100.0 * f.young_positive_share) == 65 &&
                       std::lround(100.0 * f.old_positive_share) == 76;

  StageTimer t(ctx, "ingest");
  ctx.write_report("facts.txt", facts_report(f));
  std::ostringstream csv;
  csv << "records,young,old,young_positive_share,old_positive_share\n"
      << f.records << ',' << f.young << ',' << f.old << ','
      << text::format_fixed(f.young_positive_share, 6) << ','
      << text::format_fixed(f.old_positive_share, 6) << '\n';
  ctx.write_report("facts.csv", csv.str());

  // export uses statistics over every record; per-split encodings refit on training rows
  std::vector<std::size_t> all(records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto enc = FeatureEncoder::fit(records, all);
  ctx.write_report("encoded.csv", encoded_to_csv(enc.transform(records, all)));

  const auto plans = plans_for(ctx.config);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    ctx.write_report("splits/split_" + std::to_string(k + 1) + ".txt", format_split_plan(plans[k]));
  }
  return result;
}

// ---------------------------------------------------------------------------
// standard LR

std::vector<int> group_indices(const std::vector<AgeGroup>& groups) {
  std::vector<int> out;
  out.reserve(groups.size());
  for (auto g : groups) out.push_back(g == AgeGroup::Young ? 0 : 1);
  return out;
}

SplitModel fit_standard_split(const std::vector<CreditRecord>& records, const SplitPlan& plan,
                              const TrainConfig& train) {
  SplitModel sm;
  sm.plan = plan;
  const auto enc = FeatureEncoder::fit(records, plan.train);
  sm.train = enc.transform(records, plan.train);
  sm.test = enc.transform(records, plan.test);
  sm.model = train_standard(sm.train.x, sm.train.y, train, nullptr, sm.train.feature_names);
  return sm;
}

Table1Result run_table1(RunContext& ctx) {
  ctx.config.validate();
  const auto records = load_records(ctx);
  const auto plans = plans_for(ctx.config);
  Table1Result result;
  StageTimer t(ctx, "table1");
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto sm = fit_standard_split(records, plans[k], ctx.config.train);
    const auto ev = evaluate_model(sm.model, sm.test.x, sm.test.y, ctx.config.train.utility);
    const auto labels = labels_of(sm.test);
    const auto groups = group_indices(sm.test.groups);
    auto rates = classification_group_rates(ev.predictions, labels, groups, age_group_names());

    std::ostringstream os;
    os << "split,group,count,positive_rate,true_positive_rate,true_negative_rate,accuracy\n";
    for (const auto& r : rates) {
      os << k + 1 << ',' << r.group << ',' << r.count << ',' << text::format_fixed(r.positive_rate, 2)
         << ',' << opt_fixed(r.true_positive_rate, 2) << ',' << opt_fixed(r.true_negative_rate, 2)
         << ',' << text::format_fixed(100.0 * ev.accuracy, 2) << '\n';
    }
    ctx.write_report("table1/split_" + std::to_string(k + 1) + ".csv", os.str());
    ctx.write_report("models/standard_split_" + std::to_string(k + 1) + ".txt", format_model(sm.model));
    result.per_split.push_back(std::move(rates));
    result.accuracy.push_back(ev.accuracy);
  }
  result.aggregate = aggregate_group_rates(result.per_split);
  ctx.write_report("table1/aggregate.csv", group_report_csv(result.aggregate));
  const auto acc = mean_sd(result.accuracy);
  ctx.write_report("table1.txt", group_report_table(result.aggregate) + "test accuracy (%): " +
                                     text::format_fixed(100.0 * acc.mean, 2) + " +/- " +
                                     text::format_fixed(100.0 * acc.sd, 2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// post-processing

PostResult run_post(RunContext& ctx) {
  ctx.config.validate();
  if (ctx.config.swfs.empty()) throw ConfigError("post needs at least one SWF");
  const auto records = load_records(ctx);
  const auto plans = plans_for(ctx.config);
  PostResult result;
  StageTimer t(ctx, "post");

  std::ostringstream ratios_csv;
  ratios_csv << "split,swf,group,all_ratio,qualified_ratio,total_granted,objective,solver\n";
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto sm = fit_standard_split(records, plans[k], ctx.config.train);
    // only features reach the model; test labels are used for the qualified-ratio report alone
    std::vector<double> p_hat;
    for (Eigen::Index i = 0; i < sm.test.x.rows(); ++i) {
      p_hat.push_back(predict_prob(sm.model, sm.test.x.row(i).transpose()));
    }
    const AllocationProblem problem(p_hat, plans[k].requests, ctx.config.budget);
    const auto groups = group_indices(sm.test.groups);
    std::vector<bool> qualified_vec;
    for (Eigen::Index i = 0; i < sm.test.y.size(); ++i) qualified_vec.push_back(sm.test.y(i) > 0);
    std::unique_ptr<bool[]> qualified(new bool[qualified_vec.size()]);
    std::copy(qualified_vec.begin(), qualified_vec.end(), qualified.get());

    for (const auto& spec : ctx.config.swfs) {
      GenericOptions opts;
      opts.seed = plans[k].seed;
      const auto sol = solve(problem, spec, opts);
      PostCell cell;
      cell.split = k + 1;
      cell.swf = spec.to_string();
      cell.ratios = approval_ratios(sol, plans[k].requests, groups, age_group_names(),
                                    std::span<const bool>(qualified.get(), qualified_vec.size()));
      cell.total_granted = std::accumulate(sol.granted.begin(), sol.granted.end(), 0.0);
      cell.objective = sol.objective;
      cell.feasible = is_feasible(problem, sol.granted);
      for (const auto& r : cell.ratios) {
        ratios_csv << cell.split << ',' << cell.swf << ',' << r.group << ','
                   << text::format_fixed(r.all_ratio, 6) << ',' << opt_fixed(r.qualified_ratio, 6)
                   << ',' << text::format_fixed(cell.total_granted, 6) << ','
                   << text::format_double(sol.objective) << ',' << solver_name(sol.solver) << '\n';
      }
      std::ostringstream sol_csv;
      sol_csv << "id,granted,utility\n";
      for (std::size_t i = 0; i < sol.granted.size(); ++i) {
        sol_csv << sm.test.source_rows[i] << ',' << text::format_double(sol.granted[i]) << ','
                << text::format_double(sol.utility[i]) << '\n';
      }
      ctx.write_report("post/split_" + std::to_string(k + 1) + "_" + file_tag(spec) + ".csv", sol_csv.str());
      result.cells.push_back(std::move(cell));
    }
  }
  ctx.write_report("post/approval_ratios.csv", ratios_csv.str());

  std::ostringstream fig;
  fig << "swf,group,all_ratio_mean,qualified_ratio_mean\n";
  for (const auto& spec : ctx.config.swfs) {
    const auto name = spec.to_string();
    std::array<double, 4> sums{};
    std::array<std::size_t, 4> counts{};
    for (const auto& cell : result.cells) {
      if (cell.swf != name) continue;
      for (std::size_t g = 0; g < 2; ++g) {
        sums[g] += cell.ratios[g].all_ratio;
        ++counts[g];
        if (cell.ratios[g].qualified_ratio) {
          sums[2 + g] += *cell.ratios[g].qualified_ratio;
          ++counts[2 + g];
        }
      }
    }
    std::array<double, 4> means{};
    for (std::size_t j = 0; j < 4; ++j) means[j] = counts[j] ? sums[j] / static_cast<double>(counts[j]) : 0.0;
    result.means[name] = means;
    for (std::size_t g = 0; g < 2; ++g) {
      fig << name << ',' << age_group_names()[g] << ',' << text::format_fixed(means[g], 6) << ','
          << text::format_fixed(means[2 + g], 6) << '\n';
    }
  }
  ctx.write_report("post/fig1.csv", fig.str());
  return result;
}

// ---------------------------------------------------------------------------
// in-processing

InprocResult run_inproc(RunContext& ctx) {
  ctx.config.validate();
  if (ctx.config.swfs.empty()) throw ConfigError("inproc needs at least one SWF");
  if (ctx.config.lambda2_grid.empty()) throw ConfigError("inproc needs a lambda2 grid");
  const auto records = load_records(ctx);
  const auto plans = plans_for(ctx.config);
  InprocResult result;
  StageTimer t(ctx, "inproc");

  auto record = [&](std::size_t split, double lambda2, std::string swf, const LinearModel& model,
                    const EncodedDataset& test) {
    const auto ev = evaluate_model(model, test.x, test.y, ctx.config.train.utility);
    InprocCell cell;
    cell.split = split;
    cell.lambda2 = lambda2;
    cell.swf = std::move(swf);
    cell.rates = classification_group_rates(ev.predictions, labels_of(test), group_indices(test.groups),
                                            age_group_names());
    cell.accuracy = ev.accuracy;
    result.cells.push_back(std::move(cell));
  };

  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto enc = FeatureEncoder::fit(records, plans[k].train);
    const auto train = enc.transform(records, plans[k].train);
    const auto test = enc.transform(records, plans[k].test);
    const auto base = train_standard(train.x, train.y, ctx.config.train, nullptr, train.feature_names);
    record(k + 1, 0.0, "standard", base, test);
    for (double lambda2 : ctx.config.lambda2_grid) {
      for (const auto& spec : ctx.config.swfs) {
        TrainConfig cfg = ctx.config.train;
        cfg.lambda2 = lambda2;
        cfg.swf = spec;
        const auto model = train_in_processing(train.x, train.y, cfg, nullptr, train.feature_names);
        record(k + 1, lambda2, spec.to_string(), model, test);
      }
    }
  }

  std::ostringstream cells_csv;
  cells_csv << "split,lambda2,swf,young_pr,old_pr,young_tpr,old_tpr,young_tnr,old_tnr,accuracy\n";
  for (const auto& c : result.cells) {
    cells_csv << c.split << ',' << text::format_double(c.lambda2) << ',' << c.swf << ','
              << text::format_fixed(c.rates[0].positive_rate, 2) << ','
              << text::format_fixed(c.rates[1].positive_rate, 2) << ','
              << opt_fixed(c.rates[0].true_positive_rate, 2) << ','
              << opt_fixed(c.rates[1].true_positive_rate, 2) << ','
              << opt_fixed(c.rates[0].true_negative_rate, 2) << ','
              << opt_fixed(c.rates[1].true_negative_rate, 2) << ','
              << text::format_fixed(100.0 * c.accuracy, 2) << '\n';
  }
  ctx.write_report("inproc/cells.csv", cells_csv.str());

  auto summarize = [&](double lambda2, const std::string& swf) {
    InprocSummary s;
    s.lambda2 = lambda2;
    s.swf = swf;
    std::array<double, 4> sums{};
    std::array<std::size_t, 4> counts{};
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& c : result.cells) {
      if (c.swf != swf || c.lambda2 != lambda2) continue;
      const std::array<std::optional<double>, 4> vals{c.rates[0].positive_rate, c.rates[1].positive_rate,
                                                      c.rates[0].true_positive_rate,
                                                      c.rates[1].true_positive_rate};
      for (std::size_t j = 0; j < 4; ++j) {
        if (vals[j]) {
          sums[j] += *vals[j];
          ++counts[j];
        }
      }
      acc += c.accuracy;
      ++n;
    }
    for (std::size_t j = 0; j < 4; ++j) s.rates[j] = counts[j] ? sums[j] / static_cast<double>(counts[j]) : 0.0;
    s.pr_gap = std::abs(s.rates[0] - s.rates[1]);
    s.tpr_gap = std::abs(s.rates[2] - s.rates[3]);
    s.accuracy = n ? acc / static_cast<double>(n) : 0.0;
    return s;
  };
  result.summary.push_back(summarize(0.0, "standard"));
  for (double lambda2 : ctx.config.lambda2_grid) {
    for (const auto& spec : ctx.config.swfs) result.summary.push_back(summarize(lambda2, spec.to_string()));
  }

  std::ostringstream summary_csv, fig2, fig3;
  summary_csv << "lambda2,swf,pr_gap,tpr_gap,accuracy\n";
  fig2 << "lambda2,swf,group,positive_rate,true_positive_rate\n";
  fig3 << "lambda2,swf,accuracy\n";
  for (const auto& s : result.summary) {
    const auto l = text::format_double(s.lambda2);
    summary_csv << l << ',' << s.swf << ',' << text::format_fixed(s.pr_gap, 2) << ','
                << text::format_fixed(s.tpr_gap, 2) << ',' << text::format_fixed(100.0 * s.accuracy, 2) << '\n';
    for (std::size_t g = 0; g < 2; ++g) {
      fig2 << l << ',' << s.swf << ',' << age_group_names()[g] << ',' << text::format_fixed(s.rates[g], 2)
           << ',' << text::format_fixed(s.rates[2 + g], 2) << '\n';
    }
    fig3 << l << ',' << s.swf << ',' << text::format_fixed(100.0 * s.accuracy, 2) << '\n';
  }
  ctx.write_report("inproc/summary.csv", summary_csv.str());
  ctx.write_report("inproc/fig2.csv", fig2.str());
  ctx.write_report("inproc/fig3.csv", fig3.str());
  return result;
}

// ---------------------------------------------------------------------------
// strict checks

std::vector<CheckResult> check_ingest(const IngestResult& result) {
  const auto& f = result.facts;
  return {{"dataset facts", result.facts_match,
           std::to_string(f.records) + " records, " + std::to_string(f.young) + " young / " +
               std::to_string(f.old) + " old, positive shares " +
               std::to_string(std::lround(100.0 * f.young_positive_share)) + "% / " +
               std::to_string(std::lround(100.0 * f.old_positive_share)) + "%"}};
}

std::vector<CheckResult> check_table1(const Table1Result& result) {
  std::vector<CheckResult> out;
  const auto& rows = result.aggregate.rows;
  if (rows.size() != 2) return {{"table1 groups", false, "expected two groups"}};
  auto near = [&](const std::string& name, const MeanSd& m, double target) {
    out.push_back({name, m.n > 0 && std::abs(m.mean - target) <= kTable1Tolerance,
                   text::format_fixed(m.mean, 2) + " vs " + text::format_fixed(target, 2)});
  };
  near("young positive rate", rows[0].positive_rate, 70.33);
  near("old positive rate", rows[1].positive_rate, 82.14);
  near("young true positive rate", rows[0].true_positive_rate, 82.03);
  near("old true positive rate", rows[1].true_positive_rate, 91.01);
  out.push_back({"old PR > young PR", rows[1].positive_rate.mean > rows[0].positive_rate.mean, ""});
  out.push_back({"old TPR > young TPR", rows[1].true_positive_rate.mean > rows[0].true_positive_rate.mean, ""});
  return out;
}

std::vector<CheckResult> check_post(const PostResult& result) {
  std::vector<CheckResult> out;
  bool feasible = true;
  for (const auto& c : result.cells) feasible = feasible && c.feasible;
  out.push_back({"allocations feasible", feasible, ""});
  const auto util = result.means.find(SwfSpec::of(SwfFamily::Utilitarian).to_string());
  const auto prop = result.means.find(SwfSpec::of(SwfFamily::ProportionalFairness).to_string());
  if (util == result.means.end() || prop == result.means.end()) {
    out.push_back({"post directions", false, "utilitarian and proportional must both be run"});
    return out;
  }
  const auto& u = util->second;
  const auto& p = prop->second;
  out.push_back({"utilitarian old ratio > young ratio", u[1] > u[0],
                 text::format_fixed(u[1], 4) + " vs " + text::format_fixed(u[0], 4)});
  const double gap_u = std::abs(u[0] - u[1]);
  const double gap_p = std::abs(p[0] - p[1]);
  out.push_back({"proportional gap < utilitarian gap", gap_p < gap_u,
                 text::format_fixed(gap_p, 4) + " vs " + text::format_fixed(gap_u, 4)});
  return out;
}

std::vector<CheckResult> check_inproc(const InprocResult& result) {
  std::vector<CheckResult> out;
  if (result.summary.empty() || result.summary.front().swf != "standard") {
    return {{"inproc baseline", false, "missing standard baseline"}};
  }
  const auto& base = result.summary.front();
  bool has_one = false;
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < result.summary.size(); ++i) {
    const auto& s = result.summary[i];
    worst_drop = std::max(worst_drop, base.accuracy - s.accuracy);
    if (s.lambda2 != 1.0) continue;
    has_one = true;
    out.push_back({s.swf + " PR gap shrinks at lambda2=1", s.pr_gap < base.pr_gap,
                   text::format_fixed(s.pr_gap, 2) + " vs " + text::format_fixed(base.pr_gap, 2)});
    out.push_back({s.swf + " TPR gap shrinks at lambda2=1", s.tpr_gap < base.tpr_gap,
                   text::format_fixed(s.tpr_gap, 2) + " vs " + text::format_fixed(base.tpr_gap, 2)});
  }
  if (!has_one) out.push_back({"lambda2=1 present", false, "grid lacks lambda2=1"});
  out.push_back({"accuracy drop <= 5 points", worst_drop <= kAccuracyDropLimit,
                 "worst drop " + text::format_fixed(100.0 * worst_drop, 2) + " points"});
  return out;
}

// ---------------------------------------------------------------------------
// solve / swf-eval

ProblemTable parse_problem_csv(std::string_view content) {
  ProblemTable table;
  bool header = false;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (!header) {
      if (fields.size() != 3 || text::trim(fields[0]) != "id" || text::trim(fields[1]) != "pHat" ||
          text::trim(fields[2]) != "request") {
        throw ConfigError("problem csv: header must be 'id,pHat,request'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw MalformedLine(line_no, fields.size() + 1, "expected 3 comma-separated fields");
    }
    try {
      table.ids.emplace_back(text::trim(fields[0]));
      table.p_hat.push_back(text::parse_double(fields[1]));
      table.requests.push_back(text::parse_double(fields[2]));
    } catch (const std::invalid_argument& e) {
      throw MalformedLine(line_no, 0, e.what());
    }
  }
  if (!header) throw ConfigError("problem csv: missing header");
  if (table.ids.empty()) throw ConfigError("problem csv: no rows");
  return table;
}

std::string solution_csv(const ProblemTable& table, const AllocationSolution& solution) {
  std::ostringstream os;
  os << "id,granted,utility\n";
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    os << table.ids[i] << ',' << text::format_double(solution.granted[i]) << ','
       << text::format_double(solution.utility[i]) << '\n';
  }
  return os.str();
}

SolveReport solve_table(const ProblemTable& table, double budget, const SwfSpec& spec,
                        double oracle_step, const GenericOptions& options) {
  const AllocationProblem problem(table.p_hat, table.requests, budget);
  SolveReport report;
  report.solution = solve(problem, spec, options);
  if (oracle_step > 0.0) {
    const auto oracle = brute_force_oracle(problem, spec, oracle_step);
    report.oracle_ran = true;
    report.oracle_objective = oracle.objective;
    report.oracle_gap = oracle.objective - report.solution.objective;
  }
  return report;
}

std::string solve_diagnostics(const SolveReport& report, const SwfSpec& spec) {
  const auto& s = report.solution;
  std::ostringstream os;
  os << "swf " << spec.to_string() << '\n';
  os << "solver " << solver_name(s.solver) << '\n';
  os << "objective " << text::format_double(s.objective) << '\n';
  os << "iterations " << s.iterations << '\n';
  os << "converged " << (s.converged ? "yes" : "no") << '\n';
  os << "total_granted " << text::format_double(std::accumulate(s.granted.begin(), s.granted.end(), 0.0)) << '\n';
  if (spec.family == SwfFamily::KalaiSmorodinsky) os << "beta " << text::format_double(s.beta) << '\n';
  if (spec.family == SwfFamily::Maximin || spec.family == SwfFamily::Leximax) {
    os << "water_level " << text::format_double(s.water_level) << '\n';
  }
  if (!s.degenerate_players.empty()) {
    os << "degenerate_players";
    for (auto i : s.degenerate_players) os << ' ' << i;
    os << '\n';
  }
  if (report.oracle_ran) {
    os << "oracle_objective " << text::format_double(report.oracle_objective) << '\n';
    os << "oracle_gap " << text::format_double(report.oracle_gap) << '\n';
  }
  return os.str();
}

std::vector<double> parse_utility_csv(std::string_view content) {
  std::vector<double> out;
  std::optional<std::size_t> column;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (!column) {
      // header row or a bare single-column file
      bool numeric = true;
      try {
        (void)text::parse_double(fields[0]);
      } catch (const std::invalid_argument&) {
        numeric = false;
      }
      if (!numeric) {
        for (std::size_t c = 0; c < fields.size(); ++c) {
          if (text::trim(fields[c]) == "utility" || fields.size() == 1) column = c;
        }
        if (!column) throw ConfigError("utility csv: no 'utility' column");
        continue;
      }
      column = 0;
    }
    if (*column >= fields.size()) throw MalformedLine(line_no, *column + 1, "missing utility field");
    try {
      out.push_back(text::parse_double(fields[*column]));
    } catch (const std::invalid_argument& e) {
      throw MalformedLine(line_no, *column + 1, e.what());
    }
  }
  return out;
}

}  // namespace swo
