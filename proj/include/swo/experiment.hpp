#pragma once

// End-to-end case-study harness: ingest, standard logistic regression per
// split, post-processing allocation, in-processing training, reports.
// Every report file starts with a provenance comment carrying the config
// hash; reruns with the same config produce byte-identical reports.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "swo/alloc.hpp"
#include "swo/data.hpp"
#include "swo/learn.hpp"
#include "swo/metrics.hpp"

namespace swo {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
inline constexpr std::string_view kDatasetEnvVar = "SWO_DATASET";

struct ExperimentConfig {
  std::string dataset_path;
  std::size_t n_splits = 5;
  std::uint64_t seed_base = 2023;
  std::vector<SwfSpec> swfs{SwfSpec::of(SwfFamily::Utilitarian), SwfSpec::alpha_fairness(0.5),
                            SwfSpec::of(SwfFamily::ProportionalFairness),
                            SwfSpec::of(SwfFamily::Maximin)};
  std::vector<double> lambda2_grid{0.1, 1.0, 10.0, 50.0, 100.0};
  double budget = kDefaultBudget;
  TrainConfig train{};
  std::string output_dir = "swo-out";

  /// Sorted `key=value` lines; the config hash is taken over this text.
  std::string to_text() const;
  std::string hash() const;
  /// Applies `key=value` lines onto *this. Lines starting with '#' and the
  /// `command` key are ignored.
  void apply_text(std::string_view text);
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

/// Dataset path from the config, falling back to $SWO_DATASET.
std::filesystem::path resolve_dataset(const ExperimentConfig& config);

struct RunContext {
  std::string command;
  ExperimentConfig config;
  std::vector<std::string> artifacts;              // relative to output_dir
  std::vector<std::pair<std::string, double>> stage_ms;
  bool write_files = true;

  /// Writes `body` under output_dir with the provenance line prepended.
  void write_report(const std::string& relative, const std::string& body);
  void write_manifest();
  std::string provenance() const;
};

// ---- ingest

struct IngestResult {
  DatasetFacts facts;
  bool facts_match = false;  // 1000 / 548 / 452, 65% / 76%
};

IngestResult run_ingest(RunContext& ctx);
std::string facts_report(const DatasetFacts& facts);

// ---- standard logistic regression per split

struct SplitModel {
  SplitPlan plan;
  EncodedDataset train;
  EncodedDataset test;
  LinearModel model;
};

/// Encodes one split with training statistics and fits the standard model.
SplitModel fit_standard_split(const std::vector<CreditRecord>& records, const SplitPlan& plan,
                              const TrainConfig& train);

std::vector<int> group_indices(const std::vector<AgeGroup>& groups);
inline const std::vector<std::string>& age_group_names() {
  static const std::vector<std::string> names{"young", "old"};
  return names;
}

struct Table1Result {
  std::vector<std::vector<GroupRates>> per_split;
  GroupReport aggregate;
  std::vector<double> accuracy;
};

Table1Result run_table1(RunContext& ctx);

// ---- post-processing

struct PostCell {
  std::size_t split = 0;
  std::string swf;
  std::vector<ApprovalRatio> ratios;  // young, old
  double total_granted = 0.0;
  double objective = 0.0;
  bool feasible = false;
};

struct PostResult {
  std::vector<PostCell> cells;
  /// swf -> {young all, old all, young qualified, old qualified} means across splits
  std::map<std::string, std::array<double, 4>> means;
};

PostResult run_post(RunContext& ctx);

// ---- in-processing

struct InprocCell {
  std::size_t split = 0;
  double lambda2 = 0.0;
  std::string swf;  // "standard" for the baseline
  std::vector<GroupRates> rates;
  double accuracy = 0.0;
};

struct InprocSummary {
  double lambda2 = 0.0;
  std::string swf;
  double pr_gap = 0.0;
  double tpr_gap = 0.0;
  double accuracy = 0.0;
  std::array<double, 4> rates{};  // young PR, old PR, young TPR, old TPR
};

struct InprocResult {
  std::vector<InprocCell> cells;
  std::vector<InprocSummary> summary;  // baseline first, then by (lambda2, swf)
};

InprocResult run_inproc(RunContext& ctx);

// ---- checks behind --strict

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline constexpr double kTable1Tolerance = 5.0;      // percentage points
inline constexpr double kAccuracyDropLimit = 0.05;   // fraction

std::vector<CheckResult> check_ingest(const IngestResult& result);
std::vector<CheckResult> check_table1(const Table1Result& result);
std::vector<CheckResult> check_post(const PostResult& result);
std::vector<CheckResult> check_inproc(const InprocResult& result);

// ---- standalone solver and evaluator

/// CSV `id,pHat,request` (header required, '#' comments allowed).
struct ProblemTable {
  std::vector<std::string> ids;
  std::vector<double> p_hat;
  std::vector<double> requests;
};

ProblemTable parse_problem_csv(std::string_view text);
std::string solution_csv(const ProblemTable& table, const AllocationSolution& solution);

struct SolveReport {
  AllocationSolution solution;
  bool oracle_ran = false;
  double oracle_objective = 0.0;
  double oracle_gap = 0.0;
};

SolveReport solve_table(const ProblemTable& table, double budget, const SwfSpec& spec,
                        double oracle_step = 0.0, const GenericOptions& options = {});
std::string solve_diagnostics(const SolveReport& report, const SwfSpec& spec);

/// One utility per line, or CSV with a `utility` column.
std::vector<double> parse_utility_csv(std::string_view text);

}  // namespace swo
