#pragma once

// Group-level fairness metrics: bias-metric SWFs, classification rates per
// group, loan approval ratios, Lorenz curves.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swo/alloc.hpp"

namespace swo {

/// Binary selection u, qualification a and a protected-group mask.
struct SelectionInstance {
  std::vector<int> selected;   // u_i in {0,1}
  std::vector<int> qualified;  // a_i in {0,1}
  std::vector<bool> protected_group;  // true: i in N, false: i in N'
};

/// 1 - |selection rate(N) - selection rate(N')|.
double demographic_parity(const SelectionInstance& inst);
/// 1 - |TPR(N) - TPR(N')|, TPR = sum a u / sum a.
double equality_of_opportunity(const SelectionInstance& inst);
/// 1 - |precision(N) - precision(N')|, precision = sum a u / sum u.
double predictive_rate_parity(const SelectionInstance& inst);

/// Rates for one group, in percent. TPR/TNR are absent when the group has no
/// true positives / true negatives to measure against.
struct GroupRates {
  std::string group;
  std::size_t count = 0;
  double positive_rate = 0.0;
  std::optional<double> true_positive_rate;
  std::optional<double> true_negative_rate;
};

/// `groups[i]` indexes into `group_names`; labels and predictions are +1/-1.
std::vector<GroupRates> classification_group_rates(std::span<const int> predictions,
                                                   std::span<const int> labels,
                                                   std::span<const int> groups,
                                                   const std::vector<std::string>& group_names);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 for a single value
  std::size_t n = 0;
};

MeanSd mean_sd(std::span<const double> values);

/// Per-group aggregates across splits, plus |first - second| gaps for a two-group report.
struct GroupReport {
  struct Row {
    std::string group;
    MeanSd positive_rate;
    MeanSd true_positive_rate;
    MeanSd true_negative_rate;
  };
  std::vector<Row> rows;
  MeanSd positive_rate_gap;
  MeanSd true_positive_rate_gap;
  MeanSd true_negative_rate_gap;
};

/// Aggregates per-split rates (each inner vector in the same group order).
/// Absent TPR/TNR values are skipped.
GroupReport aggregate_group_rates(const std::vector<std::vector<GroupRates>>& per_split);

/// Mirrors the layout of the usual "group | PR | TPR | TNR" table.
std::string group_report_table(const GroupReport& report);
std::string group_report_csv(const GroupReport& report);

struct ApprovalRatio {
  std::string group;
  double all_ratio = 0.0;
  std::optional<double> qualified_ratio;  // absent when the group has no qualified request
};

/// Granted over requested, per group, on all members and on qualified members only.
std::vector<ApprovalRatio> approval_ratios(const AllocationSolution& solution,
                                           std::span<const double> requests,
                                           std::span<const int> groups,
                                           const std::vector<std::string>& group_names,
                                           std::span<const bool> qualified);

struct LorenzSummary {
  std::vector<double> population_share;  // 0, 1/n, ..., 1
  std::vector<double> value_share;       // cumulative share of the sorted values
  double gini = 0.0;                     // 1 - eval_gini(values)
};

LorenzSummary lorenz_and_gini(std::span<const double> values);

}  // namespace swo
