#include "swo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "swo/errors.hpp"
#include "swo/swf.hpp"
#include "swo/text.hpp"

namespace swo {

namespace {

void check_instance(const SelectionInstance& inst) {
  const auto n = inst.selected.size();
  if (inst.qualified.size() != n || inst.protected_group.size() != n) {
    throw LengthMismatch("selection instance: sequences differ in length");
  }
  std::size_t in_n = 0;
  for (bool b : inst.protected_group) in_n += b;
  if (in_n == 0 || in_n == n) throw EmptyGroup("selection instance: both groups must be nonempty");
}

struct Sums {
  double members = 0, selected = 0, qualified = 0, qualified_selected = 0;
};

std::pair<Sums, Sums> group_sums(const SelectionInstance& inst) {
  Sums in, out;
  for (std::size_t i = 0; i < inst.selected.size(); ++i) {
    Sums& s = inst.protected_group[i] ? in : out;
    s.members += 1;
    s.selected += inst.selected[i];
    s.qualified += inst.qualified[i];
    s.qualified_selected += inst.qualified[i] * inst.selected[i];
  }
  return {in, out};
}

std::string fmt_pct(const MeanSd& m) {
  if (m.n == 0) return "n/a";
  return text::format_fixed(m.mean, 2) + " +/- " + text::format_fixed(m.sd, 2);
}

std::string csv_num(const MeanSd& m) {
  if (m.n == 0) return ",";
  return text::format_fixed(m.mean, 2) + "," + text::format_fixed(m.sd, 2);
}

}  // namespace

double demographic_parity(const SelectionInstance& inst) {
  check_instance(inst);
  const auto [in, out] = group_sums(inst);
  return 1.0 - std::abs(in.selected / in.members - out.selected / out.members);
}

double equality_of_opportunity(const SelectionInstance& inst) {
  check_instance(inst);
  const auto [in, out] = group_sums(inst);
  if (in.qualified == 0 || out.qualified == 0) {
    throw NoQualifiedMembers("equality of opportunity: a group has no qualified members");
  }
  return 1.0 - std::abs(in.qualified_selected / in.qualified - out.qualified_selected / out.qualified);
}

double predictive_rate_parity(const SelectionInstance& inst) {
  check_instance(inst);
  const auto [in, out] = group_sums(inst);
  if (in.selected == 0 || out.selected == 0) {
    throw NoSelectedMembers("predictive rate parity: a group has no selected members");
  }
  return 1.0 - std::abs(in.qualified_selected / in.selected - out.qualified_selected / out.selected);
}

std::vector<GroupRates> classification_group_rates(std::span<const int> predictions,
                                                   std::span<const int> labels,
                                                   std::span<const int> groups,
                                                   const std::vector<std::string>& group_names) {
  if (predictions.size() != labels.size() || labels.size() != groups.size()) {
    throw LengthMismatch("group rates: sequences differ in length");
  }
  struct Counts {
    std::size_t n = 0, predicted_pos = 0, pos = 0, tp = 0, neg = 0, tn = 0;
  };
  std::vector<Counts> counts(group_names.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (groups[i] < 0 || static_cast<std::size_t>(groups[i]) >= group_names.size()) {
      throw EmptyGroup("group index out of range");
    }
    auto& c = counts[static_cast<std::size_t>(groups[i])];
    ++c.n;
    c.predicted_pos += predictions[i] == 1;
    if (labels[i] == 1) {
      ++c.pos;
      c.tp += predictions[i] == 1;
    } else {
      ++c.neg;
      c.tn += predictions[i] != 1;
    }
  }
  std::vector<GroupRates> out;
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    const auto& c = counts[g];
    if (c.n == 0) throw EmptyGroup("group '" + group_names[g] + "' has no members");
    GroupRates r;
    r.group = group_names[g];
    r.count = c.n;
    r.positive_rate = 100.0 * static_cast<double>(c.predicted_pos) / static_cast<double>(c.n);
    if (c.pos) r.true_positive_rate = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.pos);
    if (c.neg) r.true_negative_rate = 100.0 * static_cast<double>(c.tn) / static_cast<double>(c.neg);
    out.push_back(std::move(r));
  }
  return out;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd m;
  m.n = values.size();
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

GroupReport aggregate_group_rates(const std::vector<std::vector<GroupRates>>& per_split) {
  GroupReport report;
  if (per_split.empty()) return report;
  const std::size_t groups = per_split.front().size();
  for (const auto& split : per_split) {
    if (split.size() != groups) throw LengthMismatch("aggregate: group count differs across splits");
  }
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> pr, tpr, tnr;
    for (const auto& split : per_split) {
      pr.push_back(split[g].positive_rate);
      if (split[g].true_positive_rate) tpr.push_back(*split[g].true_positive_rate);
      if (split[g].true_negative_rate) tnr.push_back(*split[g].true_negative_rate);
    }
    report.rows.push_back({per_split.front()[g].group, mean_sd(pr), mean_sd(tpr), mean_sd(tnr)});
  }
  if (groups == 2) {
    std::vector<double> pr, tpr, tnr;
    for (const auto& split : per_split) {
      pr.push_back(std::abs(split[0].positive_rate - split[1].positive_rate));
      if (split[0].true_positive_rate && split[1].true_positive_rate) {
        tpr.push_back(std::abs(*split[0].true_positive_rate - *split[1].true_positive_rate));
      }
      if (split[0].true_negative_rate && split[1].true_negative_rate) {
        tnr.push_back(std::abs(*split[0].true_negative_rate - *split[1].true_negative_rate));
      }
    }
    report.positive_rate_gap = mean_sd(pr);
    report.true_positive_rate_gap = mean_sd(tpr);
    report.true_negative_rate_gap = mean_sd(tnr);
  }
  return report;
}

std::string group_report_table(const GroupReport& report) {
  std::ostringstream os;
  os << "group  | positive rate (%) | true positive rate (%) | true negative rate (%)\n";
  os << "-------+-------------------+------------------------+-----------------------\n";
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  for (const auto& row : report.rows) {
    os << pad(row.group, 6) << " | " << pad(fmt_pct(row.positive_rate), 17) << " | "
       << pad(fmt_pct(row.true_positive_rate), 22) << " | " << fmt_pct(row.true_negative_rate) << '\n';
  }
  if (report.rows.size() == 2) {
    os << pad("gap", 6) << " | " << pad(fmt_pct(report.positive_rate_gap), 17) << " | "
       << pad(fmt_pct(report.true_positive_rate_gap), 22) << " | "
       << fmt_pct(report.true_negative_rate_gap) << '\n';
  }
  return os.str();
}

std::string group_report_csv(const GroupReport& report) {
  std::ostringstream os;
  os << "group,pr_mean,pr_sd,tpr_mean,tpr_sd,tnr_mean,tnr_sd\n";
  for (const auto& row : report.rows) {
    os << row.group << ',' << csv_num(row.positive_rate) << ',' << csv_num(row.true_positive_rate)
       << ',' << csv_num(row.true_negative_rate) << '\n';
  }
  if (report.rows.size() == 2) {
    os << "gap," << csv_num(report.positive_rate_gap) << ',' << csv_num(report.true_positive_rate_gap)
       << ',' << csv_num(report.true_negative_rate_gap) << '\n';
  }
  return os.str();
}

std::vector<ApprovalRatio> approval_ratios(const AllocationSolution& solution,
                                           std::span<const double> requests,
                                           std::span<const int> groups,
                                           const std::vector<std::string>& group_names,
                                           std::span<const bool> qualified) {
  const auto n = solution.granted.size();
  if (requests.size() != n || groups.size() != n || qualified.size() != n) {
    throw LengthMismatch("approval ratios: sequences differ in length");
  }
  const std::size_t k = group_names.size();
  std::vector<double> granted(k, 0), requested(k, 0), q_granted(k, 0), q_requested(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(groups[i]);
    if (groups[i] < 0 || g >= k) throw EmptyGroup("group index out of range");
    granted[g] += solution.granted[i];
    requested[g] += requests[i];
    if (qualified[i]) {
      q_granted[g] += solution.granted[i];
      q_requested[g] += requests[i];
    }
  }
  std::vector<ApprovalRatio> out;
  for (std::size_t g = 0; g < k; ++g) {
    if (!(requested[g] > 0.0)) {
      throw ZeroRequestTotal("group '" + group_names[g] + "' requested nothing");
    }
    ApprovalRatio r;
    r.group = group_names[g];
    r.all_ratio = granted[g] / requested[g];
    if (q_requested[g] > 0.0) r.qualified_ratio = q_granted[g] / q_requested[g];
    out.push_back(std::move(r));
  }
  return out;
}

LorenzSummary lorenz_and_gini(std::span<const double> values) {
  if (values.empty()) throw ZeroSum("lorenz: no values");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidUtilityVector("lorenz: values must be finite and >= 0");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (!(total > 0.0)) throw ZeroSum("lorenz: values sum to zero");
  LorenzSummary out;
  const double n = static_cast<double>(sorted.size());
  out.population_share.push_back(0.0);
  out.value_share.push_back(0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running += sorted[i];
    out.population_share.push_back(static_cast<double>(i + 1) / n);
    out.value_share.push_back(running / total);
  }
  out.value_share.back() = 1.0;
  out.gini = 1.0 - eval_gini(values);
  return out;
}

}  // namespace swo
