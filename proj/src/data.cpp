#include "swo/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "swo/errors.hpp"
#include "swo/rng.hpp"
#include "swo/text.hpp"

namespace swo {

const std::array<AttributeInfo, kGermanAttributeCount>& german_attributes() {
  static const std::array<AttributeInfo, kGermanAttributeCount> attrs{{
      {"checking_status", true, {"A11", "A12", "A13", "A14"}},
      {"duration_months", false, {}},
      {"credit_history", true, {"A30", "A31", "A32", "A33", "A34"}},
      {"purpose", true,
       {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A47", "A48", "A49", "A410"}},
      {"credit_amount", false, {}},
      {"savings", true, {"A61", "A62", "A63", "A64", "A65"}},
      {"employment_since", true, {"A71", "A72", "A73", "A74", "A75"}},
      {"installment_rate", false, {}},
      {"personal_status_sex", true, {"A91", "A92", "A93", "A94", "A95"}},
      {"other_debtors", true, {"A101", "A102", "A103"}},
      {"residence_since", false, {}},
      {"property", true, {"A121", "A122", "A123", "A124"}},
      {"age_years", false, {}},
      {"other_installment_plans", true, {"A141", "A142", "A143"}},
      {"housing", true, {"A151", "A152", "A153"}},
      {"existing_credits", false, {}},
      {"job", true, {"A171", "A172", "A173", "A174"}},
      {"people_liable", false, {}},
      {"telephone", true, {"A191", "A192"}},
      {"foreign_worker", true, {"A201", "A202"}},
  }};
  return attrs;
}

AgeGroup group_of_age(int age) { return age < kYoungAgeLimit ? AgeGroup::Young : AgeGroup::Old; }

AgeGroup group_of(const CreditRecord& record) { return group_of_age(record.age); }

std::string_view group_name(AgeGroup group) {
  return group == AgeGroup::Young ? "young" : "old";
}

std::vector<CreditRecord> parse_german_credit(std::istream& in, std::size_t expected_count) {
  const auto& attrs = german_attributes();
  std::vector<CreditRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != kGermanAttributeCount + 1) {
      throw MalformedLine(line_no, std::min(fields.size(), kGermanAttributeCount + 1) + 1,
                          "expected 21 fields, found " + std::to_string(fields.size()));
    }
    CreditRecord rec;
    for (std::size_t a = 0; a < kGermanAttributeCount; ++a) {
      const auto field = fields[a];
      if (attrs[a].categorical) {
        bool known = false;
        for (auto code : attrs[a].codes) known = known || code == field;
        if (!known) {
          throw MalformedLine(line_no, a + 1,
                              "unknown code '" + std::string(field) + "' for " +
                                  std::string(attrs[a].name));
        }
      } else {
        try {
          (void)text::parse_int(field);
        } catch (const std::invalid_argument&) {
          throw MalformedLine(line_no, a + 1, "expected an integer, found '" + std::string(field) + "'");
        }
      }
      rec.attributes[a] = std::string(field);
    }
    const auto label = fields[kGermanAttributeCount];
    if (label == "1") {
      rec.label = 1;
    } else if (label == "2") {
      rec.label = -1;
    } else {
      throw MalformedLine(line_no, kGermanAttributeCount + 1,
                          "label must be 1 or 2, found '" + std::string(label) + "'");
    }
    rec.age = static_cast<int>(text::parse_int(rec.attributes[kAgeAttribute]));
    if (rec.age <= 0) throw MalformedLine(line_no, kAgeAttribute + 1, "age must be positive");
    records.push_back(std::move(rec));
  }
  if (expected_count != 0 && records.size() != expected_count) {
    throw WrongRecordCount("expected " + std::to_string(expected_count) + " records, found " +
                           std::to_string(records.size()));
  }
  return records;
}

std::vector<CreditRecord> load_german_credit(const std::filesystem::path& path,
                                             std::size_t expected_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  return parse_german_credit(in, expected_count);
}

std::string format_german_credit(const std::vector<CreditRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    for (const auto& a : rec.attributes) {
      out += a;
      out += ' ';
    }
    out += rec.label == 1 ? "1\n" : "2\n";
  }
  return out;
}

DatasetFacts dataset_facts(const std::vector<CreditRecord>& records) {
  DatasetFacts f;
  f.records = records.size();
  std::size_t young_pos = 0, old_pos = 0;
  for (const auto& rec : records) {
    if (group_of(rec) == AgeGroup::Young) {
      ++f.young;
      young_pos += rec.label == 1;
    } else {
      ++f.old;
      old_pos += rec.label == 1;
    }
  }
  if (f.young) f.young_positive_share = static_cast<double>(young_pos) / static_cast<double>(f.young);
  if (f.old) f.old_positive_share = static_cast<double>(old_pos) / static_cast<double>(f.old);
  return f;
}

// ---------------------------------------------------------------------------

FeatureEncoder FeatureEncoder::fit(const std::vector<CreditRecord>& records,
                                   const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw InvalidProblem("cannot fit an encoder on zero rows");
  FeatureEncoder enc;
  enc.names_.push_back("intercept");
  for (std::size_t a = 0; a < kGermanAttributeCount; ++a) {
    const auto& info = german_attributes()[a];
    if (info.categorical) {
      for (auto code : info.codes) enc.names_.push_back(std::string(info.name) + "=" + std::string(code));
      continue;
    }
    enc.names_.push_back(std::string(info.name));
    double sum = 0.0;
    for (auto r : rows) sum += static_cast<double>(text::parse_int(records.at(r).attributes[a]));
    const double mean = sum / static_cast<double>(rows.size());
    double ss = 0.0;
    for (auto r : rows) {
      const double v = static_cast<double>(text::parse_int(records[r].attributes[a])) - mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
    enc.means_.push_back(mean);
    enc.scales_.push_back(sd > 0.0 ? sd : 1.0);
  }
  return enc;
}

EncodedDataset FeatureEncoder::transform(const std::vector<CreditRecord>& records,
                                         const std::vector<std::size_t>& rows) const {
  EncodedDataset out;
  out.feature_names = names_;
  out.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                static_cast<Eigen::Index>(names_.size()));
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& rec = records.at(rows[k]);
    const auto row = static_cast<Eigen::Index>(k);
    Eigen::Index col = 0;
    out.x(row, col++) = 1.0;
    std::size_t numeric = 0;
    for (std::size_t a = 0; a < kGermanAttributeCount; ++a) {
      const auto& info = german_attributes()[a];
      if (info.categorical) {
        bool found = false;
        for (auto code : info.codes) {
          if (code == rec.attributes[a]) {
            out.x(row, col) = 1.0;
            found = true;
          }
          ++col;
        }
        if (!found) {
          throw UnknownCategoryCode("row " + std::to_string(rows[k]) + ": unknown code '" +
                                    rec.attributes[a] + "' for " + std::string(info.name));
        }
      } else {
        const double v = static_cast<double>(text::parse_int(rec.attributes[a]));
        out.x(row, col++) = (v - means_[numeric]) / scales_[numeric];
        ++numeric;
      }
    }
    out.y(row) = rec.label;
    out.groups.push_back(group_of(rec));
    out.source_rows.push_back(rows[k]);
  }
  return out;
}

std::string encoded_to_csv(const EncodedDataset& data) {
  std::ostringstream os;
  os << "row,label,group";
  for (const auto& name : data.feature_names) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    os << data.source_rows[k] << ',' << static_cast<int>(data.y(row)) << ','
       << group_name(data.groups[k]);
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) os << ',' << text::format_double(data.x(row, c));
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

SplitPlan make_split(std::size_t n_records, std::uint64_t seed, double budget) {
  SplitPlan plan;
  plan.seed = seed;
  plan.budget = budget;
  std::vector<std::size_t> perm(n_records);
  for (std::size_t i = 0; i < n_records; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n_records)));
  plan.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  plan.requests.reserve(plan.test.size());
  for (std::size_t i = 0; i < plan.test.size(); ++i) plan.requests.push_back(rng.uniform(0.0, kMaxRequest));
  return plan;
}

std::vector<SplitPlan> make_splits(std::size_t n_records, std::size_t n_splits,
                                   std::uint64_t seed_base, double budget) {
  std::vector<SplitPlan> plans;
  for (std::size_t k = 0; k < n_splits; ++k) plans.push_back(make_split(n_records, seed_base + k, budget));
  return plans;
}

namespace {
constexpr std::string_view kPlanMagic = "swo-split-plan v1";

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}
}  // namespace

std::string format_split_plan(const SplitPlan& plan) {
  std::string out(kPlanMagic);
  out += "\nseed " + std::to_string(plan.seed);
  out += "\nbudget " + text::format_double(plan.budget);
  out += "\ntrain " + join(plan.train, [](std::size_t v) { return std::to_string(v); });
  out += "\ntest " + join(plan.test, [](std::size_t v) { return std::to_string(v); });
  out += "\nrequests " + join(plan.requests, [](double v) { return text::format_double(v); });
  out += '\n';
  return out;
}

SplitPlan parse_split_plan(std::string_view content) {
  const auto lines = text::split(content, '\n');
  if (lines.empty() || text::trim(lines[0]) != kPlanMagic) {
    throw ConfigError("split plan: missing '" + std::string(kPlanMagic) + "' header");
  }
  SplitPlan plan;
  bool seen_seed = false, seen_budget = false, seen_train = false, seen_test = false, seen_req = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = text::split_whitespace(lines[i]);
    if (fields.empty()) continue;
    const auto key = fields[0];
    try {
      if (key == "seed" && fields.size() == 2) {
        plan.seed = static_cast<std::uint64_t>(std::stoull(std::string(fields[1])));
        seen_seed = true;
      } else if (key == "budget" && fields.size() == 2) {
        plan.budget = text::parse_double(fields[1]);
        seen_budget = true;
      } else if (key == "train" || key == "test") {
        auto& dst = key == "train" ? plan.train : plan.test;
        for (std::size_t f = 1; f < fields.size(); ++f) {
          dst.push_back(static_cast<std::size_t>(text::parse_int(fields[f])));
        }
        (key == "train" ? seen_train : seen_test) = true;
      } else if (key == "requests") {
        for (std::size_t f = 1; f < fields.size(); ++f) plan.requests.push_back(text::parse_double(fields[f]));
        seen_req = true;
      } else {
        throw ConfigError("split plan: unexpected line " + std::to_string(i + 1));
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("split plan line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (!(seen_seed && seen_budget && seen_train && seen_test && seen_req)) {
    throw ConfigError("split plan: incomplete record");
  }
  if (plan.requests.size() != plan.test.size()) {
    throw ConfigError("split plan: requests and test rows differ in length");
  }
  return plan;
}

}  // namespace swo
