#pragma once

// German credit ingest: parsing of the raw UCI `german.data` layout, one-hot
// encoding, seeded train/test plans with synthetic loan requests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace swo {

inline constexpr std::size_t kGermanAttributeCount = 20;
inline constexpr std::size_t kGermanRecordCount = 1000;
inline constexpr std::size_t kAgeAttribute = 12;  // zero-based: attribute 13
inline constexpr int kYoungAgeLimit = 35;

struct AttributeInfo {
  std::string_view name;
  bool categorical;
  std::vector<std::string_view> codes;  // documented code order, categorical only
};

/// The 20 attributes in file order with their documented category codes.
const std::array<AttributeInfo, kGermanAttributeCount>& german_attributes();

struct CreditRecord {
  std::array<std::string, kGermanAttributeCount> attributes;
  int label = 1;  // +1 good, -1 bad
  int age = 0;
};

enum class AgeGroup { Young, Old };

/// Young iff age < 35.
AgeGroup group_of(const CreditRecord& record);
AgeGroup group_of_age(int age);
std::string_view group_name(AgeGroup group);

/// Parses whitespace-separated lines of 20 attributes plus the label
/// (1 good, 2 bad). Blank lines are skipped. Throws MalformedLine or, when
/// `expected_count` is nonzero and differs, WrongRecordCount.
std::vector<CreditRecord> parse_german_credit(std::istream& in,
                                              std::size_t expected_count = kGermanRecordCount);
std::vector<CreditRecord> load_german_credit(const std::filesystem::path& path,
                                             std::size_t expected_count = kGermanRecordCount);
/// Inverse of parse_german_credit.
std::string format_german_credit(const std::vector<CreditRecord>& records);

struct DatasetFacts {
  std::size_t records = 0;
  std::size_t young = 0;
  std::size_t old = 0;
  double young_positive_share = 0.0;
  double old_positive_share = 0.0;
};

DatasetFacts dataset_facts(const std::vector<CreditRecord>& records);

/// Encoded design matrix. Column 0 is the constant intercept feature.
struct EncodedDataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<AgeGroup> groups;
  std::vector<std::size_t> source_rows;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(x.cols()); }
};

/// One-hot categoricals (documented code order) and standardized numerics.
/// Standardization statistics come from the rows passed to fit().
class FeatureEncoder {
 public:
  static FeatureEncoder fit(const std::vector<CreditRecord>& records,
                            const std::vector<std::size_t>& rows);

  EncodedDataset transform(const std::vector<CreditRecord>& records,
                           const std::vector<std::size_t>& rows) const;

  const std::vector<std::string>& feature_names() const { return names_; }
  const std::vector<double>& numeric_means() const { return means_; }
  const std::vector<double>& numeric_scales() const { return scales_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> means_;   // per numeric attribute, file order
  std::vector<double> scales_;  // population standard deviation
};

std::string encoded_to_csv(const EncodedDataset& data);

inline constexpr double kDefaultBudget = 5000.0;
inline constexpr double kMaxRequest = 100.0;

/// One seeded train/test partition with loan requests for the test rows.
struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<double> requests;  // aligned with `test`
  double budget = kDefaultBudget;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// Shuffles 0..n-1 with Rng(seed), takes round(0.8 n) rows for training, and
/// draws a uniform request on [0, 100] for every test row.
SplitPlan make_split(std::size_t n_records, std::uint64_t seed, double budget = kDefaultBudget);
/// Plan k uses seed `seed_base + k`.
std::vector<SplitPlan> make_splits(std::size_t n_records, std::size_t n_splits,
                                   std::uint64_t seed_base, double budget = kDefaultBudget);

/// Versioned text form; requests are written round-trip exact.
std::string format_split_plan(const SplitPlan& plan);
SplitPlan parse_split_plan(std::string_view text);

}  // namespace swo
