#pragma once

// Social welfare functions over a utility vector. Every scalar SWF follows
// the "larger is better" convention; inequality indices are returned negated.

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swo {

/// Nonempty vector of finite utilities.
class UtilityVector {
 public:
  explicit UtilityVector(std::vector<double> values);
  UtilityVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

enum class SwfFamily {
  Utilitarian,
  RelativeRange,
  RelativeMeanDeviation,
  CoefficientOfVariation,
  Gini,
  Hoover,
  McLoone,
  Maximin,
  AlphaFairness,
  ProportionalFairness,
  KalaiSmorodinsky,
  Threshold,
  Leximax,
};

inline constexpr double kDefaultEpsilonClamp = 1e-6;

/// A SWF family together with its parameters.
///
/// Canonical text form is `family[:key=value,...]`, e.g. `alpha:alpha=0.5`,
/// `threshold:delta=2` or `proportional:eps=1e-8`. Keys: `alpha`, `delta`,
/// `eps` (the positivity clamp used by log and negative-power families).
struct SwfSpec {
  SwfFamily family = SwfFamily::Utilitarian;
  double alpha = 0.0;
  double delta = 0.0;
  double epsilon_clamp = kDefaultEpsilonClamp;

  static SwfSpec of(SwfFamily family) { return SwfSpec{family}; }
  static SwfSpec alpha_fairness(double alpha);
  static SwfSpec threshold(double delta);

  /// Throws InvalidSpec / InvalidAlpha when parameters are out of range.
  void validate() const;

  static SwfSpec parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const SwfSpec&, const SwfSpec&) = default;
};

std::string_view family_name(SwfFamily family);
SwfFamily parse_family(std::string_view name);

// Pure evaluators. All of them validate the input (n >= 1, finite values).
double eval_utilitarian(std::span<const double> u);
double eval_relative_range(std::span<const double> u);
double eval_relative_mean_deviation(std::span<const double> u);
double eval_coefficient_of_variation(std::span<const double> u);
/// 1 - (1 / (2 mean n^2)) * sum over ordered pairs |u_i - u_j|.
double eval_gini(std::span<const double> u);
double eval_hoover(std::span<const double> u);
/// Mean of the utilities at or below the median, relative to the median.
/// Even-length medians are the mean of the two central order statistics.
double eval_mcloone(std::span<const double> u);
double eval_maximin(std::span<const double> u);
double eval_alpha_fairness(std::span<const double> u, double alpha,
                           double epsilon_clamp = kDefaultEpsilonClamp);
double eval_proportional_fairness(std::span<const double> u,
                                  double epsilon_clamp = kDefaultEpsilonClamp);
/// (n-1) delta + sum_i max(u_i - delta, u_min).
double eval_threshold(std::span<const double> u, double delta);
/// sum(u) if u = beta * u_max for some beta in [0,1] (1e-9 relative), else 0.
double eval_kalai_smorodinsky(std::span<const double> u, std::span<const double> u_max);

/// Median as used by McLoone (mean of the central pair for even n).
double median(std::span<const double> u);

/// Compares ascending-sorted copies lexicographically. `greater` means the
/// first vector is leximax-preferred.
std::strong_ordering leximax_compare(std::span<const double> a, std::span<const double> b);
/// Same, but entries closer than `tol` compare equal.
std::weak_ordering leximax_compare(std::span<const double> a, std::span<const double> b,
                                   double tol);

/// Scalar dispatch. Leximax is rejected with UnsupportedFamily; Kalai-Smorodinsky
/// needs `u_max` (UnsupportedFamily when it is empty).
double evaluate(const SwfSpec& spec, std::span<const double> u,
                std::span<const double> u_max = {});

/// A supergradient of the scalar SWF with respect to u. Clamped coordinates of
/// the log/power families get zero slope. Not defined for Leximax and
/// Kalai-Smorodinsky (UnsupportedFamily).
std::vector<double> welfare_gradient(const SwfSpec& spec, std::span<const double> u);

}  // namespace swo
