#include "swo/swf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "swo/errors.hpp"
#include "swo/text.hpp"

namespace swo {

namespace {

void check_utilities(std::span<const double> u) {
  if (u.empty()) throw InvalidUtilityVector("utility vector must be nonempty");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) {
      throw InvalidUtilityVector("utility " + std::to_string(i) + " is not finite");
    }
  }
}

double mean_of(std::span<const double> u) {
  return std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
}

double nonzero_mean(std::span<const double> u, const char* who) {
  check_utilities(u);
  const double m = mean_of(u);
  if (m == 0.0) throw ZeroMeanError(std::string(who) + ": mean utility is zero");
  return m;
}

double abs_deviation_sum(std::span<const double> u, double mean) {
  double s = 0.0;
  for (double v : u) s += std::abs(v - mean);
  return s;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

bool needs_clamp(std::span<const double> u, double alpha) {
  if (alpha > 1.0) return true;
  if (alpha == 0.0) return false;
  return std::any_of(u.begin(), u.end(), [](double v) { return v <= 0.0; });
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidAlpha("alpha must be a finite value >= 0");
  }
  if (alpha == 1.0) throw InvalidAlpha("alpha = 1 is proportional fairness");
}

struct FamilyName {
  SwfFamily family;
  std::string_view name;
};

constexpr std::array<FamilyName, 13> kFamilyNames{{
    {SwfFamily::Utilitarian, "utilitarian"},
    {SwfFamily::RelativeRange, "relative-range"},
    {SwfFamily::RelativeMeanDeviation, "relative-mean-deviation"},
    {SwfFamily::CoefficientOfVariation, "coefficient-of-variation"},
    {SwfFamily::Gini, "gini"},
    {SwfFamily::Hoover, "hoover"},
    {SwfFamily::McLoone, "mcloone"},
    {SwfFamily::Maximin, "maximin"},
    {SwfFamily::AlphaFairness, "alpha"},
    {SwfFamily::ProportionalFairness, "proportional"},
    {SwfFamily::KalaiSmorodinsky, "kalai-smorodinsky"},
    {SwfFamily::Threshold, "threshold"},
    {SwfFamily::Leximax, "leximax"},
}};

}  // namespace

UtilityVector::UtilityVector(std::vector<double> values) : values_(std::move(values)) {
  check_utilities(values_);
}

UtilityVector::UtilityVector(std::initializer_list<double> values)
    : UtilityVector(std::vector<double>(values)) {}

// ---------------------------------------------------------------------------
// SwfSpec

SwfSpec SwfSpec::alpha_fairness(double alpha) {
  SwfSpec s{SwfFamily::AlphaFairness};
  s.alpha = alpha;
  return s;
}

SwfSpec SwfSpec::threshold(double delta) {
  SwfSpec s{SwfFamily::Threshold};
  s.delta = delta;
  return s;
}

void SwfSpec::validate() const {
  if (!(epsilon_clamp > 0.0) || !std::isfinite(epsilon_clamp)) {
    throw InvalidSpec("epsilon clamp must be > 0");
  }
  if (family == SwfFamily::AlphaFairness) check_alpha(alpha);
  if (family == SwfFamily::Threshold && (!(delta >= 0.0) || !std::isfinite(delta))) {
    throw InvalidSpec("threshold delta must be a finite value >= 0");
  }
}

std::string_view family_name(SwfFamily family) {
  for (const auto& f : kFamilyNames) {
    if (f.family == family) return f.name;
  }
  return "unknown";
}

SwfFamily parse_family(std::string_view name) {
  for (const auto& f : kFamilyNames) {
    if (f.name == name) return f.family;
  }
  // short aliases accepted on input only
  if (name == "cv") return SwfFamily::CoefficientOfVariation;
  if (name == "rmd") return SwfFamily::RelativeMeanDeviation;
  if (name == "ks") return SwfFamily::KalaiSmorodinsky;
  if (name == "pf") return SwfFamily::ProportionalFairness;
  throw InvalidSpec("unknown SWF family '" + std::string(name) + "'");
}

SwfSpec SwfSpec::parse(std::string_view text) {
  text = text::trim(text);
  const auto colon = text.find(':');
  SwfSpec spec{parse_family(text.substr(0, colon))};
  if (colon != std::string_view::npos) {
    for (auto item : text::split(text.substr(colon + 1), ',')) {
      item = text::trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidSpec("expected key=value in '" + std::string(item) + "'");
      }
      const auto key = text::trim(item.substr(0, eq));
      double value = 0.0;
      try {
        value = text::parse_double(item.substr(eq + 1));
      } catch (const std::invalid_argument& e) {
        throw InvalidSpec(e.what());
      }
      if (key == "alpha" && spec.family == SwfFamily::AlphaFairness) {
        spec.alpha = value;
      } else if (key == "delta" && spec.family == SwfFamily::Threshold) {
        spec.delta = value;
      } else if (key == "eps") {
        spec.epsilon_clamp = value;
      } else {
        throw InvalidSpec("parameter '" + std::string(key) + "' does not apply to " +
                          std::string(family_name(spec.family)));
      }
    }
  }
  if (spec.family == SwfFamily::AlphaFairness && spec.alpha == 1.0) {
    throw InvalidAlpha("alpha = 1 is proportional fairness; use 'proportional'");
  }
  spec.validate();
  return spec;
}

std::string SwfSpec::to_string() const {
  std::string out(family_name(family));
  std::vector<std::string> params;
  if (family == SwfFamily::AlphaFairness) params.push_back("alpha=" + text::format_double(alpha));
  if (family == SwfFamily::Threshold) params.push_back("delta=" + text::format_double(delta));
  if (epsilon_clamp != kDefaultEpsilonClamp) {
    params.push_back("eps=" + text::format_double(epsilon_clamp));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    out += (i == 0 ? ':' : ',');
    out += params[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluators

double eval_utilitarian(std::span<const double> u) {
  check_utilities(u);
  return std::accumulate(u.begin(), u.end(), 0.0);
}

double eval_relative_range(std::span<const double> u) {
  const double m = nonzero_mean(u, "relative range");
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return -(*hi - *lo) / m;
}

double eval_relative_mean_deviation(std::span<const double> u) {
  const double m = nonzero_mean(u, "relative mean deviation");
  return -abs_deviation_sum(u, m) / m;
}

double eval_coefficient_of_variation(std::span<const double> u) {
  const double m = nonzero_mean(u, "coefficient of variation");
  double ss = 0.0;
  for (double v : u) ss += (v - m) * (v - m);
  return -std::sqrt(ss / static_cast<double>(u.size())) / m;
}

double eval_gini(std::span<const double> u) {
  const double m = nonzero_mean(u, "gini");
  // sum_{i,j} |u_i - u_j| = 2 * sum_k (2k - n - 1) u_(k), k = 1..n over the sorted values
  std::vector<double> s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double pair_sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    pair_sum += (2.0 * static_cast<double>(k + 1) - n - 1.0) * s[k];
  }
  pair_sum *= 2.0;
  return 1.0 - pair_sum / (2.0 * m * n * n);
}

double eval_hoover(std::span<const double> u) {
  const double m = nonzero_mean(u, "hoover");
  return -abs_deviation_sum(u, m) / (2.0 * static_cast<double>(u.size()) * m);
}

double median(std::span<const double> u) {
  check_utilities(u);
  std::vector<double> s(u.begin(), u.end());
  const std::size_t n = s.size();
  const std::size_t mid = n / 2;
  std::nth_element(s.begin(), s.begin() + mid, s.end());
  const double upper = s[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(s.begin(), s.begin() + mid);
  return 0.5 * (lower + upper);
}

double eval_mcloone(std::span<const double> u) {
  const double med = median(u);
  if (med == 0.0) throw ZeroMedianError("mcloone: median utility is zero");
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : u) {
    if (v <= med) {
      sum += v;
      ++count;
    }
  }
  return sum / (static_cast<double>(count) * med);
}

double eval_maximin(std::span<const double> u) {
  check_utilities(u);
  return *std::min_element(u.begin(), u.end());
}

double eval_alpha_fairness(std::span<const double> u, double alpha, double epsilon_clamp) {
  check_utilities(u);
  check_alpha(alpha);
  const bool clamp = needs_clamp(u, alpha);
  const double exponent = 1.0 - alpha;
  double sum = 0.0;
  for (double v : u) {
    const double x = clamp ? std::max(v, epsilon_clamp) : v;
    sum += alpha == 0.0 ? x : std::pow(x, exponent);
  }
  return sum / exponent;
}

double eval_proportional_fairness(std::span<const double> u, double epsilon_clamp) {
  check_utilities(u);
  double sum = 0.0;
  for (double v : u) sum += std::log(std::max(v, epsilon_clamp));
  return sum;
}

double eval_threshold(std::span<const double> u, double delta) {
  check_utilities(u);
  if (!(delta >= 0.0)) throw InvalidSpec("threshold delta must be >= 0");
  const double lo = *std::min_element(u.begin(), u.end());
  double sum = static_cast<double>(u.size() - 1) * delta;
  for (double v : u) sum += std::max(v - delta, lo);
  return sum;
}

double eval_kalai_smorodinsky(std::span<const double> u, std::span<const double> u_max) {
  check_utilities(u);
  check_utilities(u_max);
  if (u.size() != u_max.size()) throw LengthMismatch("kalai-smorodinsky: u and u_max lengths differ");
  constexpr double kTol = 1e-9;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u_max[i] > 0.0)) throw InvalidUtilityVector("kalai-smorodinsky: u_max must be positive");
    num += u[i] * u_max[i];
    den += u_max[i] * u_max[i];
  }
  const double beta = num / den;
  if (beta < -kTol || beta > 1.0 + kTol) return 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(u[i] - beta * u_max[i]) > kTol * u_max[i]) return 0.0;
  }
  return std::accumulate(u.begin(), u.end(), 0.0);
}

std::strong_ordering leximax_compare(std::span<const double> a, std::span<const double> b) {
  check_utilities(a);
  check_utilities(b);
  if (a.size() != b.size()) throw LengthMismatch("leximax_compare: lengths differ");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i] < sb[i]) return std::strong_ordering::less;
    if (sa[i] > sb[i]) return std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

std::weak_ordering leximax_compare(std::span<const double> a, std::span<const double> b,
                                   double tol) {
  check_utilities(a);
  check_utilities(b);
  if (a.size() != b.size()) throw LengthMismatch("leximax_compare: lengths differ");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (std::abs(sa[i] - sb[i]) <= tol) continue;
    return sa[i] < sb[i] ? std::weak_ordering::less : std::weak_ordering::greater;
  }
  return std::weak_ordering::equivalent;
}

double evaluate(const SwfSpec& spec, std::span<const double> u, std::span<const double> u_max) {
  spec.validate();
  switch (spec.family) {
    case SwfFamily::Utilitarian: return eval_utilitarian(u);
    case SwfFamily::RelativeRange: return eval_relative_range(u);
    case SwfFamily::RelativeMeanDeviation: return eval_relative_mean_deviation(u);
    case SwfFamily::CoefficientOfVariation: return eval_coefficient_of_variation(u);
    case SwfFamily::Gini: return eval_gini(u);
    case SwfFamily::Hoover: return eval_hoover(u);
    case SwfFamily::McLoone: return eval_mcloone(u);
    case SwfFamily::Maximin: return eval_maximin(u);
    case SwfFamily::AlphaFairness: return eval_alpha_fairness(u, spec.alpha, spec.epsilon_clamp);
    case SwfFamily::ProportionalFairness: return eval_proportional_fairness(u, spec.epsilon_clamp);
    case SwfFamily::Threshold: return eval_threshold(u, spec.delta);
    case SwfFamily::KalaiSmorodinsky:
      if (u_max.empty()) {
        throw UnsupportedFamily("kalai-smorodinsky needs the per-player maximum utilities");
      }
      return eval_kalai_smorodinsky(u, u_max);
    case SwfFamily::Leximax:
      throw UnsupportedFamily("leximax is an ordering, not a scalar; use leximax_compare");
  }
  throw UnsupportedFamily("unknown family");
}

// ---------------------------------------------------------------------------
// Supergradients

std::vector<double> welfare_gradient(const SwfSpec& spec, std::span<const double> u) {
  spec.validate();
  check_utilities(u);
  const std::size_t n = u.size();
  const double nd = static_cast<double>(n);
  std::vector<double> g(n, 0.0);
  const auto argmin = static_cast<std::size_t>(std::min_element(u.begin(), u.end()) - u.begin());

  switch (spec.family) {
    case SwfFamily::Utilitarian:
      std::fill(g.begin(), g.end(), 1.0);
      return g;
    case SwfFamily::Maximin:
      g[argmin] = 1.0;
      return g;
    case SwfFamily::AlphaFairness: {
      const bool clamp = needs_clamp(u, spec.alpha);
      for (std::size_t i = 0; i < n; ++i) {
        if (clamp && u[i] <= spec.epsilon_clamp) continue;
        g[i] = spec.alpha == 0.0 ? 1.0 : std::pow(u[i], -spec.alpha);
      }
      return g;
    }
    case SwfFamily::ProportionalFairness:
      for (std::size_t i = 0; i < n; ++i) {
        if (u[i] > spec.epsilon_clamp) g[i] = 1.0 / u[i];
      }
      return g;
    case SwfFamily::Threshold: {
      const double lo = u[argmin];
      for (std::size_t i = 0; i < n; ++i) {
        if (u[i] - spec.delta > lo) {
          g[i] += 1.0;
        } else {
          g[argmin] += 1.0;
        }
      }
      return g;
    }
    case SwfFamily::RelativeRange: {
      const double m = nonzero_mean(u, "relative range");
      const auto argmax = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
      const double range = u[argmax] - u[argmin];
      for (std::size_t i = 0; i < n; ++i) g[i] = range / (nd * m * m);
      g[argmax] -= 1.0 / m;
      g[argmin] += 1.0 / m;
      return g;
    }
    case SwfFamily::RelativeMeanDeviation:
    case SwfFamily::Hoover: {
      const double m = nonzero_mean(u, "relative mean deviation");
      const double s = abs_deviation_sum(u, m);
      double sign_sum = 0.0;
      for (double v : u) sign_sum += sign(v - m);
      const double scale = spec.family == SwfFamily::Hoover ? 1.0 / (2.0 * nd) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ds = sign(u[i] - m) - sign_sum / nd;
        g[i] = scale * (-ds / m + s / (nd * m * m));
      }
      return g;
    }
    case SwfFamily::CoefficientOfVariation: {
      const double m = nonzero_mean(u, "coefficient of variation");
      double ss = 0.0;
      for (double v : u) ss += (v - m) * (v - m);
      const double sd = std::sqrt(ss / nd);
      for (std::size_t i = 0; i < n; ++i) {
        const double dsd = sd > 0.0 ? (u[i] - m) / (nd * sd) : 0.0;
        g[i] = -dsd / m + sd / (nd * m * m);
      }
      return g;
    }
    case SwfFamily::Gini: {
      const double m = nonzero_mean(u, "gini");
      double pair_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          pair_sum += std::abs(u[i] - u[j]);
          s += sign(u[i] - u[j]);
        }
        g[i] = -2.0 * s / (2.0 * m * nd * nd);
      }
      for (std::size_t i = 0; i < n; ++i) g[i] += pair_sum / (2.0 * nd * nd * m * m * nd);
      return g;
    }
    case SwfFamily::McLoone: {
      const double med = median(u);
      if (med == 0.0) throw ZeroMedianError("mcloone: median utility is zero");
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return u[a] < u[b]; });
      double sum = 0.0;
      double count = 0.0;
      for (double v : u) {
        if (v <= med) {
          sum += v;
          count += 1.0;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (u[i] <= med) g[i] = 1.0 / (count * med);
      }
      const double dmed = -sum / (count * med * med);
      if (n % 2 == 1) {
        g[order[n / 2]] += dmed;
      } else {
        g[order[n / 2 - 1]] += 0.5 * dmed;
        g[order[n / 2]] += 0.5 * dmed;
      }
      return g;
    }
    case SwfFamily::KalaiSmorodinsky:
      throw UnsupportedFamily("kalai-smorodinsky has no useful gradient");
    case SwfFamily::Leximax:
      throw UnsupportedFamily("leximax is not scalar-valued");
  }
  throw UnsupportedFamily("unknown family");
}

}  // namespace swo
