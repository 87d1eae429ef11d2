#include "swo/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "swo/errors.hpp"
#include "swo/rng.hpp"

namespace swo {

namespace {

constexpr std::size_t kMaxBisection = 200;
constexpr double kBudgetRelTol = 1e-9;

std::vector<std::size_t> degenerate_players(const AllocationProblem& prob) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (prob.p_hat()[i] == 0.0 && prob.requests()[i] > 0.0) out.push_back(i);
  }
  return out;
}

std::vector<double> utilities_of(const AllocationProblem& prob, std::span<const double> d) {
  std::vector<double> u(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) u[i] = prob.p_hat()[i] * d[i];
  return u;
}

// Kalai-Smorodinsky value with players whose u_max is zero dropped
// (their utility is zero on every feasible point).
double ks_objective(std::span<const double> u, std::span<const double> u_max) {
  std::vector<double> uu, mm;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u_max[i] > 0.0) {
      uu.push_back(u[i]);
      mm.push_back(u_max[i]);
    } else if (u[i] != 0.0) {
      return 0.0;
    }
  }
  if (uu.empty()) return 0.0;
  return eval_kalai_smorodinsky(uu, mm);
}

double objective_for(const AllocationProblem& prob, const SwfSpec& spec,
                     std::span<const double> u) {
  switch (spec.family) {
    case SwfFamily::Leximax:
      return eval_maximin(u);
    case SwfFamily::KalaiSmorodinsky:
      return ks_objective(u, prob.utility_max());
    default:
      return evaluate(spec, u);
  }
}

AllocationSolution finish(const AllocationProblem& prob, const SwfSpec& spec,
                          std::vector<double> d, SolverTag tag, std::size_t iterations) {
  AllocationSolution s;
  s.utility = utilities_of(prob, d);
  s.granted = std::move(d);
  s.objective = objective_for(prob, spec, s.utility);
  s.solver = tag;
  s.iterations = iterations;
  return s;
}

// Finds the level t with sum_i min(caps_i, t * weights_i) = budget over the
// players with a positive weight, by walking the sorted breakpoints. Returns
// nullopt when every cap fits inside the budget.
std::optional<double> level_fill(std::span<const double> caps, std::span<const double> weights,
                                 double budget, std::size_t& steps) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (weights[i] > 0.0 && caps[i] > 0.0) idx.push_back(i);
  }
  double total = 0.0;
  for (auto i : idx) total += caps[i];
  if (total <= budget) return std::nullopt;

  // breakpoint of player i is t_i = caps_i / weights_i
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    const double ta = caps[a] / weights[a], tb = caps[b] / weights[b];
    return ta < tb || (ta == tb && a < b);
  });
  double saturated = 0.0;  // sum of caps of players already at their cap
  double slope = 0.0;      // sum of weights of players still rising
  for (auto i : idx) slope += weights[i];
  for (auto i : idx) {
    ++steps;
    const double t_i = caps[i] / weights[i];
    if (saturated + t_i * slope >= budget) {
      return (budget - saturated) / slope;
    }
    saturated += caps[i];
    slope -= weights[i];
  }
  return std::nullopt;  // unreachable: total > budget
}

}  // namespace

// ---------------------------------------------------------------------------

AllocationProblem::AllocationProblem(std::vector<double> p_hat, std::vector<double> requests,
                                     double budget)
    : p_hat_(std::move(p_hat)), requests_(std::move(requests)), budget_(budget) {
  if (p_hat_.size() != requests_.size()) {
    throw LengthMismatch("pHat and requests have different lengths");
  }
  if (p_hat_.empty()) throw EmptyProblem("allocation problem has no applicants");
  for (std::size_t i = 0; i < p_hat_.size(); ++i) {
    if (!(p_hat_[i] >= 0.0 && p_hat_[i] <= 1.0)) {
      throw InvalidProblem("pHat[" + std::to_string(i) + "] outside [0,1]");
    }
    if (!(requests_[i] >= 0.0) || !std::isfinite(requests_[i])) {
      throw InvalidProblem("request[" + std::to_string(i) + "] must be finite and >= 0");
    }
  }
  if (!(budget_ >= 0.0) || !std::isfinite(budget_)) {
    throw InvalidProblem("budget must be finite and >= 0");
  }
}

double AllocationProblem::total_request() const noexcept {
  return std::accumulate(requests_.begin(), requests_.end(), 0.0);
}

std::vector<double> AllocationProblem::utility_max() const {
  std::vector<double> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = p_hat_[i] * std::min(requests_[i], budget_);
  return m;
}

std::string_view solver_name(SolverTag tag) {
  switch (tag) {
    case SolverTag::Utilitarian: return "greedy";
    case SolverTag::Maximin: return "maximin-waterfill";
    case SolverTag::Leximax: return "leximax-progressive";
    case SolverTag::AlphaFairness: return "alpha-kkt";
    case SolverTag::ProportionalFairness: return "proportional-waterfill";
    case SolverTag::KalaiSmorodinsky: return "kalai-smorodinsky";
    case SolverTag::Generic: return "projected-supergradient";
    case SolverTag::BruteForce: return "brute-force";
  }
  return "unknown";
}

bool is_feasible(const AllocationProblem& prob, std::span<const double> granted) {
  if (granted.size() != prob.size()) return false;
  double total = 0.0;
  for (std::size_t i = 0; i < granted.size(); ++i) {
    if (!(granted[i] >= 0.0) || granted[i] > prob.requests()[i] + 1e-9) return false;
    total += granted[i];
  }
  return total <= prob.budget() + 1e-9 * std::max(1.0, prob.budget());
}

// ---------------------------------------------------------------------------

AllocationSolution solve_utilitarian(const AllocationProblem& prob) {
  const auto& p = prob.p_hat();
  std::vector<std::size_t> order(prob.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] > p[b]; });

  std::vector<double> d(prob.size(), 0.0);
  double remaining = prob.budget();
  std::size_t steps = 0;
  for (auto i : order) {
    if (remaining <= 0.0) break;
    ++steps;
    d[i] = std::min(prob.requests()[i], remaining);
    remaining -= d[i];
  }
  return finish(prob, SwfSpec::of(SwfFamily::Utilitarian), std::move(d), SolverTag::Utilitarian,
                steps);
}

AllocationSolution solve_maximin(const AllocationProblem& prob) {
  const std::size_t n = prob.size();
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();

  // u-space: caps p_i r_i, a unit of utility costs 1 / p_i
  std::vector<double> caps(n, 0.0), weights(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) {
      caps[i] = r[i];
      weights[i] = 1.0 / p[i];
    }
  }
  std::size_t steps = 0;
  const auto level = level_fill(caps, weights, prob.budget(), steps);

  std::vector<double> d(n, 0.0);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == 0.0) continue;
    d[i] = level ? std::min(r[i], *level / p[i]) : r[i];
    t = std::max(t, p[i] * d[i]);
  }
  auto s = finish(prob, SwfSpec::of(SwfFamily::Maximin), std::move(d), SolverTag::Maximin, steps);
  s.degenerate_players = degenerate_players(prob);
  s.water_level = level ? *level : t;
  return s;
}

AllocationSolution solve_leximax(const AllocationProblem& prob) {
  const std::size_t n = prob.size();
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();

  std::vector<double> d(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0 && r[i] > 0.0) active.push_back(i);
  }

  double remaining = prob.budget();
  double level = 0.0;
  std::size_t rounds = 0;
  while (!active.empty() && remaining > 0.0) {
    ++rounds;
    double inv_sum = 0.0;
    double next_cap = std::numeric_limits<double>::infinity();
    for (auto i : active) {
      inv_sum += 1.0 / p[i];
      next_cap = std::min(next_cap, p[i] * r[i]);
    }
    const double cost = (next_cap - level) * inv_sum;
    if (cost >= remaining) {
      // budget binds before the next cap: everyone left shares the rest
      level += remaining / inv_sum;
      remaining = 0.0;
      for (auto i : active) d[i] = std::min(r[i], level / p[i]);
      active.clear();
      break;
    }
    remaining -= cost;
    level = next_cap;
    std::vector<std::size_t> still;
    for (auto i : active) {
      if (p[i] * r[i] <= level) {
        d[i] = r[i];
      } else {
        still.push_back(i);
      }
    }
    active.swap(still);
  }
  for (auto i : active) d[i] = std::min(r[i], level / p[i]);

  auto s = finish(prob, SwfSpec::of(SwfFamily::Leximax), std::move(d), SolverTag::Leximax, rounds);
  s.degenerate_players = degenerate_players(prob);
  s.water_level = level;
  return s;
}

AllocationSolution solve_alpha_fairness(const AllocationProblem& prob, double alpha,
                                        double epsilon_clamp) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw InvalidAlpha("alpha-fairness solver needs alpha > 0 and alpha != 1");
  }
  SwfSpec spec = SwfSpec::alpha_fairness(alpha);
  spec.epsilon_clamp = epsilon_clamp;

  const std::size_t n = prob.size();
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();
  std::vector<std::size_t> active;
  double active_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0 && r[i] > 0.0) {
      active.push_back(i);
      active_total += r[i];
    }
  }

  std::vector<double> d(n, 0.0);
  std::size_t iterations = 0;
  if (active.empty() || prob.budget() == 0.0) {
    // nothing to distribute
  } else if (active_total <= prob.budget()) {
    for (auto i : active) d[i] = r[i];
  } else {
    const double target = prob.budget();
    // log d_i(lambda) = ((1 - alpha) log p_i - log lambda) / alpha, clipped at r_i
    auto grant = [&](double log_lambda, std::size_t i) {
      const double log_d = ((1.0 - alpha) * std::log(p[i]) - log_lambda) / alpha;
      return std::min(r[i], std::exp(log_d));
    };
    auto total_at = [&](double log_lambda) {
      double s = 0.0;
      for (auto i : active) s += grant(log_lambda, i);
      return s;
    };
    // lo: every player saturated; hi: every player below target / n
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const double share = target / static_cast<double>(active.size());
    for (auto i : active) {
      const double base = (1.0 - alpha) * std::log(p[i]);
      lo = std::min(lo, base - alpha * std::log(r[i]));
      hi = std::max(hi, base - alpha * std::log(share));
    }
    lo -= 1.0;
    hi += 1.0;
    for (; iterations < kMaxBisection; ++iterations) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      const double total = total_at(mid);
      if (total > target) {
        lo = mid;
      } else {
        hi = mid;
        if (target - total <= kBudgetRelTol * target) break;
      }
    }
    for (auto i : active) d[i] = grant(hi, i);
    // unsaturated grants share the factor lambda^(-1/alpha); scale them onto the budget
    double used = 0.0, free_total = 0.0;
    for (auto i : active) {
      used += d[i];
      if (d[i] < r[i]) free_total += d[i];
    }
    if (free_total > 0.0 && used < target) {
      const double factor = 1.0 + (target - used) / free_total;
      for (auto i : active) {
        if (d[i] < r[i]) d[i] = std::min(r[i], d[i] * factor);
      }
    }
  }
  auto s = finish(prob, spec, std::move(d), SolverTag::AlphaFairness, iterations);
  s.degenerate_players = degenerate_players(prob);
  return s;
}

AllocationSolution solve_proportional_fairness(const AllocationProblem& prob,
                                               double epsilon_clamp) {
  SwfSpec spec = SwfSpec::of(SwfFamily::ProportionalFairness);
  spec.epsilon_clamp = epsilon_clamp;

  const std::size_t n = prob.size();
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();
  // d_i = min(r_i, t): the level depends on p only through which players are degenerate
  std::vector<double> weights(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) weights[i] = p[i] > 0.0 ? 1.0 : 0.0;
  std::size_t steps = 0;
  const auto level = level_fill(r, weights, prob.budget(), steps);

  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) d[i] = level ? std::min(r[i], *level) : r[i];
  }
  auto s = finish(prob, spec, std::move(d), SolverTag::ProportionalFairness, steps);
  s.degenerate_players = degenerate_players(prob);
  if (level) s.water_level = *level;
  return s;
}

AllocationSolution solve_kalai_smorodinsky(const AllocationProblem& prob) {
  const auto& r = prob.requests();
  if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) {
    throw EmptyProblem("kalai-smorodinsky: every request is zero");
  }
  std::vector<double> reach(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) reach[i] = std::min(r[i], prob.budget());
  const double total = std::accumulate(reach.begin(), reach.end(), 0.0);
  const double beta = total > 0.0 ? std::min(1.0, prob.budget() / total) : 0.0;

  std::vector<double> d(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) d[i] = beta * reach[i];
  auto s = finish(prob, SwfSpec::of(SwfFamily::KalaiSmorodinsky), std::move(d),
                  SolverTag::KalaiSmorodinsky, 1);
  s.degenerate_players = degenerate_players(prob);
  s.beta = beta;
  return s;
}

// ---------------------------------------------------------------------------

std::vector<double> project_box_budget(std::span<const double> point, std::span<const double> caps,
                                       double budget) {
  const std::size_t n = point.size();
  std::vector<double> out(n);
  auto clipped_sum = [&](double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::clamp(point[i] - shift, 0.0, caps[i]);
    return s;
  };
  double shift = 0.0;
  if (clipped_sum(0.0) > budget) {
    double lo = 0.0;
    double hi = *std::max_element(point.begin(), point.end());
    for (std::size_t it = 0; it < kMaxBisection && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (clipped_sum(mid) > budget ? lo : hi) = mid;
    }
    shift = hi;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(point[i] - shift, 0.0, caps[i]);
  return out;
}

AllocationSolution solve_generic(const AllocationProblem& prob, const SwfSpec& spec,
                                 const GenericOptions& options) {
  spec.validate();
  if (spec.family == SwfFamily::Leximax || spec.family == SwfFamily::KalaiSmorodinsky) {
    throw UnsupportedFamily("generic solver needs a scalar family with a supergradient");
  }
  const std::size_t n = prob.size();
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();
  const double r_max = *std::max_element(r.begin(), r.end());

  auto value_at = [&](std::span<const double> d) {
    try {
      return evaluate(spec, utilities_of(prob, d));
    } catch (const ZeroMeanError&) {
      return -std::numeric_limits<double>::infinity();
    } catch (const ZeroMedianError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> best(n, 0.0);
  double best_value = value_at(best);
  std::size_t total_iterations = 0;
  bool converged = false;
  if (r_max == 0.0 || prob.budget() == 0.0) {
    auto s = finish(prob, SwfSpec::of(SwfFamily::Utilitarian), best, SolverTag::Generic, 0);
    s.objective = best_value;
    return s;
  }

  const double step0 = r_max / 10.0;
  Rng rng(options.seed);
  std::vector<double> d(n), trial(n);
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, options.restarts); ++restart) {
    for (std::size_t i = 0; i < n; ++i) trial[i] = rng.uniform(0.0, r[i]);
    d = project_box_budget(trial, r, prob.budget());
    double run_best = value_at(d);
    double value_at_check = run_best;
    const std::size_t check_every = std::max<std::size_t>(1, options.max_iter / 10);
    bool run_converged = false;
    if (run_best > best_value) {
      best_value = run_best;
      best = d;
    }
    for (std::size_t k = 1; k <= options.max_iter; ++k) {
      ++total_iterations;
      std::vector<double> grad;
      const auto u = utilities_of(prob, d);
      try {
        grad = welfare_gradient(spec, u);
      } catch (const ZeroMeanError&) {
        grad.assign(n, 1.0);
      } catch (const ZeroMedianError&) {
        grad.assign(n, 1.0);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] *= p[i];
        norm += grad[i] * grad[i];
      }
      norm = std::sqrt(norm);
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        run_converged = true;
        break;
      }
      const double step = step0 / std::sqrt(static_cast<double>(k));
      for (std::size_t i = 0; i < n; ++i) trial[i] = d[i] + step * grad[i] / norm;
      d = project_box_budget(trial, r, prob.budget());
      const double v = value_at(d);
      if (v > run_best) run_best = v;
      if (v > best_value) {
        best_value = v;
        best = d;
      }
      if (k % check_every == 0) {
        const double gain = run_best - value_at_check;
        run_converged = gain <= 1e-9 * std::max(1.0, std::abs(run_best));
        value_at_check = run_best;
      }
    }
    converged = converged || run_converged;
  }

  auto s = finish(prob, SwfSpec::of(SwfFamily::Utilitarian), best, SolverTag::Generic,
                  total_iterations);
  s.objective = best_value;
  s.converged = converged;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> grid_limits(const AllocationProblem& prob, double step) {
  std::vector<std::size_t> k(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) {
    k[i] = static_cast<std::size_t>(std::floor(prob.requests()[i] / step + 1e-9));
  }
  return k;
}

std::size_t budget_units(const AllocationProblem& prob, double step) {
  const double units = std::floor(prob.budget() / step + 1e-9);
  return units > 1e12 ? static_cast<std::size_t>(1e12) : static_cast<std::size_t>(units);
}

void check_step(double grid_step) {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw InvalidProblem("grid step must be positive");
  }
}

AllocationSolution ks_ray_oracle(const AllocationProblem& prob, double step) {
  const std::size_t n = prob.size();
  const auto& r = prob.requests();
  // per-player best grant when alone: scan the grid plus the two natural endpoints
  std::vector<double> reach(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto consider = [&](double g) {
      if (g <= r[i] && g <= prob.budget()) reach[i] = std::max(reach[i], g);
    };
    const auto steps = static_cast<std::size_t>(std::ceil(r[i] / step));
    for (std::size_t j = 0; j <= steps; ++j) consider(static_cast<double>(j) * step);
    consider(r[i]);
    consider(prob.budget());
  }
  const double reach_max = *std::max_element(reach.begin(), reach.end());
  if (reach_max == 0.0) {
    if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) {
      throw EmptyProblem("kalai-smorodinsky: every request is zero");
    }
    return finish(prob, SwfSpec::of(SwfFamily::KalaiSmorodinsky), std::vector<double>(n, 0.0),
                  SolverTag::BruteForce, 1);
  }
  const double beta_step = step / reach_max;
  const auto count = static_cast<std::size_t>(std::ceil(1.0 / beta_step));
  double best_beta = 0.0;
  std::vector<double> d(n);
  for (std::size_t j = 0; j <= count; ++j) {
    const double beta = std::min(1.0, static_cast<double>(j) * beta_step);
    for (std::size_t i = 0; i < n; ++i) d[i] = beta * reach[i];
    if (is_feasible(prob, d)) best_beta = std::max(best_beta, beta);
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = best_beta * reach[i];
  auto s = finish(prob, SwfSpec::of(SwfFamily::KalaiSmorodinsky), d, SolverTag::BruteForce,
                  count + 1);
  s.beta = best_beta;
  return s;
}

}  // namespace

double oracle_grid_size(const AllocationProblem& prob, double grid_step) {
  check_step(grid_step);
  const auto limits = grid_limits(prob, grid_step);
  const std::size_t cap = budget_units(prob, grid_step);
  std::size_t max_units = 0;
  for (auto k : limits) max_units += k;
  const std::size_t m = std::min(cap, max_units);
  // at least m + 1 points lie on the path that fills coordinates in order
  if (static_cast<double>(m) >= kMaxOracleGridPoints) return static_cast<double>(m) + 1.0;
  // ways[s] = number of partial grid vectors using s budget units
  std::vector<double> ways(m + 1, 0.0);
  ways[0] = 1.0;
  std::vector<double> prefix(m + 2, 0.0);
  for (auto k : limits) {
    // next[s] = ways[s - k] + ... + ways[s]
    for (std::size_t s = 0; s <= m; ++s) prefix[s + 1] = prefix[s] + ways[s];
    for (std::size_t s = 0; s <= m; ++s) ways[s] = prefix[s + 1] - prefix[s >= k ? s - k : 0];
  }
  return std::accumulate(ways.begin(), ways.end(), 0.0);
}

AllocationSolution brute_force_oracle(const AllocationProblem& prob, const SwfSpec& spec,
                                      double grid_step) {
  spec.validate();
  check_step(grid_step);
  if (prob.size() > 5) throw GridTooLarge("brute-force oracle supports at most 5 players");
  if (spec.family == SwfFamily::KalaiSmorodinsky) return ks_ray_oracle(prob, grid_step);

  const double points = oracle_grid_size(prob, grid_step);
  if (points > kMaxOracleGridPoints) {
    throw GridTooLarge("oracle grid has " + std::to_string(static_cast<long long>(points)) +
                       " feasible points");
  }
  const std::size_t n = prob.size();
  const auto limits = grid_limits(prob, grid_step);
  const std::size_t cap = budget_units(prob, grid_step);
  const auto& p = prob.p_hat();
  const auto& r = prob.requests();
  const bool lexi = spec.family == SwfFamily::Leximax;

  std::vector<std::size_t> k(n, 0);
  std::vector<double> d(n, 0.0), u(n, 0.0);
  std::vector<double> best_d;
  std::vector<double> best_u;
  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t visited = 0;

  auto visit = [&]() {
    ++visited;
    double value = 0.0;
    if (lexi) {
      if (!best_u.empty() && leximax_compare(u, best_u) != std::strong_ordering::greater) return;
    } else {
      try {
        value = evaluate(spec, u);
      } catch (const ZeroMeanError&) {
        return;
      } catch (const ZeroMedianError&) {
        return;
      }
      if (!(value > best_value)) return;
      best_value = value;
    }
    best_d = d;
    best_u = u;
  };

  // odometer over coordinates, keeping the running budget use
  std::size_t used = 0;
  while (true) {
    visit();
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (k[i] < limits[i] && used + 1 <= cap) {
        ++k[i];
        ++used;
        d[i] = std::min(static_cast<double>(k[i]) * grid_step, r[i]);
        u[i] = p[i] * d[i];
        break;
      }
      used -= k[i];
      k[i] = 0;
      d[i] = 0.0;
      u[i] = 0.0;
    }
    if (i == n) break;
  }

  if (best_d.empty()) best_d.assign(n, 0.0);
  auto s = finish(prob, spec, std::move(best_d), SolverTag::BruteForce, visited);
  return s;
}

double oracle_resolution_bound(const AllocationProblem& prob, const SwfSpec& spec,
                               std::span<const double> utility, double grid_step) {
  check_step(grid_step);
  const auto& p = prob.p_hat();
  if (spec.family == SwfFamily::KalaiSmorodinsky) {
    return grid_step * std::accumulate(p.begin(), p.end(), 0.0);
  }
  // rounding each grant down to the grid lowers u_i by less than p_i * step
  std::vector<double> lowered(utility.begin(), utility.end());
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    lowered[i] = std::max(0.0, lowered[i] - p[i] * grid_step);
  }
  const double bound = objective_for(prob, spec, utility) - objective_for(prob, spec, lowered);
  return std::max(0.0, bound);
}

AllocationSolution solve(const AllocationProblem& prob, const SwfSpec& spec,
                         const GenericOptions& options) {
  spec.validate();
  switch (spec.family) {
    case SwfFamily::Utilitarian:
      return solve_utilitarian(prob);
    case SwfFamily::Maximin:
      return solve_maximin(prob);
    case SwfFamily::Leximax:
      return solve_leximax(prob);
    case SwfFamily::AlphaFairness:
      if (spec.alpha == 0.0) {
        auto s = solve_utilitarian(prob);
        s.objective = evaluate(spec, s.utility);
        return s;
      }
      return solve_alpha_fairness(prob, spec.alpha, spec.epsilon_clamp);
    case SwfFamily::ProportionalFairness:
      return solve_proportional_fairness(prob, spec.epsilon_clamp);
    case SwfFamily::KalaiSmorodinsky:
      return solve_kalai_smorodinsky(prob);
    case SwfFamily::Threshold:
      if (spec.delta == 0.0) {
        // W_0 is the utilitarian sum term for term
        auto s = solve_utilitarian(prob);
        s.objective = evaluate(spec, s.utility);
        return s;
      }
      return solve_generic(prob, spec, options);
    default:
      return solve_generic(prob, spec, options);
  }
}

}  // namespace swo
