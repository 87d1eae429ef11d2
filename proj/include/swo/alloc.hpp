#pragma once

// Budget-constrained allocation:
//   maximize W(u)  s.t.  u_i = p_i d_i,  0 <= d_i <= r_i,  sum_i d_i <= B.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swo/swf.hpp"

namespace swo {

/// Repay probabilities, request caps and the total budget.
class AllocationProblem {
 public:
  AllocationProblem(std::vector<double> p_hat, std::vector<double> requests, double budget);

  std::size_t size() const noexcept { return p_hat_.size(); }
  const std::vector<double>& p_hat() const noexcept { return p_hat_; }
  const std::vector<double>& requests() const noexcept { return requests_; }
  double budget() const noexcept { return budget_; }
  double total_request() const noexcept;

  /// Per-player best attainable utility ignoring everyone else: p_i * min(r_i, B).
  std::vector<double> utility_max() const;

 private:
  std::vector<double> p_hat_;
  std::vector<double> requests_;
  double budget_;
};

enum class SolverTag {
  Utilitarian,
  Maximin,
  Leximax,
  AlphaFairness,
  ProportionalFairness,
  KalaiSmorodinsky,
  Generic,
  BruteForce,
};

std::string_view solver_name(SolverTag tag);

struct AllocationSolution {
  std::vector<double> granted;  // d
  std::vector<double> utility;  // u_i = p_i d_i
  double objective = 0.0;
  SolverTag solver = SolverTag::Utilitarian;
  std::size_t iterations = 0;
  bool converged = true;
  /// Players with p_i = 0 and r_i > 0; they are held at d_i = 0.
  std::vector<std::size_t> degenerate_players;
  /// Common fraction of u_max (Kalai-Smorodinsky only).
  double beta = 0.0;
  /// Common utility level reached by unsaturated players (maximin/leximax).
  double water_level = 0.0;
};

/// Box and budget feasibility with the toolkit's tolerances
/// (d_i <= r_i + 1e-9, sum d <= B + 1e-9 max(1, B)).
bool is_feasible(const AllocationProblem& prob, std::span<const double> granted);

/// Fractional-knapsack greedy on p_i; equal p broken by ascending index.
AllocationSolution solve_utilitarian(const AllocationProblem& prob);

/// Largest common utility level t with sum_i min(r_i, t / p_i) <= B.
AllocationSolution solve_maximin(const AllocationProblem& prob);

/// Progressive filling: raise the common level of the unsaturated players,
/// freeze players whose cap binds, repeat until the budget is gone.
AllocationSolution solve_leximax(const AllocationProblem& prob);

/// KKT water-filling d_i(lambda) = min(r_i, (p_i^(1-alpha) / lambda)^(1/alpha)),
/// bisection on lambda until the budget binds.
AllocationSolution solve_alpha_fairness(const AllocationProblem& prob, double alpha,
                                        double epsilon_clamp = kDefaultEpsilonClamp);

/// d_i = min(r_i, t) with a common level t; independent of p.
AllocationSolution solve_proportional_fairness(const AllocationProblem& prob,
                                               double epsilon_clamp = kDefaultEpsilonClamp);

/// d_i = beta * min(r_i, B) with beta = min(1, B / sum_i min(r_i, B)).
AllocationSolution solve_kalai_smorodinsky(const AllocationProblem& prob);

struct GenericOptions {
  std::size_t restarts = 8;
  std::size_t max_iter = 2000;
  std::uint64_t seed = 1;
};

/// Multi-start projected supergradient ascent over the box-plus-budget
/// polytope. Certified only as a heuristic optimum for nonconcave families.
AllocationSolution solve_generic(const AllocationProblem& prob, const SwfSpec& spec,
                                 const GenericOptions& options = {});

/// Exhaustive grid search. Points are {0, step, 2 step, ...} per coordinate
/// (capped by r_i), restricted to the budget. Throws GridTooLarge above
/// kMaxOracleGridPoints feasible points or when n > 5.
///
/// Kalai-Smorodinsky is zero off the ray beta * u_max, so for that family
/// the grid is laid along the ray instead: u_max comes from a per-player scan
/// and beta steps by step / max_i min(r_i, B).
AllocationSolution brute_force_oracle(const AllocationProblem& prob, const SwfSpec& spec,
                                      double grid_step);

inline constexpr double kMaxOracleGridPoints = 1e7;

/// Number of feasible grid points the oracle would visit. Counts above
/// kMaxOracleGridPoints may be reported as a lower bound.
double oracle_grid_size(const AllocationProblem& prob, double grid_step);

/// Upper bound on how far the grid optimum can fall below the continuous
/// optimum `utility`, for families that are monotone in every utility.
double oracle_resolution_bound(const AllocationProblem& prob, const SwfSpec& spec,
                               std::span<const double> utility, double grid_step);

/// Picks the specialized solver for the family when one exists, otherwise the
/// generic one. Leximax is solved by progressive filling.
AllocationSolution solve(const AllocationProblem& prob, const SwfSpec& spec,
                         const GenericOptions& options = {});

/// Euclidean projection onto {0 <= d <= r, sum d <= B}.
std::vector<double> project_box_budget(std::span<const double> point,
                                       std::span<const double> caps, double budget);

}  // namespace swo
