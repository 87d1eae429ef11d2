#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "swo/alloc.hpp"
#include "swo/errors.hpp"
#include "swo/rng.hpp"

using namespace swo;
using doctest::Approx;

namespace {

AllocationProblem random_problem(Rng& rng, std::size_t n, double r_max = 10.0) {
  std::vector<double> p(n), r(n);
  for (auto& v : p) v = rng.uniform(0.05, 1.0);
  for (auto& v : r) v = rng.uniform(0.5, r_max);
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  return AllocationProblem(p, r, rng.uniform(0.2, 0.9) * total);
}

const std::vector<SwfSpec>& monotone_specs() {
  static const std::vector<SwfSpec> specs{
      SwfSpec::of(SwfFamily::Utilitarian),          SwfSpec::of(SwfFamily::Maximin),
      SwfSpec::of(SwfFamily::Leximax),              SwfSpec::alpha_fairness(0.5),
      SwfSpec::alpha_fairness(2.0),                 SwfSpec::of(SwfFamily::ProportionalFairness),
      SwfSpec::of(SwfFamily::KalaiSmorodinsky)};
  return specs;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(AllocationProblem({0.5}, {1.0, 2.0}, 1.0), LengthMismatch);
  CHECK_THROWS_AS(AllocationProblem({1.5}, {1.0}, 1.0), InvalidProblem);
  CHECK_THROWS_AS(AllocationProblem({0.5}, {-1.0}, 1.0), InvalidProblem);
  CHECK_THROWS_AS(AllocationProblem({0.5}, {1.0}, -1.0), InvalidProblem);
  const AllocationProblem p({0.5, 1.0}, {10.0, 300.0}, 100.0);
  CHECK(p.total_request() == 310.0);
  CHECK(p.utility_max() == std::vector<double>{5.0, 100.0});
}

TEST_CASE("utilitarian greedy") {
  auto s = solve_utilitarian(AllocationProblem({0.9, 0.5}, {100, 100}, 100));
  CHECK(s.granted == std::vector<double>{100, 0});
  CHECK(s.objective == Approx(90));
  s = solve_utilitarian(AllocationProblem({0.9, 0.5}, {10, 20}, 100));
  CHECK(s.granted == std::vector<double>{10, 20});
  s = solve_utilitarian(AllocationProblem({0.5, 0.5}, {10, 10}, 10));
  CHECK(s.granted == std::vector<double>{10, 0});
  CHECK(s.objective == Approx(5));
  s = solve_utilitarian(AllocationProblem({0.5, 0.7}, {10, 10}, 0));
  CHECK(sum(s.granted) == 0.0);
}

TEST_CASE("maximin water filling") {
  auto s = solve_maximin(AllocationProblem({0.5, 1.0}, {100, 100}, 30));
  CHECK(s.granted[0] == Approx(20));
  CHECK(s.granted[1] == Approx(10));
  CHECK(s.utility[0] == Approx(10));
  CHECK(s.utility[1] == Approx(10));
  s = solve_maximin(AllocationProblem({0.7}, {40}, 25));
  CHECK(s.granted[0] == Approx(25));
  s = solve_maximin(AllocationProblem({1, 1}, {5, 100}, 50));
  CHECK(s.objective == Approx(5));
  CHECK(s.granted[0] == Approx(5));
}

TEST_CASE("maximin flags degenerate players and fills the rest") {
  const auto s = solve_maximin(AllocationProblem({0.0, 0.5, 1.0}, {10, 100, 100}, 30));
  CHECK(s.degenerate_players == std::vector<std::size_t>{0});
  CHECK(s.granted[0] == 0.0);
  CHECK(s.granted[1] == Approx(20));
  CHECK(s.granted[2] == Approx(10));
  CHECK(s.objective == 0.0);
}

TEST_CASE("leximax progressive filling") {
  auto s = solve_leximax(AllocationProblem({1, 1}, {5, 100}, 50));
  CHECK(s.granted[0] == Approx(5));
  CHECK(s.granted[1] == Approx(45));
  s = solve_leximax(AllocationProblem({0.8, 0.8, 0.8}, {50, 50, 50}, 60));
  for (double d : s.granted) CHECK(d == Approx(20));
  const AllocationProblem p({1, 0.5, 1}, {10, 10, 10}, 12);
  s = solve_leximax(p);
  const auto o = brute_force_oracle(p, SwfSpec::of(SwfFamily::Leximax), 0.05);
  CHECK(leximax_compare(s.utility, o.utility, 1e-6) != std::weak_ordering::less);
}

TEST_CASE("alpha fairness") {
  auto s = solve_alpha_fairness(AllocationProblem({0.6, 0.3}, {5, 7}, 100), 0.5, 1e-6);
  CHECK(s.granted == std::vector<double>{5, 7});
  s = solve_alpha_fairness(AllocationProblem({1, 1}, {10, 10}, 10), 0.5, 1e-6);
  CHECK(s.granted[0] == Approx(5));
  CHECK(s.granted[1] == Approx(5));
  const AllocationProblem p({0.9, 0.1}, {10, 10}, 10);
  s = solve_alpha_fairness(p, 0.5, 1e-6);
  const auto o = brute_force_oracle(p, SwfSpec::alpha_fairness(0.5), 0.01);
  CHECK(s.objective >= o.objective - 1e-9);
  CHECK(o.objective >= s.objective - oracle_resolution_bound(p, SwfSpec::alpha_fairness(0.5), s.utility, 0.01));
  // closed form for two unsaturated players: d_i proportional to p_i^((1-a)/a)
  CHECK(s.granted[0] / s.granted[1] == Approx(std::pow(9.0, 1.0)).epsilon(1e-6));
  const auto g = solve_generic(p, SwfSpec::alpha_fairness(0.5));
  CHECK(g.objective == Approx(s.objective).epsilon(1e-4));
  CHECK_THROWS_AS(solve_alpha_fairness(p, 1.0, 1e-6), InvalidAlpha);
}

TEST_CASE("alpha fairness agrees with the grid oracle on random 3-player instances") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(rng, 3);
    const double step = 0.05;
    for (double alpha : {0.5, 2.0}) {
      const auto spec = SwfSpec::alpha_fairness(alpha);
      const auto s = solve(p, spec);
      const auto o = brute_force_oracle(p, spec, step);
      CHECK(s.objective >= o.objective - 1e-9 * std::max(1.0, std::fabs(o.objective)));
      CHECK(s.objective - o.objective <= oracle_resolution_bound(p, spec, s.utility, step) + 1e-12);
    }
  }
}

TEST_CASE("proportional fairness") {
  auto s = solve_proportional_fairness(AllocationProblem({0.3, 0.9}, {10, 10}, 10), 1e-6);
  CHECK(s.granted[0] == Approx(5));
  CHECK(s.granted[1] == Approx(5));
  s = solve_proportional_fairness(AllocationProblem({0.3, 0.9}, {2, 100}, 12), 1e-6);
  CHECK(s.granted[0] == Approx(2));
  CHECK(s.granted[1] == Approx(10));
  const auto o = brute_force_oracle(AllocationProblem({0.3, 0.9}, {2, 100}, 12),
                                    SwfSpec::of(SwfFamily::ProportionalFairness), 0.5);
  CHECK(o.granted[0] == Approx(2));
  CHECK(o.granted[1] == Approx(10));
}

TEST_CASE("proportional allocation does not depend on p_hat") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = random_problem(rng, 6);
    const auto d0 = solve_proportional_fairness(base, 1e-6).granted;
    for (int k = 0; k < 5; ++k) {
      std::vector<double> q(6);
      for (auto& v : q) v = rng.uniform(0.01, 1.0);
      const auto d1 = solve_proportional_fairness(AllocationProblem(q, base.requests(), base.budget()), 1e-6).granted;
      for (std::size_t i = 0; i < 6; ++i) CHECK(std::fabs(d0[i] - d1[i]) <= 1e-9);
    }
  }
}

TEST_CASE("kalai-smorodinsky") {
  auto s = solve_kalai_smorodinsky(AllocationProblem({0.5, 0.5}, {3, 4}, 100));
  CHECK(s.beta == 1.0);
  CHECK(s.granted == std::vector<double>{3, 4});
  s = solve_kalai_smorodinsky(AllocationProblem({0.5, 0.8}, {100, 100}, 100));
  CHECK(s.beta == Approx(0.5));
  CHECK(s.granted[0] == Approx(50));
  s = solve_kalai_smorodinsky(AllocationProblem({0.5, 0.8}, {10, 1000}, 100));
  CHECK(s.beta == Approx(100.0 / 110.0));
  CHECK(s.granted[0] == Approx(9.0909).epsilon(1e-4));
  CHECK(s.granted[1] == Approx(90.909).epsilon(1e-4));
  CHECK(sum(s.granted) == Approx(100));
  CHECK_THROWS_AS(solve_kalai_smorodinsky(AllocationProblem({0.5, 0.8}, {0, 0}, 10)), EmptyProblem);
}

TEST_CASE("generic solver cross-checks") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 4);
    const auto exact = solve_utilitarian(p);
    const auto g = solve_generic(p, SwfSpec::of(SwfFamily::Utilitarian));
    CHECK(g.objective == Approx(exact.objective).epsilon(1e-4));
    const auto t0 = solve_generic(p, SwfSpec::threshold(0.0));
    CHECK(t0.objective == Approx(exact.objective).epsilon(1e-4));
    CHECK(is_feasible(p, g.granted));
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_problem(rng, 3);
    const double r_max = *std::max_element(p.requests().begin(), p.requests().end());
    const auto spec = SwfSpec::threshold(1.0);
    const auto g = solve_generic(p, spec);
    const auto o = brute_force_oracle(p, spec, 0.05 * r_max);
    CHECK(g.objective >= o.objective - 1e-2 * std::fabs(o.objective));
  }
}

TEST_CASE("solve dispatch") {
  const AllocationProblem p({0.9, 0.4, 0.6}, {10, 20, 30}, 25);
  CHECK(solve(p, SwfSpec::of(SwfFamily::Utilitarian)).solver == SolverTag::Utilitarian);
  CHECK(solve(p, SwfSpec::of(SwfFamily::Maximin)).solver == SolverTag::Maximin);
  CHECK(solve(p, SwfSpec::of(SwfFamily::Leximax)).solver == SolverTag::Leximax);
  CHECK(solve(p, SwfSpec::alpha_fairness(2)).solver == SolverTag::AlphaFairness);
  CHECK(solve(p, SwfSpec::of(SwfFamily::Gini)).solver == SolverTag::Generic);
  const auto u = solve(p, SwfSpec::of(SwfFamily::Utilitarian));
  const auto t = solve(p, SwfSpec::threshold(0.0));
  CHECK(u.granted == t.granted);
  CHECK(u.objective == t.objective);
}

TEST_CASE("oracle basics") {
  auto o = brute_force_oracle(AllocationProblem({1.0}, {10}, 5), SwfSpec::of(SwfFamily::Utilitarian), 1.0);
  CHECK(o.granted[0] == Approx(5));
  o = brute_force_oracle(AllocationProblem({0.5, 1.0}, {100, 100}, 30), SwfSpec::of(SwfFamily::Maximin), 0.5);
  CHECK(o.granted[0] == Approx(20));
  CHECK(o.granted[1] == Approx(10));
  CHECK_THROWS_AS(brute_force_oracle(AllocationProblem(std::vector<double>(6, 0.5), std::vector<double>(6, 1), 3),
                                     SwfSpec::of(SwfFamily::Utilitarian), 0.5),
                  GridTooLarge);
  CHECK_THROWS_AS(brute_force_oracle(AllocationProblem({0.5, 0.5, 0.5}, {100, 100, 100}, 300),
                                     SwfSpec::of(SwfFamily::Utilitarian), 0.01),
                  GridTooLarge);
  CHECK(oracle_grid_size(AllocationProblem({1, 1}, {2, 2}, 2), 1.0) == 6.0);
}

TEST_CASE("every specialized solver is feasible") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_problem(rng, 1 + rng.index(12), 100.0);
    for (const auto& spec : monotone_specs()) {
      const auto s = solve(p, spec);
      CHECK(is_feasible(p, s.granted));
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(s.granted[i] >= 0.0);
        CHECK(oracle::close(s.utility[i], p.p_hat()[i] * s.granted[i], 1e-12));
      }
    }
  }
}

TEST_CASE("objective is nondecreasing in the budget") {
  Rng rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const auto base = random_problem(rng, 5);
    const double total = base.total_request();
    for (const auto& spec : monotone_specs()) {
      if (spec.family == SwfFamily::KalaiSmorodinsky) continue;  // K-S value is sum of u on the ray
      double prev = -INFINITY;
      for (double frac : {0.1, 0.3, 0.5, 0.8, 1.0, 1.2}) {
        const AllocationProblem p(base.p_hat(), base.requests(), frac * total);
        const double obj = solve(p, spec).objective;
        CHECK(obj >= prev - 1e-9 * std::max(1.0, std::fabs(prev)));
        prev = obj;
      }
    }
    double prev = -1.0;
    for (double frac : {0.1, 0.3, 0.5, 0.8, 1.0}) {
      const AllocationProblem p(base.p_hat(), base.requests(), frac * total);
      const double obj = solve_kalai_smorodinsky(p).objective;
      CHECK(obj >= prev - 1e-9);
      prev = obj;
    }
  }
}

TEST_CASE("budget slack saturates every request") {
  Rng rng(26);
  for (int trial = 0; trial < 30; ++trial) {
    const auto base = random_problem(rng, 5);
    const AllocationProblem p(base.p_hat(), base.requests(), base.total_request() * 1.5);
    for (const auto& spec : monotone_specs()) {
      const auto s = solve(p, spec);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(s.granted[i] == Approx(p.requests()[i]));
    }
  }
}

TEST_CASE("maximin water level") {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_problem(rng, 8);
    const auto s = solve_maximin(p);
    const double t = s.water_level;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (s.granted[i] < p.requests()[i] - 1e-9) {
        CHECK(s.utility[i] == Approx(t).epsilon(1e-9));
      } else {
        CHECK(s.utility[i] <= t * (1 + 1e-9));
      }
    }
    CHECK(sum(s.granted) == Approx(p.budget()).epsilon(1e-9));
  }
}

TEST_CASE("leximax dominates every grid point") {
  Rng rng(28);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 3, 5.0);
    const auto s = solve_leximax(p);
    const auto o = brute_force_oracle(p, SwfSpec::of(SwfFamily::Leximax), 0.25);
    CHECK(leximax_compare(s.utility, o.utility, 1e-9) != std::weak_ordering::less);
  }
}

TEST_CASE("projection onto box and budget") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> x(n), caps(n);
    for (auto& v : x) v = rng.uniform(-5, 15);
    for (auto& v : caps) v = rng.uniform(0, 10);
    const double b = rng.uniform(0, 30);
    const auto y = project_box_budget(x, caps, b);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y[i] >= 0.0);
      CHECK(y[i] <= caps[i] + 1e-12);
    }
    CHECK(sum(y) <= b + 1e-7 * std::max(1.0, b));
    // idempotent
    const auto z = project_box_budget(y, caps, b);
    for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == Approx(y[i]).epsilon(1e-9));
  }
}
