#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "barylab/lp.hpp"
#include "barylab/rng.hpp"

using namespace barylab;

TEST_CASE("small LPs with known optima") {
  // min -x1 - x2  s.t. x1 + s1 = 1, x2 + s2 = 2
  LinearProgram lp(2);
  lp.set_rhs(0, 1.0);
  lp.set_rhs(1, 2.0);
  lp.add_column(-1.0, {{0, 1.0}});
  lp.add_column(-1.0, {{1, 1.0}});
  lp.add_column(0.0, {{0, 1.0}});
  lp.add_column(0.0, {{1, 1.0}});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-3.0));
  CHECK(sol.y[0] == doctest::Approx(-1.0));
  CHECK(sol.y[1] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram bad(1);
  bad.set_rhs(0, -1.0);
  bad.add_column(1.0, {{0, 1.0}});
  CHECK(solve_lp(bad).status == LpStatus::infeasible);

  LinearProgram open(1);
  open.add_column(-1.0, {{0, 1.0}});
  open.add_column(0.0, {{0, -1.0}});
  CHECK(solve_lp(open).status == LpStatus::unbounded);
}

TEST_CASE("assignment problems match permutation enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<double> c(n * n);
    for (auto& x : c) x = rng.uniform();
    LinearProgram lp(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) lp.set_rhs(i, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) lp.add_column(c[i * n + j], {{i, 1.0}, {n + j, 1.0}});
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += c[i * n + perm[i]];
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-12));

    // Dual feasibility and strong duality.
    double dual = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) dual += sol.y[i];
    CHECK(dual == doctest::Approx(best).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(sol.y[i] + sol.y[n + j] <= c[i * n + j] + 1e-12);
  }
}

TEST_CASE("alternative optimal vertices are reported") {
  // min x1 + x2 s.t. x1 + x2 = 1: every point of the segment is optimal.
  LinearProgram lp(1);
  lp.set_rhs(0, 1.0);
  lp.add_column(1.0, {{0, 1.0}});
  lp.add_column(1.0, {{0, 1.0}});
  LpOptions opt;
  opt.probe_alternatives = true;
  auto sol = solve_lp(lp, opt);
  REQUIRE(sol.status == LpStatus::optimal);
  REQUIRE(sol.alternatives.size() == 1);
  CHECK(sol.alternatives[0][0] + sol.alternatives[0][1] == doctest::Approx(1.0));
  CHECK(sol.alternatives[0] != sol.x);
}
