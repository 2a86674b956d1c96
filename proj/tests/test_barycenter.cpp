#include <doctest.h>

#include <cmath>

#include "barylab/barycenter.hpp"
#include "barylab/error.hpp"
#include "barylab/parallel.hpp"
#include "oracles.hpp"

using namespace barylab;

namespace {

std::vector<double> positions(const DiscreteSpace& s) {
  std::vector<double> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s.coords()(static_cast<Eigen::Index>(i), 0);
  return p;
}

SecondOrderLaw random_law(Rng& rng, const DiscreteSpace& s, std::size_t atoms, double zero_prob) {
  std::vector<Measure> ms;
  for (std::size_t i = 0; i < atoms; ++i) ms.push_back(make_measure(s, oracle::random_weights(rng, s.size(), zero_prob)));
  return SecondOrderLaw(ms, rng.dirichlet(atoms));
}

// Sum_i lambda_i psi_i, phi_i + psi_j <= c, and the dual value for each pair.
void check_balance(const SecondOrderLaw& P, const Measure& mu, const BalanceResult& b, double tol) {
  const auto& s = P.space();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < P.size(); ++i) sum += P[i].weight * b.potentials[i].psi;
  CHECK(sum.cwiseAbs().maxCoeff() <= tol);
  for (std::size_t i = 0; i < P.size(); ++i) {
    const auto& pr = b.potentials[i];
    double worst = -INFINITY;
    for (auto x : P[i].measure.support())
      for (Eigen::Index y = 0; y < static_cast<Eigen::Index>(s.size()); ++y)
        worst = std::max(worst, pr.phi[static_cast<Eigen::Index>(x)] + pr.psi[y] - s.cost()(static_cast<Eigen::Index>(x), y));
    CHECK(worst <= 1e-12);
    double dual = mu.weights().dot(pr.psi) + P[i].measure.weights().dot(pr.phi);
    CHECK(solve_w2(mu, P[i].measure).value - dual <= tol);
  }
}

}  // namespace

TEST_CASE("variance examples") {
  auto two = build_interval(2, 1.0);
  auto a = dirac(two, 0), b = dirac(two, 1);
  CHECK(variance(SecondOrderLaw({a}, {1.0}), a) == 0.0);
  CHECK(variance(SecondOrderLaw({a, b}, {0.5, 0.5}), a) == doctest::Approx(0.25));

  Rng rng(1);
  auto s = build_circle(20);
  auto P = random_law(rng, s, 3, 0.3), Q = random_law(rng, s, 2, 0.3);
  auto mu = make_measure(s, oracle::random_weights(rng, 20));
  const double alpha = 0.3;
  std::vector<Measure> atoms;
  std::vector<double> w;
  for (std::size_t i = 0; i < P.size(); ++i) {
    atoms.push_back(P[i].measure);
    w.push_back(alpha * P[i].weight);
  }
  for (std::size_t i = 0; i < Q.size(); ++i) {
    atoms.push_back(Q[i].measure);
    w.push_back((1 - alpha) * Q[i].weight);
  }
  CHECK(variance(SecondOrderLaw(atoms, w), mu) ==
        doctest::Approx(alpha * variance(P, mu) + (1 - alpha) * variance(Q, mu)).epsilon(1e-12));
  CHECK_THROWS_AS(variance(P, dirac(two, 0)), InvalidArgument);
}

TEST_CASE("two-Dirac interval barycenter beats every grid measure") {
  auto s = build_interval(3, 1.0);
  SecondOrderLaw P({dirac(s, 0), dirac(s, 2)}, {0.5, 0.5});
  auto r = solve_barycenter(P);
  CHECK(r.measure.weights() == Eigen::Vector3d(0, 1, 0));
  CHECK(r.variance_value == doctest::Approx(0.125).epsilon(1e-12));

  auto pos = positions(s);
  double best = INFINITY;
  const int steps = 100;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j) {
      Eigen::Vector3d m(i, j, steps - i - j);
      m /= steps;
      double v = 0.5 * oracle::line_w2_value(pos, m, Eigen::Vector3d(1, 0, 0)) +
                 0.5 * oracle::line_w2_value(pos, m, Eigen::Vector3d(0, 0, 1));
      best = std::min(best, v);
    }
  CHECK(r.variance_value <= best + 1e-12);
  CHECK(best == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("single-atom law returns its atom") {
  Rng rng(2);
  auto s = build_circle(15);
  auto rho = make_measure(s, oracle::random_weights(rng, 15));
  auto r = solve_barycenter(SecondOrderLaw({rho}, {1.0}));
  CHECK(r.measure.weights() == rho.weights());
  CHECK(r.variance_value == 0.0);
  auto b = balance_potentials(SecondOrderLaw({rho}, {1.0}), rho);
  CHECK(b.potentials[0].psi == Eigen::VectorXd::Zero(15));
  CHECK(b.potentials[0].phi == Eigen::VectorXd::Zero(15));
}

TEST_CASE("antipodal Diracs on a circle have a non-unique barycenter") {
  auto s = build_circle(8, 1.0);
  SecondOrderLaw P({dirac(s, 0), dirac(s, 4)}, {0.5, 0.5});
  auto r = solve_barycenter(P);
  CHECK(r.non_unique);
  CHECK(r.variance_value == doctest::Approx(0.5 * 0.25 * 0.25).epsilon(1e-12));
  // Both quarter points are optimal.
  CHECK(variance(P, dirac(s, 2)) == doctest::Approx(r.variance_value).epsilon(1e-12));
  CHECK(variance(P, dirac(s, 6)) == doctest::Approx(r.variance_value).epsilon(1e-12));

  auto line = build_interval(5);
  CHECK_FALSE(solve_barycenter(SecondOrderLaw({dirac(line, 0), dirac(line, 4)}, {0.5, 0.5})).non_unique);
}

TEST_CASE("barycenter optimality certificate and result invariants") {
  Rng rng(3);
  Executor pool(4);
  for (int trial = 0; trial < 8; ++trial) {
    auto s = trial % 2 ? build_circle(14) : build_interval(16);
    auto P = random_law(rng, s, 2 + rng.index(3), 0.4);
    auto r = solve_barycenter(P, {}, &pool);
    double check = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      check += P[i].weight * solve_w2(r.measure, P[i].measure).value;
      CHECK(r.per_atom_gaps[i] <= 1e-8);
    }
    CHECK(r.variance_value == doctest::Approx(check).epsilon(1e-10));
    for (int c = 0; c < 20; ++c) {
      auto other = make_measure(s, oracle::random_weights(rng, s.size(), rng.uniform()));
      CHECK(variance(P, other) >= r.variance_value - 1e-8);
    }
    for (std::size_t i = 0; i < P.size(); ++i)
      CHECK(variance(P, P[i].measure) >= r.variance_value - 1e-8);
    auto serial = solve_barycenter(P);
    CHECK(serial.measure.weights() == r.measure.weights());
  }
}

TEST_CASE("balance normalization") {
  Rng rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    auto s = trial % 2 ? build_circle(12) : build_interval(14);
    auto P = random_law(rng, s, 2 + rng.index(3), 0.3);
    auto bary = solve_barycenter(P);
    auto b = balance_potentials(P, bary.measure);
    CHECK(b.residual <= 1e-8);
    CHECK(b.iterations <= 500);
    CHECK(b.residual_trace.size() == b.iterations);
    check_balance(P, bary.measure, b, 1e-8);

    // A constant added to one starting potential is absorbed.
    BalanceOptions opt;
    opt.initial = bary.balanced_duals;
    opt.initial[0].psi.array() += 0.37;
    auto shifted = balance_potentials(P, bary.measure, opt);
    CHECK(shifted.residual <= 1e-8);
    check_balance(P, bary.measure, shifted, 1e-8);
  }

  auto s = build_interval(10);
  SecondOrderLaw P({dirac(s, 0), dirac(s, 9)}, {0.5, 0.5});
  CHECK_THROWS_AS(balance_potentials(P, dirac(s, 0)), InvalidArgument);
  BalanceOptions tiny;
  tiny.max_iters = 0;
  CHECK_THROWS_AS(balance_potentials(P, solve_barycenter(P).measure, tiny), BalanceError);
}

TEST_CASE("deficit") {
  Rng rng(5);
  auto s = build_interval(40, 1.0);
  auto pos = positions(s);
  GoodMeasureParams good{0.5, 2.0, 1.0, 1.0, 1.0};
  for (int trial = 0; trial < 30; ++trial) {
    auto rho = sample_good_measure(s, good, all_points(s), rng.bits());
    auto mu0 = make_measure(s, oracle::random_weights(rng, 40, 0.3));
    auto mu1 = make_measure(s, oracle::random_weights(rng, 40, 0.3));
    auto psi0 = solve_w2(mu0, rho).potentials.psi;
    double D = deficit(rho, mu0, mu1, psi0);
    CHECK(D >= -1e-9);
    double raw = oracle::line_w2_value(pos, mu1.weights(), rho.weights()) -
                 oracle::line_w2_value(pos, mu0.weights(), rho.weights()) -
                 psi0.dot(mu1.weights() - mu0.weights());
    CHECK(D == doctest::Approx(raw).epsilon(1e-8).scale(1.0));
    CHECK(deficit(rho, mu0, mu0, psi0) == 0.0);
    Eigen::VectorXd moved = psi0.array() + 3.25;
    CHECK(std::abs(deficit(rho, mu0, mu1, moved) - D) <= 1e-14);
  }
  auto rho = uniform_measure(s);
  auto mu0 = dirac(s, 0);
  Eigen::VectorXd wrong = Eigen::VectorXd::LinSpaced(40, 0, 5);
  CHECK_THROWS_AS(deficit(rho, mu0, dirac(s, 1), wrong), InvalidArgument);
}

TEST_CASE("modulus") {
  ModulusParams p{1, 1, 1, 1, 0.5};
  CHECK(modulus(0.0, p) == 0.0);
  CHECK(modulus(0.5, p) == doctest::Approx(std::pow(0.5, 12) / (1 + std::log(2.0))).epsilon(1e-14));
  CHECK(modulus(0.5, p) == doctest::Approx(1.4418e-4).epsilon(1e-4));
  CHECK_THROWS_AS(modulus(-0.1, p), InvalidArgument);
  CHECK_THROWS_AS(modulus(1.1, p), InvalidArgument);
  CHECK_THROWS_AS(modulus(0.5, ModulusParams{0, 1, 1, 1, 0.5}), InvalidArgument);

  auto s = build_circle(20, 1.0);
  auto q = ModulusParams::for_space(s);
  CHECK(q.D_W == s.wasserstein_diameter());
  for (double sigma : {0.1, 0.5, 2.0}) {
    q.sigma = sigma;
    double c = c_sigma(q);
    CHECK(c > 0.0);
    for (int k = 0; k <= 50; ++k) {
      double t = q.D_W * std::pow(10.0, -8.0 * k / 50.0);
      CHECK(modulus(t, q) >= c * std::pow(t, 12 + sigma) * (1 - 1e-9));
    }
  }
}
