#include <doctest.h>

#include <cmath>
#include <numbers>

#include "barylab/error.hpp"
#include "barylab/fit.hpp"
#include "barylab/lab.hpp"
#include "barylab/nets.hpp"
#include "barylab/parallel.hpp"
#include "barylab/report.hpp"
#include "oracles.hpp"

using namespace barylab;

namespace {

Measure bump(const DiscreteSpace& s, double center, double width) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double x = s.coords()(i, 0) - center;
    w[i] = std::exp(-x * x / (2 * width * width)) + 1e-3;
  }
  return make_measure(s, w);
}

SecondOrderLaw three_bumps(const DiscreteSpace& s) {
  GoodMeasureParams good{0.5, 2.0, 1.0, 1.0, 1.0};
  return SecondOrderLaw(std::vector<LawAtom>{{uniform_measure(s), 0.3, good},
                                             {bump(s, 0.5, 0.1), 0.4, std::nullopt},
                                             {bump(s, 0.8, 0.1), 0.3, std::nullopt}});
}

double l1(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().sum(); }

}  // namespace

TEST_CASE("line fits") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual <= 1e-12);

  std::vector<double> X, Y;
  for (double v : {0.01, 0.1, 1.0, 10.0}) {
    X.push_back(v);
    Y.push_back(3 * std::sqrt(v));
  }
  X.push_back(1e-9);
  Y.push_back(5.0);
  auto g = fit_loglog(X, Y);
  CHECK(g.used == 4);
  CHECK(g.slope == doctest::Approx(0.5));
  CHECK_THROWS_AS(fit_line({1.0}, {1.0}), InvalidArgument);
  CHECK(fit_through_origin({1, 2}, {2, 4}) == doctest::Approx(2.0));
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(mean({1, 2, 3}) == 2.0);
}

TEST_CASE("scan report output") {
  ScanReport r;
  r.experiment = "demo";
  r.seed = 7;
  r.columns = {"a", "b"};
  r.add_row("x", {0.1, 2.0});
  r.add_row("y", {NAN, 1e-300});
  CHECK_THROWS_AS(r.add_row("z", {1.0}), InvalidArgument);
  r.attach_config({{"kind", "demo"}, {"n", 3}});
  CHECK(r.config_hash == config_hash(nlohmann::json{{"n", 3}, {"kind", "demo"}}));
  CHECK(r.config_hash != config_hash(nlohmann::json{{"n", 4}, {"kind", "demo"}}));
  auto csv = r.csv();
  CHECK(csv.rfind("config_hash,seed,row,label,a,b\n", 0) == 0);
  CHECK(csv.find(r.config_hash + ",7,0,x,0.1,2\n") != std::string::npos);
  CHECK(csv.find("1e-300") != std::string::npos);
  CHECK(r.column_values("b") == std::vector<double>{2.0, 1e-300});
  r.add_check("ok", true);
  r.add_fit("slope", 1.5);
  CHECK(r.all_passed());
  CHECK(*r.fit("slope") == 1.5);
  auto j = r.to_json(true);
  CHECK(j["partial"] == false);
  CHECK(j["seed"] == 7);
  CHECK(j["rows"][1]["values"][0].is_string());
  r.add_check("bad", false, "detail");
  CHECK_FALSE(r.all_passed());
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("measure perturbations") {
  auto s = build_circle(20, 1.0);
  auto mu = bump(s, 0.3, 0.05);
  CHECK(perturb_measure(mu, {PerturbFamily::mass_shift}, 0.0).weights() == mu.weights());
  CHECK(perturb_measure(mu, {PerturbFamily::tilt}, 0.0).weights().isApprox(mu.weights(), 1e-15));

  auto d = dirac(s, 3);
  auto moved = perturb_measure(d, {PerturbFamily::translate}, 2.0);
  CHECK(moved.weights()[5] == 1.0);
  auto wrapped = perturb_measure(dirac(s, 19), {PerturbFamily::translate}, 1.0);
  CHECK(wrapped.weights()[0] == 1.0);
  CHECK(w2_distance(d, perturb_measure(d, {PerturbFamily::translate}, 1.0)) ==
        doctest::Approx(0.05 / std::sqrt(2.0)));

  PerturbSpec spec{PerturbFamily::mass_shift, 0, 10};
  auto half = perturb_measure(uniform_measure(s), spec, 0.5);
  CHECK(half.weights()[0] == doctest::Approx(0.025));
  CHECK(half.weights()[10] == doctest::Approx(0.075));
  CHECK_THROWS_AS(perturb_measure(mu, spec, 1.5), InvalidArgument);
  CHECK_THROWS_AS(perturb_measure(dirac(build_sphere(30), 0), {PerturbFamily::translate}, 1.0), InvalidArgument);
  CHECK(perturb_family_from_string("tilt") == PerturbFamily::tilt);
  CHECK_THROWS_AS(perturb_family_from_string("spin"), InvalidArgument);

  auto line = build_interval(30);
  auto P = three_bumps(line);
  auto W = perturb_law(P, LawPerturbation::weight_jitter, 0.1);
  CHECK(W[0].weight == doctest::Approx(0.4));
  CHECK(W[1].weight == doctest::Approx(0.3));
  auto extra = dirac(line, 15);
  auto A = perturb_law(P, LawPerturbation::atom_addition, 0.2, &extra);
  CHECK(A.size() == 4);
  CHECK(A[3].weight == doctest::Approx(0.2));
  CHECK_THROWS_AS(perturb_law(P, LawPerturbation::atom_addition, 0.2), InvalidArgument);
}

TEST_CASE("point nets") {
  auto c = build_circle(64, 1.0);
  auto net = farthest_point_net(c, 0.25);
  CHECK(net.size() == 2);
  for (Eigen::Index x = 0; x < 64; ++x) {
    double best = INFINITY;
    for (auto i : net) best = std::min(best, c.dist()(x, static_cast<Eigen::Index>(i)));
    CHECK(best <= 0.25);
  }
  CHECK(farthest_point_net(c, 0.5).size() == 1);
  auto cone = build_cone(40, 2.0);
  for (double r : {0.05, 0.2, 0.6}) {
    auto n2 = farthest_point_net(cone, r);
    CHECK(n2.size() <= cone.size());
    for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(cone.size()); ++x) {
      double best = INFINITY;
      for (auto i : n2) best = std::min(best, cone.dist()(x, static_cast<Eigen::Index>(i)));
      CHECK(best <= r);
    }
  }
}

TEST_CASE("simplex nets") {
  auto one = simplex_net(1, 0.3);
  REQUIRE(one.size() == 1);
  CHECK(one[0][0] == 1.0);

  auto two = simplex_net(2, 1.0);
  REQUIRE(two.size() == 3);
  std::vector<std::pair<double, double>> got;
  for (const auto& v : two) got.emplace_back(v[0], v[1]);
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::pair<double, double>>{{0, 1}, {0.5, 0.5}, {1, 0}});
  CHECK(composition_count(2, 2) == 3);
  CHECK(composition_count(10, 3) == 66);
  CHECK(composition_count(1000000, 100) == UINT64_MAX);

  Rng rng(3);
  for (std::size_t m : {2, 3, 5}) {
    const double delta = 0.4;
    auto grid = simplex_net(m, delta);
    CHECK(grid.size() == composition_count(static_cast<std::size_t>(std::ceil(m / delta)), m));
    for (int k = 0; k < 1000 / 3; ++k) {
      auto p = rng.dirichlet(m);
      Eigen::VectorXd q = Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(m));
      double best = INFINITY;
      for (const auto& g : grid) best = std::min(best, l1(q, g));
      CHECK(best <= delta);
    }
  }
  CHECK_THROWS_AS(simplex_net(40, 0.01, 1000), CapExceeded);
}

TEST_CASE("Wasserstein nets") {
  auto c = build_circle(16, 1.0);
  NetParams p;
  p.epsilon = 0.4;
  p.probes = 500;
  auto big = wasserstein_net(c, p);
  CHECK(big.cardinality == 1);
  CHECK(big.verified);

  p.epsilon = 0.3;
  Executor pool(4);
  auto r = wasserstein_net(c, p, &pool);
  CHECK(r.verified);
  CHECK(r.probes == 500);
  CHECK(r.max_probe_distance <= 0.3);
  CHECK(r.cardinality == r.net.size());
  CHECK(r.r == doctest::Approx(0.15));
  CHECK(r.delta == doctest::Approx(0.09 / (2 * 0.25)));
  auto serial = wasserstein_net(c, p);
  CHECK(serial.max_probe_distance == r.max_probe_distance);

  std::vector<double> eps, lc;
  for (double e : {0.34, 0.3, 0.27}) {
    NetParams q;
    q.epsilon = e;
    q.probes = 50;
    auto n = wasserstein_net(c, q, &pool);
    eps.push_back(e);
    lc.push_back(std::log(static_cast<double>(n.cardinality)));
  }
  double C = fit_entropy_constant(eps, lc, 1);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(lc[i] <= C / eps[i] * std::log(C / eps[i]) + 1e-12);
}

TEST_CASE("deficit scan") {
  auto s = build_interval(40, 1.0);
  auto rho = uniform_measure(s);
  auto mu0 = bump(s, 0.4, 0.15);
  GoodMeasureParams good{0.5, 2.0, 1.0, 1.0, 1.0};
  std::vector<FamilyScan> fam{{{PerturbFamily::mass_shift}, {1.0, 0.8, 0.6, 0.4, 0.3, 0.0}},
                              {{PerturbFamily::translate}, {3.0, 2.0, 1.0, 0.5}},
                              {{PerturbFamily::tilt}, {1.0, 0.5, 0.25}}};
  Executor pool(8);
  auto rep = deficit_scan(rho, mu0, good, fam, 11, &pool);
  CHECK(rep.all_passed());
  for (double D : rep.column_values("D")) CHECK(D >= -1e-8);
  CHECK(rep.rows[5].values[2] == 0.0);
  auto e = rep.fit("exponent");
  REQUIRE(e);
  CHECK(*e > 0.0);
  CHECK(*e <= 12.0);
  CHECK(*rep.fit("A1") > 0.0);
  CHECK(deficit_scan(rho, mu0, good, fam, 11).csv() == rep.csv());

  auto spiky = dirac(s, 0);
  CHECK_THROWS_AS(deficit_scan(spiky, mu0, good, fam, 1), InvalidArgument);
  std::vector<FamilyScan> up{{{PerturbFamily::tilt}, {0.1, 0.2}}};
  CHECK_THROWS_AS(deficit_scan(rho, mu0, good, up, 1), InvalidArgument);
}

TEST_CASE("g probe") {
  auto s = build_interval(40, 1.0);
  auto rho = uniform_measure(s);
  auto mu0 = bump(s, 0.3, 0.1), mu1 = bump(s, 0.6, 0.15);
  auto p0 = solve_w2(mu0, rho).potentials, p1 = solve_w2(mu1, rho).potentials;
  Executor pool(4);
  auto same = g_probe(rho, mu0, p0, mu0, p0, 50, &pool);
  CHECK(*same.fit("integral_g") == 0.0);
  CHECK(same.all_passed());

  auto r = g_probe(rho, mu0, p0, mu1, p1, 200, &pool);
  CHECK(r.all_passed());
  CHECK(*r.fit("identity_error") <= 1e-3);
  CHECK(*r.fit("refinement_ratio") <= 0.6);
  CHECK(*r.fit("C2_hat") > 0.0);
  CHECK(r.rows.size() == 201);

  auto bad = p0;
  bad.tag = Normalization::none;
  CHECK_THROWS_AS(g_probe(rho, mu0, bad, mu1, p1, 10), InvalidArgument);
}

TEST_CASE("potential and map stability probes") {
  auto c = build_circle(60, 1.0);
  auto rho = uniform_measure(c);
  auto pairs = random_measure_pairs(c, 30, 5);
  Executor pool(4);
  auto pot = potential_stability_probe(rho, pairs, 5, &pool);
  CHECK(pot.all_passed());
  CHECK(pot.rows.size() == 30);
  CHECK(std::isfinite(*pot.fit("C_hat_max")));
  MeasurePairs few(pairs.begin(), pairs.begin() + 3);
  CHECK(potential_stability_probe(rho, few, 5, &pool).csv() == potential_stability_probe(rho, few, 5).csv());

  MeasurePairs same{{pairs[0].first, pairs[0].first}};
  CHECK(potential_stability_probe(rho, same, 5).rows.empty());
  CHECK(map_stability_probe(rho, same, 5).rows.empty());
  auto phi = solve_w2(pairs[0].first, rho).potentials.phi;
  Eigen::VectorXd lifted = phi.array() + 0.2;
  CHECK_THROWS_AS(potential_stability_row(rho, phi, lifted), InvalidArgument);

  auto circ = map_stability_probe(rho, random_measure_pairs(c, 10, 6), 6, &pool);
  CHECK(circ.check("C_exp_finite")->passed);
  CHECK(circ.check("flat_isometry") == nullptr);

  auto line = build_interval(60, 1.0);
  auto flat = map_stability_probe(uniform_measure(line), random_measure_pairs(line, 10, 7), 7, &pool);
  CHECK(flat.all_passed());
  CHECK(std::abs(*flat.fit("C_exp_hat") - 1.0) <= 0.05);

  CHECK_THROWS_AS(discrete_gradient(build_sphere(20), Eigen::VectorXd::Zero(20)), InvalidArgument);
  Eigen::VectorXd lin = line.coords().col(0) * 3.0;
  CHECK((discrete_gradient(line, lin).array() - 3.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("barycenter stability scan") {
  auto s = build_interval(30, 1.0);
  auto P = three_bumps(s);
  auto extra = bump(s, 0.5, 0.3);
  std::vector<LawFamilyScan> fam{{LawPerturbation::atom_jitter, {0.8, 0.4, 0.2, 0.1}},
                                 {LawPerturbation::weight_jitter, {0.2, 0.1}},
                                 {LawPerturbation::atom_addition, {0.2, 0.1, 0.0}}};
  Executor pool(4);
  auto r = barycenter_stability_scan(P, fam, &extra, 0.5, 3, &pool);
  CHECK(r.all_passed());
  CHECK(*r.fit("alpha_bound") == doctest::Approx(1 / 12.5));
  CHECK(*r.fit("alpha") >= 1 / 12.5 - 0.05);
  const auto x = r.column_values("W1"), y = r.column_values("W2");
  const double C = *r.fit("C_hat");
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::pow(y[i], 12.5) <= C * x[i] * (1 + 1e-12));
  CHECK(x.back() == 0.0);
  CHECK(y.back() == 0.0);

  SecondOrderLaw plain({bump(s, 0.2, 0.1), bump(s, 0.8, 0.1)}, {0.5, 0.5});
  CHECK_THROWS_AS(barycenter_stability_scan(plain, fam, &extra, 0.5, 3), InvalidArgument);
}

TEST_CASE("empirical rate experiment") {
  auto s = build_interval(25, 1.0);
  Executor pool(8);
  RateOptions opt;
  opt.N_list = {8, 32, 128};
  opt.trials = 4;
  auto rho = bump(s, 0.5, 0.2);
  auto trivial = empirical_rate_experiment(SecondOrderLaw({rho}, {1.0}), opt, 9, &pool);
  for (double v : trivial.column_values("W1")) CHECK(v == 0.0);
  for (double v : trivial.column_values("W2")) CHECK(v == 0.0);
  CHECK(trivial.check("rate_exponent") == nullptr);
  CHECK_FALSE(trivial.partial);

  SecondOrderLaw P({bump(s, 0.1, 0.08), bump(s, 0.4, 0.08), bump(s, 0.6, 0.08), bump(s, 0.9, 0.08)},
                   {0.2, 0.3, 0.25, 0.25});
  opt.N_list = {8, 16, 32, 64, 128, 256, 512};
  opt.trials = 20;
  auto r = empirical_rate_experiment(P, opt, 21, &pool);
  CHECK(r.rows.size() == 140);
  CHECK(r.check("rate_exponent")->passed);
  CHECK(r.check("consistency")->passed);
  CHECK(std::abs(*r.fit("W1_rate") + 0.5) <= 0.15);
  RateOptions small;
  small.N_list = {8, 16};
  small.trials = 3;
  CHECK(empirical_rate_experiment(P, small, 21).csv() == empirical_rate_experiment(P, small, 21, &pool).csv());

  opt.N_list = {16, 8};
  CHECK_THROWS_AS(empirical_rate_experiment(P, opt, 1), InvalidArgument);

  auto J = jittered_law(P, 3, 0.2, 4);
  CHECK(J.size() == 12);
  CHECK(J[0].weight == doctest::Approx(0.2 / 3));
}

TEST_CASE("heat probes") {
  auto s = build_interval(30);
  HeatSemigroup H(s);
  Executor pool(4);
  auto d = derivative_check(H, 5, {0.2, 0.05, 0.01}, 2, &pool);
  CHECK(d.rows.size() == 15);
  CHECK(d.all_passed());

  auto h = heat_limit_probe(H, 3, {0.1, 0.05, 0.025}, 0.05, 4, &pool);
  CHECK(h.rows.size() == 9);
  CHECK(h.check("monotone")->passed);
  CHECK(h.csv() == heat_limit_probe(H, 3, {0.1, 0.05, 0.025}, 0.05, 4).csv());

  Rng rng(6);
  Eigen::VectorXd a(30), b(30);
  for (auto& x : a) x = rng.uniform(-0.1, 0.1);
  for (auto& x : b) x = rng.uniform(-0.1, 0.1);
  auto k = kappa_scan(H, uniform_measure(s), a, b, 0.5, {0.1, 0.05});
  CHECK(k.rows.size() == 2);
}
