#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "barylab/error.hpp"
#include "barylab/measure.hpp"
#include "barylab/space.hpp"
#include "oracles.hpp"

using namespace barylab;

namespace {

DiscreteSpace custom_space(Eigen::MatrixXd d) {
  SpaceData s;
  s.label = "custom";
  s.dist = std::move(d);
  s.ref_measure = Eigen::VectorXd::Ones(s.dist.rows());
  return DiscreteSpace(std::move(s));
}

}  // namespace

TEST_CASE("model space builders") {
  auto iv = build_interval(3, 1.0);
  CHECK(iv.dist()(0, 2) == 1.0);
  CHECK(iv.diameter() == 1.0);
  CHECK(iv.ref_measure().sum() == doctest::Approx(1.0));

  auto ci = build_circle(4, 1.0);
  CHECK(ci.dist()(0, 2) == 0.5);
  CHECK(ci.dist()(1, 3) == 0.5);
  CHECK(ci.diameter() == 0.5);

  CHECK_THROWS_AS(build_interval(1), InvalidArgument);
  CHECK_THROWS_AS(build_cone(64, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_cone(64, 2 * std::numbers::pi), InvalidArgument);
}

TEST_CASE("every builder passes validate_metric") {
  for (auto s : {build_interval(30), build_circle(31), build_sphere(40), build_cone(50, 2.0),
                 build_cone(64, std::numbers::pi)}) {
    auto r = validate_metric(s);
    CHECK_MESSAGE(r.ok(), s.label());
    CHECK(s.ref_measure().minCoeff() > 0.0);
  }
}

TEST_CASE("validate_metric flags asymmetry and triangle violations") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 2, 0;
  auto r = validate_metric(custom_space(a));
  CHECK_FALSE(r.ok());
  CHECK_FALSE(r.symmetric);
  CHECK(r.worst_kind == "asymmetry");

  Eigen::MatrixXd t(3, 3);
  t << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  r = validate_metric(custom_space(t));
  CHECK_FALSE(r.triangle);
  CHECK(r.worst_kind == "triangle");
  CHECK(r.worst_violation == doctest::Approx(1.0));
}

TEST_CASE("cone distances agree with fine-mesh shortest paths") {
  const double angle = std::numbers::pi;
  auto cone = build_cone(64, angle, 1.0);
  const double coarse = std::sqrt(0.5 * angle / 64.0);
  auto fine = oracle::cone_dijkstra(cone.coords(), angle, 1.0, coarse / 10.0, 6.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index j = 0; j < 64; ++j)
      if (i != j) worst = std::max(worst, std::abs(cone.dist()(i, j) - fine(i, j)) / fine(i, j));
  CHECK(worst <= 0.02);
}

TEST_CASE("circle and sphere distances respect the layout symmetry") {
  auto ci = build_circle(24);
  for (Eigen::Index i = 0; i < 24; ++i)
    for (Eigen::Index j = 0; j < 24; ++j) CHECK(ci.dist()(i, j) == ci.dist()((i + 5) % 24, (j + 5) % 24));
  auto sp = build_sphere(30);
  // The Fibonacci layout is symmetric under z -> -z with index i -> n-1-i.
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j)
      CHECK(sp.dist()(i, j) == doctest::Approx(sp.dist()(29 - i, 29 - j)).epsilon(1e-9));
}

TEST_CASE("mesh file spaces") {
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "barylab_test_mesh.txt").string();
  {
    std::ofstream f(path);
    f << "# square split in two triangles\nlabel square\ndim 2\n"
      << "v 0 0\nv 1 0\nv 1 1\nv 0 1\n"
      << "f 0 1 2\nf 0 2 3\n";
  }
  auto s = build_mesh_file(path);
  CHECK(s.size() == 4);
  CHECK(s.dist()(0, 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.dist()(1, 3) == doctest::Approx(2.0));
  CHECK(s.ref_measure().sum() == doctest::Approx(1.0));
  CHECK(validate_metric(s).ok());

  {
    std::ofstream f(path);
    f << "v 0\nv 1\nv 2\ne 0 1 1.0\n";
  }
  CHECK_THROWS_AS(build_mesh_file(path), InvalidArgument);
  {
    std::ofstream f(path);
    f << "v 0\nv 1\ne 0 7 1.0\n";
  }
  CHECK_THROWS_AS(build_mesh_file(path), InvalidArgument);
  {
    std::ofstream f(path);
    f << "v 0\nbogus\n";
  }
  CHECK_THROWS_AS(build_mesh_file(path), InvalidArgument);
  std::filesystem::remove(path);
}

TEST_CASE("make_measure") {
  auto s3 = build_interval(3);
  auto m = make_measure(s3, Eigen::Vector3d(2, 0, 0));
  CHECK(m.weights() == Eigen::Vector3d(1, 0, 0));
  CHECK(m.support() == std::vector<std::size_t>{0});
  auto q = make_measure(s3, Eigen::Vector3d(1, 2, 1));
  CHECK(q[0] == 0.25);
  CHECK(q[1] == 0.5);
  CHECK(q[2] == 0.25);
  auto s2 = build_interval(2);
  auto h = make_measure(s2, Eigen::Vector2d(1, 1));
  CHECK(h[0] == 0.5);

  CHECK_THROWS_AS(make_measure(s3, Eigen::Vector3d(0, 0, 0)), InvalidArgument);
  CHECK_THROWS_AS(make_measure(s3, Eigen::Vector3d(1, -1, 1)), InvalidArgument);
  CHECK_THROWS_AS(make_measure(s3, Eigen::Vector2d(1, 1)), InvalidArgument);

  Rng rng(3);
  auto s = build_circle(40);
  for (int k = 0; k < 20; ++k) {
    auto a = make_measure(s, oracle::random_weights(rng, 40, 0.3));
    auto b = make_measure(s, a.weights());
    CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("good measures") {
  auto s = build_interval(50, 1.0);
  GoodMeasureParams flat{1.0, 1.0, 1.0, 1.0, 1.0};
  auto u = sample_good_measure(s, flat, all_points(s), 7);
  auto ref = uniform_measure(s);
  CHECK((u.weights() - ref.weights()).cwiseAbs().maxCoeff() <= 1e-14);

  GoodMeasureParams p{0.5, 2.0, 1.0, 1.0, 1.0};
  auto a = sample_good_measure(s, p, all_points(s), 11);
  auto b = sample_good_measure(s, p, all_points(s), 11);
  CHECK(a.weights() == b.weights());

  std::vector<std::size_t> half;
  for (std::size_t i = 10; i < 35; ++i) half.push_back(i);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (const auto& dom : {all_points(s), half}) {
      auto m = sample_good_measure(s, p, dom, seed);
      auto check = check_density_bounds(m, p, dom);
      CHECK(check.support_in_domain);
      CHECK(check.ratio <= 4.0 * (1 + 1e-12));
      CHECK(check.ok);
      GoodMeasureParams relaxed = p;
      relaxed.m_lower /= 1.01;
      relaxed.M_upper *= 1.01;
      CHECK(check_density_bounds(m, relaxed, dom).ok);
    }
  }
  CHECK_THROWS_AS(sample_good_measure(s, p, {}, 1), InvalidArgument);

  CHECK(check_density_bounds(uniform_measure(s), p, all_points(s)).ok);
  auto big = build_interval(100);
  CHECK_FALSE(check_density_bounds(dirac(big, 40), p, all_points(big)).ok);
}

TEST_CASE("second-order laws") {
  auto s = build_interval(5);
  auto a = dirac(s, 0), b = dirac(s, 4);
  SecondOrderLaw P({a, b, a}, {0.25, 0.5, 0.25});
  auto c = P.compacted();
  CHECK(c.size() == 2);
  CHECK(c[0].weight == 0.5);
  CHECK_THROWS_AS(SecondOrderLaw({a, b}, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(SecondOrderLaw({a, dirac(build_circle(5), 0)}, {0.5, 0.5}), InvalidArgument);
}
