#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "barylab/measure.hpp"

namespace barylab {

class Executor;

// Greedy farthest-point insertion starting at point 0 until every point lies
// within r of the net.
std::vector<std::size_t> farthest_point_net(const DiscreteSpace& space, double r);

// Number of compositions of K into m nonnegative parts, saturating at UINT64_MAX.
std::uint64_t composition_count(std::size_t K, std::size_t m);

// Lattice K = ceil(m / delta): all weight vectors k / K with sum k = K. Every
// point of the simplex lies within l1 distance delta of the lattice. Throws
// CapExceeded when the lattice would exceed `cap` vectors.
std::vector<Eigen::VectorXd> simplex_net(std::size_t m, double delta, std::uint64_t cap = 5'000'000);

// Lattice vector reached from p by largest-remainder rounding.
Eigen::VectorXd round_to_lattice(const Eigen::VectorXd& p, std::size_t K);

struct NetParams {
  double epsilon = 0.5;
  std::size_t probes = 500;
  std::uint64_t seed = 1;
  std::uint64_t cap = 5'000'000;
};

struct NetResult {
  double epsilon = 0.0;
  double r = 0.0;
  double delta = 0.0;
  std::size_t m = 0;
  std::size_t lattice_K = 0;
  std::uint64_t cardinality = 0;
  std::vector<std::size_t> centers;
  // Net measures over the whole space; empty when only counted.
  std::vector<Measure> net;
  std::size_t probes = 0;
  double max_probe_distance = 0.0;
  double mean_probe_distance = 0.0;
  bool verified = false;
};

// Point net at r = epsilon / 2, lattice weights at delta = epsilon^2 / (2 D^2)
// with D the ground diameter, then Monte-Carlo verification with Dirichlet
// probes matched to the net element obtained by nearest-center projection and
// lattice rounding.
NetResult wasserstein_net(const DiscreteSpace& space, const NetParams& params,
                          const Executor* exec = nullptr);

// Smallest C > max epsilon with log N(eps) <= C eps^-n log(C / eps) for all pairs.
double fit_entropy_constant(const std::vector<double>& eps, const std::vector<double>& log_card, int n);

}  // namespace barylab
