#pragma once

#include <vector>

#include <Eigen/Dense>

#include "barylab/measure.hpp"
#include "barylab/space.hpp"

namespace barylab {

// Cost c(x, y) = dist(x, y)^2 / 2, cached on the space.
inline const Eigen::MatrixXd& cost_matrix(const DiscreteSpace& space) { return space.cost(); }

struct CTransformResult {
  Eigen::VectorXd phi;
  std::vector<std::size_t> argmin;
  // Set when the minimum is attained within 1e-12 at two or more points.
  std::vector<bool> tie;
};

// phi(x) = min_y [c(x, y) - psi(y)] for every x, with y over all points.
CTransformResult c_transform(const DiscreteSpace& space, const Eigen::VectorXd& psi);

// Same, with y restricted to `ys` (phi still evaluated at every x).
CTransformResult c_transform_over(const DiscreteSpace& space, const Eigen::VectorXd& psi,
                                  const std::vector<std::size_t>& ys);

enum class Normalization { none, zero_mean_phi, centered_at_base };

const char* to_string(Normalization tag);

// Dual pair for transport from rho (phi side) to mu (psi side). Both vectors
// are stored over every point of the space; phi = psi^c.
struct PotentialPair {
  Eigen::VectorXd phi;
  Eigen::VectorXd psi;
  Normalization tag = Normalization::none;
};

// Largest violation of phi(x) + psi(y) <= c(x, y) over x in supp(rho) and all y.
double constraint_violation(const Measure& rho, const PotentialPair& pair);

// Shifts (phi, psi) by opposite constants so that the requested normalization holds.
PotentialPair normalize(const PotentialPair& pair, const Measure& rho, Normalization tag,
                        std::size_t base = 0);

struct PlanEntry {
  std::size_t x;
  std::size_t y;
  double mass;
};

// Coupling between the source rho (rows) and the target mu (columns).
struct TransportPlan {
  std::vector<PlanEntry> entries;
  double total_cost = 0.0;

  Eigen::MatrixXd dense(std::size_t n) const;
};

struct W2Result {
  // Optimal value with cost d^2 / 2.
  double value = 0.0;
  double w2 = 0.0;
  TransportPlan plan;
  PotentialPair potentials;
  double gap = 0.0;
  std::size_t iterations = 0;
};

struct W2Options {
  Normalization normalization = Normalization::zero_mean_phi;
  double gap_tol = 1e-9;
};

// Exact W2 between mu (psi side) and rho (phi side).
W2Result solve_w2(const Measure& mu, const Measure& rho, const W2Options& options = {});

// value(mu, rho) - [sum psi dmu + sum phi drho]. Throws InvalidArgument when the
// pair violates the constraint by more than 1e-9.
double duality_gap(const Measure& mu, const Measure& rho, const PotentialPair& pair);
double duality_gap(double value, const Measure& mu, const Measure& rho, const PotentialPair& pair);

double w2_distance(const Measure& a, const Measure& b);

// Exact W1 between two finite weight vectors with a given ground-cost matrix.
double discrete_w1(const std::vector<double>& p, const std::vector<double>& q,
                   const Eigen::MatrixXd& ground);

class Executor;
class SecondOrderLaw;

Eigen::MatrixXd law_ground_distances(const SecondOrderLaw& P, const SecondOrderLaw& Q,
                                     const Executor* exec = nullptr);
double w1_between_laws(const SecondOrderLaw& P, const SecondOrderLaw& Q,
                       const Executor* exec = nullptr);

struct InterpolationResult {
  Eigen::VectorXd psi_s;
  Eigen::VectorXd phi_s;
  std::vector<std::size_t> T;
  std::vector<bool> tie;
};

InterpolationResult interpolation_map(const DiscreteSpace& space, const Eigen::VectorXd& psi0,
                                      const Eigen::VectorXd& psi1, double s);

}  // namespace barylab
