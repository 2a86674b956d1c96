#pragma once

#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "barylab/measure.hpp"
#include "barylab/space.hpp"

namespace barylab {

struct HeatParams {
  std::size_t knn = 8;
  // Bandwidth h as a multiple of the median nearest-neighbour distance.
  double bandwidth_factor = 2.0;
  // Explicit bandwidth; overrides the factor when set.
  std::optional<double> bandwidth;
};

struct HeatKernel {
  double t = 0.0;
  double bandwidth = 0.0;
  std::size_t knn = 0;
  // p_t(x, y), a density against the reference measure in y.
  Eigen::MatrixXd kernel;
  DiscreteSpace space;
};

// Spectral factorization of the measure-weighted graph Laplacian
// L f(i) = (1/m_i) sum_j w_ij (f(i) - f(j)), reused across times.
class HeatSemigroup {
 public:
  HeatSemigroup(const DiscreteSpace& space, const HeatParams& params = {});

  // Uses the given symmetric edge weights as-is.
  static HeatSemigroup from_weights(const DiscreteSpace& space, const Eigen::MatrixXd& weights);

  HeatKernel kernel(double t) const;

  const DiscreteSpace& space() const { return space_; }
  double bandwidth() const { return bandwidth_; }
  std::size_t knn() const { return knn_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }

  // Rebuilds from a stored factorization (kernel cache).
  HeatSemigroup(DiscreteSpace space, double bandwidth, std::size_t knn, Eigen::MatrixXd weights,
                Eigen::VectorXd evals, Eigen::MatrixXd evecs);

 private:
  HeatSemigroup() = default;
  void factorize();

  DiscreteSpace space_;
  double bandwidth_ = 0.0;
  std::size_t knn_ = 0;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

// Gaussian kNN edge weights; throws InvalidArgument when the graph is disconnected.
Eigen::MatrixXd heat_edge_weights(const DiscreteSpace& space, const HeatParams& params,
                                  double* bandwidth_out = nullptr);

HeatKernel heat_kernel(const DiscreteSpace& space, double t, const HeatParams& params = {});

// Phi_t[psi](x) = -t log sum_y exp(psi(y)/t) p_{t/2}(x, y) m(y). `heat` must be at time t/2.
Eigen::VectorXd soft_c_transform(const HeatKernel& heat, const Eigen::VectorXd& psi, double t);

double regularized_functional(const Measure& rho, const Eigen::VectorXd& phi_t);

struct GibbsFamily {
  double t = 0.0;
  Eigen::VectorXd psi;
  // Row x is the probability vector mu_x^t over the points.
  Eigen::MatrixXd rows;
  Eigen::VectorXd mixture;
};

GibbsFamily gibbs_family(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi,
                         double t);

struct KDerivatives {
  double dK_ds = 0.0;
  double d2K_ds2 = 0.0;
};

KDerivatives k_derivatives(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi0,
                           const Eigen::VectorXd& psi1, double s, double t);

// K_t evaluated along psi_s = psi0 + s (psi1 - psi0).
double k_along(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi0,
               const Eigen::VectorXd& psi1, double s, double t);

struct ConcentrationRatio {
  double lhs = 0.0;
  double rhs_core = 0.0;
  // Undefined when rhs_core vanishes.
  std::optional<double> kappa_hat;
};

ConcentrationRatio concentration_ratio(const Measure& rho, const HeatKernel& heat,
                                       const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                                       double s, double t);

}  // namespace barylab
