#pragma once

#include <string>
#include <vector>

#include "barylab/error.hpp"
#include "barylab/measure.hpp"
#include "barylab/transport.hpp"

namespace barylab {

class Executor;

double variance(const SecondOrderLaw& P, const Measure& mu, const Executor* exec = nullptr);

struct BarycenterResult {
  Measure measure;
  double variance_value = 0.0;
  // Pair i transports atom i (phi side) to the barycenter (psi side).
  std::vector<PotentialPair> per_atom_potentials;
  std::vector<double> per_atom_gaps;
  std::string solver_status;
  bool non_unique = false;
  // Raw joint-LP duals; sum_i lambda_i psi_i vanishes identically.
  std::vector<PotentialPair> balanced_duals;
  std::size_t iterations = 0;
};

struct BarycenterOptions {
  bool detect_non_uniqueness = true;
};

BarycenterResult solve_barycenter(const SecondOrderLaw& P, const BarycenterOptions& options = {},
                                  const Executor* exec = nullptr);

struct BalanceResult {
  std::vector<PotentialPair> potentials;
  std::vector<double> residual_trace;
  std::vector<double> gaps;
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct BalanceOptions {
  double tol = 1e-8;
  std::size_t max_iters = 500;
  std::size_t base_point = 0;
  // Starting potentials; the joint-LP duals are used when empty.
  std::vector<PotentialPair> initial;
};

// Thrown when the balance loop exhausts its budget; carries the residual trace.
class BalanceError : public ConvergenceError {
 public:
  BalanceError(const std::string& what, std::vector<double> trace)
      : ConvergenceError(what), residual_trace(std::move(trace)) {}
  std::vector<double> residual_trace;
};

BalanceResult balance_potentials(const SecondOrderLaw& P, const Measure& mu_P,
                                 const BalanceOptions& options = {}, const Executor* exec = nullptr);

double deficit(const Measure& rho, const Measure& mu0, const Measure& mu1, const Eigen::VectorXd& psi0);

struct ModulusParams {
  double A1 = 1.0;
  double A2 = 1.0;
  double A3 = 1.0;
  double D_W = 1.0;
  double sigma = 0.5;

  static ModulusParams for_space(const DiscreteSpace& space, double A1 = 1.0, double A2 = 1.0,
                                 double A3 = 1.0, double sigma = 0.5);
  void validate() const;
};

double modulus(double t, const ModulusParams& params);

// min over a log grid on (0, D_W] of modulus(t) / t^(12 + sigma).
double c_sigma(const ModulusParams& params, std::size_t grid = 400, double decades = 12.0);

}  // namespace barylab
