#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "barylab/barycenter.hpp"
#include "barylab/heatreg.hpp"
#include "barylab/measure.hpp"
#include "barylab/perturb.hpp"
#include "barylab/report.hpp"
#include "barylab/transport.hpp"

namespace barylab {

class Executor;

struct FamilyScan {
  PerturbSpec spec;
  // Nonincreasing, nonnegative.
  std::vector<double> scales;
};

// Deficit D_rho(mu1, mu0) against R = W2(mu0, mu1) for each perturbation,
// with the largest A1 (A2 = A3 = 1) such that D >= modulus(R) on every row.
ScanReport deficit_scan(const Measure& rho, const Measure& mu0, const GoodMeasureParams& good,
                        const std::vector<FamilyScan>& families, std::uint64_t seed,
                        const Executor* exec = nullptr);

// g(s) = || v o T_s - E_rho(v o T_s) ||_{L1(rho)} on a uniform s-grid with
// `cells` cells, its trapezoid integral, and the integrated identity
// int_0^1 (v o T_s - mean) ds = phi0 - phi1 checked with the midpoint rule on
// `cells` and 2 * `cells` cells. Potentials must carry zero_mean_phi.
ScanReport g_probe(const Measure& rho, const Measure& mu0, const PotentialPair& pot0, const Measure& mu1,
                   const PotentialPair& pot1, std::size_t cells, const Executor* exec = nullptr);

// Finite-difference gradient on interval (one-sided at the ends) and circle
// (periodic) spaces. Throws InvalidArgument on other spaces.
Eigen::VectorXd discrete_gradient(const DiscreteSpace& space, const Eigen::VectorXd& f);

struct PotentialRow {
  double L = 0.0;
  double Rq = 0.0;
};

// L = sum rho |grad phi1 - grad phi0|^2 and Rq = (sum rho |phi1 - phi0|^2)^(1/3).
// Both potentials must have zero rho-mean.
PotentialRow potential_stability_row(const Measure& rho, const Eigen::VectorXd& phi0,
                                     const Eigen::VectorXd& phi1);

using MeasurePairs = std::vector<std::pair<Measure, Measure>>;

// Full-support measures with weights drawn uniformly from [0.2, 1].
MeasurePairs random_measure_pairs(const DiscreteSpace& space, std::size_t count, std::uint64_t seed);

ScanReport potential_stability_probe(const Measure& rho, const MeasurePairs& pairs, std::uint64_t seed,
                                     const Executor* exec = nullptr);

// Rowwise d(T1 x, T0 x) against |grad phi1(x) - grad phi0(x)| with the
// least-squares slope through the origin as C_exp_hat.
ScanReport map_stability_probe(const Measure& rho, const MeasurePairs& pairs, std::uint64_t seed,
                               const Executor* exec = nullptr);

struct LawFamilyScan {
  LawPerturbation kind = LawPerturbation::atom_jitter;
  std::vector<double> scales;
};

// For each perturbed law Q: x = W1(P, Q), y = W2(mu_P, mu_Q). Fits the slope of
// log y against log x and C_hat = max y^(12 + sigma) / x.
ScanReport barycenter_stability_scan(const SecondOrderLaw& P, const std::vector<LawFamilyScan>& families,
                                     const Measure* extra, double sigma, std::uint64_t seed,
                                     const Executor* exec = nullptr);

struct RateOptions {
  std::vector<std::size_t> N_list{8, 16, 32, 64, 128, 256, 512};
  std::size_t trials = 20;
  double sigma = 0.5;
  // Wall-clock budget in seconds; 0 disables it. Jobs not started in time are
  // dropped and the report is marked partial.
  double runtime_cap = 0.0;
};

// Samples P_N from P, records W1(P_N, P) and W2(mu_{P_N}, mu_P).
ScanReport empirical_rate_experiment(const SecondOrderLaw& P, const RateOptions& options, std::uint64_t seed,
                                     const Executor* exec = nullptr);

// Finite-support law with `variants` multiplicative jitters of each atom,
// each carrying weight lambda_i / variants.
SecondOrderLaw jittered_law(const SecondOrderLaw& base, std::size_t variants, double amplitude,
                            std::uint64_t seed);

// sup_x |Phi_t[psi](x) - psi^c(x)| along decreasing t for random psi drawn
// uniformly from [-amplitude, amplitude] * diam^2.
ScanReport heat_limit_probe(const HeatSemigroup& heat, std::size_t instances, const std::vector<double>& t_list,
                            double amplitude, std::uint64_t seed, const Executor* exec = nullptr);

// Analytic s-derivatives of K_t against central differences (steps 1e-5 and 1e-3).
ScanReport derivative_check(const HeatSemigroup& heat, std::size_t instances, const std::vector<double>& t_list,
                            std::uint64_t seed, const Executor* exec = nullptr);

// Empirical concentration ratio across t.
ScanReport kappa_scan(const HeatSemigroup& heat, const Measure& rho, const Eigen::VectorXd& psi0,
                      const Eigen::VectorXd& psi1, double s, const std::vector<double>& t_list);

}  // namespace barylab
