#include "barylab/barycenter.hpp"

#include <algorithm>
#include <cmath>

#include "barylab/error.hpp"
#include "barylab/lp.hpp"
#include "barylab/parallel.hpp"

namespace barylab {

namespace {

template <class F>
void for_each_index(std::size_t n, const Executor* exec, F&& body) {
  if (exec)
    exec->parallel_for(n, body);
  else
    for (std::size_t i = 0; i < n; ++i) body(i);
}

std::vector<W2Result> solve_all(const SecondOrderLaw& P, const Measure& mu, const Executor* exec) {
  std::vector<W2Result> out(P.size());
  for_each_index(P.size(), exec, [&](std::size_t i) { out[i] = solve_w2(mu, P[i].measure); });
  return out;
}

}  // namespace

double variance(const SecondOrderLaw& P, const Measure& mu, const Executor* exec) {
  if (!mu.space().same_as(P.space())) throw InvalidArgument("measure and law live on different spaces");
  auto sols = solve_all(P, mu, exec);
  double v = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) v += P[i].weight * sols[i].value;
  return v;
}

BarycenterResult solve_barycenter(const SecondOrderLaw& P, const BarycenterOptions& options,
                                  const Executor* exec) {
  if (P.size() == 0) throw InvalidArgument("barycenter of an empty law");
  const auto& space = P.space();
  const auto n = space.size();
  const auto N = static_cast<Eigen::Index>(n);
  const auto& c = space.cost();
  BarycenterResult res;

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < P.size(); ++i)
    if (P[i].weight > 0.0) active.push_back(i);
  bool all_same = true;
  for (auto i : active) all_same = all_same && P[i].measure.same_weights(P[active.front()].measure);

  if (all_same) {
    res.measure = P[active.front()].measure;
    res.solver_status = "trivial";
    for (std::size_t i = 0; i < P.size(); ++i)
      res.balanced_duals.push_back({Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N), Normalization::none});
  } else {
    const std::size_t K = active.size();
    std::vector<std::size_t> marg_row(K), cpl_row(K, 0), col_start(K);
    std::size_t rows = 0;
    for (std::size_t k = 0; k < K; ++k) {
      marg_row[k] = rows;
      rows += P[active[k]].measure.support().size();
    }
    for (std::size_t k = 1; k < K; ++k) {
      cpl_row[k] = rows;
      rows += n;
    }
    LinearProgram lp(rows);
    std::size_t cols = 0;
    for (std::size_t k = 0; k < K; ++k) cols += P[active[k]].measure.support().size() * n;
    lp.reserve(cols, cols * 2 + P[active[0]].measure.support().size() * n * K);
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& atom = P[active[k]];
      const auto& sx = atom.measure.support();
      const double lam = atom.weight;
      for (std::size_t ix = 0; ix < sx.size(); ++ix) lp.set_rhs(marg_row[k] + ix, atom.measure[sx[ix]]);
      col_start[k] = lp.cols();
      for (std::size_t ix = 0; ix < sx.size(); ++ix) {
        for (std::size_t y = 0; y < n; ++y) {
          entries.clear();
          entries.emplace_back(marg_row[k] + ix, 1.0);
          if (k == 0)
            for (std::size_t q = 1; q < K; ++q) entries.emplace_back(cpl_row[q] + y, -1.0);
          else
            entries.emplace_back(cpl_row[k] + y, 1.0);
          lp.add_column(lam * c(static_cast<Eigen::Index>(sx[ix]), static_cast<Eigen::Index>(y)), entries);
        }
      }
    }
    LpOptions lpo;
    lpo.probe_alternatives = options.detect_non_uniqueness;
    LpSolution sol = solve_lp(lp, lpo);
    if (sol.status != LpStatus::optimal)
      throw SolverError(std::string("barycenter LP failed: ") + to_string(sol.status));
    res.iterations = sol.iterations;
    res.solver_status = "optimal";

    const auto& s0 = P[active[0]].measure.support();
    auto first_marginal = [&](const std::vector<double>& x) {
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(N);
      for (std::size_t ix = 0; ix < s0.size(); ++ix)
        for (std::size_t y = 0; y < n; ++y)
          mu[static_cast<Eigen::Index>(y)] += x[col_start[0] + ix * n + y];
      return mu;
    };
    Eigen::VectorXd mu = first_marginal(sol.x);
    for (Eigen::Index y = 0; y < N; ++y)
      if (mu[y] < 1e-13) mu[y] = 0.0;
    res.measure = make_measure(space, mu);
    for (const auto& alt : sol.alternatives) {
      if ((first_marginal(alt) - res.measure.weights()).lpNorm<1>() > 1e-9) {
        res.non_unique = true;
        break;
      }
    }

    // Joint-LP duals: psi_k = w_k / lambda_k for k >= 1 and psi_0 = -sum_k w_k / lambda_0.
    res.balanced_duals.assign(P.size(), {Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N), Normalization::none});
    Eigen::VectorXd wsum = Eigen::VectorXd::Zero(N);
    for (std::size_t k = 1; k < K; ++k) {
      Eigen::VectorXd w(N);
      for (std::size_t y = 0; y < n; ++y) w[static_cast<Eigen::Index>(y)] = sol.y[cpl_row[k] + y];
      wsum += w;
      res.balanced_duals[active[k]].psi = w / P[active[k]].weight;
    }
    res.balanced_duals[active[0]].psi = -wsum / P[active[0]].weight;
    for (auto i : active) res.balanced_duals[i].phi = c_transform(space, res.balanced_duals[i].psi).phi;
    for (std::size_t i = 0; i < P.size(); ++i)
      if (P[i].weight <= 0.0) res.balanced_duals[i] = solve_w2(res.measure, P[i].measure, {Normalization::none}).potentials;
  }

  auto sols = solve_all(P, res.measure, exec);
  for (std::size_t i = 0; i < P.size(); ++i) {
    res.variance_value += P[i].weight * sols[i].value;
    res.per_atom_potentials.push_back(sols[i].potentials);
    res.per_atom_gaps.push_back(sols[i].gap);
  }
  return res;
}

BalanceResult balance_potentials(const SecondOrderLaw& P, const Measure& mu_P,
                                 const BalanceOptions& options, const Executor* exec) {
  const auto& space = P.space();
  if (!mu_P.space().same_as(space)) throw InvalidArgument("barycenter and law live on different spaces");
  if (options.base_point >= space.size()) throw InvalidArgument("base point out of range");
  const auto N = static_cast<Eigen::Index>(space.size());
  const std::size_t K = P.size();

  auto bary = solve_barycenter(P, {false}, exec);
  auto sols = solve_all(P, mu_P, exec);
  double var = 0.0;
  for (std::size_t i = 0; i < K; ++i) var += P[i].weight * sols[i].value;
  if (var > bary.variance_value + std::max(options.tol, 1e-9) * std::max(1.0, var))
    throw InvalidArgument("mu_P is not a barycenter: variance " + std::to_string(var) +
                          " exceeds the optimum " + std::to_string(bary.variance_value));

  std::vector<PotentialPair> fam;
  if (!options.initial.empty()) {
    if (options.initial.size() != K) throw InvalidArgument("initial family needs one pair per atom");
    fam = options.initial;
  } else {
    fam = bary.balanced_duals;
  }
  for (const auto& p : fam)
    if (p.psi.size() != N) throw InvalidArgument("initial potential length mismatch");

  BalanceResult out;
  out.gaps.assign(K, 0.0);
  const auto y0 = static_cast<Eigen::Index>(options.base_point);
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    for_each_index(K, exec, [&](std::size_t i) {
      const auto& rho = P[i].measure;
      Eigen::VectorXd phi = c_transform(space, fam[i].psi).phi;
      fam[i].psi = c_transform_over(space, phi, rho.support()).phi;
    });
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i < K; ++i) alpha += P[i].weight * fam[i].psi;
    for (std::size_t i = 0; i < K; ++i) {
      fam[i].psi -= alpha;
      fam[i].psi.array() -= fam[i].psi[y0];
    }
    for_each_index(K, exec, [&](std::size_t i) {
      fam[i].phi = c_transform(space, fam[i].psi).phi;
      fam[i].tag = Normalization::centered_at_base;
    });
    Eigen::VectorXd bal = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i < K; ++i) bal += P[i].weight * fam[i].psi;
    double residual = bal.cwiseAbs().maxCoeff();
    bool gaps_ok = true;
    for (std::size_t i = 0; i < K; ++i) {
      out.gaps[i] = duality_gap(sols[i].value, mu_P, P[i].measure, fam[i]);
      gaps_ok = gaps_ok && out.gaps[i] <= options.tol;
    }
    out.residual_trace.push_back(residual);
    if (residual <= options.tol && gaps_ok) {
      out.potentials = std::move(fam);
      out.residual = residual;
      out.iterations = it;
      return out;
    }
  }
  std::string last = out.residual_trace.empty() ? "none" : std::to_string(out.residual_trace.back());
  throw BalanceError("balance normalization did not converge within " + std::to_string(options.max_iters) +
                         " iterations (last residual " + last + ")",
                     out.residual_trace);
}

double deficit(const Measure& rho, const Measure& mu0, const Measure& mu1, const Eigen::VectorXd& psi0) {
  if (!rho.space().same_as(mu0.space()) || !rho.space().same_as(mu1.space()))
    throw InvalidArgument("deficit measures live on different spaces");
  const auto& space = rho.space();
  PotentialPair pair{c_transform(space, psi0).phi, psi0, Normalization::none};
  auto w0 = solve_w2(mu0, rho);
  double gap = w0.value - (mu0.weights().dot(pair.psi) + rho.weights().dot(pair.phi));
  if (gap > 1e-8)
    throw InvalidArgument("psi0 is not a Kantorovich potential for (rho, mu0): gap " + std::to_string(gap));
  auto w1 = solve_w2(mu1, rho);
  double lin = 0.0;
  for (Eigen::Index y = 0; y < psi0.size(); ++y) lin += psi0[y] * (mu1.weights()[y] - mu0.weights()[y]);
  return w1.value - w0.value - lin;
}

ModulusParams ModulusParams::for_space(const DiscreteSpace& space, double A1, double A2, double A3,
                                       double sigma) {
  ModulusParams p{A1, A2, A3, space.wasserstein_diameter(), sigma};
  p.validate();
  return p;
}

void ModulusParams::validate() const {
  if (!(A1 > 0.0 && A2 > 0.0 && A3 > 0.0 && D_W > 0.0 && sigma > 0.0))
    throw InvalidArgument("modulus parameters must be strictly positive");
}

double modulus(double t, const ModulusParams& p) {
  p.validate();
  if (t < 0.0 || t > p.D_W * (1.0 + 1e-12))
    throw InvalidArgument("modulus argument " + std::to_string(t) + " outside [0, D_W]");
  if (t == 0.0) return 0.0;
  return p.A1 * std::pow(t, 12.0) / (p.A2 + p.A3 * std::abs(std::log(t / p.D_W)));
}

double c_sigma(const ModulusParams& p, std::size_t grid, double decades) {
  p.validate();
  if (grid < 2) throw InvalidArgument("c_sigma grid needs at least two points");
  double best = INFINITY;
  for (std::size_t k = 0; k < grid; ++k) {
    double lt = std::log(p.D_W) - decades * std::log(10.0) * static_cast<double>(k) / static_cast<double>(grid - 1);
    double t = std::exp(lt);
    double log_ratio = std::log(p.A1) - p.sigma * lt - std::log(p.A2 + p.A3 * std::abs(std::log(t / p.D_W)));
    best = std::min(best, std::exp(log_ratio));
  }
  return best;
}

}  // namespace barylab
