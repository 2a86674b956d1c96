#include "barylab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "barylab/error.hpp"
#include "barylab/lp.hpp"
#include "barylab/parallel.hpp"

namespace barylab {

namespace {

constexpr double kTieTol = 1e-12;

void require_same_space(const Measure& a, const Measure& b) {
  if (!a.space().same_as(b.space()))
    throw InvalidArgument("measures live on different spaces ('" + a.space().label() + "' vs '" +
                          b.space().label() + "')");
}

}  // namespace

CTransformResult c_transform_over(const DiscreteSpace& space, const Eigen::VectorXd& psi,
                                  const std::vector<std::size_t>& ys) {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (psi.size() != n) throw InvalidArgument("potential length does not match point count");
  if (ys.empty()) throw InvalidArgument("c-transform over an empty set");
  const auto& c = space.cost();
  CTransformResult r;
  r.phi.resize(n);
  r.argmin.resize(static_cast<std::size_t>(n));
  r.tie.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index x = 0; x < n; ++x) {
    std::size_t best = ys.front();
    double best_v = c(x, static_cast<Eigen::Index>(best)) - psi[static_cast<Eigen::Index>(best)];
    for (std::size_t k = 1; k < ys.size(); ++k) {
      auto y = static_cast<Eigen::Index>(ys[k]);
      double v = c(x, y) - psi[y];
      if (v < best_v || (v == best_v && ys[k] < best)) {
        best_v = v;
        best = ys[k];
      }
    }
    const double tol = kTieTol * std::max(1.0, std::abs(best_v));
    for (auto yk : ys) {
      auto y = static_cast<Eigen::Index>(yk);
      if (yk != best && c(x, y) - psi[y] <= best_v + tol) {
        r.tie[static_cast<std::size_t>(x)] = true;
        break;
      }
    }
    r.phi[x] = best_v;
    r.argmin[static_cast<std::size_t>(x)] = best;
  }
  return r;
}

CTransformResult c_transform(const DiscreteSpace& space, const Eigen::VectorXd& psi) {
  return c_transform_over(space, psi, all_points(space));
}

const char* to_string(Normalization tag) {
  switch (tag) {
    case Normalization::none: return "none";
    case Normalization::zero_mean_phi: return "zero_mean_phi";
    case Normalization::centered_at_base: return "centered_at_base";
  }
  return "none";
}

double constraint_violation(const Measure& rho, const PotentialPair& pair) {
  const auto& c = rho.space().cost();
  double worst = 0.0;
  for (auto x : rho.support()) {
    auto X = static_cast<Eigen::Index>(x);
    for (Eigen::Index y = 0; y < c.cols(); ++y)
      worst = std::max(worst, pair.phi[X] + pair.psi[y] - c(X, y));
  }
  return worst;
}

PotentialPair normalize(const PotentialPair& pair, const Measure& rho, Normalization tag,
                        std::size_t base) {
  PotentialPair out = pair;
  out.tag = tag;
  double shift = 0.0;
  switch (tag) {
    case Normalization::none: return out;
    case Normalization::zero_mean_phi: shift = rho.weights().dot(pair.phi); break;
    case Normalization::centered_at_base: shift = -pair.psi[static_cast<Eigen::Index>(base)]; break;
  }
  out.phi.array() -= shift;
  out.psi.array() += shift;
  return out;
}

Eigen::MatrixXd TransportPlan::dense(std::size_t n) const {
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
  for (const auto& e : entries)
    m(static_cast<Eigen::Index>(e.x), static_cast<Eigen::Index>(e.y)) += e.mass;
  return m;
}

W2Result solve_w2(const Measure& mu, const Measure& rho, const W2Options& options) {
  require_same_space(mu, rho);
  const auto& space = rho.space();
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto& c = space.cost();
  W2Result res;
  if (mu.weights() == rho.weights()) {
    for (auto x : rho.support()) res.plan.entries.push_back({x, x, rho[x]});
    res.potentials.phi = Eigen::VectorXd::Zero(n);
    res.potentials.psi = Eigen::VectorXd::Zero(n);
    res.potentials.tag = options.normalization;
    return res;
  }
  const auto& sx = rho.support();
  const auto& sy = mu.support();
  const std::size_t a = sx.size(), b = sy.size();
  LinearProgram lp(a + b);
  lp.reserve(a * b, 2 * a * b);
  for (std::size_t i = 0; i < a; ++i) lp.set_rhs(i, rho[sx[i]]);
  for (std::size_t j = 0; j < b; ++j) lp.set_rhs(a + j, mu[sy[j]]);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      lp.add_column(c(static_cast<Eigen::Index>(sx[i]), static_cast<Eigen::Index>(sy[j])),
                    {{i, 1.0}, {a + j, 1.0}});
  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw SolverError(std::string("W2 solve failed: ") + to_string(sol.status));
  res.iterations = sol.iterations;

  double value = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      double mass = sol.x[i * b + j];
      if (mass <= 0.0) continue;
      res.plan.entries.push_back({sx[i], sy[j], mass});
      value += mass * c(static_cast<Eigen::Index>(sx[i]), static_cast<Eigen::Index>(sy[j]));
    }
  }
  res.plan.total_cost = value;

  // Tighten the LP duals by alternating c-transforms; each pass keeps feasibility
  // and can only raise the dual objective.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < a; ++i) u[static_cast<Eigen::Index>(sx[i])] = sol.y[i];
  Eigen::VectorXd psi = c_transform_over(space, u, sx).phi;
  Eigen::VectorXd phi = c_transform(space, psi).phi;
  psi = c_transform(space, phi).phi;
  phi = c_transform(space, psi).phi;
  res.potentials = normalize({phi, psi, Normalization::none}, rho, options.normalization);

  res.value = std::max(0.0, value);
  res.w2 = std::sqrt(res.value);
  res.gap = res.value - (mu.weights().dot(res.potentials.psi) + rho.weights().dot(res.potentials.phi));
  if (std::abs(res.gap) > 1e-6 * std::max(1.0, res.value))
    throw SolverError("W2 solve produced duality gap " + std::to_string(res.gap));
  return res;
}

double duality_gap(double value, const Measure& mu, const Measure& rho, const PotentialPair& pair) {
  require_same_space(mu, rho);
  double viol = constraint_violation(rho, pair);
  if (viol > 1e-9)
    throw InvalidArgument("potentials violate phi + psi <= c by " + std::to_string(viol));
  return value - (mu.weights().dot(pair.psi) + rho.weights().dot(pair.phi));
}

double duality_gap(const Measure& mu, const Measure& rho, const PotentialPair& pair) {
  return duality_gap(solve_w2(mu, rho).value, mu, rho, pair);
}

double w2_distance(const Measure& a, const Measure& b) { return solve_w2(a, b).w2; }

double discrete_w1(const std::vector<double>& p, const std::vector<double>& q,
                   const Eigen::MatrixXd& ground) {
  if (ground.rows() != static_cast<Eigen::Index>(p.size()) ||
      ground.cols() != static_cast<Eigen::Index>(q.size()))
    throw InvalidArgument("ground cost shape does not match the weight vectors");
  std::vector<std::size_t> sp, sq;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) sp.push_back(i);
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) sq.push_back(j);
  if (sp.empty() || sq.empty()) throw InvalidArgument("W1 between empty laws");
  if (p == q && (ground.diagonal().array() == 0.0).all()) return 0.0;
  auto g = [&](std::size_t i, std::size_t j) {
    return ground(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  if (sp.size() == 1 || sq.size() == 1) {
    double total = 0.0;
    if (sp.size() == 1)
      for (auto j : sq) total += q[j] * g(sp[0], j);
    else
      for (auto i : sp) total += p[i] * g(i, sq[0]);
    return total;
  }
  LinearProgram lp(sp.size() + sq.size());
  for (std::size_t i = 0; i < sp.size(); ++i) lp.set_rhs(i, p[sp[i]]);
  for (std::size_t j = 0; j < sq.size(); ++j) lp.set_rhs(sp.size() + j, q[sq[j]]);
  for (std::size_t i = 0; i < sp.size(); ++i)
    for (std::size_t j = 0; j < sq.size(); ++j)
      lp.add_column(g(sp[i], sq[j]), {{i, 1.0}, {sp.size() + j, 1.0}});
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw SolverError(std::string("W1 solve failed: ") + to_string(sol.status));
  return std::max(0.0, sol.objective);
}

Eigen::MatrixXd law_ground_distances(const SecondOrderLaw& P, const SecondOrderLaw& Q,
                                     const Executor* exec) {
  if (!P.space().same_as(Q.space())) throw InvalidArgument("laws live on different spaces");
  const std::size_t a = P.size(), b = Q.size();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  auto body = [&](std::size_t k) {
    std::size_t i = k / b, j = k % b;
    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        P[i].measure.same_weights(Q[j].measure) ? 0.0 : w2_distance(P[i].measure, Q[j].measure);
  };
  if (exec)
    exec->parallel_for(a * b, body);
  else
    for (std::size_t k = 0; k < a * b; ++k) body(k);
  return g;
}

double w1_between_laws(const SecondOrderLaw& P, const SecondOrderLaw& Q, const Executor* exec) {
  return discrete_w1(P.weights(), Q.weights(), law_ground_distances(P, Q, exec));
}

InterpolationResult interpolation_map(const DiscreteSpace& space, const Eigen::VectorXd& psi0,
                                      const Eigen::VectorXd& psi1, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("interpolation parameter s must lie in [0, 1]");
  if (psi0.size() != psi1.size()) throw InvalidArgument("potential lengths differ");
  InterpolationResult r;
  r.psi_s = psi0 + s * (psi1 - psi0);
  auto ct = c_transform(space, r.psi_s);
  r.phi_s = std::move(ct.phi);
  r.T = std::move(ct.argmin);
  r.tie = std::move(ct.tie);
  return r;
}

}  // namespace barylab
