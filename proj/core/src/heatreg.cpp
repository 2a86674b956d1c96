#include "barylab/heatreg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "barylab/error.hpp"

namespace barylab {

namespace {

void check_connected(const Eigen::MatrixXd& w) {
  const auto n = w.rows();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::size_t> sizes;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    int id = static_cast<int>(sizes.size());
    std::size_t size = 0;
    std::vector<Eigen::Index> stack{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      ++size;
      for (Eigen::Index v = 0; v < n; ++v) {
        if (v != u && w(u, v) > 0.0 && comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = id;
          stack.push_back(v);
        }
      }
    }
    sizes.push_back(size);
  }
  if (sizes.size() > 1) {
    std::string msg = "heat kernel graph is disconnected: " + std::to_string(sizes.size()) +
                      " components of sizes";
    for (auto s : sizes) msg += " " + std::to_string(s);
    throw InvalidArgument(msg);
  }
}

}  // namespace

Eigen::MatrixXd heat_edge_weights(const DiscreteSpace& space, const HeatParams& params,
                                  double* bandwidth_out) {
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto& d = space.dist();
  const auto& m = space.ref_measure();
  if (n < 2) throw InvalidArgument("heat kernel needs at least two points");
  if (params.knn < 1) throw InvalidArgument("knn must be positive");
  const auto k = std::min<std::size_t>(params.knn, static_cast<std::size_t>(n - 1));

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  std::vector<double> nearest(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return d(i, a) < d(i, b); });
    std::size_t taken = 0;
    for (auto j : order) {
      if (j == i) continue;
      if (taken == 0) nearest[static_cast<std::size_t>(i)] = d(i, j);
      adj(i, j) = adj(j, i) = true;
      if (++taken == k) break;
    }
  }
  double h;
  if (params.bandwidth) {
    h = *params.bandwidth;
  } else {
    std::vector<double> nn = nearest;
    auto mid = nn.begin() + static_cast<long>(nn.size() / 2);
    std::nth_element(nn.begin(), mid, nn.end());
    double median = *mid;
    if (nn.size() % 2 == 0) median = 0.5 * (median + *std::max_element(nn.begin(), mid));
    h = params.bandwidth_factor * median;
  }
  if (!(h > 0.0)) throw InvalidArgument("heat kernel bandwidth must be positive");
  if (bandwidth_out) *bandwidth_out = h;

  // Scaled so that L approximates minus the Laplacian of the embedded domain.
  const double dim = static_cast<double>(space.dim_n());
  const double scale = 2.0 / (std::pow(2.0 * std::numbers::pi, dim / 2.0) * std::pow(h, dim + 2.0));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (adj(i, j)) w(i, j) = scale * m[i] * m[j] * std::exp(-d(i, j) * d(i, j) / (2.0 * h * h));
  check_connected(w);
  return w;
}

HeatSemigroup::HeatSemigroup(const DiscreteSpace& space, const HeatParams& params) : space_(space) {
  weights_ = heat_edge_weights(space, params, &bandwidth_);
  knn_ = params.knn;
  factorize();
}

HeatSemigroup HeatSemigroup::from_weights(const DiscreteSpace& space, const Eigen::MatrixXd& weights) {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (weights.rows() != n || weights.cols() != n) throw InvalidArgument("weight matrix shape mismatch");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("edge weights must be symmetric");
  if (weights.minCoeff() < 0.0) throw InvalidArgument("edge weights must be nonnegative");
  HeatSemigroup h;
  h.space_ = space;
  h.weights_ = weights;
  h.weights_.diagonal().setZero();
  check_connected(h.weights_);
  h.factorize();
  return h;
}

HeatSemigroup::HeatSemigroup(DiscreteSpace space, double bandwidth, std::size_t knn,
                             Eigen::MatrixXd weights, Eigen::VectorXd evals, Eigen::MatrixXd evecs)
    : space_(std::move(space)),
      bandwidth_(bandwidth),
      knn_(knn),
      weights_(std::move(weights)),
      evals_(std::move(evals)),
      evecs_(std::move(evecs)) {}

void HeatSemigroup::factorize() {
  const Eigen::VectorXd inv_sqrt_m = space_.ref_measure().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd lap = -weights_;
  lap.diagonal() = weights_.rowwise().sum();
  Eigen::MatrixXd sym = inv_sqrt_m.asDiagonal() * lap * inv_sqrt_m.asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw SolverError("heat kernel eigendecomposition failed");
  evals_ = es.eigenvalues().cwiseMax(0.0);
  evecs_ = es.eigenvectors();
}

HeatKernel HeatSemigroup::kernel(double t) const {
  if (!(t > 0.0)) throw InvalidArgument("heat kernel time must be positive");
  const Eigen::VectorXd inv_sqrt_m = space_.ref_measure().cwiseSqrt().cwiseInverse();
  Eigen::VectorXd decay = (-t * evals_).array().exp();
  Eigen::MatrixXd e = evecs_ * decay.asDiagonal() * evecs_.transpose();
  HeatKernel k;
  k.t = t;
  k.bandwidth = bandwidth_;
  k.knn = knn_;
  k.space = space_;
  k.kernel = inv_sqrt_m.asDiagonal() * e * inv_sqrt_m.asDiagonal();
  k.kernel = 0.5 * (k.kernel + k.kernel.transpose());
  const double floor = 1e-14 * k.kernel.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < k.kernel.size(); ++i) {
    double& v = k.kernel.data()[i];
    if (v < 0.0) {
      if (v < -floor) throw SolverError("heat kernel has a significantly negative entry");
      v = 0.0;
    }
  }
  return k;
}

HeatKernel heat_kernel(const DiscreteSpace& space, double t, const HeatParams& params) {
  return HeatSemigroup(space, params).kernel(t);
}

namespace {

void require_time(const HeatKernel& heat, double t) {
  if (!(t > 0.0)) throw InvalidArgument("regularization time must be positive");
  if (std::abs(heat.t - 0.5 * t) > 1e-12 * std::max(1.0, t))
    throw InvalidArgument("heat kernel time " + std::to_string(heat.t) + " does not equal t/2 = " +
                          std::to_string(0.5 * t));
}

// Log-weights a(x, y) = psi(y)/t + log(p(x, y) m(y)); -inf where the kernel vanishes.
Eigen::MatrixXd log_weights(const HeatKernel& heat, const Eigen::VectorXd& psi, double t) {
  const auto& p = heat.kernel;
  const auto& m = heat.space.ref_measure();
  if (psi.size() != p.rows()) throw InvalidArgument("potential length does not match point count");
  Eigen::MatrixXd a(p.rows(), p.cols());
  for (Eigen::Index y = 0; y < p.cols(); ++y) {
    const double s = psi[y] / t;
    for (Eigen::Index x = 0; x < p.rows(); ++x) {
      double pm = p(x, y) * m[y];
      a(x, y) = pm > 0.0 ? s + std::log(pm) : -INFINITY;
    }
  }
  return a;
}

}  // namespace

Eigen::VectorXd soft_c_transform(const HeatKernel& heat, const Eigen::VectorXd& psi, double t) {
  require_time(heat, t);
  Eigen::MatrixXd a = log_weights(heat, psi, t);
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index x = 0; x < a.rows(); ++x) {
    double mx = a.row(x).maxCoeff();
    double s = (a.row(x).array() - mx).exp().sum();
    out[x] = -t * (mx + std::log(s));
  }
  return out;
}

double regularized_functional(const Measure& rho, const Eigen::VectorXd& phi_t) {
  if (phi_t.size() != rho.weights().size()) throw InvalidArgument("potential length mismatch");
  double k = 0.0;
  for (auto x : rho.support()) k += rho[x] * phi_t[static_cast<Eigen::Index>(x)];
  return k;
}

GibbsFamily gibbs_family(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi,
                         double t) {
  require_time(heat, t);
  if (!rho.space().same_as(heat.space)) throw InvalidArgument("measure and kernel spaces differ");
  GibbsFamily g;
  g.t = t;
  g.psi = psi;
  g.rows = log_weights(heat, psi, t);
  for (Eigen::Index x = 0; x < g.rows.rows(); ++x) {
    double mx = g.rows.row(x).maxCoeff();
    g.rows.row(x) = (g.rows.row(x).array() - mx).exp();
    g.rows.row(x) /= g.rows.row(x).sum();
  }
  g.mixture = Eigen::VectorXd::Zero(g.rows.cols());
  for (auto x : rho.support()) g.mixture += rho[x] * g.rows.row(static_cast<Eigen::Index>(x)).transpose();
  return g;
}

namespace {

struct RowMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

RowMoments moments(const GibbsFamily& g, const Eigen::VectorXd& v) {
  RowMoments r;
  r.mean = g.rows * v;
  r.var.resize(g.rows.rows());
  for (Eigen::Index x = 0; x < g.rows.rows(); ++x)
    r.var[x] = g.rows.row(x).dot((v.array() - r.mean[x]).square().matrix());
  return r;
}

}  // namespace

KDerivatives k_derivatives(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi0,
                           const Eigen::VectorXd& psi1, double s, double t) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("s must lie in [0, 1]");
  const Eigen::VectorXd v = psi1 - psi0;
  auto g = gibbs_family(rho, heat, psi0 + s * v, t);
  auto mom = moments(g, v);
  KDerivatives d;
  double var = 0.0;
  for (auto x : rho.support()) {
    auto X = static_cast<Eigen::Index>(x);
    d.dK_ds -= rho[x] * mom.mean[X];
    var += rho[x] * mom.var[X];
  }
  d.d2K_ds2 = -var / t;
  return d;
}

double k_along(const Measure& rho, const HeatKernel& heat, const Eigen::VectorXd& psi0,
               const Eigen::VectorXd& psi1, double s, double t) {
  return regularized_functional(rho, soft_c_transform(heat, psi0 + s * (psi1 - psi0), t));
}

ConcentrationRatio concentration_ratio(const Measure& rho, const HeatKernel& heat,
                                       const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                                       double s, double t) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("s must lie in [0, 1]");
  const Eigen::VectorXd v = psi1 - psi0;
  auto g = gibbs_family(rho, heat, psi0 + s * v, t);
  auto mom = moments(g, v);
  double overall = 0.0, var = 0.0;
  for (auto x : rho.support()) overall += rho[x] * mom.mean[static_cast<Eigen::Index>(x)];
  ConcentrationRatio r;
  for (auto x : rho.support()) {
    auto X = static_cast<Eigen::Index>(x);
    r.lhs += rho[x] * std::abs(mom.mean[X] - overall);
    var += rho[x] * mom.var[X];
  }
  r.rhs_core = std::sqrt(std::max(0.0, var) / t);
  if (v.maxCoeff() - v.minCoeff() <= 1e-14 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
    r.lhs = 0.0;
    r.rhs_core = 0.0;
  }
  if (r.rhs_core > 0.0) r.kappa_hat = r.lhs / r.rhs_core;
  return r;
}

}  // namespace barylab
