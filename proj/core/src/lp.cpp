#include "barylab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "barylab/error.hpp"

namespace barylab {

std::size_t LinearProgram::add_column(double cost,
                                      std::initializer_list<std::pair<std::size_t, double>> entries) {
  return add_column(cost, std::vector<std::pair<std::size_t, double>>(entries));
}

std::size_t LinearProgram::add_column(double cost,
                                      const std::vector<std::pair<std::size_t, double>>& entries) {
  for (const auto& [r, v] : entries) {
    if (r >= rows()) throw InvalidArgument("LP column entry row out of range");
    if (v == 0.0) continue;
    row_.push_back(r);
    val_.push_back(v);
  }
  cost_.push_back(cost);
  start_.push_back(row_.size());
  return cost_.size() - 1;
}

void LinearProgram::reserve(std::size_t cols, std::size_t nnz) {
  cost_.reserve(cols);
  start_.reserve(cols + 1);
  row_.reserve(nnz);
  val_.reserve(nnz);
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.rows();
    n_ = lp.cols();
    sign_.assign(m_, 1.0);
    b_.resize(static_cast<Eigen::Index>(m_));
    double bmax = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (lp.rhs(r) < 0.0) sign_[r] = -1.0;
      b_[static_cast<Eigen::Index>(r)] = sign_[r] * lp.rhs(r);
      bmax = std::max(bmax, std::abs(lp.rhs(r)));
    }
    bscale_ = std::max(1.0, bmax);
    double cmax = 0.0;
    for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(lp.cost(j)));
    cscale_ = std::max(1.0, cmax);
    max_iter_ = opt.max_iterations ? opt.max_iterations : 50 * (m_ + n_) + 10000;
  }

  LpSolution run() {
    LpSolution sol;
    const auto M = static_cast<Eigen::Index>(m_);
    basis_.resize(m_);
    pos_.assign(n_ + m_, -1);
    for (std::size_t r = 0; r < m_; ++r) {
      basis_[r] = n_ + r;
      pos_[n_ + r] = static_cast<long>(r);
    }
    binv_ = Eigen::MatrixXd::Identity(M, M);
    xb_ = b_;

    phase_ = 1;
    auto st = iterate();
    if (st == LpStatus::iteration_limit) return finish(sol, st);
    double infeas = 0.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] >= n_) infeas += std::max(0.0, xb_[static_cast<Eigen::Index>(r)]);
    if (infeas > 1e-9 * bscale_ * std::max<double>(1.0, std::sqrt(static_cast<double>(m_))))
      return finish(sol, LpStatus::infeasible);
    drive_out_artificials();

    phase_ = 2;
    st = iterate();
    if (st == LpStatus::optimal && opt_.probe_alternatives) probe(sol);
    return finish(sol, st);
  }

 private:
  double col_cost(std::size_t j) const {
    if (j >= n_) return phase_ == 1 ? 1.0 : 0.0;
    return phase_ == 1 ? 0.0 : lp_.cost(j);
  }

  // d = Binv * a_j
  Eigen::VectorXd ftran(std::size_t j) const {
    if (j >= n_) return binv_.col(static_cast<Eigen::Index>(j - n_));
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t k = lp_.col_begin(j); k < lp_.col_end(j); ++k) {
      auto r = lp_.row_index(k);
      d.noalias() += (sign_[r] * lp_.value(k)) * binv_.col(static_cast<Eigen::Index>(r));
    }
    return d;
  }

  double dot_col(const Eigen::VectorXd& y, std::size_t j) const {
    if (j >= n_) return y[static_cast<Eigen::Index>(j - n_)];
    double s = 0.0;
    for (std::size_t k = lp_.col_begin(j); k < lp_.col_end(j); ++k) {
      auto r = lp_.row_index(k);
      s += y[static_cast<Eigen::Index>(r)] * sign_[r] * lp_.value(k);
    }
    return s;
  }

  Eigen::VectorXd duals() const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t r = 0; r < m_; ++r) cb[static_cast<Eigen::Index>(r)] = col_cost(basis_[r]);
    return binv_.transpose() * cb;
  }

  void refactor() {
    const auto M = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);
    for (std::size_t r = 0; r < m_; ++r) {
      std::size_t j = basis_[r];
      auto c = static_cast<Eigen::Index>(r);
      if (j >= n_) {
        B(static_cast<Eigen::Index>(j - n_), c) = 1.0;
      } else {
        for (std::size_t k = lp_.col_begin(j); k < lp_.col_end(j); ++k) {
          auto row = lp_.row_index(k);
          B(static_cast<Eigen::Index>(row), c) += sign_[row] * lp_.value(k);
        }
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    since_refactor_ = 0;
  }

  void pivot(std::size_t r, std::size_t q, const Eigen::VectorXd& d, double theta) {
    const auto R = static_cast<Eigen::Index>(r);
    xb_ -= theta * d;
    xb_[R] = theta;
    const double dr = d[R];
    binv_.row(R) /= dr;
    for (Eigen::Index i = 0; i < binv_.rows(); ++i) {
      if (i == R || d[i] == 0.0) continue;
      binv_.row(i) -= d[i] * binv_.row(R);
    }
    pos_[basis_[r]] = -1;
    basis_[r] = q;
    pos_[q] = static_cast<long>(r);
    if (++since_refactor_ >= opt_.refactor_interval) refactor();
  }

  bool eligible(std::size_t j) const {
    if (pos_[j] >= 0) return false;
    return j < n_;
  }

  // Returns entering column or npos.
  std::size_t price(const Eigen::VectorXd& y, bool bland) const {
    const double tol = opt_.optimality_tol * cscale_;
    std::size_t best = npos;
    double best_rc = -tol;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!eligible(j)) continue;
      double rc = col_cost(j) - dot_col(y, j);
      if (rc < best_rc) {
        best = j;
        best_rc = rc;
        if (bland) break;
      }
    }
    return best;
  }

  // Returns leaving row or npos when unbounded; sets theta.
  std::size_t ratio(const Eigen::VectorXd& d, bool bland, double& theta) const {
    const double ptol = opt_.pivot_tol;
    const double ftol = opt_.feasibility_tol * bscale_;
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      auto I = static_cast<Eigen::Index>(i);
      if (phase_ == 2 && basis_[i] >= n_ && std::abs(d[I]) > ptol) {
        bound = 0.0;
        continue;
      }
      if (d[I] > ptol) bound = std::min(bound, (std::max(0.0, xb_[I]) + ftol) / d[I]);
    }
    if (!std::isfinite(bound)) return npos;
    std::size_t leave = npos;
    double best_d = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      auto I = static_cast<Eigen::Index>(i);
      bool art_block = phase_ == 2 && basis_[i] >= n_ && std::abs(d[I]) > ptol;
      if (!art_block && !(d[I] > ptol)) continue;
      double t = art_block ? 0.0 : std::max(0.0, xb_[I]) / d[I];
      if (t > bound) continue;
      double mag = std::abs(d[I]);
      if (leave == npos) {
        leave = i;
        best_d = mag;
      } else if (bland ? basis_[i] < basis_[leave] : mag > best_d) {
        leave = i;
        best_d = mag;
      }
    }
    auto L = static_cast<Eigen::Index>(leave);
    theta = (phase_ == 2 && basis_[leave] >= n_) ? 0.0 : std::max(0.0, xb_[L]) / d[L];
    return leave;
  }

  LpStatus iterate() {
    std::size_t stall = 0;
    int accuracy_passes = 0;
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::iteration_limit;
      bool bland = stall >= opt_.stall_limit;
      Eigen::VectorXd y = duals();
      std::size_t q = price(y, bland);
      if (q == npos) {
        if (since_refactor_ == 0 || accuracy_passes >= 3) return LpStatus::optimal;
        refactor();
        ++accuracy_passes;
        continue;
      }
      Eigen::VectorXd d = ftran(q);
      double theta = 0.0;
      std::size_t r = ratio(d, bland, theta);
      if (r == npos) {
        if (phase_ == 1) return LpStatus::infeasible;
        return LpStatus::unbounded;
      }
      pivot(r, q, d, theta);
      ++iterations_;
      if (theta * d.cwiseAbs().maxCoeff() > 1e-14 * bscale_)
        stall = 0;
      else
        ++stall;
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      Eigen::RowVectorXd row = binv_.row(static_cast<Eigen::Index>(r));
      std::size_t best = npos;
      double best_mag = 1e-9;
      for (std::size_t j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        double a = 0.0;
        for (std::size_t k = lp_.col_begin(j); k < lp_.col_end(j); ++k) {
          auto i = lp_.row_index(k);
          a += row[static_cast<Eigen::Index>(i)] * sign_[i] * lp_.value(k);
        }
        if (std::abs(a) > best_mag) {
          best = j;
          best_mag = std::abs(a);
        }
      }
      if (best == npos) continue;  // redundant row; its artificial stays basic at zero
      Eigen::VectorXd d = ftran(best);
      double theta = xb_[static_cast<Eigen::Index>(r)] / d[static_cast<Eigen::Index>(r)];
      pivot(r, best, d, theta);
    }
    refactor();
  }

  void probe(LpSolution& sol) {
    Eigen::VectorXd y = duals();
    const double tol = opt_.optimality_tol * cscale_;
    std::vector<double> base = structural_x();
    for (std::size_t j = 0; j < n_ && sol.alternatives.size() < opt_.max_alternatives; ++j) {
      if (pos_[j] >= 0) continue;
      double rc = col_cost(j) - dot_col(y, j);
      if (std::abs(rc) > tol) continue;
      Eigen::VectorXd d = ftran(j);
      double theta = INFINITY;
      for (std::size_t i = 0; i < m_; ++i) {
        auto I = static_cast<Eigen::Index>(i);
        if (basis_[i] >= n_ && std::abs(d[I]) > opt_.pivot_tol) theta = 0.0;
        if (d[I] > opt_.pivot_tol) theta = std::min(theta, std::max(0.0, xb_[I]) / d[I]);
      }
      if (!std::isfinite(theta)) theta = 1.0;
      if (theta <= 1e-9) continue;
      std::vector<double> alt = base;
      alt[j] = theta;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] < n_)
          alt[basis_[i]] = std::max(0.0, alt[basis_[i]] - theta * d[static_cast<Eigen::Index>(i)]);
      sol.alternatives.push_back(std::move(alt));
    }
  }

  std::vector<double> structural_x() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) x[basis_[r]] = std::max(0.0, xb_[static_cast<Eigen::Index>(r)]);
    return x;
  }

  LpSolution& finish(LpSolution& sol, LpStatus st) {
    sol.status = st;
    sol.iterations = iterations_;
    sol.x = structural_x();
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.cost(j) * sol.x[j];
    if (phase_ == 2) {
      Eigen::VectorXd y = duals();
      sol.y.resize(m_);
      for (std::size_t r = 0; r < m_; ++r) sol.y[r] = sign_[r] * y[static_cast<Eigen::Index>(r)];
    }
    return sol;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const LinearProgram& lp_;
  LpOptions opt_;
  std::size_t m_ = 0, n_ = 0;
  std::vector<double> sign_;
  Eigen::VectorXd b_;
  double bscale_ = 1.0, cscale_ = 1.0;
  std::size_t max_iter_ = 0;
  int phase_ = 1;
  std::vector<std::size_t> basis_;
  std::vector<long> pos_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  if (lp.rows() == 0) {
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.x.assign(lp.cols(), 0.0);
    for (std::size_t j = 0; j < lp.cols(); ++j)
      if (lp.cost(j) < 0.0) sol.status = LpStatus::unbounded;
    return sol;
  }
  Simplex s(lp, options);
  return s.run();
}

}  // namespace barylab
