#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace barylab {

// Equality-form linear program: minimize c'x subject to Ax = b, x >= 0,
// with A stored column-wise.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t rows) : b_(rows, 0.0) {}

  std::size_t rows() const { return b_.size(); }
  std::size_t cols() const { return cost_.size(); }

  void set_rhs(std::size_t row, double value) { b_[row] = value; }
  double rhs(std::size_t row) const { return b_[row]; }

  // Appends a column and returns its index.
  std::size_t add_column(double cost, std::initializer_list<std::pair<std::size_t, double>> entries);
  std::size_t add_column(double cost, const std::vector<std::pair<std::size_t, double>>& entries);
  void reserve(std::size_t cols, std::size_t nnz);

  double cost(std::size_t j) const { return cost_[j]; }
  std::size_t col_begin(std::size_t j) const { return start_[j]; }
  std::size_t col_end(std::size_t j) const { return start_[j + 1]; }
  std::size_t row_index(std::size_t k) const { return row_[k]; }
  double value(std::size_t k) const { return val_[k]; }

 private:
  std::vector<double> b_;
  std::vector<double> cost_;
  std::vector<std::size_t> start_{0};
  std::vector<std::size_t> row_;
  std::vector<double> val_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpOptions {
  double feasibility_tol = 1e-11;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-10;
  std::size_t max_iterations = 0;  // 0 = automatic
  std::size_t refactor_interval = 64;
  // Degenerate pivots in a row before switching to Bland's rule.
  std::size_t stall_limit = 40;
  // Look for optimal vertices adjacent to the returned one.
  bool probe_alternatives = false;
  std::size_t max_alternatives = 8;
};

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  // Row duals y with A'y <= c at optimality.
  std::vector<double> y;
  std::size_t iterations = 0;
  // Distinct optimal vertices adjacent to x, reached by a nondegenerate pivot
  // along a zero reduced-cost column.
  std::vector<std::vector<double>> alternatives;
};

// Revised primal simplex (two-phase, dense basis inverse).
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace barylab
