#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradcon {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx, Vector values);

  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (r, c) in values(), or -1 when structurally zero.
  long find(int r, int c) const;
  double coeff(int r, int c) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  Vector values_;
};

/// y = A x. OpenMP-parallel over rows.
Vector spmv(const SparseMatrix& a, std::span<const double> x);

namespace serial {
/// Single-threaded reference for spmv.
Vector spmv(const SparseMatrix& a, std::span<const double> x);
}

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

struct LinearSolveReport {
  double residual_norm = 0.0;     // ||A x - b||_2
  double rhs_norm = 0.0;          // ||b||_2
  int refinement_steps = 0;
  bool regularized = false;       // Tikhonov safeguard was applied
};

class LinearSolveError : public std::runtime_error {
 public:
  LinearSolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Sparse Cholesky for a sequence of SPD systems sharing one sparsity
/// pattern. The symbolic analysis is done on the first factorization and
/// reused while the pattern stays the same.
class SpdSolver {
 public:
  explicit SpdSolver(double safeguard = 1e-12);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Factorizes A (full symmetric storage). On breakdown the diagonal is
  /// shifted by safeguard * diag(A) and the factorization retried once.
  void factorize(const SparseMatrix& a);

  /// Solves with the last factorization; requires ||Ax - b|| <= tol ||b||.
  Vector solve(std::span<const double> b, double tol, LinearSolveReport* report = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot SPD solve.
Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol, LinearSolveReport* report = nullptr);

}  // namespace gradcon
