#include "gradcon/linalg.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace gradcon {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx, Vector values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0) throw std::invalid_argument("sparse: negative shape");
  if (row_ptr_.size() != static_cast<std::size_t>(rows_) + 1 || row_ptr_.front() != 0 ||
      static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size() || col_idx_.size() != values_.size())
    throw std::invalid_argument("sparse: inconsistent CSR arrays");
  for (int r = 0; r < rows_; ++r) {
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] < 0 || col_idx_[k] >= cols_) throw std::invalid_argument("sparse: column index out of range");
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1])
        throw std::invalid_argument("sparse: column indices must be sorted and unique");
      if (!std::isfinite(values_[k])) throw std::invalid_argument("sparse: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  std::vector<int> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("sparse: triplet index out of range");
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<int> cols_tmp(triplets.size());
  Vector vals_tmp(triplets.size());
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (const Triplet& t : triplets) {
    const int k = fill[t.row]++;
    cols_tmp[k] = t.col;
    vals_tmp[k] = t.value;
  }

  std::vector<int> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> col_idx;
  Vector values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::vector<int> order;
  for (int r = 0; r < rows; ++r) {
    order.resize(count[r + 1] - count[r]);
    std::iota(order.begin(), order.end(), count[r]);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cols_tmp[a] < cols_tmp[b]; });
    for (int k : order) {
      if (static_cast<int>(col_idx.size()) > row_ptr[r] && col_idx.back() == cols_tmp[k]) {
        values.back() += vals_tmp[k];
      } else {
        col_idx.push_back(cols_tmp[k]);
        values.push_back(vals_tmp[k]);
      }
    }
    row_ptr[r + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> row_ptr(static_cast<std::size_t>(n) + 1);
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::vector<int> col_idx(static_cast<std::size_t>(n));
  std::iota(col_idx.begin(), col_idx.end(), 0);
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), Vector(static_cast<std::size_t>(n), 1.0));
}

long SparseMatrix::find(int r, int c) const {
  const auto first = col_idx_.begin() + row_ptr_[r];
  const auto last = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return -1;
  return static_cast<long>(it - col_idx_.begin());
}

double SparseMatrix::coeff(int r, int c) const {
  const long k = find(r, c);
  return k < 0 ? 0.0 : values_[k];
}

namespace {
void check_spmv_dims(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(a.cols()))
    throw std::invalid_argument("spmv: dimension mismatch (" + std::to_string(a.cols()) + " columns, vector of " +
                                std::to_string(x.size()) + ")");
}
}  // namespace

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  check_spmv_dims(a, x);
  Vector y(static_cast<std::size_t>(a.rows()), 0.0);
  const int* rp = a.row_ptr().data();
  const int* ci = a.col_idx().data();
  const double* v = a.values().data();
  const int rows = a.rows();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int k = rp[r]; k < rp[r + 1]; ++k) s += v[k] * x[ci[k]];
    y[r] = s;
  }
  return y;
}

namespace serial {
Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  check_spmv_dims(a, x);
  Vector y(static_cast<std::size_t>(a.rows()), 0.0);
  for (int r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) s += a.values()[k] * x[a.col_idx()[k]];
    y[r] = s;
  }
  return y;
}
}  // namespace serial

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

struct SpdSolver::Impl {
  using EigenMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  double safeguard;
  EigenMatrix matrix;
  Eigen::CholmodDecomposition<EigenMatrix, Eigen::Lower> chol;
  std::vector<int> pattern_ptr;
  std::vector<int> pattern_idx;
  bool analyzed = false;
  bool regularized = false;
  bool factorized = false;

  void load(const SparseMatrix& a) {
    const bool same = analyzed && pattern_ptr.size() == a.row_ptr().size() &&
                      std::equal(pattern_ptr.begin(), pattern_ptr.end(), a.row_ptr().begin()) &&
                      std::equal(pattern_idx.begin(), pattern_idx.end(), a.col_idx().begin(), a.col_idx().end());
    if (!same) {
      // Symmetric storage: the CSR arrays of A are also its CSC arrays.
      pattern_ptr.assign(a.row_ptr().begin(), a.row_ptr().end());
      pattern_idx.assign(a.col_idx().begin(), a.col_idx().end());
      matrix = Eigen::Map<const EigenMatrix>(a.rows(), a.cols(), static_cast<int>(a.nnz()), pattern_ptr.data(),
                                             pattern_idx.data(), a.values().data());
      matrix.makeCompressed();
      chol.analyzePattern(matrix);
      analyzed = true;
    } else {
      std::copy(a.values().begin(), a.values().end(), matrix.valuePtr());
    }
  }
};

SpdSolver::SpdSolver(double safeguard) : impl_(std::make_unique<Impl>()) {
  impl_->safeguard = safeguard;
  // Breakdown is reported through info(); keep CHOLMOD quiet about it.
  impl_->chol.cholmod().print = 0;
  impl_->chol.cholmod().error_handler = nullptr;
}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_spd: matrix must be square");
  Impl& s = *impl_;
  s.load(a);
  s.regularized = false;
  s.factorized = false;
  s.chol.factorize(s.matrix);
  if (s.chol.info() != Eigen::Success) {
    Impl::EigenMatrix shifted = s.matrix;
    for (int c = 0; c < shifted.outerSize(); ++c)
      for (Impl::EigenMatrix::InnerIterator it(shifted, c); it; ++it)
        if (it.row() == it.col()) it.valueRef() *= 1.0 + s.safeguard;
    s.chol.factorize(shifted);
    s.regularized = true;
    if (s.chol.info() != Eigen::Success)
      throw LinearSolveError("solve_spd: Cholesky factorization broke down", std::nan(""));
  }
  s.factorized = true;
}

Vector SpdSolver::solve(std::span<const double> b, double tol, LinearSolveReport* report) {
  Impl& s = *impl_;
  if (!s.factorized) throw std::logic_error("solve_spd: solve called before factorize");
  const int n = static_cast<int>(s.matrix.rows());
  if (b.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("solve_spd: dimension mismatch");

  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
  Eigen::VectorXd x = s.chol.solve(rhs);
  const double bnorm = rhs.norm();
  Eigen::VectorXd r = rhs - s.matrix.selfadjointView<Eigen::Lower>() * x;
  int steps = 0;
  // Iterative refinement against the unshifted matrix.
  while (r.norm() > tol * bnorm && steps < 5) {
    x += s.chol.solve(r);
    r = rhs - s.matrix.selfadjointView<Eigen::Lower>() * x;
    ++steps;
  }
  const double rnorm = r.norm();
  if (report) {
    report->residual_norm = rnorm;
    report->rhs_norm = bnorm;
    report->refinement_steps = steps;
    report->regularized = s.regularized;
  }
  if (!std::isfinite(rnorm) || rnorm > tol * bnorm)
    throw LinearSolveError("solve_spd: residual " + std::to_string(rnorm) + " exceeds tolerance", rnorm);
  return Vector(x.data(), x.data() + n);
}

Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol, LinearSolveReport* report) {
  SpdSolver solver;
  solver.factorize(a);
  return solver.solve(b, tol, report);
}

}  // namespace gradcon
