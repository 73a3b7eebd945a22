#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcon/linalg.hpp"

using namespace gradcon;

namespace {

// Dense A = L L^T + n I with random lower-triangular L, stored sparse.
SparseMatrix random_spd(int n, std::mt19937_64& rng, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    l[i][i] = 1.0 + std::abs(u(rng));
    for (int j = 0; j < i; ++j)
      if (keep(rng)) l[i][j] = u(rng);
  }
  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k <= std::min(i, j); ++k) s += l[i][k] * l[j][k];
      if (s != 0.0) trips.push_back({i, j, s});
    }
  return SparseMatrix::from_triplets(n, n, trips);
}

Vector residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  Vector r = spmv(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

}  // namespace

TEST_CASE("sparse matrix construction") {
  const std::vector<Triplet> t{{0, 1, 2.0}, {0, 1, 3.0}, {1, 0, -1.0}, {0, 0, 4.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, t);
  CHECK(a.nnz() == 3);
  CHECK(a.coeff(0, 1) == 5.0);
  CHECK(a.coeff(1, 1) == 0.0);
  CHECK(a.find(1, 1) == -1);
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix(1, 1, {0, 1}, {0}, {NAN}), std::invalid_argument);
}

TEST_CASE("spmv") {
  const SparseMatrix id = SparseMatrix::identity(3);
  const Vector x{1.0, -2.0, 3.5};
  CHECK(spmv(id, x) == x);
  const std::vector<Triplet> t{{0, 0, 2.0}, {0, 2, 1.0}, {1, 1, -1.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, 3, t);
  const Vector y = spmv(a, x);
  CHECK(y == Vector{5.5, 2.0});
  CHECK(serial::spmv(a, x) == y);
  CHECK_THROWS_AS(spmv(a, Vector{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(serial::spmv(a, Vector{1.0}), std::invalid_argument);

  std::mt19937_64 rng(3);
  const SparseMatrix big = random_spd(120, rng, 0.1);
  Vector z(120);
  std::normal_distribution<double> d;
  for (double& v : z) v = d(rng);
  const Vector p = spmv(big, z), s = serial::spmv(big, z);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == s[i]);
}

TEST_CASE("SPD solves") {
  SUBCASE("identity and diagonal") {
    const Vector b{1.0, 2.0, 3.0, 4.0};
    CHECK(solve_spd(SparseMatrix::identity(4), b, 1e-14) == b);
    std::vector<Triplet> t;
    for (int i = 0; i < 4; ++i) t.push_back({i, i, 4.0});
    const Vector x = solve_spd(SparseMatrix::from_triplets(4, 4, t), b, 1e-14);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i] / 4.0));
  }

  SUBCASE("random 50x50 from L L^T") {
    std::mt19937_64 rng(17);
    const SparseMatrix a = random_spd(50, rng, 0.3);
    Vector b(50);
    std::normal_distribution<double> d;
    for (double& v : b) v = d(rng);
    LinearSolveReport rep;
    const Vector x = solve_spd(a, b, 1e-10, &rep);
    CHECK(norm2(residual(a, x, b)) <= 1e-10 * norm2(b));
    CHECK(rep.residual_norm <= 1e-10 * rep.rhs_norm);
    CHECK_FALSE(rep.regularized);
  }

  SUBCASE("100 random systems up to size 500") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 500);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = size(rng);
      const SparseMatrix a = random_spd(n, rng, std::min(1.0, 6.0 / n));
      Vector b(n);
      for (double& v : b) v = d(rng);
      const Vector x = solve_spd(a, b, 1e-10);
      CHECK(norm2(residual(a, x, b)) <= 1e-10 * norm2(b));
    }
  }

  SUBCASE("factorization reuse across values on one pattern") {
    std::mt19937_64 rng(8);
    const SparseMatrix a = random_spd(40, rng, 0.2);
    SpdSolver solver;
    Vector b(40, 1.0);
    for (double scale : {1.0, 3.0, 0.25}) {
      SparseMatrix s = a;
      for (double& v : s.values()) v *= scale;
      solver.factorize(s);
      const Vector x = solver.solve(b, 1e-10);
      CHECK(norm2(residual(s, x, b)) <= 1e-10 * norm2(b));
    }
  }

  SUBCASE("singular matrix takes the safeguard") {
    // Rank-deficient PSD: [1 1; 1 1] plus a consistent right-hand side.
    const std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
    const SparseMatrix a = SparseMatrix::from_triplets(2, 2, t);
    SpdSolver solver;
    bool threw = false;
    try {
      solver.factorize(a);
      LinearSolveReport rep;
      const Vector x = solver.solve(Vector{1.0, 1.0}, 1e-6, &rep);
      CHECK(rep.regularized);
      CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-6));
    } catch (const LinearSolveError&) {
      threw = true;
    }
    CHECK_FALSE(threw);
  }
}
