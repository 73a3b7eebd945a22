#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "gradcon/linalg.hpp"
#include "gradcon/mesh.hpp"

namespace gradcon {

/// RT0 coefficients, one signed total flux per edge.
using Rt0Field = Vector;
/// P0 coefficients, one value per triangle.
using P0Field = Vector;

/// Scalar data sampled per (triangle, point); the triangle index lets
/// piecewise-constant data be evaluated without point location.
using ScalarField = std::function<double(std::size_t tri, Point2 x)>;
using PointFunction = std::function<double(Point2 x)>;
using VectorFunction = std::function<Point2(Point2 x)>;

struct QuadratureRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;  // sum to 1; scale by |T|
};

/// Six-point symmetric rule on triangles, exact for total degree <= 4.
const QuadratureRule& triangle_rule();

/// Three-point Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::array<double, 3> points;
  std::array<double, 3> weights;
};
const LineRule& edge_rule();

/// Physical quadrature points of every triangle, laid out triangle-major.
class QuadraturePoints {
 public:
  explicit QuadraturePoints(const Mesh& mesh);

  std::size_t per_triangle() const { return nq_; }
  std::size_t size() const { return points_.size(); }
  Point2 point(std::size_t tri, std::size_t q) const { return points_[tri * nq_ + q]; }
  double weight(std::size_t q) const { return triangle_rule().weights[q]; }

  /// Values of f at every quadrature point.
  Vector sample(const ScalarField& f) const;

 private:
  std::size_t nq_;
  std::vector<Point2> points_;
};

/// Value at x of the local RT0 basis function of the i-th edge of tri,
/// oriented by the global edge normal.
Point2 rt0_basis(const Mesh& mesh, std::size_t tri, int i, Point2 x);

/// p_h(x) on tri, without checking that x lies in tri.
Point2 rt0_value(const Mesh& mesh, std::span<const double> p, std::size_t tri, Point2 x);

/// p_h(x) on tri; throws std::out_of_range if x is outside tri.
Point2 rt0_eval(const Mesh& mesh, std::span<const double> p, std::size_t tri, Point2 x);

/// Edge DOFs = integral of v . n_e over the edge.
Rt0Field interpolate_rt0(const Mesh& mesh, const VectorFunction& v);

/// P0 cell means of f.
P0Field project_p0(const Mesh& mesh, const ScalarField& f);

/// Discrete divergence pairing: B(T, e) = sign of edge e in T.
SparseMatrix assemble_div(const Mesh& mesh);

/// Diagonal P0 mass matrix, M(T, T) = |T|.
Vector assemble_mass_p0(const Mesh& mesh);

/// RT0 mass matrix (psi_e, psi_e').
SparseMatrix assemble_mass_rt0(const Mesh& mesh);

/// F(T) = integral of f over T.
Vector assemble_load(const Mesh& mesh, const ScalarField& f);

/// Element-wise divergence (B p)_T / |T|.
Vector divergence(const Mesh& mesh, std::span<const double> p);

/// CSR pattern over RT0 DOFs coupling edges that share a triangle, with a
/// per-triangle map from local (i, j) to value positions.
class Rt0Pattern {
 public:
  explicit Rt0Pattern(const Mesh& mesh);

  const SparseMatrix& matrix() const { return skeleton_; }
  int slot(std::size_t tri, int i, int j) const { return slots_[tri * 9 + 3 * i + j]; }

 private:
  SparseMatrix skeleton_;
  std::vector<int> slots_;
};

// Huber terms. alpha_qp holds alpha at the QuadraturePoints of the mesh.
// Rows flagged in the Neumann mask are zeroed.

/// r(e) = sum_T integral_T alpha phi'_tau(p_h) . psi_e
Vector assemble_huber_residual(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                               std::span<const double> alpha_qp, double tau, std::span<const char> neumann = {});

Vector assemble_huber_residual(const Mesh& mesh, std::span<const double> p, const ScalarField& alpha, double tau);

/// G(e, e') = sum_T integral_T alpha psi_e^T phi''_tau(p_h) psi_e'
SparseMatrix assemble_huber_jacobian(const Mesh& mesh, const Rt0Pattern& pattern, const QuadraturePoints& qp,
                                     std::span<const double> p, std::span<const double> alpha_qp, double tau);

SparseMatrix assemble_huber_jacobian(const Mesh& mesh, std::span<const double> p, const ScalarField& alpha,
                                     double tau);

/// Jacobian of the residual with u eliminated: G(p) + B^T M^-1 B. Neumann
/// rows and columns are replaced by the identity.
SparseMatrix assemble_reduced_jacobian(const Mesh& mesh, const Rt0Pattern& pattern, const QuadraturePoints& qp,
                                       std::span<const double> p, std::span<const double> alpha_qp, double tau,
                                       std::span<const char> neumann = {});

/// Integral of alpha |p_h| (the unregularized term) and of alpha phi_tau(p_h).
double integrate_alpha_norm(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                            std::span<const double> alpha_qp);
double integrate_alpha_huber(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                             std::span<const double> alpha_qp, double tau);

double l2_error_p0(const Mesh& mesh, std::span<const double> u, const PointFunction& exact);
double l2_error_rt0(const Mesh& mesh, std::span<const double> p, const VectorFunction& exact);

namespace serial {
// Single-threaded reference implementations accumulating straight into the
// global arrays in triangle order.
Vector assemble_huber_residual(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                               std::span<const double> alpha_qp, double tau, std::span<const char> neumann = {});
SparseMatrix assemble_huber_jacobian(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                                     std::span<const double> alpha_qp, double tau);
}  // namespace serial

}  // namespace gradcon
