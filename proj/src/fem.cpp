#include "gradcon/fem.hpp"

#include <cmath>
#include <stdexcept>

#include "gradcon/huber.hpp"

namespace gradcon {

const QuadratureRule& triangle_rule() {
  static const QuadratureRule rule = [] {
    constexpr double a1 = 0.445948490915964886318329253883;
    constexpr double w1 = 0.223381589678011465944819829645;
    constexpr double a2 = 0.091576213509770743459571463402;
    constexpr double w2 = 0.109951743655321867638402403478;
    QuadratureRule r;
    r.barycentric = {{a1, a1, 1.0 - 2.0 * a1}, {a1, 1.0 - 2.0 * a1, a1}, {1.0 - 2.0 * a1, a1, a1},
                     {a2, a2, 1.0 - 2.0 * a2}, {a2, 1.0 - 2.0 * a2, a2}, {1.0 - 2.0 * a2, a2, a2}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

const LineRule& edge_rule() {
  static const LineRule rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return LineRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

QuadraturePoints::QuadraturePoints(const Mesh& mesh) : nq_(triangle_rule().weights.size()) {
  const auto& rule = triangle_rule();
  points_.resize(mesh.num_triangles() * nq_);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (std::size_t q = 0; q < nq_; ++q) {
      const auto& l = rule.barycentric[q];
      points_[t * nq_ + q] =
          l[0] * mesh.vertex(tri.v[0]) + l[1] * mesh.vertex(tri.v[1]) + l[2] * mesh.vertex(tri.v[2]);
    }
  }
}

Vector QuadraturePoints::sample(const ScalarField& f) const {
  Vector out(points_.size());
  for (std::size_t k = 0; k < points_.size(); ++k) out[k] = f(k / nq_, points_[k]);
  return out;
}

Point2 rt0_basis(const Mesh& mesh, std::size_t tri, int i, Point2 x) {
  const Triangle& t = mesh.triangle(tri);
  return (t.sign[i] / (2.0 * t.area)) * (x - mesh.vertex(t.v[i]));
}

Point2 rt0_value(const Mesh& mesh, std::span<const double> p, std::size_t tri, Point2 x) {
  const Triangle& t = mesh.triangle(tri);
  Point2 v;
  for (int i = 0; i < 3; ++i) v = v + (t.sign[i] * p[t.edge[i]]) * (x - mesh.vertex(t.v[i]));
  return (1.0 / (2.0 * t.area)) * v;
}

Point2 rt0_eval(const Mesh& mesh, std::span<const double> p, std::size_t tri, Point2 x) {
  if (p.size() != mesh.num_edges()) throw std::invalid_argument("rt0_eval: field size does not match mesh edges");
  if (!mesh.contains(tri, x)) throw std::out_of_range("rt0_eval: point outside triangle");
  return rt0_value(mesh, p, tri, x);
}

Rt0Field interpolate_rt0(const Mesh& mesh, const VectorFunction& v) {
  const LineRule& rule = edge_rule();
  Rt0Field dof(mesh.num_edges(), 0.0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    const Point2 a = mesh.vertex(ed.v[0]);
    const Point2 b = mesh.vertex(ed.v[1]);
    double s = 0.0;
    for (int g = 0; g < 3; ++g) s += rule.weights[g] * dot(v(a + rule.points[g] * (b - a)), ed.normal);
    dof[e] = s * ed.length;
  }
  return dof;
}

P0Field project_p0(const Mesh& mesh, const ScalarField& f) {
  Vector load = assemble_load(mesh, f);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) load[t] /= mesh.triangle(t).area;
  return load;
}

SparseMatrix assemble_div(const Mesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(3 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) trip.push_back({static_cast<int>(t), static_cast<int>(tri.edge[i]), tri.sign[i]});
  }
  return SparseMatrix::from_triplets(static_cast<int>(mesh.num_triangles()), static_cast<int>(mesh.num_edges()), trip);
}

Vector assemble_mass_p0(const Mesh& mesh) {
  Vector m(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) m[t] = mesh.triangle(t).area;
  return m;
}

Vector divergence(const Mesh& mesh, std::span<const double> p) {
  Vector d(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += tri.sign[i] * p[tri.edge[i]];
    d[t] = s / tri.area;
  }
  return d;
}

Vector assemble_load(const Mesh& mesh, const ScalarField& f) {
  const QuadratureRule& rule = triangle_rule();
  Vector load(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.barycentric[q];
      const Point2 x = l[0] * mesh.vertex(tri.v[0]) + l[1] * mesh.vertex(tri.v[1]) + l[2] * mesh.vertex(tri.v[2]);
      s += rule.weights[q] * f(t, x);
    }
    load[t] = s * tri.area;
  }
  return load;
}

Rt0Pattern::Rt0Pattern(const Mesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (const Triangle& tri : mesh.triangles())
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.push_back({static_cast<int>(tri.edge[i]), static_cast<int>(tri.edge[j]), 0.0});
  const int n = static_cast<int>(mesh.num_edges());
  skeleton_ = SparseMatrix::from_triplets(n, n, trip);
  slots_.resize(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        slots_[9 * t + 3 * i + j] =
            static_cast<int>(skeleton_.find(static_cast<int>(tri.edge[i]), static_cast<int>(tri.edge[j])));
  }
}

namespace {

// Geometry of one triangle prepared for the quadrature loops.
struct ElementFrame {
  std::array<Point2, 3> vertex;
  std::array<double, 3> sign;
  std::array<std::size_t, 3> edge;
  double area;
  double scale;  // 1 / (2 |T|)

  ElementFrame(const Mesh& mesh, std::size_t t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      vertex[i] = mesh.vertex(tri.v[i]);
      sign[i] = tri.sign[i];
      edge[i] = tri.edge[i];
    }
    area = tri.area;
    scale = 1.0 / (2.0 * area);
  }

  std::array<Point2, 3> basis(Point2 x) const {
    return {(sign[0] * scale) * (x - vertex[0]), (sign[1] * scale) * (x - vertex[1]),
            (sign[2] * scale) * (x - vertex[2])};
  }

  Point2 value(std::span<const double> p, const std::array<Point2, 3>& psi) const {
    return p[edge[0]] * psi[0] + p[edge[1]] * psi[1] + p[edge[2]] * psi[2];
  }
};

void huber_residual_local(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                          std::span<const double> alpha_qp, double tau, std::size_t t, double* out) {
  const ElementFrame el(mesh, t);
  out[0] = out[1] = out[2] = 0.0;
  for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
    const auto psi = el.basis(qp.point(t, q));
    const Point2 g = huber::dphi(el.value(p, psi), tau);
    const double w = qp.weight(q) * el.area * alpha_qp[t * qp.per_triangle() + q];
    for (int i = 0; i < 3; ++i) out[i] += w * dot(g, psi[i]);
  }
}

void huber_jacobian_local(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                          std::span<const double> alpha_qp, double tau, std::size_t t, double* out) {
  const ElementFrame el(mesh, t);
  for (int k = 0; k < 9; ++k) out[k] = 0.0;
  for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
    const auto psi = el.basis(qp.point(t, q));
    const huber::Sym2 h = huber::d2phi(el.value(p, psi), tau);
    const double w = qp.weight(q) * el.area * alpha_qp[t * qp.per_triangle() + q];
    for (int j = 0; j < 3; ++j) {
      const Point2 hj = h.apply(psi[j]);
      for (int i = 0; i < 3; ++i) out[3 * i + j] += w * dot(psi[i], hj);
    }
  }
}

void check_sizes(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                 std::span<const double> alpha_qp) {
  if (p.size() != mesh.num_edges()) throw std::invalid_argument("huber assembly: RT0 field size mismatch");
  if (alpha_qp.size() != qp.size()) throw std::invalid_argument("huber assembly: alpha sample size mismatch");
  if (qp.size() != mesh.num_triangles() * qp.per_triangle())
    throw std::invalid_argument("huber assembly: quadrature points belong to another mesh");
}

void zero_neumann(Vector& r, std::span<const char> neumann) {
  for (std::size_t e = 0; e < neumann.size(); ++e)
    if (neumann[e]) r[e] = 0.0;
}

}  // namespace

Vector assemble_huber_residual(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                               std::span<const double> alpha_qp, double tau, std::span<const char> neumann) {
  check_sizes(mesh, qp, p, alpha_qp);
  const long nt = static_cast<long>(mesh.num_triangles());
  std::vector<double> local(3 * mesh.num_triangles());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nt; ++t) huber_residual_local(mesh, qp, p, alpha_qp, tau, t, &local[3 * t]);

  Vector r(mesh.num_edges(), 0.0);
  for (long t = 0; t < nt; ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) r[tri.edge[i]] += local[3 * t + i];
  }
  zero_neumann(r, neumann);
  return r;
}

Vector assemble_huber_residual(const Mesh& mesh, std::span<const double> p, const ScalarField& alpha, double tau) {
  const QuadraturePoints qp(mesh);
  const Vector a = qp.sample(alpha);
  return assemble_huber_residual(mesh, qp, p, a, tau);
}

SparseMatrix assemble_huber_jacobian(const Mesh& mesh, const Rt0Pattern& pattern, const QuadraturePoints& qp,
                                     std::span<const double> p, std::span<const double> alpha_qp, double tau) {
  check_sizes(mesh, qp, p, alpha_qp);
  const long nt = static_cast<long>(mesh.num_triangles());
  std::vector<double> local(9 * mesh.num_triangles());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nt; ++t) huber_jacobian_local(mesh, qp, p, alpha_qp, tau, t, &local[9 * t]);

  SparseMatrix g = pattern.matrix();
  auto vals = g.values();
  std::fill(vals.begin(), vals.end(), 0.0);
  for (long t = 0; t < nt; ++t)
    for (int k = 0; k < 9; ++k) vals[pattern.slot(t, k / 3, k % 3)] += local[9 * t + k];
  return g;
}

SparseMatrix assemble_huber_jacobian(const Mesh& mesh, std::span<const double> p, const ScalarField& alpha,
                                     double tau) {
  const QuadraturePoints qp(mesh);
  const Rt0Pattern pattern(mesh);
  const Vector a = qp.sample(alpha);
  return assemble_huber_jacobian(mesh, pattern, qp, p, a, tau);
}

SparseMatrix assemble_reduced_jacobian(const Mesh& mesh, const Rt0Pattern& pattern, const QuadraturePoints& qp,
                                       std::span<const double> p, std::span<const double> alpha_qp, double tau,
                                       std::span<const char> neumann) {
  SparseMatrix s = assemble_huber_jacobian(mesh, pattern, qp, p, alpha_qp, tau);
  auto vals = s.values();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double inv = 1.0 / tri.area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vals[pattern.slot(t, i, j)] += tri.sign[i] * tri.sign[j] * inv;
  }
  if (!neumann.empty()) {
    for (int r = 0; r < s.rows(); ++r) {
      for (int k = s.row_ptr()[r]; k < s.row_ptr()[r + 1]; ++k) {
        const int c = s.col_idx()[k];
        if (neumann[r] || neumann[c]) vals[k] = (r == c) ? 1.0 : 0.0;
      }
    }
  }
  return s;
}

SparseMatrix assemble_mass_rt0(const Mesh& mesh) {
  const QuadraturePoints qp(mesh);
  const Rt0Pattern pattern(mesh);
  SparseMatrix m = pattern.matrix();
  auto vals = m.values();
  std::fill(vals.begin(), vals.end(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame el(mesh, t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const auto psi = el.basis(qp.point(t, q));
      const double w = qp.weight(q) * el.area;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) vals[pattern.slot(t, i, j)] += w * dot(psi[i], psi[j]);
    }
  }
  return m;
}

double integrate_alpha_norm(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                            std::span<const double> alpha_qp) {
  check_sizes(mesh, qp, p, alpha_qp);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame el(mesh, t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const Point2 v = el.value(p, el.basis(qp.point(t, q)));
      s += qp.weight(q) * el.area * alpha_qp[t * qp.per_triangle() + q] * std::hypot(v.x, v.y);
    }
  }
  return s;
}

double integrate_alpha_huber(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                             std::span<const double> alpha_qp, double tau) {
  check_sizes(mesh, qp, p, alpha_qp);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame el(mesh, t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const Point2 v = el.value(p, el.basis(qp.point(t, q)));
      s += qp.weight(q) * el.area * alpha_qp[t * qp.per_triangle() + q] * huber::phi(v, tau);
    }
  }
  return s;
}

double l2_error_p0(const Mesh& mesh, std::span<const double> u, const PointFunction& exact) {
  if (u.size() != mesh.num_triangles()) throw std::invalid_argument("l2_error_p0: field size mismatch");
  const QuadraturePoints qp(mesh);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.triangle(t).area;
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const double d = u[t] - exact(qp.point(t, q));
      s += qp.weight(q) * area * d * d;
    }
  }
  return std::sqrt(s);
}

double l2_error_rt0(const Mesh& mesh, std::span<const double> p, const VectorFunction& exact) {
  if (p.size() != mesh.num_edges()) throw std::invalid_argument("l2_error_rt0: field size mismatch");
  const QuadraturePoints qp(mesh);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame el(mesh, t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const Point2 x = qp.point(t, q);
      const Point2 d = el.value(p, el.basis(x)) - exact(x);
      s += qp.weight(q) * el.area * dot(d, d);
    }
  }
  return std::sqrt(s);
}

namespace serial {

Vector assemble_huber_residual(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                               std::span<const double> alpha_qp, double tau, std::span<const char> neumann) {
  check_sizes(mesh, qp, p, alpha_qp);
  Vector r(mesh.num_edges(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const Point2 x = qp.point(t, q);
      const Point2 g = huber::dphi(rt0_value(mesh, p, t, x), tau);
      const double w = qp.weight(q) * tri.area * alpha_qp[t * qp.per_triangle() + q];
      for (int i = 0; i < 3; ++i) r[tri.edge[i]] += w * dot(g, rt0_basis(mesh, t, i, x));
    }
  }
  zero_neumann(r, neumann);
  return r;
}

SparseMatrix assemble_huber_jacobian(const Mesh& mesh, const QuadraturePoints& qp, std::span<const double> p,
                                     std::span<const double> alpha_qp, double tau) {
  check_sizes(mesh, qp, p, alpha_qp);
  std::vector<Triplet> trip;
  trip.reserve(9 * qp.size());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const Point2 x = qp.point(t, q);
      const huber::Sym2 h = huber::d2phi(rt0_value(mesh, p, t, x), tau);
      const double w = qp.weight(q) * tri.area * alpha_qp[t * qp.per_triangle() + q];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trip.push_back({static_cast<int>(tri.edge[i]), static_cast<int>(tri.edge[j]),
                          w * dot(rt0_basis(mesh, t, i, x), h.apply(rt0_basis(mesh, t, j, x)))});
    }
  }
  const int n = static_cast<int>(mesh.num_edges());
  return SparseMatrix::from_triplets(n, n, trip);
}

}  // namespace serial

}  // namespace gradcon
