#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gradcon {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned rectangle (x0, y0) - (x1, y1).
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

enum class Side : int { left = 0, right = 1, bottom = 2, top = 3 };

const char* side_name(Side s);

/// Sides of the rectangle carrying the no-flux condition (Gamma_N). The
/// remaining sides form Gamma_D.
struct BoundaryPartition {
  std::array<bool, 4> neumann{false, false, false, false};

  static BoundaryPartition all_dirichlet() { return {}; }
  static BoundaryPartition all_neumann() { return {{true, true, true, true}}; }

  bool is_neumann(Side s) const { return neumann[static_cast<int>(s)]; }
  bool any_dirichlet() const;
};

struct Edge {
  std::array<std::size_t, 2> v{};  // v[0] < v[1]
  Point2 normal;                   // global unit normal
  double length = 0.0;
};

struct Triangle {
  std::array<std::size_t, 3> v{};      // counterclockwise
  std::array<std::size_t, 3> edge{};   // edge[i] is opposite v[i]
  std::array<double, 3> sign{};        // +1 when the global normal of edge[i] points out of the triangle
  double area = 0.0;
};

struct BoundaryEdge {
  std::size_t edge = 0;
  Side side = Side::left;
};

struct ElementGeometry {
  double area = 0.0;
  Point2 centroid;
  std::array<double, 3> edge_length{};
  std::array<Point2, 3> outward_normal{};
};

/// Structured triangulation of a rectangle. Every grid cell is split by the
/// lower-left to upper-right diagonal. Vertices are numbered row-major, edges
/// as horizontal, then vertical, then diagonal. The global normal of an edge
/// is the tangent from its lower-numbered to its higher-numbered vertex
/// rotated clockwise by 90 degrees.
///
/// Immutable after construction.
class Mesh {
 public:
  Mesh(const Rect& rect, std::size_t nx, std::size_t ny);

  const Rect& rect() const { return rect_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double dx() const { return rect_.width() / static_cast<double>(nx_); }
  double dy() const { return rect_.height() / static_cast<double>(ny_); }
  /// Mesh size used by the line-measure mollification.
  double h() const;

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  std::span<const Point2> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_; }

  const Point2& vertex(std::size_t i) const { return vertices_[i]; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  const Triangle& triangle(std::size_t i) const { return triangles_[i]; }

  Point2 centroid(std::size_t tri) const;
  ElementGeometry element_geometry(std::size_t tri) const;
  bool contains(std::size_t tri, Point2 pt, double tol = 1e-12) const;

  /// Triangles adjacent to an edge; the second entry equals the first for
  /// boundary edges.
  std::array<std::size_t, 2> edge_triangles(std::size_t e) const { return edge_tris_[e]; }
  bool is_boundary_edge(std::size_t e) const { return edge_tris_[e][0] == edge_tris_[e][1]; }

  /// Index of the triangle covering grid cell (i, j); lower = below the diagonal.
  std::size_t cell_triangle(std::size_t i, std::size_t j, bool lower) const {
    return 2 * (j * nx_ + i) + (lower ? 0 : 1);
  }

 private:
  Rect rect_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<Point2> vertices_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::array<std::size_t, 2>> edge_tris_;
};

Mesh build_rect_mesh(const Rect& rect, std::size_t nx, std::size_t ny);

struct BoundaryClassification {
  std::vector<std::size_t> dirichlet;
  std::vector<std::size_t> neumann;
};

BoundaryClassification classify_boundary(const Mesh& mesh, const BoundaryPartition& bp);

/// Per-edge flag, true for edges whose normal flux is pinned to zero.
std::vector<char> neumann_mask(const Mesh& mesh, const BoundaryPartition& bp);

}  // namespace gradcon
