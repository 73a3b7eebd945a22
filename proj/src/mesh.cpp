#include "gradcon/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradcon {

const char* side_name(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

bool BoundaryPartition::any_dirichlet() const {
  return std::any_of(neumann.begin(), neumann.end(), [](bool n) { return !n; });
}

Mesh::Mesh(const Rect& rect, std::size_t nx, std::size_t ny) : rect_(rect), nx_(nx), ny_(ny) {
  if (nx == 0 || ny == 0) throw std::invalid_argument("mesh: nx and ny must be positive");
  if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1))
    throw std::invalid_argument("mesh: rectangle must satisfy x0 < x1 and y0 < y1");

  const double hx = dx();
  const double hy = dy();
  auto vid = [&](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };

  vertices_.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      // Snap the last row/column onto the rectangle exactly.
      const double x = (i == nx) ? rect.x1 : rect.x0 + static_cast<double>(i) * hx;
      const double y = (j == ny) ? rect.y1 : rect.y0 + static_cast<double>(j) * hy;
      vertices_.push_back({x, y});
    }
  }

  const std::size_t n_h = nx * (ny + 1);
  const std::size_t n_v = (nx + 1) * ny;
  const std::size_t n_d = nx * ny;
  auto h_edge = [&](std::size_t i, std::size_t j) { return j * nx + i; };
  auto v_edge = [&](std::size_t i, std::size_t j) { return n_h + j * (nx + 1) + i; };
  auto d_edge = [&](std::size_t i, std::size_t j) { return n_h + n_v + j * nx + i; };

  edges_.resize(n_h + n_v + n_d);
  auto make_edge = [&](std::size_t id, std::size_t a, std::size_t b) {
    Edge& e = edges_[id];
    e.v = {std::min(a, b), std::max(a, b)};
    const Point2 t = vertices_[e.v[1]] - vertices_[e.v[0]];
    e.length = std::hypot(t.x, t.y);
    e.normal = {t.y / e.length, -t.x / e.length};
  };
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) make_edge(h_edge(i, j), vid(i, j), vid(i + 1, j));
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) make_edge(v_edge(i, j), vid(i, j), vid(i, j + 1));
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) make_edge(d_edge(i, j), vid(i, j), vid(i + 1, j + 1));

  triangles_.reserve(2 * nx * ny);
  auto make_tri = [&](std::array<std::size_t, 3> v, std::array<std::size_t, 3> e) {
    Triangle t;
    t.v = v;
    t.edge = e;
    const Point2& a = vertices_[v[0]];
    const Point2& b = vertices_[v[1]];
    const Point2& c = vertices_[v[2]];
    t.area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    for (int k = 0; k < 3; ++k) {
      const Edge& ed = edges_[e[k]];
      const Point2 mid = 0.5 * (vertices_[ed.v[0]] + vertices_[ed.v[1]]);
      t.sign[k] = dot(ed.normal, mid - vertices_[v[k]]) > 0.0 ? 1.0 : -1.0;
    }
    triangles_.push_back(t);
  };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      make_tri({v00, v10, v11}, {v_edge(i + 1, j), d_edge(i, j), h_edge(i, j)});
      make_tri({v00, v11, v01}, {h_edge(i, j + 1), v_edge(i, j), d_edge(i, j)});
    }
  }

  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  edge_tris_.assign(edges_.size(), {unset, unset});
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (std::size_t e : triangles_[t].edge) {
      auto& slot = edge_tris_[e];
      if (slot[0] == unset) slot = {t, t};
      else slot[1] = t;
    }
  }

  for (std::size_t i = 0; i < nx; ++i) boundary_.push_back({h_edge(i, 0), Side::bottom});
  for (std::size_t i = 0; i < nx; ++i) boundary_.push_back({h_edge(i, ny), Side::top});
  for (std::size_t j = 0; j < ny; ++j) boundary_.push_back({v_edge(0, j), Side::left});
  for (std::size_t j = 0; j < ny; ++j) boundary_.push_back({v_edge(nx, j), Side::right});
}

double Mesh::h() const { return std::min(dx(), dy()); }

Point2 Mesh::centroid(std::size_t tri) const {
  const Triangle& t = triangles_[tri];
  const Point2 s = vertices_[t.v[0]] + vertices_[t.v[1]] + vertices_[t.v[2]];
  return (1.0 / 3.0) * s;
}

ElementGeometry Mesh::element_geometry(std::size_t tri) const {
  const Triangle& t = triangles_.at(tri);
  ElementGeometry g;
  g.area = t.area;
  g.centroid = centroid(tri);
  for (int k = 0; k < 3; ++k) {
    const Edge& e = edges_[t.edge[k]];
    g.edge_length[k] = e.length;
    g.outward_normal[k] = t.sign[k] * e.normal;
  }
  return g;
}

bool Mesh::contains(std::size_t tri, Point2 pt, double tol) const {
  const Triangle& t = triangles_.at(tri);
  for (int k = 0; k < 3; ++k) {
    const Point2& a = vertices_[t.v[(k + 1) % 3]];
    const Point2& b = vertices_[t.v[(k + 2) % 3]];
    const double cross = (b.x - a.x) * (pt.y - a.y) - (b.y - a.y) * (pt.x - a.x);
    if (cross < -tol * (std::abs(b.x - a.x) + std::abs(b.y - a.y))) return false;
  }
  return true;
}

Mesh build_rect_mesh(const Rect& rect, std::size_t nx, std::size_t ny) { return Mesh(rect, nx, ny); }

BoundaryClassification classify_boundary(const Mesh& mesh, const BoundaryPartition& bp) {
  BoundaryClassification out;
  for (const BoundaryEdge& b : mesh.boundary_edges()) {
    (bp.is_neumann(b.side) ? out.neumann : out.dirichlet).push_back(b.edge);
  }
  return out;
}

std::vector<char> neumann_mask(const Mesh& mesh, const BoundaryPartition& bp) {
  std::vector<char> mask(mesh.num_edges(), 0);
  for (const BoundaryEdge& b : mesh.boundary_edges())
    if (bp.is_neumann(b.side)) mask[b.edge] = 1;
  return mask;
}

}  // namespace gradcon
