#pragma once

#include <cmath>

#include "gradcon/mesh.hpp"

namespace gradcon::huber {

/// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Point2 apply(Point2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

// Huber smoothing of the Euclidean norm with radius tau > 0. The switch
// |v| == tau belongs to the quadratic branch.

inline double phi(Point2 v, double tau) {
  const double r = std::hypot(v.x, v.y);
  if (r > tau) return r - 0.5 * tau;
  return (v.x * v.x + v.y * v.y) / (2.0 * tau);
}

inline Point2 dphi(Point2 v, double tau) {
  const double r = std::hypot(v.x, v.y);
  if (r > tau) return (1.0 / r) * v;
  return (1.0 / tau) * v;
}

/// Piecewise second derivative; no smoothing across |v| == tau.
inline Sym2 d2phi(Point2 v, double tau) {
  const double r = std::hypot(v.x, v.y);
  if (r > tau) {
    const double inv = 1.0 / r;
    const double inv3 = inv * inv * inv;
    return {inv - v.x * v.x * inv3, -v.x * v.y * inv3, inv - v.y * v.y * inv3};
  }
  const double d = 1.0 / tau;
  return {d, 0.0, d};
}

}  // namespace gradcon::huber
