#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gradcon/fem.hpp"
#include "gradcon/mesh.hpp"

namespace gradcon {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed half-plane a x + b y <= c.
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  bool contains(Point2 p) const { return a * p.x + b * p.y <= c; }
};

/// First matching region wins; points outside every region take `otherwise`.
struct PiecewiseRegions {
  std::vector<std::pair<HalfPlane, double>> regions;
  double otherwise = 0.0;

  double operator()(Point2 p) const;
};

struct AlphaConstant {
  double value = 1.0;
};

struct AlphaPiecewise {
  PiecewiseRegions pieces;
};

/// Horizontal segment {y = y_line, x0 <= x <= x1} carrying line mass `weight`.
struct WeightedLine {
  double y_line = 0.5;
  double x0 = 0.0;
  double x1 = 1.0;
  double weight = 100.0;
};

/// Lebesgue density `base` plus weighted line measures. On a mesh of size h
/// every line is spread over the strip y_line - width_factor*h <= y <= y_line
/// with density weight / (width_factor*h), clipped to the domain.
struct AlphaMeasureLine {
  double base = 1.0;
  std::vector<WeightedLine> lines;
  double width_factor = 100.0;
};

using AlphaSpec = std::variant<AlphaConstant, AlphaPiecewise, AlphaMeasureLine>;

struct SourceConstant {
  double value = 0.0;
};

struct SourcePiecewise {
  PiecewiseRegions pieces;
};

enum class SourcePreset {
  example2,  // 1e-3 + u0 with the cone/valley/flat u0
  example4,  // 0.25 on y >= 0.5, else 0
};

/// One value per triangle of the problem mesh.
struct SourceCells {
  std::vector<double> values;
};

/// Arbitrary per-(triangle, point) data, used for derived sources such as
/// the effective source of a time step.
struct SourceFunction {
  ScalarField fn;
};

using SourceSpec = std::variant<SourceConstant, SourcePiecewise, SourcePreset, SourceCells, SourceFunction>;

struct ProblemSpec {
  std::string name;
  Rect rect;
  std::size_t nx = 64;
  std::size_t ny = 64;
  BoundaryPartition boundary;
  AlphaSpec alpha = AlphaConstant{1.0};
  SourceSpec f = SourceConstant{0.0};

  Mesh make_mesh() const { return build_rect_mesh(rect, nx, ny); }
};

/// Throws ConfigError unless every alpha value is positive and all data finite.
void validate(const AlphaSpec& alpha);
void validate(const SourceSpec& f);
void validate(const ProblemSpec& problem);

/// alpha at a point; h is the mesh size used by line-measure mollification.
double alpha_at(const AlphaSpec& spec, double h, Point2 x);
double alpha_at(const AlphaSpec& spec, const Mesh& mesh, Point2 x);

ScalarField make_alpha_field(const AlphaSpec& spec, const Mesh& mesh);
ScalarField make_source_field(const SourceSpec& spec);

/// u0 of the second example (cone, valley and flat regions).
double example2_u0(Point2 x);

/// Closed-form pair for constant f and alpha on the unit square.
struct ExactSolution {
  PointFunction u;
  VectorFunction p;
};

ExactSolution exact_solution_ex1(double f, double alpha);

const std::vector<std::string>& scenario_names();

/// Named problem on the unit square with Gamma_D = boundary, on an n x n mesh.
ProblemSpec scenario(const std::string& name, std::size_t n = 64);

/// Exact solution for scenarios that have one.
std::optional<ExactSolution> scenario_exact(const std::string& name);

}  // namespace gradcon
