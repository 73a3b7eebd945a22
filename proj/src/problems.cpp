#include "gradcon/problems.hpp"

#include <algorithm>
#include <cmath>

namespace gradcon {

double PiecewiseRegions::operator()(Point2 p) const {
  for (const auto& [region, value] : regions)
    if (region.contains(p)) return value;
  return otherwise;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace

void validate(const AlphaSpec& alpha) {
  std::visit(overloaded{
                 [](const AlphaConstant& a) {
                   require(std::isfinite(a.value) && a.value > 0.0, "alpha: constant value must be positive");
                 },
                 [](const AlphaPiecewise& a) {
                   require(std::isfinite(a.pieces.otherwise) && a.pieces.otherwise > 0.0,
                           "alpha: piecewise default value must be positive");
                   for (const auto& r : a.pieces.regions)
                     require(std::isfinite(r.second) && r.second > 0.0, "alpha: piecewise values must be positive");
                 },
                 [](const AlphaMeasureLine& a) {
                   require(std::isfinite(a.base) && a.base > 0.0, "alpha: measure base density must be positive");
                   require(std::isfinite(a.width_factor) && a.width_factor > 0.0,
                           "alpha: measure width factor must be positive");
                   for (const WeightedLine& l : a.lines) {
                     require(std::isfinite(l.weight) && l.weight > 0.0, "alpha: line weight must be positive");
                     require(l.x0 < l.x1, "alpha: line segment must satisfy x0 < x1");
                   }
                 },
             },
             alpha);
}

void validate(const SourceSpec& f) {
  std::visit(overloaded{
                 [](const SourceConstant& s) { require(std::isfinite(s.value), "f: value must be finite"); },
                 [](const SourcePiecewise& s) {
                   require(std::isfinite(s.pieces.otherwise), "f: values must be finite");
                   for (const auto& r : s.pieces.regions) require(std::isfinite(r.second), "f: values must be finite");
                 },
                 [](SourcePreset) {},
                 [](const SourceCells& s) {
                   for (double v : s.values) require(std::isfinite(v), "f: cell values must be finite");
                 },
                 [](const SourceFunction& s) { require(static_cast<bool>(s.fn), "f: empty source function"); },
             },
             f);
}

void validate(const ProblemSpec& problem) {
  require(problem.nx > 0 && problem.ny > 0, "problem: nx and ny must be positive");
  require(problem.rect.x0 < problem.rect.x1 && problem.rect.y0 < problem.rect.y1,
          "problem: rectangle must satisfy x0 < x1 and y0 < y1");
  validate(problem.alpha);
  validate(problem.f);
  if (const auto* cells = std::get_if<SourceCells>(&problem.f))
    require(cells->values.size() == 2 * problem.nx * problem.ny, "f: cell data does not match the mesh");
}

double alpha_at(const AlphaSpec& spec, double h, Point2 x) {
  return std::visit(overloaded{
                        [](const AlphaConstant& a) { return a.value; },
                        [&](const AlphaPiecewise& a) { return a.pieces(x); },
                        [&](const AlphaMeasureLine& a) {
                          double v = a.base;
                          const double width = a.width_factor * h;
                          for (const WeightedLine& l : a.lines) {
                            if (x.x >= l.x0 && x.x <= l.x1 && x.y <= l.y_line && x.y >= l.y_line - width)
                              v += l.weight / width;
                          }
                          return v;
                        },
                    },
                    spec);
}

double alpha_at(const AlphaSpec& spec, const Mesh& mesh, Point2 x) { return alpha_at(spec, mesh.h(), x); }

ScalarField make_alpha_field(const AlphaSpec& spec, const Mesh& mesh) {
  validate(spec);
  const double h = mesh.h();
  return [spec, h](std::size_t, Point2 x) { return alpha_at(spec, h, x); };
}

double example2_u0(Point2 p) {
  const double x = p.x, y = p.y;
  const double bowl = std::min(0.2, 0.5 * (x * x + y * y));
  if (y <= 1.0 - x) return bowl;
  if (1.0 - x < y) return std::max(1.0 - 5.0 * std::hypot(x - 0.7, y - 0.7), bowl);
  return 0.0;
}

ScalarField make_source_field(const SourceSpec& spec) {
  validate(spec);
  return std::visit(overloaded{
                        [](const SourceConstant& s) -> ScalarField {
                          const double c = s.value;
                          return [c](std::size_t, Point2) { return c; };
                        },
                        [](const SourcePiecewise& s) -> ScalarField {
                          return [pieces = s.pieces](std::size_t, Point2 x) { return pieces(x); };
                        },
                        [](SourcePreset preset) -> ScalarField {
                          if (preset == SourcePreset::example2)
                            return [](std::size_t, Point2 x) { return 1e-3 + example2_u0(x); };
                          return [](std::size_t, Point2 x) { return x.y >= 0.5 ? 0.25 : 0.0; };
                        },
                        [](const SourceCells& s) -> ScalarField {
                          return [values = s.values](std::size_t t, Point2) { return values.at(t); };
                        },
                        [](const SourceFunction& s) -> ScalarField { return s.fn; },
                    },
                    spec);
}

ExactSolution exact_solution_ex1(double f, double alpha) {
  if (!(f > 0.0) || !(alpha > 0.0)) throw ConfigError("exact solution requires f > 0 and alpha > 0");
  auto m = [f, alpha](double s) { return std::min({f, alpha * s, alpha * (1.0 - s)}); };
  ExactSolution ex;
  ex.u = [m](Point2 x) { return std::min(m(x.x), m(x.y)); };
  // Oriented so that div p = f - u and p points against grad u.
  ex.p = [m, f, alpha](Point2 x) -> Point2 {
    const double mx = m(x.x), my = m(x.y);
    const double level = f - 0.5 * (mx + my);
    if (std::abs(x.x - 0.5) > std::abs(x.y - 0.5)) return {-(my - mx) * sgn(0.5 - x.x) * level / alpha, 0.0};
    return {0.0, -(mx - my) * sgn(0.5 - x.y) * level / alpha};
  };
  return ex;
}

namespace {

struct ScenarioEntry {
  const char* name;
  double exact_f;  // > 0 when a closed-form solution exists
  double exact_alpha;
};

constexpr ScenarioEntry kScenarios[] = {
    {"ex1_f1_a1", 1.0, 1.0},   {"ex1_f025_a1", 0.25, 1.0}, {"ex1_f01_a1", 0.1, 1.0}, {"ex1_f1_a05", 1.0, 0.5},
    {"ex1_f1_ajump", 0.0, 0.0}, {"ex2_a25", 0.0, 0.0},     {"ex2_a15", 0.0, 0.0},    {"ex4_measure", 0.0, 0.0},
};

const ScenarioEntry* find_scenario(const std::string& name) {
  for (const auto& s : kScenarios)
    if (name == s.name) return &s;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : kScenarios) v.emplace_back(s.name);
    return v;
  }();
  return names;
}

ProblemSpec scenario(const std::string& name, std::size_t n) {
  const ScenarioEntry* entry = find_scenario(name);
  if (!entry) throw ConfigError("unknown scenario '" + name + "'");
  if (n == 0) throw ConfigError("scenario: mesh size must be positive");
  ProblemSpec p;
  p.name = name;
  p.rect = Rect{0.0, 0.0, 1.0, 1.0};
  p.nx = p.ny = n;
  p.boundary = BoundaryPartition::all_dirichlet();
  if (entry->exact_f > 0.0) {
    p.f = SourceConstant{entry->exact_f};
    p.alpha = AlphaConstant{entry->exact_alpha};
  } else if (name == "ex1_f1_ajump") {
    p.f = SourceConstant{1.0};
    p.alpha = AlphaPiecewise{PiecewiseRegions{{{HalfPlane{1.0, 1.0, 1.0}, 0.75}}, 1.0}};
  } else if (name == "ex2_a25") {
    p.f = SourcePreset::example2;
    p.alpha = AlphaConstant{2.5};
  } else if (name == "ex2_a15") {
    p.f = SourcePreset::example2;
    p.alpha = AlphaConstant{1.5};
  } else if (name == "ex4_measure") {
    p.f = SourcePreset::example4;
    p.alpha = AlphaMeasureLine{1.0, {WeightedLine{0.5, 0.0, 1.0, 100.0}}, 100.0};
  }
  return p;
}

std::optional<ExactSolution> scenario_exact(const std::string& name) {
  const ScenarioEntry* entry = find_scenario(name);
  if (!entry || !(entry->exact_f > 0.0)) return std::nullopt;
  return exact_solution_ex1(entry->exact_f, entry->exact_alpha);
}

}  // namespace gradcon
