#include <doctest.h>

#include <cmath>

#include "gradcon/problems.hpp"
#include "gradcon/study.hpp"

using namespace gradcon;

TEST_CASE("alpha_at") {
  CHECK(alpha_at(AlphaConstant{2.5}, 0.1, {0.3, 0.7}) == 2.5);

  const AlphaPiecewise jump{PiecewiseRegions{{{HalfPlane{1, 1, 1}, 0.75}}, 1.0}};
  CHECK(alpha_at(jump, 0.1, {0.1, 0.1}) == 0.75);
  CHECK(alpha_at(jump, 0.1, {0.9, 0.8}) == 1.0);

  const AlphaMeasureLine line{1.0, {WeightedLine{0.5, 0.0, 1.0, 100.0}}, 100.0};
  CHECK(alpha_at(line, 1e-2, {0.3, 0.499}) == doctest::Approx(101.0));
  CHECK(alpha_at(line, 1e-3, {0.3, 0.45}) == doctest::Approx(1001.0));
  CHECK(alpha_at(line, 1e-3, {0.3, 0.38}) == 1.0);
  CHECK(alpha_at(line, 1e-3, {0.3, 0.501}) == 1.0);

  CHECK_THROWS_AS(validate(AlphaSpec{AlphaConstant{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(AlphaSpec{AlphaConstant{-1.0}}), ConfigError);
  CHECK_THROWS_AS(validate(AlphaSpec{AlphaPiecewise{PiecewiseRegions{{{HalfPlane{1, 0, 0}, -2.0}}, 1.0}}}),
                  ConfigError);
  CHECK_THROWS_AS(validate(SourceSpec{SourceConstant{NAN}}), ConfigError);
}

TEST_CASE("line measure mass") {
  const AlphaSpec spec = AlphaMeasureLine{1.0, {WeightedLine{0.5, 0.0, 1.0, 100.0}}, 100.0};
  for (std::size_t n : {256u, 400u}) {
    const Mesh m(Rect{}, n, n);
    const QuadraturePoints qp(m);
    const Vector a = qp.sample(make_alpha_field(spec, m));
    double excess = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
      for (std::size_t q = 0; q < qp.per_triangle(); ++q)
        excess += m.triangle(t).area * qp.weight(q) * (a[t * qp.per_triangle() + q] - 1.0);
    CHECK(std::abs(excess - 100.0) <= 0.05 * 100.0);
  }
}

TEST_CASE("example 1 exact solution") {
  const ExactSolution e = exact_solution_ex1(1.0, 1.0);
  CHECK(e.u({0.5, 0.5}) == doctest::Approx(0.5));
  const Point2 p = e.p({0.25, 0.5});
  CHECK(p.x == doctest::Approx(-0.15625));
  CHECK(p.y == 0.0);

  const ExactSolution plateau = exact_solution_ex1(0.25, 1.0);
  double umax = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) umax = std::max(umax, plateau.u({i / 200.0, j / 200.0}));
  CHECK(umax == doctest::Approx(0.25));

  CHECK_THROWS_AS(exact_solution_ex1(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(exact_solution_ex1(1.0, -1.0), ConfigError);

  for (double f : {1.0, 0.25, 0.1}) {
    const ExactSolution ex = exact_solution_ex1(f, 1.0);
    for (int i = 0; i <= 100; ++i) {
      const double s = i / 100.0;
      CHECK(ex.u({s, 0.0}) == 0.0);
      CHECK(ex.u({s, 1.0}) == 0.0);
      CHECK(ex.u({0.0, s}) == 0.0);
      CHECK(ex.u({1.0, s}) == 0.0);
    }
  }
}

TEST_CASE("exact u is feasible away from its kinks") {
  // One-sided differences on a 512^2 grid; points where they disagree sit on a kink.
  const std::size_t n = 512;
  const double d = 1.0 / n;
  for (auto [f, alpha] : {std::pair{1.0, 1.0}, {0.25, 1.0}, {1.0, 0.5}}) {
    const ExactSolution ex = exact_solution_ex1(f, alpha);
    std::size_t smooth = 0, total = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 1; j < n; ++j) {
        const Point2 x{(i + 0.5) * d, (j + 0.5) * d};
        if (x.x >= 1.0 || x.y >= 1.0) continue;
        ++total;
        const double u0 = ex.u(x);
        const double fx = (ex.u({x.x + d, x.y}) - u0) / d, bx = (u0 - ex.u({x.x - d, x.y})) / d;
        const double fy = (ex.u({x.x, x.y + d}) - u0) / d, by = (u0 - ex.u({x.x, x.y - d})) / d;
        if (std::abs(fx - bx) > 1e-9 || std::abs(fy - by) > 1e-9) continue;
        ++smooth;
        worst = std::max(worst, std::hypot(fx, fy) - alpha);
      }
    CHECK(worst <= 1e-9);
    CHECK(static_cast<double>(smooth) >= 0.95 * static_cast<double>(total));
  }
}

TEST_CASE("exact p orientation: div p = f - u and p opposes grad u") {
  const double f = 1.0, alpha = 1.0;
  const ExactSolution ex = exact_solution_ex1(f, alpha);
  auto discrete_residual = [&](const Mesh& m, double sign) {
    const Rt0Field pi = interpolate_rt0(m, [&](Point2 x) { return sign * ex.p(x); });
    const P0Field ui = project_p0(m, [&](std::size_t, Point2 x) { return ex.u(x); });
    const Vector mass = assemble_mass_p0(m);
    const Vector load = assemble_load(m, [&](std::size_t, Point2) { return f; });
    const Vector bp = spmv(assemble_div(m), pi);
    // Tested against every P0 w with |w| <= 1.
    double s = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) s += std::abs(mass[t] * ui[t] + bp[t] - load[t]);
    return s;
  };
  const Mesh m16(Rect{}, 16, 16), m32(Rect{}, 32, 32);
  const double r16 = discrete_residual(m16, 1.0), r32 = discrete_residual(m32, 1.0);
  CHECK(r16 <= 1.0 / 16.0);
  CHECK(r32 <= 0.55 * r16);
  CHECK(discrete_residual(m32, -1.0) >= 1.0);

  // grad u . p <= 0 at smooth sample points, with |p| > 0 where u < f.
  for (int i = 1; i < 40; ++i)
    for (int j = 1; j < 40; ++j) {
      const Point2 x{(i + 0.37) / 40.0, (j + 0.11) / 40.0};
      if (x.x >= 1.0 || x.y >= 1.0) continue;
      const double d = 1e-7;
      const Point2 g{(ex.u({x.x + d, x.y}) - ex.u({x.x - d, x.y})) / (2 * d),
                     (ex.u({x.x, x.y + d}) - ex.u({x.x, x.y - d})) / (2 * d)};
      CHECK(dot(g, ex.p(x)) <= 1e-9);
    }
}

TEST_CASE("scenario library") {
  CHECK(scenario_names().size() == 8);
  for (const std::string& name : scenario_names()) {
    const ProblemSpec s = scenario(name, 8);
    CHECK(s.name == name);
    CHECK(s.nx == 8);
    CHECK(s.ny == 8);
    CHECK_FALSE(s.boundary.is_neumann(Side::left));
    CHECK(s.boundary.any_dirichlet());
    CHECK_NOTHROW(validate(s));
    CHECK(scenario_exact(name).has_value() == (name.rfind("ex1_", 0) == 0 && name != "ex1_f1_ajump"));
  }
  const ProblemSpec e1 = scenario("ex1_f1_a1");
  CHECK(e1.nx == 64);
  CHECK(std::get<AlphaConstant>(e1.alpha).value == 1.0);
  CHECK(std::get<SourceConstant>(e1.f).value == 1.0);

  const ProblemSpec e2 = scenario("ex2_a25");
  CHECK(std::get<AlphaConstant>(e2.alpha).value == 2.5);
  CHECK(std::get<SourcePreset>(e2.f) == SourcePreset::example2);
  const ScalarField f2 = make_source_field(e2.f);
  CHECK(f2(0, {0.1, 0.1}) == doctest::Approx(1e-3 + 0.01));
  CHECK(f2(0, {0.7, 0.7}) == doctest::Approx(1.001));

  const ProblemSpec e4 = scenario("ex4_measure");
  const auto& line = std::get<AlphaMeasureLine>(e4.alpha);
  REQUIRE(line.lines.size() == 1);
  CHECK(line.lines[0].weight == 100.0);
  CHECK(line.lines[0].y_line == 0.5);
  const ScalarField f4 = make_source_field(e4.f);
  CHECK(f4(0, {0.2, 0.5}) == 0.25);
  CHECK(f4(0, {0.2, 0.49}) == 0.0);

  CHECK_THROWS_AS(scenario("ex9"), ConfigError);
  CHECK_THROWS_AS(scenario("ex1_f1_a1", 0), ConfigError);
}

TEST_CASE("small convergence study") {
  CHECK(std::isnan(fitted_rate(std::vector<double>{0.5}, std::vector<double>{1.0})));
  const std::vector<double> h{0.5, 0.25, 0.125}, e{2.0, 1.0, 0.5};
  CHECK(fitted_rate(h, e) == doctest::Approx(1.0));

  SolverConfig cfg;
  cfg.tau_min = 1e-4;
  const std::vector<std::size_t> sizes{4, 8};
  const StudyTable table = convergence_study("ex1_f1_a1", sizes, cfg);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1].err_u < table.rows[0].err_u);
  CHECK(table.rows[1].err_p < table.rows[0].err_p);
  CHECK(table.rows[0].h == doctest::Approx(0.25));
  CHECK_THROWS_AS(convergence_study("ex2_a25", sizes, cfg), ConfigError);
}
