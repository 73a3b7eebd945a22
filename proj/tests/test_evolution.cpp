#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gradcon/evolution.hpp"

using namespace gradcon;

namespace {

EvolutionSpec neumann_spec(std::size_t n, double alpha, double rate, double final_time, double k) {
  EvolutionSpec e;
  e.spatial.name = "evolve";
  e.spatial.nx = e.spatial.ny = n;
  e.spatial.alpha = AlphaConstant{alpha};
  e.spatial.boundary = BoundaryPartition::all_neumann();
  e.rate = [rate](double, Point2) { return rate; };
  e.final_time = final_time;
  e.step = k;
  return e;
}

double l2_distance(const Mesh& m, const P0Field& a, const P0Field& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += m.triangle(t).area * (a[t] - b[t]) * (a[t] - b[t]);
  return std::sqrt(s);
}

SolverConfig quick() {
  SolverConfig c;
  c.tau_min = 1e-5;
  return c;
}

// Minimizes the regularized pre-dual energy 1/2 |F - B p|^2_{M^-1} + int alpha phi_tau(p_h)
// by accelerated gradient descent and returns u = M^-1 (F - B p). Shares no
// code with the Newton path; test-only reference.
std::vector<double> projection_oracle(const Mesh& m, const std::vector<double>& g, double alpha, double tau) {
  const QuadraturePoints qp(m);
  const Vector alpha_qp(qp.size(), alpha);
  const Vector mass = assemble_mass_p0(m);
  const SparseMatrix b = assemble_div(m);
  const SparseMatrix mrt = assemble_mass_rt0(m);
  const auto mask = neumann_mask(m, BoundaryPartition::all_neumann());
  const std::size_t ne = m.num_edges(), nt = m.num_triangles();
  Vector f(nt);
  for (std::size_t t = 0; t < nt; ++t) f[t] = mass[t] * g[t];

  auto bt = [&](const Vector& r) {
    Vector out(ne, 0.0);
    for (int row = 0; row < b.rows(); ++row)
      for (int k = b.row_ptr()[row]; k < b.row_ptr()[row + 1]; ++k) out[b.col_idx()[k]] += b.values()[k] * r[row];
    return out;
  };
  auto u_of = [&](const Vector& p) {
    Vector bp = spmv(b, p), u(nt);
    for (std::size_t t = 0; t < nt; ++t) u[t] = (f[t] - bp[t]) / mass[t];
    return u;
  };
  auto gradient = [&](const Vector& p) {
    Vector gr = assemble_huber_residual(m, qp, p, alpha_qp, tau);
    const Vector btu = bt(u_of(p));
    for (std::size_t e = 0; e < ne; ++e) gr[e] = mask[e] ? 0.0 : gr[e] - btu[e];
    return gr;
  };
  // Upper bound of the Hessian by power iteration on B^T M^-1 B + alpha M_RT / tau.
  Vector x(ne, 1.0);
  double lmax = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector bx = spmv(b, x);
    for (std::size_t t = 0; t < nt; ++t) bx[t] /= mass[t];
    Vector y = bt(bx);
    const Vector mx = spmv(mrt, x);
    for (std::size_t e = 0; e < ne; ++e) y[e] += alpha / tau * mx[e];
    lmax = norm2(y) / norm2(x);
    const double scale = 1.0 / norm2(y);
    for (std::size_t e = 0; e < ne; ++e) x[e] = y[e] * scale;
  }
  const double step = 1.0 / (1.1 * lmax);
  Vector p(ne, 0.0), prev = p, z = p;
  double t_k = 1.0;
  for (int it = 0; it < 2000000; ++it) {
    const Vector gz = gradient(z);
    if (norm2(gz) < 1e-11) break;
    prev = p;
    for (std::size_t e = 0; e < ne; ++e) p[e] = z[e] - step * gz[e];
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
    for (std::size_t e = 0; e < ne; ++e) z[e] = p[e] + (t_k - 1.0) / t_next * (p[e] - prev[e]);
    t_k = t_next;
    if (it % 1000 == 999) t_k = 1.0;  // restart
  }
  return u_of(p);
}

}  // namespace

TEST_CASE("single step examples") {
  SUBCASE("feasible previous state with no pouring is unchanged") {
    EvolutionSpec e = neumann_spec(6, 1.0, 0.0, 0.1, 0.1);
    const DiscreteProblem dp(e.spatial);
    // A strictly feasible state moves by O(tau |grad u|) under the regularization.
    const P0Field prev = project_p0(dp.mesh(), [](std::size_t, Point2 x) { return 0.1 * x.x + 0.1; });
    const StepResult r = evolution_step(prev, e, 0.0, 0.1, SolverConfig{});
    CHECK(l2_distance(dp.mesh(), r.u, prev) <= 1e-6);
  }
  SUBCASE("zero stays zero") {
    EvolutionSpec e = neumann_spec(4, 1.0, 0.0, 0.1, 0.1);
    const P0Field prev(32, 0.0);
    const StepResult r = evolution_step(prev, e, 0.0, 0.1, quick());
    for (double u : r.u) CHECK(std::abs(u) <= 1e-12);
    CHECK(r.report.poured == 0.0);
  }
  SUBCASE("huge alpha leaves k times the rate") {
    EvolutionSpec e = neumann_spec(4, 1e6, 2.0, 0.25, 0.25);
    const P0Field prev(32, 0.0);
    const StepResult r = evolution_step(prev, e, 0.0, 0.25, quick());
    for (double u : r.u) CHECK(u == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.report.poured == doctest::Approx(0.5));
  }
}

TEST_CASE("trajectory conservation and monotonicity") {
  const EvolutionSpec e = neumann_spec(8, 1.0, 1.0, 0.5, 0.1);
  CHECK(e.num_steps() == 5);
  const Trajectory tr = run_evolution(e, quick());
  REQUIRE(tr.frames.size() == 6);
  REQUIRE(tr.steps.size() == 5);
  const ConservationReport c = conservation_report(tr, e);
  CHECK(c.balance_expected);
  CHECK(c.warnings.empty());
  for (double b : c.balance) CHECK(std::abs(b) <= 1e-7);
  for (std::size_t n = 1; n < tr.frames.size(); ++n) {
    CHECK(tr.frames[n].t == doctest::Approx(0.1 * n));
    const double prev_min = *std::min_element(tr.frames[n - 1].u.begin(), tr.frames[n - 1].u.end());
    const double cur_min = *std::min_element(tr.frames[n].u.begin(), tr.frames[n].u.end());
    CHECK(cur_min >= prev_min - 1e-8);
  }
  for (const StepReport& s : tr.steps) CHECK(s.max_grad_ratio <= 1.0 + 1e-12);
}

TEST_CASE("no pouring keeps a feasible initial state") {
  EvolutionSpec e = neumann_spec(6, 1.0, 0.0, 0.3, 0.1);
  e.rate = {};
  const Mesh m = e.spatial.make_mesh();
  e.u0 = project_p0(m, [](std::size_t, Point2 x) { return 0.05 * x.y + 0.2; });
  const Trajectory tr = run_evolution(e, SolverConfig{});
  REQUIRE(tr.frames.size() == 4);
  for (const Frame& f : tr.frames) CHECK(l2_distance(m, f.u, e.u0) <= 1e-6);
}

TEST_CASE("minimum growth against a projection oracle") {
  // Concentrated pouring on a 4x4 mesh. The regularized projection is only
  // order preserving up to an error that vanishes with tau, so the oracle
  // checks the solver at a moderate tau and then the trend in tau.
  EvolutionSpec e = neumann_spec(4, 1.0, 0.0, 0.3, 0.1);
  auto corner = [](Point2 x) { return x.x < 0.25 && x.y < 0.25 ? 4.0 : 0.0; };
  e.rate = [corner](double, Point2 x) { return corner(x); };
  const Mesh m = e.spatial.make_mesh();
  const P0Field pour = project_p0(m, [&](std::size_t, Point2 x) { return corner(x); });

  SolverConfig cfg;
  cfg.tau_min = 1e-3;
  const double tau = tau_schedule(cfg).back();
  const Trajectory tr = run_evolution(e, cfg);
  std::vector<double> u(m.num_triangles(), 0.0);
  for (std::size_t n = 1; n < tr.frames.size(); ++n) {
    for (std::size_t t = 0; t < u.size(); ++t) u[t] += 0.1 * pour[t];
    u = projection_oracle(m, u, 1.0, tau);
    for (std::size_t t = 0; t < u.size(); ++t) CHECK(std::abs(tr.frames[n].u[t] - u[t]) <= 1e-6);
  }

  std::vector<double> g(m.num_triangles());
  for (std::size_t t = 0; t < g.size(); ++t) g[t] = 0.1 * pour[t];
  const std::vector<double> coarse = projection_oracle(m, g, 1.0, 1e-3);
  const std::vector<double> fine = projection_oracle(m, g, 1.0, 2.5e-4);
  const double dip_coarse = *std::min_element(coarse.begin(), coarse.end());
  const double dip_fine = *std::min_element(fine.begin(), fine.end());
  CHECK(dip_coarse < 0.0);
  CHECK(std::abs(dip_fine) < 0.5 * std::abs(dip_coarse));

  // Full schedule: the minimum never drops by more than the regularization error.
  const Trajectory full = run_evolution(e, SolverConfig{});
  double prev_min = 0.0;
  for (std::size_t n = 1; n < full.frames.size(); ++n) {
    const double cur = *std::min_element(full.frames[n].u.begin(), full.frames[n].u.end());
    CHECK(cur >= prev_min - 1e-5);
    prev_min = cur;
  }
}

TEST_CASE("dirichlet sides produce a conservation warning") {
  EvolutionSpec e = neumann_spec(4, 1.0, 1.0, 0.1, 0.1);
  e.spatial.boundary = BoundaryPartition{{true, true, true, false}};
  const Trajectory tr = run_evolution(e, quick());
  const ConservationReport c = conservation_report(tr, e);
  CHECK_FALSE(c.balance_expected);
  REQUIRE_FALSE(c.warnings.empty());

  EvolutionSpec bad = neumann_spec(4, 1.0, 1.0, 0.1, 0.0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
