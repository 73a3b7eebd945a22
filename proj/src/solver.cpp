#include "gradcon/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gradcon/huber.hpp"

namespace gradcon {

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(std::isfinite(tau_start) && tau_start > 0.0, "solver: tau_start must be positive");
  require(std::isfinite(tau_factor) && tau_factor > 1.0, "solver: tau_factor must exceed 1");
  require(std::isfinite(tau_min) && tau_min > 0.0, "solver: tau_min must be positive");
  require(std::isfinite(newton_tol) && newton_tol > 0.0, "solver: newton_tol must be positive");
  require(newton_max_iter > 0, "solver: newton_max_iter must be positive");
  require(linesearch.shrink > 0.0 && linesearch.shrink < 1.0, "solver: linesearch.shrink must lie in (0, 1)");
  require(linesearch.sufficient_decrease > 0.0 && linesearch.sufficient_decrease < 0.5,
          "solver: linesearch.sufficient_decrease must lie in (0, 0.5)");
  require(linesearch.max_backtracks >= 0, "solver: linesearch.max_backtracks must be nonnegative");
  require(std::isfinite(linear_tol) && linear_tol > 0.0, "solver: linear_tol must be positive");
}

std::vector<double> tau_schedule(const SolverConfig& config) {
  config.validate();
  std::vector<double> taus{config.tau_start};
  while (taus.back() > config.tau_min) taus.push_back(taus.back() / config.tau_factor);
  return taus;
}

DiscreteProblem::DiscreteProblem(const ProblemSpec& spec)
    : spec_((validate(spec), spec)),
      mesh_(spec.make_mesh()),
      qp_(mesh_),
      pattern_(mesh_),
      div_(assemble_div(mesh_)),
      mass_(assemble_mass_p0(mesh_)),
      alpha_(make_alpha_field(spec.alpha, mesh_)),
      source_(make_source_field(spec.f)),
      load_(assemble_load(mesh_, source_)),
      alpha_qp_(qp_.sample(alpha_)),
      f_qp_(qp_.sample(source_)),
      neumann_(neumann_mask(mesh_, spec.boundary)) {}

namespace {

double weighted_norm(std::span<const double> r2, std::span<const double> mass) {
  double s = 0.0;
  for (std::size_t t = 0; t < r2.size(); ++t) s += r2[t] * r2[t] / mass[t];
  return std::sqrt(s);
}

// Residual of the first equation with u = M^-1 (F - B p) substituted.
Vector reduced_residual(const DiscreteProblem& pr, std::span<const double> p, double tau, P0Field* u_out = nullptr) {
  const P0Field u = recover_u(pr, p);
  Vector r = assemble_huber_residual(pr.mesh(), pr.quadrature(), p, pr.alpha_qp(), tau, pr.neumann());
  const Mesh& mesh = pr.mesh();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      if (!pr.neumann()[tri.edge[i]]) r[tri.edge[i]] -= tri.sign[i] * u[t];
  }
  if (u_out) *u_out = u;
  return r;
}

std::string describe(const char* what, double tau, double r1, double r2) {
  std::ostringstream os;
  os << what << " at tau=" << tau << " (|r1|=" << r1 << ", |r2|=" << r2 << ")";
  return os.str();
}

double second_residual_norm(const DiscreteProblem& pr, std::span<const double> p, std::span<const double> u) {
  const Vector bp = spmv(pr.div(), p);
  double s = 0.0;
  for (std::size_t t = 0; t < bp.size(); ++t) {
    const double r = pr.mass()[t] * u[t] + bp[t] - pr.load()[t];
    s += r * r / pr.mass()[t];
  }
  return std::sqrt(s);
}

}  // namespace

P0Field recover_u(const DiscreteProblem& problem, std::span<const double> p) {
  if (p.size() != problem.mesh().num_edges()) throw std::invalid_argument("recover_u: RT0 field size mismatch");
  const Vector bp = spmv(problem.div(), p);
  P0Field u(bp.size());
  for (std::size_t t = 0; t < u.size(); ++t) u[t] = (problem.load()[t] - bp[t]) / problem.mass()[t];
  return u;
}

Residual residual(const DiscreteProblem& problem, std::span<const double> p, std::span<const double> u, double tau) {
  const Mesh& mesh = problem.mesh();
  if (p.size() != mesh.num_edges() || u.size() != mesh.num_triangles())
    throw std::invalid_argument("residual: field sizes do not match the mesh");
  Residual res;
  res.r1 = assemble_huber_residual(mesh, problem.quadrature(), p, problem.alpha_qp(), tau, problem.neumann());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      if (!problem.neumann()[tri.edge[i]]) res.r1[tri.edge[i]] -= tri.sign[i] * u[t];
  }
  const Vector bp = spmv(problem.div(), p);
  res.r2.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < res.r2.size(); ++t)
    res.r2[t] = problem.mass()[t] * u[t] + bp[t] - problem.load()[t];
  res.r1_norm = norm2(res.r1);
  res.r2_norm = weighted_norm(res.r2, problem.mass());
  return res;
}

std::vector<Point2> recovered_gradient(const DiscreteProblem& problem, std::span<const double> p, double tau) {
  const Mesh& mesh = problem.mesh();
  std::vector<Point2> g(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point2 c = mesh.centroid(t);
    g[t] = (-problem.alpha()(t, c)) * huber::dphi(rt0_value(mesh, p, t, c), tau);
  }
  return g;
}

DiscreteSolution newton_solve(const DiscreteProblem& problem, double tau, std::span<const double> initial_p,
                              const SolverConfig& config) {
  config.validate();
  if (!(tau > 0.0)) throw ConfigError("newton_solve: tau must be positive");
  const Mesh& mesh = problem.mesh();
  if (initial_p.size() != mesh.num_edges()) throw std::invalid_argument("newton_solve: initial field size mismatch");

  DiscreteSolution sol;
  sol.p.assign(initial_p.begin(), initial_p.end());
  for (std::size_t e = 0; e < sol.p.size(); ++e)
    if (problem.neumann()[e]) sol.p[e] = 0.0;
  sol.tau_final = tau;

  SpdSolver linear(1e-12);
  TauStep step;
  step.tau = tau;

  Vector r = reduced_residual(problem, sol.p, tau, &sol.u);
  double rnorm = norm2(r);
  auto r2_of = [&](const P0Field& u) { return second_residual_norm(problem, sol.p, u); };
  double r2norm = r2_of(sol.u);

  while (!(rnorm <= config.newton_tol && r2norm <= config.newton_tol)) {
    if (step.iterations >= config.newton_max_iter)
      throw SolverError(SolverError::Kind::max_iterations, describe("Newton: iteration limit reached", tau, rnorm, r2norm),
                        tau, rnorm, r2norm);

    const SparseMatrix jac = assemble_reduced_jacobian(mesh, problem.pattern(), problem.quadrature(), sol.p,
                                                       problem.alpha_qp(), tau, problem.neumann());
    Vector rhs(r.size());
    for (std::size_t e = 0; e < r.size(); ++e) rhs[e] = -r[e];
    Vector dir;
    try {
      linear.factorize(jac);
      dir = linear.solve(rhs, config.linear_tol);
    } catch (const LinearSolveError& err) {
      throw SolverError(SolverError::Kind::linear_solve, describe(err.what(), tau, rnorm, r2norm), tau, rnorm, r2norm);
    }

    // Backtracking on the squared reduced residual.
    const double merit0 = rnorm * rnorm;
    double t = 1.0;
    bool accepted = false;
    Vector trial(sol.p.size());
    P0Field trial_u;
    Vector trial_r;
    double trial_norm = 0.0;
    for (int k = 0; k <= config.linesearch.max_backtracks; ++k) {
      for (std::size_t e = 0; e < trial.size(); ++e) trial[e] = sol.p[e] + t * dir[e];
      trial_r = reduced_residual(problem, trial, tau, &trial_u);
      trial_norm = norm2(trial_r);
      if (trial_norm * trial_norm <= (1.0 - 2.0 * config.linesearch.sufficient_decrease * t) * merit0) {
        accepted = true;
        break;
      }
      t *= config.linesearch.shrink;
      ++step.backtracks;
    }
    if (!accepted)
      throw SolverError(SolverError::Kind::line_search_stalled, describe("Newton: line search stalled", tau, rnorm, r2norm),
                        tau, rnorm, r2norm);

    sol.p.swap(trial);
    sol.u.swap(trial_u);
    r.swap(trial_r);
    rnorm = trial_norm;
    r2norm = r2_of(sol.u);
    ++step.iterations;
  }

  step.r1_norm = rnorm;
  step.r2_norm = r2norm;
  sol.r1_norm = rnorm;
  sol.r2_norm = r2norm;
  sol.history.push_back(step);
  return sol;
}

DiscreteSolution continuation_solve(const DiscreteProblem& problem, const SolverConfig& config,
                                    const ContinuationObserver& observer) {
  const std::vector<double> taus = tau_schedule(config);
  Vector p(problem.mesh().num_edges(), 0.0);
  DiscreteSolution result;
  for (double tau : taus) {
    DiscreteSolution step = newton_solve(problem, tau, p, config);
    TauStep record = step.history.front();
    record.duality_gap = diagnostics(problem, step).duality_gap;
    if (observer) observer(record);
    result.history.push_back(record);
    p = step.p;
    result.p = std::move(step.p);
    result.u = std::move(step.u);
    result.tau_final = tau;
    result.r1_norm = step.r1_norm;
    result.r2_norm = step.r2_norm;
  }
  return result;
}

Diagnostics diagnostics(const DiscreteProblem& problem, const DiscreteSolution& solution) {
  const Mesh& mesh = problem.mesh();
  const QuadraturePoints& qp = problem.quadrature();
  const auto& p = solution.p;
  const auto& u = solution.u;
  Diagnostics d;

  const Vector divp = divergence(mesh, p);
  double misfit = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.triangle(t).area;
    for (std::size_t q = 0; q < qp.per_triangle(); ++q) {
      const double r = divp[t] - problem.f_qp()[t * qp.per_triangle() + q];
      misfit += qp.weight(q) * area * r * r;
    }
  }
  d.primal_value = 0.5 * misfit + integrate_alpha_norm(mesh, qp, p, problem.alpha_qp());

  double fu = 0.0, uu = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    fu += problem.load()[t] * u[t];
    uu += problem.mass()[t] * u[t] * u[t];
  }
  d.dual_value = fu - 0.5 * uu;
  d.duality_gap = d.primal_value - d.dual_value;

  const std::vector<Point2> grad = recovered_gradient(problem, p, solution.tau_final);
  double active_area = 0.0, total_area = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double a = problem.alpha()(t, mesh.centroid(t));
    const double g = std::hypot(grad[t].x, grad[t].y);
    const double area = mesh.triangle(t).area;
    d.max_grad_ratio = std::max(d.max_grad_ratio, g / a);
    d.feasibility_violation += area * std::max(0.0, g - a);
    if (g >= (1.0 - 1e-6) * a) active_area += area;
    total_area += area;
  }
  d.active_fraction = active_area / total_area;

  // Patch test over the open union of the two triangles of each interior edge.
  Vector alpha_mass(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (std::size_t q = 0; q < qp.per_triangle(); ++q)
      alpha_mass[t] += qp.weight(q) * mesh.triangle(t).area * problem.alpha_qp()[t * qp.per_triangle() + q];
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) continue;
    const auto [t1, t2] = mesh.edge_triangles(e);
    const double ratio = std::abs(u[t1] - u[t2]) * mesh.edge(e).length / (alpha_mass[t1] + alpha_mass[t2]);
    d.max_jump_ratio = std::max(d.max_jump_ratio, ratio);
  }
  return d;
}

}  // namespace gradcon
