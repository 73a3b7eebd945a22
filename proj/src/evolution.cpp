#include "gradcon/evolution.hpp"

#include <cmath>

namespace gradcon {

void EvolutionSpec::validate() const {
  gradcon::validate(spatial.alpha);
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("evolution: time step must be positive");
  if (!(final_time >= step)) throw ConfigError("evolution: final time must be at least one time step");
  if (!u0.empty() && u0.size() != 2 * spatial.nx * spatial.ny)
    throw ConfigError("evolution: u0 does not match the mesh");
}

std::size_t EvolutionSpec::num_steps() const {
  return static_cast<std::size_t>(std::ceil(final_time / step - 1e-9));
}

StepResult evolution_step(std::span<const double> u_prev, const EvolutionSpec& spec, double t0, double t1,
                          const SolverConfig& config) {
  const double k = t1 - t0;
  const double t_mid = 0.5 * (t0 + t1);
  const double w = spec.previous_weight == PreviousStateWeight::unit ? 1.0 : k;
  const std::vector<double> prev(u_prev.begin(), u_prev.end());
  const TimeSource rate = spec.rate;

  ProblemSpec stationary = spec.spatial;
  stationary.f = SourceFunction{[prev, rate, w, k, t_mid](std::size_t t, Point2 x) {
    return w * prev[t] + (rate ? k * rate(t_mid, x) : 0.0);
  }};
  const DiscreteProblem problem(stationary);
  if (prev.size() != problem.mesh().num_triangles()) throw std::invalid_argument("evolution: u_prev size mismatch");

  StepResult out;
  DiscreteSolution sol = continuation_solve(problem, config);
  const Diagnostics diag = diagnostics(problem, sol);

  double poured = 0.0;
  if (rate) {
    const Vector load = assemble_load(problem.mesh(), [&](std::size_t, Point2 x) { return k * rate(t_mid, x); });
    for (double v : load) poured += v;
  }
  out.report.t = t1;
  out.report.poured = poured;
  for (const TauStep& s : sol.history) out.report.newton_iterations += s.iterations;
  out.report.r1_norm = sol.r1_norm;
  out.report.r2_norm = sol.r2_norm;
  out.report.max_grad_ratio = diag.max_grad_ratio;
  out.u = std::move(sol.u);
  out.p = std::move(sol.p);
  return out;
}

Trajectory run_evolution(const EvolutionSpec& spec, const SolverConfig& config) {
  spec.validate();
  const std::size_t cells = 2 * spec.spatial.nx * spec.spatial.ny;
  const std::size_t edges = spec.spatial.nx * (spec.spatial.ny + 1) + spec.spatial.ny * (spec.spatial.nx + 1) +
                            spec.spatial.nx * spec.spatial.ny;
  Trajectory traj;
  Frame initial;
  initial.u = spec.u0.empty() ? P0Field(cells, 0.0) : spec.u0;
  initial.p.assign(edges, 0.0);
  traj.frames.push_back(std::move(initial));

  const std::size_t n_steps = spec.num_steps();
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t0 = static_cast<double>(n - 1) * spec.step;
    const double t1 = static_cast<double>(n) * spec.step;
    StepResult res;
    try {
      res = evolution_step(traj.frames.back().u, spec, t0, t1, config);
    } catch (const SolverError& err) {
      throw SolverError(err.kind(), "evolution step " + std::to_string(n) + ": " + err.what(), err.tau(), err.r1(),
                        err.r2());
    }
    res.report.index = n;
    traj.steps.push_back(res.report);
    traj.frames.push_back(Frame{t1, std::move(res.u), std::move(res.p)});
  }
  return traj;
}

ConservationReport conservation_report(const Trajectory& trajectory, const EvolutionSpec& spec) {
  ConservationReport rep;
  if (spec.spatial.boundary.any_dirichlet()) {
    rep.balance_expected = false;
    rep.warnings.emplace_back("Dirichlet boundary present: material may leave the domain, balance not expected");
  }
  if (spec.previous_weight != PreviousStateWeight::unit) {
    rep.balance_expected = false;
    rep.warnings.emplace_back("previous state weighted by the time step: balance not expected");
  }
  const Mesh mesh = spec.spatial.make_mesh();
  const Vector mass = assemble_mass_p0(mesh);
  auto total = [&](const P0Field& u) {
    double s = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) s += mass[t] * u[t];
    return s;
  };
  for (std::size_t n = 0; n < trajectory.steps.size(); ++n) {
    const double before = total(trajectory.frames[n].u);
    const double after = total(trajectory.frames[n + 1].u);
    rep.balance.push_back(after - before - trajectory.steps[n].poured);
  }
  return rep;
}

}  // namespace gradcon
