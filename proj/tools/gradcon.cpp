// Command-line front end: solve a scenario or inline problem, run a
// convergence study, or step the evolution problem in time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "gradcon/evolution.hpp"
#include "gradcon/io.hpp"
#include "gradcon/solver.hpp"
#include "gradcon/study.hpp"

namespace {

using namespace gradcon;

enum ExitCode { ok = 0, config_error = 2, solver_failure = 3, io_failure = 4 };

struct CommonOptions {
  std::string config;
  std::string scenario;
  std::size_t n = 0;
  std::string out;
  double tau_min = 0.0;
  double newton_tol = 0.0;
  std::vector<std::size_t> mesh_sizes;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--scenario", o.scenario, "Named scenario instead of a config file");
  cmd->add_option("--n", o.n, "Mesh cells per side for --scenario");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--tau-min", o.tau_min, "Override the final regularization parameter");
  cmd->add_option("--newton-tol", o.newton_tol, "Override the Newton residual tolerance");
  cmd->add_flag("--quiet", o.quiet, "Suppress per-tau progress");
}

RunConfig build_config(const CommonOptions& o, RunMode mode) {
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = parse_config_file(o.config, mode);
  } else if (!o.scenario.empty()) {
    nlohmann::json doc{{"scenario", o.scenario}};
    if (o.n > 0) doc["n"] = o.n;
    if (!o.mesh_sizes.empty()) doc["study"] = {{"mesh_sizes", o.mesh_sizes}};
    cfg = parse_config(doc, mode);
  } else {
    throw ConfigError("either --config or --scenario is required");
  }
  if (!o.config.empty() && o.n > 0) {
    if (!cfg.scenario) throw ConfigError("--n applies to scenarios only");
    cfg.problem = scenario(*cfg.scenario, o.n);
  }
  if (o.tau_min > 0.0) cfg.solver.tau_min = o.tau_min;
  if (o.newton_tol > 0.0) cfg.solver.newton_tol = o.newton_tol;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.solver.validate();
  return cfg;
}

void print_step(const TauStep& s) {
  std::fprintf(stderr, "  tau=%-12.5g newton=%-3d backtracks=%-3d |r1|=%-11.3e |r2|=%-11.3e gap=%.3e\n", s.tau,
               s.iterations, s.backtracks, s.r1_norm, s.r2_norm, s.duality_gap);
}

std::vector<double> grad_magnitude(const DiscreteProblem& problem, const DiscreteSolution& sol) {
  const auto g = recovered_gradient(problem, sol.p, sol.tau_final);
  std::vector<double> mag(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) mag[t] = std::hypot(g[t].x, g[t].y);
  return mag;
}

int run_solve(const CommonOptions& o) {
  const RunConfig cfg = build_config(o, RunMode::solve);
  const auto start = std::chrono::steady_clock::now();
  const DiscreteProblem problem(cfg.problem);
  std::cerr << "solve " << cfg.problem.name << " on " << cfg.problem.nx << "x" << cfg.problem.ny << " mesh\n";
  const DiscreteSolution sol = continuation_solve(problem, cfg.solver, o.quiet ? ContinuationObserver{} : print_step);
  const Diagnostics diag = diagnostics(problem, sol);
  RunSummary summary = make_summary(cfg, sol, diag);
  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (cfg.formats.count("vtk"))
    export_vtk(problem.mesh(), sol.u, grad_magnitude(problem, sol), sol.p, cfg.output_dir / "solution.vtk");
  if (cfg.formats.count("json")) export_summary_json(summary, cfg.output_dir / "summary.json");
  std::fprintf(stderr, "duality gap %.3e, max |grad u|/alpha %.6f, active fraction %.4f, wall time %.2f s\n",
               diag.duality_gap, diag.max_grad_ratio, diag.active_fraction, summary.wall_time_s);
  return ok;
}

int run_study(const CommonOptions& o) {
  const RunConfig cfg = build_config(o, RunMode::study);
  const auto start = std::chrono::steady_clock::now();
  const StudyTable table = convergence_study(*cfg.scenario, cfg.mesh_sizes, cfg.solver);
  if (cfg.formats.count("csv")) export_study_csv(table, cfg.output_dir / "study.csv");
  if (cfg.formats.count("json")) write_text(cfg.output_dir / "study.json", study_to_json(table).dump(2) + "\n");
  std::cout << study_csv_string(table);
  std::fprintf(stderr, "fitted rates: u %.4f, p %.4f (wall time %.2f s)\n", table.rate_u, table.rate_p,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return ok;
}

int run_evolve(const CommonOptions& o) {
  const RunConfig cfg = build_config(o, RunMode::evolve);
  const EvolutionConfig& ev = *cfg.evolution;
  EvolutionSpec spec;
  spec.spatial = cfg.problem;
  spec.final_time = ev.final_time;
  spec.step = ev.step;
  spec.previous_weight = ev.previous_weight;
  const Mesh mesh = spec.spatial.make_mesh();
  spec.u0 = project_p0(mesh, make_source_field(ev.u0));
  const ScalarField rate = make_source_field(ev.rate);
  spec.rate = [rate](double, Point2 x) { return rate(0, x); };

  const Trajectory traj = run_evolution(spec, cfg.solver);
  const ConservationReport report = conservation_report(traj, spec);
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";

  if (cfg.formats.count("vtk")) {
    const DiscreteProblem geometry(spec.spatial);
    const double tau_final = tau_schedule(cfg.solver).back();
    for (std::size_t n = 0; n < traj.frames.size(); ++n) {
      const Frame& f = traj.frames[n];
      DiscreteSolution view;
      view.p = f.p;
      view.tau_final = tau_final;
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.vtk", n);
      export_vtk(mesh, f.u, grad_magnitude(geometry, view), f.p, cfg.output_dir / name);
    }
  }
  if (cfg.formats.count("csv")) write_text(cfg.output_dir / "evolution.csv", evolution_csv_string(traj, report));
  if (cfg.formats.count("json"))
    write_text(cfg.output_dir / "evolution.json", evolution_to_json(traj, report).dump(2) + "\n");
  std::cout << evolution_csv_string(traj, report);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-constrained variational problems via Huber-regularized pre-dual Newton continuation"};
  app.require_subcommand(1);
  CommonOptions solve_opts, study_opts, evolve_opts;
  auto* solve = app.add_subcommand("solve", "Solve one problem over the tau schedule");
  add_common(solve, solve_opts);
  auto* study = app.add_subcommand("study", "Convergence study against a closed-form solution");
  add_common(study, study_opts);
  study->add_option("--mesh-sizes", study_opts.mesh_sizes, "Cells per side, e.g. --mesh-sizes 8 16 32 64");
  auto* evolve = app.add_subcommand("evolve", "Implicit Euler time stepping");
  add_common(evolve, evolve_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*solve) return run_solve(solve_opts);
    if (*study) return run_study(study_opts);
    return run_evolve(evolve_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return solver_failure;
  } catch (const IoError& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return io_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
