#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gradcon/solver.hpp"

namespace gradcon {

/// Pouring rate f(t, x).
using TimeSource = std::function<double(double t, Point2 x)>;

/// Weight of u^{n-1} in the effective source of a step. `unit` follows from
/// the implicit Euler discretization of the evolution inequality; `step`
/// multiplies u^{n-1} by k as in the literal printed form.
enum class PreviousStateWeight { unit, step };

struct EvolutionSpec {
  ProblemSpec spatial;  // mesh, boundary partition and alpha; its f is ignored
  P0Field u0;           // empty means zero
  TimeSource rate;      // empty means zero
  double final_time = 0.0;
  double step = 0.1;
  PreviousStateWeight previous_weight = PreviousStateWeight::unit;

  void validate() const;
  /// ceil(final_time / step)
  std::size_t num_steps() const;
};

struct Frame {
  double t = 0.0;
  P0Field u;
  Rt0Field p;
};

struct StepReport {
  std::size_t index = 0;  // 1-based
  double t = 0.0;
  double poured = 0.0;  // integral over the step and the domain of f
  int newton_iterations = 0;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  double max_grad_ratio = 0.0;
};

struct Trajectory {
  std::vector<Frame> frames;  // frames[n].t == n * step
  std::vector<StepReport> steps;
};

struct StepResult {
  P0Field u;
  Rt0Field p;
  StepReport report;
};

/// One implicit Euler step over [t0, t1]: a continuation solve of the
/// stationary problem with source w u_prev + (t1 - t0) f((t0 + t1) / 2, .).
StepResult evolution_step(std::span<const double> u_prev, const EvolutionSpec& spec, double t0, double t1,
                          const SolverConfig& config);

Trajectory run_evolution(const EvolutionSpec& spec, const SolverConfig& config);

struct ConservationReport {
  std::vector<double> balance;  // int u_n - int u_{n-1} - poured_n
  bool balance_expected = true;
  std::vector<std::string> warnings;
};

ConservationReport conservation_report(const Trajectory& trajectory, const EvolutionSpec& spec);

}  // namespace gradcon
