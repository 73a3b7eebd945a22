#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradcon/fem.hpp"
#include "gradcon/linalg.hpp"
#include "gradcon/problems.hpp"

namespace gradcon {

struct LineSearchConfig {
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 30;
};

struct SolverConfig {
  double tau_start = 10.0;
  double tau_factor = 1.30;
  double tau_min = 1e-6;
  double newton_tol = 1e-8;
  int newton_max_iter = 50;
  LineSearchConfig linesearch;
  double linear_tol = 1e-10;  // relative residual required of each linear solve

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// tau_start, tau_start/factor, ... up to and including the first value <= tau_min.
std::vector<double> tau_schedule(const SolverConfig& config);

/// Mesh, quadrature data and assembled operators for one problem; shared by
/// every Newton step.
class DiscreteProblem {
 public:
  explicit DiscreteProblem(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  const Mesh& mesh() const { return mesh_; }
  const QuadraturePoints& quadrature() const { return qp_; }
  const Rt0Pattern& pattern() const { return pattern_; }
  const SparseMatrix& div() const { return div_; }
  std::span<const double> mass() const { return mass_; }
  std::span<const double> load() const { return load_; }
  std::span<const double> alpha_qp() const { return alpha_qp_; }
  std::span<const double> f_qp() const { return f_qp_; }
  std::span<const char> neumann() const { return neumann_; }
  const ScalarField& alpha() const { return alpha_; }
  const ScalarField& source() const { return source_; }

 private:
  ProblemSpec spec_;
  Mesh mesh_;
  QuadraturePoints qp_;
  Rt0Pattern pattern_;
  SparseMatrix div_;
  Vector mass_;
  ScalarField alpha_;
  ScalarField source_;
  Vector load_;
  Vector alpha_qp_;
  Vector f_qp_;
  std::vector<char> neumann_;
};

struct Residual {
  Vector r1;  // RT0-sized
  Vector r2;  // P0-sized
  double r1_norm = 0.0;  // Euclidean
  double r2_norm = 0.0;  // L2 norm of the P0 function r2 / |T|
};

/// Residuals of the regularized saddle-point system at (p, u).
Residual residual(const DiscreteProblem& problem, std::span<const double> p, std::span<const double> u, double tau);

/// u = M^-1 (F - B p), the P0 realization of f - div p.
P0Field recover_u(const DiscreteProblem& problem, std::span<const double> p);

/// -alpha phi'_tau(p_h) at every triangle centroid.
std::vector<Point2> recovered_gradient(const DiscreteProblem& problem, std::span<const double> p, double tau);

struct TauStep {
  double tau = 0.0;
  int iterations = 0;
  int backtracks = 0;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  double duality_gap = 0.0;
};

struct DiscreteSolution {
  Rt0Field p;
  P0Field u;
  double tau_final = 0.0;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  std::vector<TauStep> history;
};

struct Diagnostics {
  double primal_value = 0.0;   // pre-dual objective at p
  double dual_value = 0.0;     // (f, u) - |u|^2 / 2
  double duality_gap = 0.0;
  double max_grad_ratio = 0.0; // max over centroids of |recovered grad u| / alpha
  double feasibility_violation = 0.0;
  double active_fraction = 0.0;  // area share with |recovered grad u| at alpha
  double max_jump_ratio = 0.0;   // max over interior edges of |[u]| |e| / alpha(T1 u T2)
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { max_iterations, line_search_stalled, linear_solve };

  SolverError(Kind kind, const std::string& what, double tau, double r1, double r2)
      : std::runtime_error(what), kind_(kind), tau_(tau), r1_(r1), r2_(r2) {}

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  double r1() const { return r1_; }
  double r2() const { return r2_; }

 private:
  Kind kind_;
  double tau_;
  double r1_;
  double r2_;
};

/// Newton with backtracking for fixed tau, starting from initial p. u is
/// eliminated exactly at every iterate.
DiscreteSolution newton_solve(const DiscreteProblem& problem, double tau, std::span<const double> initial_p,
                              const SolverConfig& config);

using ContinuationObserver = std::function<void(const TauStep&)>;

/// Newton over the tau schedule, from zero, warm-starting each step.
DiscreteSolution continuation_solve(const DiscreteProblem& problem, const SolverConfig& config,
                                    const ContinuationObserver& observer = {});

Diagnostics diagnostics(const DiscreteProblem& problem, const DiscreteSolution& solution);

}  // namespace gradcon
