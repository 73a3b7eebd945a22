#include "gradcon/study.hpp"

#include <cmath>
#include <limits>

namespace gradcon {

double fitted_rate(std::span<const double> h, std::span<const double> err) {
  const std::size_t n = std::min(h.size(), err.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(n);
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

StudyTable convergence_study(const std::string& scenario_name, std::span<const std::size_t> mesh_sizes,
                             const SolverConfig& config) {
  const auto exact = scenario_exact(scenario_name);
  if (!exact) throw ConfigError("study: scenario '" + scenario_name + "' has no closed-form solution");
  StudyTable table;
  table.scenario = scenario_name;
  for (std::size_t n : mesh_sizes) {
    const DiscreteProblem problem(scenario(scenario_name, n));
    const DiscreteSolution sol = continuation_solve(problem, config);
    StudyRow row;
    row.n = n;
    row.h = problem.mesh().dx();
    row.err_u = l2_error_p0(problem.mesh(), sol.u, exact->u);
    row.err_p = l2_error_rt0(problem.mesh(), sol.p, exact->p);
    row.history = sol.history;
    table.rows.push_back(std::move(row));
  }
  std::vector<double> h, eu, ep;
  for (const StudyRow& r : table.rows) {
    h.push_back(r.h);
    eu.push_back(r.err_u);
    ep.push_back(r.err_p);
  }
  table.rate_u = fitted_rate(h, eu);
  table.rate_p = fitted_rate(h, ep);
  return table;
}

}  // namespace gradcon
