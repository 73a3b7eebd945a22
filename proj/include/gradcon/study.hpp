#pragma once

#include <span>
#include <string>
#include <vector>

#include "gradcon/solver.hpp"

namespace gradcon {

struct StudyRow {
  std::size_t n = 0;
  double h = 0.0;
  double err_u = 0.0;
  double err_p = 0.0;
  std::vector<TauStep> history;
};

struct StudyTable {
  std::string scenario;
  std::vector<StudyRow> rows;
  double rate_u = 0.0;  // least-squares slope of log err_u against log h
  double rate_p = 0.0;
};

/// Least-squares slope of log(err) against log(h); NaN with fewer than two points.
double fitted_rate(std::span<const double> h, std::span<const double> err);

/// One continuation solve per mesh size n (n x n mesh), errors against the
/// scenario's exact solution. Throws ConfigError if the scenario has none.
StudyTable convergence_study(const std::string& scenario_name, std::span<const std::size_t> mesh_sizes,
                             const SolverConfig& config);

}  // namespace gradcon
