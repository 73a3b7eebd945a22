#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradcon/evolution.hpp"
#include "gradcon/solver.hpp"
#include "gradcon/study.hpp"

namespace gradcon {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { solve, study, evolve };

const char* mode_name(RunMode m);

struct EvolutionConfig {
  double final_time = 0.0;
  double step = 0.0;
  SourceSpec rate = SourceConstant{0.0};
  SourceSpec u0 = SourceConstant{0.0};
  PreviousStateWeight previous_weight = PreviousStateWeight::unit;
};

struct RunConfig {
  RunMode mode = RunMode::solve;
  std::optional<std::string> scenario;
  ProblemSpec problem;  // resolved from the scenario or the inline description
  SolverConfig solver;
  std::filesystem::path output_dir = "out";
  std::set<std::string> formats{"vtk", "json", "csv"};
  std::vector<std::size_t> mesh_sizes;  // study
  std::optional<EvolutionConfig> evolution;
};

/// Parses and validates a JSON configuration. Unknown keys and schema
/// violations raise ConfigError naming the JSON path. `mode_hint` supplies
/// the mode when the document has none.
RunConfig parse_config(const nlohmann::json& doc, std::optional<RunMode> mode_hint = std::nullopt);
RunConfig parse_config_file(const std::filesystem::path& path, std::optional<RunMode> mode_hint = std::nullopt);

SourceSpec parse_source(const nlohmann::json& j, const std::string& path);
AlphaSpec parse_alpha(const nlohmann::json& j, const std::string& path);

struct RunSummary {
  std::string mode;
  std::string problem;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double tau_final = 0.0;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  Diagnostics diagnostics;
  std::vector<TauStep> history;
  double wall_time_s = 0.0;  // not serialized
};

RunSummary make_summary(const RunConfig& config, const DiscreteSolution& solution, const Diagnostics& diag);

nlohmann::json summary_to_json(const RunSummary& summary);
RunSummary summary_from_json(const nlohmann::json& j);

/// Legacy ASCII VTK unstructured grid with cell data u, grad_u_mag and p
/// (RT0 evaluated at centroids).
void export_vtk(const Mesh& mesh, std::span<const double> u, std::span<const double> grad_u_mag,
                std::span<const double> p, const std::filesystem::path& path);
std::string vtk_string(const Mesh& mesh, std::span<const double> u, std::span<const double> grad_u_mag,
                       std::span<const double> p);

/// Header "h,err_u,err_p,rate_u,rate_p"; rate columns hold the observed rate
/// against the previous row and are empty on the first row.
void export_study_csv(const StudyTable& table, const std::filesystem::path& path);
std::string study_csv_string(const StudyTable& table);

void export_summary_json(const RunSummary& summary, const std::filesystem::path& path);

nlohmann::json study_to_json(const StudyTable& table);
nlohmann::json evolution_to_json(const Trajectory& trajectory, const ConservationReport& report);
std::string evolution_csv_string(const Trajectory& trajectory, const ConservationReport& report);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gradcon
