#include "gradcon/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace gradcon {

using nlohmann::json;

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::study: return "study";
    case RunMode::evolve: return "evolve";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double number(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing required number");
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

std::size_t positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) fail(path, "expected a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::string string_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing required string");
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

PiecewiseRegions parse_regions(const json& j, const std::string& path) {
  PiecewiseRegions pr;
  pr.otherwise = number(j, "otherwise", path);
  if (j.contains("regions")) {
    const json& regions = j.at("regions");
    if (!regions.is_array()) fail(path + ".regions", "expected an array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string rp = path + ".regions[" + std::to_string(i) + "]";
      check_keys(regions[i], rp, {"a", "b", "c", "value"});
      pr.regions.push_back({HalfPlane{number(regions[i], "a", rp), number(regions[i], "b", rp), number(regions[i], "c", rp)},
                            number(regions[i], "value", rp)});
    }
  }
  return pr;
}

void parse_solver(const json& j, const std::string& path, SolverConfig& cfg) {
  check_keys(j, path, {"tau_start", "tau_factor", "tau_min", "newton_tol", "newton_max_iter", "linear_tol", "linesearch"});
  cfg.tau_start = number_or(j, "tau_start", path, cfg.tau_start);
  cfg.tau_factor = number_or(j, "tau_factor", path, cfg.tau_factor);
  cfg.tau_min = number_or(j, "tau_min", path, cfg.tau_min);
  cfg.newton_tol = number_or(j, "newton_tol", path, cfg.newton_tol);
  cfg.linear_tol = number_or(j, "linear_tol", path, cfg.linear_tol);
  if (j.contains("newton_max_iter"))
    cfg.newton_max_iter = static_cast<int>(positive_int(j.at("newton_max_iter"), path + ".newton_max_iter"));
  if (j.contains("linesearch")) {
    const std::string lp = path + ".linesearch";
    const json& ls = j.at("linesearch");
    check_keys(ls, lp, {"shrink", "sufficient_decrease", "max_backtracks"});
    cfg.linesearch.shrink = number_or(ls, "shrink", lp, cfg.linesearch.shrink);
    cfg.linesearch.sufficient_decrease = number_or(ls, "sufficient_decrease", lp, cfg.linesearch.sufficient_decrease);
    if (ls.contains("max_backtracks")) {
      const json& mb = ls.at("max_backtracks");
      if (!mb.is_number_integer() || mb.get<long long>() < 0) fail(lp + ".max_backtracks", "expected a nonnegative integer");
      cfg.linesearch.max_backtracks = mb.get<int>();
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
}

Side parse_side(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    if (s == "bottom") return Side::bottom;
    if (s == "top") return Side::top;
  }
  fail(path, "expected one of left, right, bottom, top");
}

ProblemSpec parse_problem(const json& j, const std::string& path) {
  check_keys(j, path, {"rect", "nx", "ny", "neumann_sides", "alpha", "f"});
  ProblemSpec p;
  p.name = "inline";
  if (j.contains("rect")) {
    const json& r = j.at("rect");
    if (!r.is_array() || r.size() != 4 || !std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_number(); }))
      fail(path + ".rect", "expected [x0, y0, x1, y1]");
    p.rect = Rect{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    if (!(p.rect.x0 < p.rect.x1) || !(p.rect.y0 < p.rect.y1)) fail(path + ".rect", "requires x0 < x1 and y0 < y1");
  }
  if (!j.contains("nx")) fail(path + ".nx", "missing required integer");
  if (!j.contains("ny")) fail(path + ".ny", "missing required integer");
  p.nx = positive_int(j.at("nx"), path + ".nx");
  p.ny = positive_int(j.at("ny"), path + ".ny");
  if (j.contains("neumann_sides")) {
    const json& sides = j.at("neumann_sides");
    if (!sides.is_array()) fail(path + ".neumann_sides", "expected an array");
    for (std::size_t i = 0; i < sides.size(); ++i)
      p.boundary.neumann[static_cast<int>(parse_side(sides[i], path + ".neumann_sides[" + std::to_string(i) + "]"))] = true;
  }
  if (!j.contains("alpha")) fail(path + ".alpha", "missing required object");
  if (!j.contains("f")) fail(path + ".f", "missing required object");
  p.alpha = parse_alpha(j.at("alpha"), path + ".alpha");
  p.f = parse_source(j.at("f"), path + ".f");
  return p;
}

}  // namespace

AlphaSpec parse_alpha(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = string_at(j, "type", path);
  AlphaSpec spec;
  if (type == "constant") {
    check_keys(j, path, {"type", "value"});
    spec = AlphaConstant{number(j, "value", path)};
  } else if (type == "piecewise") {
    check_keys(j, path, {"type", "regions", "otherwise"});
    spec = AlphaPiecewise{parse_regions(j, path)};
  } else if (type == "measure_line") {
    check_keys(j, path, {"type", "base", "width_factor", "lines"});
    AlphaMeasureLine m;
    m.base = number_or(j, "base", path, m.base);
    m.width_factor = number_or(j, "width_factor", path, m.width_factor);
    if (!j.contains("lines") || !j.at("lines").is_array()) fail(path + ".lines", "expected an array");
    for (std::size_t i = 0; i < j.at("lines").size(); ++i) {
      const std::string lp = path + ".lines[" + std::to_string(i) + "]";
      const json& l = j.at("lines")[i];
      check_keys(l, lp, {"y", "x0", "x1", "weight"});
      m.lines.push_back(WeightedLine{number(l, "y", lp), number_or(l, "x0", lp, 0.0), number_or(l, "x1", lp, 1.0),
                                     number(l, "weight", lp)});
    }
    spec = m;
  } else {
    fail(path + ".type", "unknown alpha type '" + type + "'");
  }
  try {
    validate(spec);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return spec;
}

SourceSpec parse_source(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = string_at(j, "type", path);
  if (type == "constant") {
    check_keys(j, path, {"type", "value"});
    return SourceConstant{number(j, "value", path)};
  }
  if (type == "piecewise") {
    check_keys(j, path, {"type", "regions", "otherwise"});
    return SourcePiecewise{parse_regions(j, path)};
  }
  if (type == "preset") {
    check_keys(j, path, {"type", "name"});
    const std::string name = string_at(j, "name", path);
    if (name == "example2") return SourcePreset::example2;
    if (name == "example4") return SourcePreset::example4;
    fail(path + ".name", "unknown preset '" + name + "'");
  }
  fail(path + ".type", "unknown source type '" + type + "'");
}

RunConfig parse_config(const json& doc, std::optional<RunMode> mode_hint) {
  const std::string root = "$";
  check_keys(doc, root, {"mode", "scenario", "n", "problem", "solver", "output", "study", "evolution"});
  RunConfig cfg;

  if (doc.contains("mode")) {
    const std::string m = string_at(doc, "mode", root);
    if (m == "solve") cfg.mode = RunMode::solve;
    else if (m == "study") cfg.mode = RunMode::study;
    else if (m == "evolve") cfg.mode = RunMode::evolve;
    else fail(root + ".mode", "expected solve, study or evolve");
    if (mode_hint && *mode_hint != cfg.mode)
      fail(root + ".mode", std::string("config mode '") + m + "' conflicts with command '" + mode_name(*mode_hint) + "'");
  } else if (mode_hint) {
    cfg.mode = *mode_hint;
  } else {
    fail(root + ".mode", "missing (give it in the file or via the subcommand)");
  }

  const bool has_scenario = doc.contains("scenario");
  const bool has_problem = doc.contains("problem");
  if (has_scenario && has_problem) fail(root, "give either 'scenario' or 'problem', not both");
  if (doc.contains("n") && !has_scenario) fail(root + ".n", "only valid together with 'scenario'");

  if (has_scenario) {
    cfg.scenario = string_at(doc, "scenario", root);
    const std::size_t n = doc.contains("n") ? positive_int(doc.at("n"), root + ".n") : 64;
    try {
      cfg.problem = scenario(*cfg.scenario, n);
    } catch (const ConfigError& e) {
      fail(root + ".scenario", e.what());
    }
  } else if (has_problem) {
    cfg.problem = parse_problem(doc.at("problem"), root + ".problem");
  } else if (cfg.mode != RunMode::study) {
    fail(root, "missing 'scenario' or 'problem'");
  }

  if (doc.contains("solver")) parse_solver(doc.at("solver"), root + ".solver", cfg.solver);

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, root + ".output", {"dir", "formats"});
    if (o.contains("dir")) cfg.output_dir = string_at(o, "dir", root + ".output");
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array()) fail(root + ".output.formats", "expected an array");
      cfg.formats.clear();
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string fp = root + ".output.formats[" + std::to_string(i) + "]";
        if (!f[i].is_string()) fail(fp, "expected a string");
        const std::string name = f[i].get<std::string>();
        if (name != "vtk" && name != "json" && name != "csv") fail(fp, "expected vtk, json or csv");
        cfg.formats.insert(name);
      }
    }
  }

  if (doc.contains("study")) {
    const json& s = doc.at("study");
    check_keys(s, root + ".study", {"mesh_sizes"});
    if (s.contains("mesh_sizes")) {
      const json& m = s.at("mesh_sizes");
      if (!m.is_array()) fail(root + ".study.mesh_sizes", "expected an array");
      for (std::size_t i = 0; i < m.size(); ++i)
        cfg.mesh_sizes.push_back(positive_int(m[i], root + ".study.mesh_sizes[" + std::to_string(i) + "]"));
    }
  }
  if (cfg.mode == RunMode::study) {
    if (!cfg.scenario) fail(root + ".scenario", "study mode requires a scenario with a closed-form solution");
    if (cfg.mesh_sizes.empty()) fail(root + ".study.mesh_sizes", "study mode requires a non-empty list of mesh sizes");
    if (!scenario_exact(*cfg.scenario)) fail(root + ".scenario", "scenario has no closed-form solution");
  }

  if (doc.contains("evolution")) {
    const std::string ep = root + ".evolution";
    const json& e = doc.at("evolution");
    check_keys(e, ep, {"final_time", "step", "rate", "u0", "previous_weight"});
    EvolutionConfig ev;
    ev.final_time = number(e, "final_time", ep);
    ev.step = number(e, "step", ep);
    if (!(ev.step > 0.0)) fail(ep + ".step", "must be positive");
    if (!(ev.final_time >= ev.step)) fail(ep + ".final_time", "must be at least one step");
    if (e.contains("rate")) ev.rate = parse_source(e.at("rate"), ep + ".rate");
    if (e.contains("u0")) ev.u0 = parse_source(e.at("u0"), ep + ".u0");
    if (e.contains("previous_weight")) {
      const std::string w = string_at(e, "previous_weight", ep);
      if (w == "unit") ev.previous_weight = PreviousStateWeight::unit;
      else if (w == "step") ev.previous_weight = PreviousStateWeight::step;
      else fail(ep + ".previous_weight", "expected unit or step");
    }
    cfg.evolution = ev;
  }
  if (cfg.mode == RunMode::evolve && !cfg.evolution) fail(root + ".evolution", "evolve mode requires an evolution block");
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, std::optional<RunMode> mode_hint) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, mode_hint);
}

RunSummary make_summary(const RunConfig& config, const DiscreteSolution& solution, const Diagnostics& diag) {
  RunSummary s;
  s.mode = mode_name(config.mode);
  s.problem = config.problem.name;
  s.nx = config.problem.nx;
  s.ny = config.problem.ny;
  s.tau_final = solution.tau_final;
  s.r1_norm = solution.r1_norm;
  s.r2_norm = solution.r2_norm;
  s.diagnostics = diag;
  s.history = solution.history;
  return s;
}

json summary_to_json(const RunSummary& s) {
  json hist = json::array();
  for (const TauStep& t : s.history)
    hist.push_back({{"tau", t.tau},
                    {"iterations", t.iterations},
                    {"backtracks", t.backtracks},
                    {"r1_norm", t.r1_norm},
                    {"r2_norm", t.r2_norm},
                    {"duality_gap", t.duality_gap}});
  const Diagnostics& d = s.diagnostics;
  return json{{"mode", s.mode},
              {"problem", s.problem},
              {"nx", s.nx},
              {"ny", s.ny},
              {"tau_final", s.tau_final},
              {"r1_norm", s.r1_norm},
              {"r2_norm", s.r2_norm},
              {"diagnostics",
               {{"primal_value", d.primal_value},
                {"dual_value", d.dual_value},
                {"duality_gap", d.duality_gap},
                {"max_grad_ratio", d.max_grad_ratio},
                {"feasibility_violation", d.feasibility_violation},
                {"active_fraction", d.active_fraction},
                {"max_jump_ratio", d.max_jump_ratio}}},
              {"history", hist}};
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  try {
    s.mode = j.at("mode").get<std::string>();
    s.problem = j.at("problem").get<std::string>();
    s.nx = j.at("nx").get<std::size_t>();
    s.ny = j.at("ny").get<std::size_t>();
    s.tau_final = j.at("tau_final").get<double>();
    s.r1_norm = j.at("r1_norm").get<double>();
    s.r2_norm = j.at("r2_norm").get<double>();
    const json& d = j.at("diagnostics");
    s.diagnostics.primal_value = d.at("primal_value").get<double>();
    s.diagnostics.dual_value = d.at("dual_value").get<double>();
    s.diagnostics.duality_gap = d.at("duality_gap").get<double>();
    s.diagnostics.max_grad_ratio = d.at("max_grad_ratio").get<double>();
    s.diagnostics.feasibility_violation = d.at("feasibility_violation").get<double>();
    s.diagnostics.active_fraction = d.at("active_fraction").get<double>();
    s.diagnostics.max_jump_ratio = d.at("max_jump_ratio").get<double>();
    for (const json& h : j.at("history")) {
      TauStep t;
      t.tau = h.at("tau").get<double>();
      t.iterations = h.at("iterations").get<int>();
      t.backtracks = h.at("backtracks").get<int>();
      t.r1_norm = h.at("r1_norm").get<double>();
      t.r2_norm = h.at("r2_norm").get<double>();
      t.duality_gap = h.at("duality_gap").get<double>();
      s.history.push_back(t);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
  return s;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  out += buf;
}

}  // namespace

std::string vtk_string(const Mesh& mesh, std::span<const double> u, std::span<const double> grad_u_mag,
                       std::span<const double> p) {
  if (u.size() != mesh.num_triangles() || grad_u_mag.size() != mesh.num_triangles() || p.size() != mesh.num_edges())
    throw std::invalid_argument("export_vtk: field sizes do not match the mesh");
  std::string out;
  out.reserve(128 * (mesh.num_vertices() + mesh.num_triangles()));
  out += "# vtk DataFile Version 3.0\ngradcon solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.num_vertices()) + " double\n";
  for (const Point2& v : mesh.vertices()) {
    append_number(out, v.x);
    out += ' ';
    append_number(out, v.y);
    out += " 0\n";
  }
  const std::size_t nt = mesh.num_triangles();
  out += "CELLS " + std::to_string(nt) + " " + std::to_string(4 * nt) + "\n";
  for (const Triangle& t : mesh.triangles())
    out += "3 " + std::to_string(t.v[0]) + " " + std::to_string(t.v[1]) + " " + std::to_string(t.v[2]) + "\n";
  out += "CELL_TYPES " + std::to_string(nt) + "\n";
  for (std::size_t t = 0; t < nt; ++t) out += "5\n";
  out += "CELL_DATA " + std::to_string(nt) + "\n";
  out += "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : u) {
    append_number(out, v);
    out += '\n';
  }
  out += "SCALARS grad_u_mag double 1\nLOOKUP_TABLE default\n";
  for (double v : grad_u_mag) {
    append_number(out, v);
    out += '\n';
  }
  out += "VECTORS p double\n";
  for (std::size_t t = 0; t < nt; ++t) {
    const Point2 v = rt0_value(mesh, p, t, mesh.centroid(t));
    append_number(out, v.x);
    out += ' ';
    append_number(out, v.y);
    out += " 0\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void export_vtk(const Mesh& mesh, std::span<const double> u, std::span<const double> grad_u_mag,
                std::span<const double> p, const std::filesystem::path& path) {
  write_text(path, vtk_string(mesh, u, grad_u_mag, p));
}

std::string study_csv_string(const StudyTable& table) {
  std::string out = "h,err_u,err_p,rate_u,rate_p\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const StudyRow& r = table.rows[i];
    append_number(out, r.h);
    out += ',';
    append_number(out, r.err_u);
    out += ',';
    append_number(out, r.err_p);
    out += ',';
    if (i > 0) {
      const StudyRow& q = table.rows[i - 1];
      const double lh = std::log(r.h / q.h);
      append_number(out, std::log(r.err_u / q.err_u) / lh);
      out += ',';
      append_number(out, std::log(r.err_p / q.err_p) / lh);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

void export_study_csv(const StudyTable& table, const std::filesystem::path& path) {
  write_text(path, study_csv_string(table));
}

json study_to_json(const StudyTable& table) {
  json rows = json::array();
  for (const StudyRow& r : table.rows) {
    int iterations = 0;
    for (const TauStep& t : r.history) iterations += t.iterations;
    rows.push_back({{"n", r.n}, {"h", r.h}, {"err_u", r.err_u}, {"err_p", r.err_p}, {"newton_iterations", iterations}});
  }
  return json{{"mode", "study"}, {"scenario", table.scenario}, {"rows", rows}, {"rate_u", table.rate_u}, {"rate_p", table.rate_p}};
}

json evolution_to_json(const Trajectory& trajectory, const ConservationReport& report) {
  json steps = json::array();
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const StepReport& s = trajectory.steps[i];
    steps.push_back({{"index", s.index},
                     {"t", s.t},
                     {"poured", s.poured},
                     {"balance", report.balance.at(i)},
                     {"newton_iterations", s.newton_iterations},
                     {"r1_norm", s.r1_norm},
                     {"r2_norm", s.r2_norm},
                     {"max_grad_ratio", s.max_grad_ratio}});
  }
  return json{{"mode", "evolve"},
              {"balance_expected", report.balance_expected},
              {"warnings", report.warnings},
              {"steps", steps}};
}

std::string evolution_csv_string(const Trajectory& trajectory, const ConservationReport& report) {
  std::string out = "step,t,poured,balance,newton_iterations,max_grad_ratio\n";
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const StepReport& s = trajectory.steps[i];
    out += std::to_string(s.index) + ',';
    append_number(out, s.t);
    out += ',';
    append_number(out, s.poured);
    out += ',';
    append_number(out, report.balance.at(i));
    out += ',' + std::to_string(s.newton_iterations) + ',';
    append_number(out, s.max_grad_ratio);
    out += '\n';
  }
  return out;
}

void export_summary_json(const RunSummary& summary, const std::filesystem::path& path) {
  write_text(path, summary_to_json(summary).dump(2) + "\n");
}

}  // namespace gradcon
