// Copyright 2026 The LCHS Emulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lchs/cap_application.hpp"
#include "lchs/hybrid_estimator.hpp"
#include "lchs/lchs_solver.hpp"
#include "lchs/parallel.hpp"
#include "lchs/problem_io.hpp"
#include "lchs/reference_oracle.hpp"
#include "lchs/resource_planner.hpp"
#include "lchs/statistics.hpp"
#include "manifest.hpp"

#ifndef LCHS_VERSION
#define LCHS_VERSION "unknown"
#endif

namespace lchs::cli {
namespace {

using nlohmann::json;

struct CommandOutput {
  json config;
  std::uint64_t seed = 0;
  OutputSet files;
  std::optional<std::string> manifest_path;
};

// Options shared by every computing subcommand.
struct OutputOptions {
  std::string out;
  std::string manifest;

  void attach(CLI::App* app, const std::string& out_help) {
    app->add_option("--out", out, out_help);
    app->add_option("--manifest", manifest,
                    "run manifest path (default: <out>.manifest.json when --out is given)");
  }
  std::optional<std::string> manifest_path() const {
    if (!manifest.empty()) return manifest;
    if (!out.empty()) return out + ".manifest.json";
    return std::nullopt;
  }
};

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string() + suffix;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void require_unit_interval(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0))
    throw ValidationError(std::string(name) + " must lie in (0, 1)");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// "8..256" -> 8, 16, ..., 256.
std::vector<double> doubling_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ValidationError("range '" + text + "' is not lo..hi");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(text.substr(0, dots));
    hi = std::stod(text.substr(dots + 2));
  } catch (const std::exception&) {
    throw ValidationError("range '" + text + "' is not numeric");
  }
  if (!(lo > 0.0) || hi < lo) throw ValidationError("range '" + text + "' must be 0 < lo <= hi");
  std::vector<double> values;
  for (double v = lo; v <= hi * (1.0 + 1e-12); v *= 2.0) values.push_back(v);
  if (values.size() < 2) throw ValidationError("range '" + text + "' holds fewer than two octaves");
  return values;
}

json fit_json(const LineFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
}

ProblemSpec default_instance(std::uint64_t seed) {
  RandomInstanceOptions opt;
  opt.seed = seed;
  opt.dim = 4;
  opt.dissipation_null_dim = 1;
  return random_problem(opt);
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  std::string problem;
  double eps = 1e-2;
  std::string backend = "exact";
  std::optional<double> horizon;
  std::optional<double> cutoff;
  std::optional<int> intervals;
  std::optional<int> time_intervals;
  bool single_pass = false;
  bool oracle = false;
  OutputOptions output;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "problem JSON file")->required();
    app->add_option("--eps", eps, "target accuracy in (0, 1)")->capture_default_str();
    app->add_option("--backend", backend, "exact[:tol] | trotter:p,r | interaction[:tol]")->capture_default_str();
    app->add_option("--T", horizon, "final time (default: the problem's T)");
    app->add_option("--K", cutoff, "fixed kernel cutoff");
    app->add_option("--M", intervals, "fixed kernel interval count (even)");
    app->add_option("--Mt", time_intervals, "fixed source time interval count");
    app->add_flag("--single-pass", single_pass, "skip the second tolerance pass");
    app->add_flag("--oracle", oracle, "report the error against the RK4 oracle");
    output.attach(app, "result JSON path (default: stdout)");
  }
};

CommandOutput cmd_solve(const SolveOptions& o, std::ostream& out) {
  require_unit_interval(o.eps, "--eps");
  const ProblemSpec spec = load_problem(o.problem);
  SolverOptions so;
  so.backend = parse_backend(o.backend);
  so.cutoff = o.cutoff;
  so.intervals = o.intervals;
  so.time_intervals = o.time_intervals;
  so.second_pass = !o.single_pass;
  const double horizon = o.horizon.value_or(spec.horizon);
  if (!(horizon > 0.0)) throw ValidationError("--T must be positive");

  CommandOutput c;
  c.config = {{"problem", o.problem}, {"eps", o.eps},        {"backend", describe(so.backend)},
              {"T", horizon},         {"second_pass", so.second_pass}, {"oracle", o.oracle}};
  if (o.cutoff) c.config["K"] = *o.cutoff;
  if (o.intervals) c.config["M"] = *o.intervals;
  if (o.time_intervals) c.config["Mt"] = *o.time_intervals;

  ProblemInstance problem = spec.instance();
  problem.generator = problem.generator.with_horizon(horizon);
  LCHSResult r = solve(problem, horizon, o.eps, so);
  if (o.oracle) r.oracle_error = (r.solution - oracle_solve(problem, horizon)).norm();

  const json doc{{"config", c.config}, {"result", to_json(r)}};
  if (o.output.out.empty()) {
    out << dump(doc);
  } else {
    c.files.write(o.output.out, dump(doc));
    out << "||u(T)|| ~ " << r.solution.norm() << ", p_succ " << r.success_probability
        << ", K " << r.grid.cutoff << ", M " << r.grid.intervals << ", propagator calls "
        << r.tally.propagator_calls << "\n";
    if (r.oracle_error) out << "error vs oracle " << *r.oracle_error << "\n";
  }
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  std::string problem;
  std::string observable;
  double eps = 0.05;
  double delta = 0.1;
  std::uint64_t seed = 7;
  std::string backend = "exact";
  std::optional<double> cutoff;
  std::optional<int> intervals;
  bool records = false;
  OutputOptions output;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "problem JSON file (no source)")->required();
    app->add_option("--observable", observable, "observable JSON file")->required();
    app->add_option("--eps", eps, "target accuracy in (0, 1)")->capture_default_str();
    app->add_option("--delta", delta, "failure probability in (0, 1)")->capture_default_str();
    app->add_option("--seed", seed, "RNG seed")->capture_default_str();
    app->add_option("--backend", backend, "propagator backend")->capture_default_str();
    app->add_option("--K", cutoff, "fixed kernel cutoff");
    app->add_option("--M", intervals, "fixed kernel interval count (even)");
    app->add_flag("--records", records, "include per-sample records");
    output.attach(app, "result JSON path (default: stdout)");
  }
};

ComplexMatrix load_observable(const std::string& path, Index dim) {
  const json j = load_json(path);
  if (!j.is_object() || !j.contains("matrix"))
    throw ValidationError(path + ": expected an object with 'matrix'");
  if (j.contains("dim") && (!j["dim"].is_number_integer() || j["dim"].get<Index>() != dim))
    throw ValidationError(path + ": 'dim' does not match the problem");
  ComplexMatrix o = matrix_from_json(j["matrix"], dim);
  if (hermiticity_defect(o) > 1e-10 * std::max(1.0, o.norm()))
    throw ValidationError(path + ": observable is not Hermitian");
  return o;
}

CommandOutput cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  require_unit_interval(o.eps, "--eps");
  require_unit_interval(o.delta, "--delta");
  const ProblemSpec spec = load_problem(o.problem);
  const ComplexMatrix observable = load_observable(o.observable, spec.dim);
  EstimatorOptions eo;
  eo.backend = parse_backend(o.backend);
  eo.cutoff = o.cutoff;
  eo.intervals = o.intervals;
  eo.keep_records = o.records;

  CommandOutput c;
  c.seed = o.seed;
  c.config = {{"problem", o.problem}, {"observable", o.observable}, {"eps", o.eps},
              {"delta", o.delta},     {"seed", o.seed},             {"backend", describe(eo.backend)},
              {"records", o.records}};
  if (o.cutoff) c.config["K"] = *o.cutoff;
  if (o.intervals) c.config["M"] = *o.intervals;

  const ObservableEstimate e = estimate_observable(spec.instance(), observable, spec.horizon,
                                                   o.eps, o.delta, o.seed, eo);
  const json doc{{"config", c.config}, {"estimate", to_json(e, o.records)}};
  if (o.output.out.empty()) {
    out << dump(doc);
  } else {
    c.files.write(o.output.out, dump(doc));
    out << "value " << e.value << " +- " << e.half_width << " (J = " << e.samples
        << ", shots " << e.plan.shots << ")\n";
  }
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- cap

struct CapOptions {
  Index points = 64;
  double length = 40.0;
  std::vector<double> packet;    // x0, p0, sigma
  std::vector<double> absorber;  // eta, width, power
  double horizon = 5.0;

  void attach(CLI::App* app) {
    app->add_option("--n", points, "grid points (>= 4)")->capture_default_str();
    app->add_option("--length", length, "domain length")->capture_default_str();
    app->add_option("--packet", packet, "x0,p0,sigma (default 0.65 L, 2, L/20)")
        ->delimiter(',')
        ->expected(3);
    app->add_option("--absorber", absorber, "eta,width,power (default 2, 0.2 L, 2)")
        ->delimiter(',')
        ->expected(3);
    app->add_option("--T", horizon, "final time")->capture_default_str();
  }

  void validate() const {
    if (points < 4) throw ValidationError("--n must be at least 4");
    if (!(length > 0.0)) throw ValidationError("--length must be positive");
    if (!(horizon > 0.0)) throw ValidationError("--T must be positive");
    const auto [x0, p0, sigma] = packet_values();
    if (!(sigma > 0.0) || x0 < 0.0 || x0 > length)
      throw ValidationError("--packet needs sigma > 0 and x0 inside the domain");
    const auto [eta, width, power] = absorber_values();
    if (eta < 0.0 || !(width > 0.0) || width >= 0.5 * length || power < 1.0 ||
        power != std::floor(power))
      throw ValidationError("--absorber needs eta >= 0, 0 < width < L/2, integer power >= 1");
  }
  std::array<double, 3> packet_values() const {
    if (packet.size() == 3) return {packet[0], packet[1], packet[2]};
    return {0.65 * length, 2.0, length / 20.0};
  }
  std::array<double, 3> absorber_values() const {
    if (absorber.size() == 3) return {absorber[0], absorber[1], absorber[2]};
    return {2.0, 0.2 * length, 2.0};
  }
  json config() const {
    const auto p = packet_values();
    const auto a = absorber_values();
    return {{"n", points},
            {"length", length},
            {"packet", {{"x0", p[0]}, {"p0", p[1]}, {"sigma", p[2]}}},
            {"absorber", {{"eta", a[0]}, {"width", a[1]}, {"power", a[2]}}},
            {"T", horizon}};
  }
  CapProblem build() const {
    const auto a = absorber_values();
    const CapGrid grid = make_cap_grid(points, length);
    const RealVector v = absorber_profile(grid, a[1], a[0], static_cast<int>(a[2]));
    return discretize(points, length, nullptr, v, horizon);
  }
  ComplexVector initial_state(const CapProblem& cap) const {
    const auto p = packet_values();
    return gaussian_packet(cap.grid, p[0], p[1], p[2]);
  }
};

struct CapCommandOptions {
  CapOptions cap;
  double eps = 1e-2;
  std::string backend = "exact";
  int snapshots = 5;
  std::string density;
  OutputOptions output;

  void attach(CLI::App* app) {
    cap.attach(app);
    app->add_option("--eps", eps, "target accuracy in (0, 1)")->capture_default_str();
    app->add_option("--backend", backend, "exact | trotter:p,r | interaction")->capture_default_str();
    app->add_option("--snapshots", snapshots, "equispaced snapshot count in (0, T]")->capture_default_str();
    app->add_option("--density", density, "density JSON path (default: <out stem>.density.json)");
    output.attach(app, "CSV path for t, norm, oracle_norm, err_vs_oracle (default: stdout)");
  }
};

CommandOutput cmd_cap(const CapCommandOptions& o, std::ostream& out) {
  o.cap.validate();
  require_unit_interval(o.eps, "--eps");
  if (o.snapshots < 1) throw ValidationError("--snapshots must be at least 1");
  const PropagatorBackend backend = parse_backend(o.backend);

  CommandOutput c;
  c.config = o.cap.config();
  c.config["eps"] = o.eps;
  c.config["backend"] = describe(backend);
  c.config["snapshots"] = o.snapshots;

  const CapProblem cap = o.cap.build();
  std::vector<double> times;
  for (int i = 1; i <= o.snapshots; ++i) times.push_back(o.cap.horizon * i / o.snapshots);
  const CapDemoResult r =
      run_cap_demo(cap, o.cap.initial_state(cap), o.cap.horizon, o.eps, backend, times);

  std::ostringstream csv;
  csv << std::setprecision(17) << "t,norm,oracle_norm,err_vs_oracle\n";
  for (const auto& s : r.snapshots)
    csv << s.t << ',' << s.norm << ',' << s.oracle_norm << ',' << s.error << '\n';
  json density{{"config", c.config},
               {"x", std::vector<double>(cap.grid.x.data(), cap.grid.x.data() + cap.grid.points)},
               {"demo", to_json(r)}};
  if (o.output.out.empty()) {
    out << csv.str();
  } else {
    c.files.write(o.output.out, csv.str());
    const std::string density_path =
        o.density.empty() ? sibling(o.output.out, ".density.json") : o.density;
    c.files.write(density_path, dump(density));
    const auto& last = r.snapshots.back();
    out << "||u(T)|| " << last.norm << " (oracle " << last.oracle_norm << "), relative error "
        << last.error << "\n";
  }
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- plan

struct PlanCommandOptions {
  std::string problem;
  double eps = 1e-3;
  int order = 2;
  std::string mode = "td";
  std::string constants;
  std::optional<double> final_norm;
  CapOptions cap;
  OutputOptions output;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "problem JSON file (td and ti modes)");
    app->add_option("--eps", eps, "target accuracy in (0, 1)")->capture_default_str();
    app->add_option("--order", order, "product-formula order p")->capture_default_str();
    app->add_option("--mode", mode, "td | ti | cap")->capture_default_str();
    app->add_option("--constants", constants, "JSON file overriding the unit constants");
    app->add_option("--final-norm", final_norm, "||u(T)|| estimate (default: oracle solve)");
    cap.attach(app);
    output.attach(app, "plan JSON path (default: stdout after the table)");
  }
};

CommandOutput cmd_plan(const PlanCommandOptions& o, std::ostream& out) {
  require_unit_interval(o.eps, "--eps");
  if (o.order != 1 && o.order != 2 && o.order != 4)
    throw ValidationError("--order must be 1, 2 or 4");
  const PlanMode mode = parse_plan_mode(o.mode);
  const PlanConstants constants =
      o.constants.empty() ? PlanConstants{} : PlanConstants::from_json(load_json(o.constants));
  if (o.final_norm && !(*o.final_norm > 0.0))
    throw ValidationError("--final-norm must be positive");

  CommandOutput c;
  c.config = {{"eps", o.eps}, {"order", o.order}, {"mode", to_string(mode)}};
  if (!o.constants.empty()) c.config["constants"] = o.constants;

  std::optional<ProblemInstance> problem;
  std::optional<CapProblem> cap;
  if (mode == PlanMode::Cap) {
    o.cap.validate();
    c.config["cap"] = o.cap.config();
    cap = o.cap.build();
    problem = ProblemInstance{cap->generator, o.cap.initial_state(*cap), std::nullopt, {}};
  } else {
    if (o.problem.empty()) throw ValidationError("--problem is required in td and ti modes");
    c.config["problem"] = o.problem;
    problem = load_problem(o.problem).instance();
  }

  double final_norm = 0.0;
  if (o.final_norm) {
    final_norm = *o.final_norm;
  } else {
    OracleConfig oc;
    oc.tolerance = 1e-8;
    final_norm = oracle_solve(*problem, problem->generator.horizon(), oc).norm();
  }
  c.config["final_norm"] = final_norm;
  if (!(final_norm > 1e-12 * std::max(1.0, problem->initial_state.norm())))
    throw DecayedSolutionError("||u(T)|| vanishes; the q factor is unbounded");

  PlanInputs inputs = plan_inputs(*problem, o.eps, o.order, final_norm);
  if (cap) {
    inputs.grid_points = cap->grid.points;
    inputs.absorber_max = cap->absorber.maxCoeff();
  }
  const ResourcePlan p = plan(inputs, mode, constants);
  const json doc{{"config", c.config},
                 {"plan", to_json(p)},
                 {"grid",
                  {{"K", p.explicit_bounds.cutoff},
                   {"M", p.explicit_bounds.intervals},
                   {"M_t", p.explicit_bounds.time_intervals}}},
                 {"comparison", to_json(compare_methods(p))}};
  out << format_table(p);
  if (o.output.out.empty())
    out << dump(doc);
  else
    c.files.write(o.output.out, dump(doc));
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  bool scalar = false;
  std::string problem;
  std::vector<double> cutoffs{100.0};
  int intervals = 20000;
  std::optional<double> density;
  double tol = 1e-10;
  std::string rhs = "exact";
  bool principal_value = false;
  std::vector<double> radii{1e2, 1e3, 1e4};
  OutputOptions output;

  void attach(CLI::App* app) {
    app->add_flag("--scalar", scalar, "scalar L = 1, H = 0, T = 1 against exp(-1)");
    app->add_option("--problem", problem, "problem JSON file");
    app->add_option("--K", cutoffs, "cutoff(s), comma separated")->capture_default_str()->delimiter(',');
    app->add_option("--M", intervals, "interval count per cutoff")->capture_default_str();
    app->add_option("--density", density, "nodes per unit k; overrides --M");
    app->add_option("--tol", tol, "ODE tolerance")->capture_default_str();
    app->add_option("--rhs", rhs, "propagators on the quadrature side: exact | oracle")->capture_default_str();
    app->add_flag("--pv", principal_value, "principal-value residuals instead");
    app->add_option("--R", radii, "principal-value radii")->capture_default_str()->delimiter(',');
    output.attach(app, "result JSON path (default: stdout)");
  }
};

CommandOutput cmd_verify(const VerifyOptions& o, std::ostream& out) {
  if (o.scalar == !o.problem.empty() && !o.principal_value)
    throw ValidationError("give exactly one of --scalar and --problem");
  if (!(o.tol > 0.0)) throw ValidationError("--tol must be positive");
  if (o.rhs != "oracle" && o.rhs != "exact") throw ValidationError("--rhs must be oracle or exact");
  for (double k : o.cutoffs)
    if (!(k > 0.0)) throw ValidationError("--K values must be positive");

  CommandOutput c;
  json doc;
  if (o.principal_value) {
    ComplexMatrix h(2, 2), l(2, 2);
    if (o.problem.empty()) {
      h << 1, 0, 0, -1;
      l << 1, 0.5, 0.5, 1;
    } else {
      const ProblemInstance p = load_problem(o.problem).instance();
      if (!p.generator.time_independent())
        throw ValidationError("--pv needs a time-independent problem");
      h = p.generator.hamiltonian(0.0);
      l = p.generator.dissipative(0.0);
    }
    c.config = {{"mode", "principal_value"}, {"problem", o.problem}, {"R", o.radii}};
    std::vector<double> residuals;
    for (double r : o.radii) {
      residuals.push_back(verify_principal_value(h, l, r));
      out << "R " << r << ": residual " << residuals.back() << "\n";
    }
    doc = {{"config", c.config}, {"R", o.radii}, {"residuals", residuals}};
    if (o.radii.size() > 1) doc["rate_fit"] = fit_json(fit_log_log(o.radii, residuals));
  } else {
    double horizon = 1.0;
    std::optional<TimeDependentGenerator> gen;
    if (o.scalar) {
      gen = TimeDependentGenerator::constant(ComplexMatrix::Constant(1, 1, 1.0), 1.0);
    } else {
      const ProblemInstance p = load_problem(o.problem).instance();
      horizon = p.generator.horizon();
      gen = prepare_generator(p, horizon).generator;
    }
    c.config = {{"mode", o.scalar ? "scalar" : "problem"},
                {"problem", o.problem},
                {"K", o.cutoffs},
                {"tol", o.tol},
                {"rhs", o.rhs}};
    if (o.density)
      c.config["density"] = *o.density;
    else
      c.config["M"] = o.intervals;
    const IdentityRhs rhs = o.rhs == "exact" ? IdentityRhs::ExactBackend : IdentityRhs::Oracle;
    json checks = json::array();
    std::vector<double> errors;
    IdentityCheck last;
    for (double k : o.cutoffs) {
      int m = o.intervals;
      if (o.density) m = 2 * static_cast<int>(std::ceil(*o.density * k));
      last = verify_lchs_identity(*gen, horizon, k, m, o.tol, rhs);
      errors.push_back(last.lhs_rhs_error);
      checks.push_back({{"K", k},
                        {"M", m},
                        {"error", last.lhs_rhs_error},
                        {"bound", last.truncation_bound},
                        {"weight_deficit", last.weight_deficit}});
      out << "K " << k << ", M " << m << ": error " << last.lhs_rhs_error
          << (o.scalar ? " vs exp(-1)" : "") << ", tail bound " << last.truncation_bound << "\n";
    }
    doc = {{"config", c.config},      {"error", last.lhs_rhs_error},
           {"bound", last.truncation_bound}, {"K", last.cutoff},
           {"M", last.intervals},     {"checks", checks}};
    doc["rate_fit"] =
        o.cutoffs.size() > 1 ? fit_json(fit_log_log(o.cutoffs, errors)) : json();
  }
  if (o.output.out.empty())
    out << dump(doc);
  else
    c.files.write(o.output.out, dump(doc));
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- convergence

struct ConvergenceOptions {
  std::string sweep;
  int order = 2;
  std::string problem;
  std::uint64_t seed = 1;
  double cutoff = 4.0;
  int intervals = 32;
  double density = 4.0;
  OutputOptions output;

  void attach(CLI::App* app) {
    app->add_option("--sweep", sweep, "trotter_r=lo..hi or K=lo..hi (doubling)")->required();
    app->add_option("--order", order, "product-formula order for trotter_r sweeps")->capture_default_str();
    app->add_option("--problem", problem, "problem JSON file (default: seeded 4x4 instance)");
    app->add_option("--seed", seed, "seed of the default instance")->capture_default_str();
    app->add_option("--K", cutoff, "kernel cutoff for trotter_r sweeps")->capture_default_str();
    app->add_option("--M", intervals, "kernel intervals for trotter_r sweeps")->capture_default_str();
    app->add_option("--density", density, "nodes per unit k for K sweeps")->capture_default_str();
    output.attach(app, "CSV path (default: stdout); the fit goes to <out stem>.fit.json");
  }
};

CommandOutput cmd_convergence(const ConvergenceOptions& o, std::ostream& out) {
  const auto eq = o.sweep.find('=');
  if (eq == std::string::npos) throw ValidationError("--sweep must look like name=lo..hi");
  const std::string name = o.sweep.substr(0, eq);
  if (name != "trotter_r" && name != "K")
    throw ValidationError("--sweep parameter must be trotter_r or K");
  const std::vector<double> values = doubling_range(o.sweep.substr(eq + 1));
  if (o.order != 1 && o.order != 2 && o.order != 4)
    throw ValidationError("--order must be 1, 2 or 4");
  if (!(o.cutoff > 0.0) || o.intervals < 2 || o.intervals % 2 || !(o.density > 0.0))
    throw ValidationError("--K, --M (even) and --density must be positive");

  CommandOutput c;
  c.seed = o.seed;
  c.config = {{"sweep", o.sweep}, {"problem", o.problem}, {"seed", o.seed}};
  const ProblemSpec spec = o.problem.empty() ? default_instance(o.seed) : load_problem(o.problem);
  const ProblemInstance problem = spec.instance();
  const double horizon = spec.horizon;

  std::vector<double> errors;
  if (name == "trotter_r") {
    c.config["order"] = o.order;
    c.config["K"] = o.cutoff;
    c.config["M"] = o.intervals;
    SolverOptions so;
    so.cutoff = o.cutoff;
    so.intervals = o.intervals;
    so.backend = ExactStepping{1e-12};
    const ComplexVector reference = solve_homogeneous(problem, horizon, 0.5, so).solution;
    for (double r : values) {
      so.backend = Trotter{suzuki_recursion(o.order), static_cast<int>(r)};
      errors.push_back((solve_homogeneous(problem, horizon, 0.5, so).solution - reference).norm());
    }
  } else {
    c.config["density"] = o.density;
    const TimeDependentGenerator gen = prepare_generator(problem, horizon).generator;
    for (double k : values) {
      const int m = 2 * static_cast<int>(std::ceil(o.density * k));
      errors.push_back(
          verify_lchs_identity(gen, horizon, k, m, 1e-10, IdentityRhs::ExactBackend)
              .lhs_rhs_error);
    }
  }
  const LineFit fit = fit_log_log(values, errors);

  std::ostringstream csv;
  csv << std::setprecision(17) << name << ",error\n";
  for (std::size_t i = 0; i < values.size(); ++i) csv << values[i] << ',' << errors[i] << '\n';
  const json fit_doc{{"config", c.config}, {"fit", fit_json(fit)}};
  if (o.output.out.empty()) {
    out << csv.str();
  } else {
    c.files.write(o.output.out, csv.str());
    c.files.write(sibling(o.output.out, ".fit.json"), dump(fit_doc));
  }
  out << "slope " << fit.slope << " (r^2 " << fit.r_squared << ")\n";
  c.manifest_path = o.output.manifest_path();
  return c;
}

// ---------------------------------------------------------------- dispatch

int report(std::ostream& err, const char* kind, const std::exception& e, int code) {
  err << "lchs: " << kind << ": " << e.what() << "\n";
  return code;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const DecayedSolutionError& e) {
    return report(err, "decayed solution", e, kExitNumerical);
  } catch (const BudgetError& e) {
    return report(err, "budget exceeded", e, kExitNumerical);
  } catch (const ConvergenceError& e) {
    return report(err, "no convergence", e, kExitNumerical);
  } catch (const std::invalid_argument& e) {
    return report(err, "invalid input", e, kExitValidation);
  } catch (const std::exception& e) {
    return report(err, "error", e, kExitFailure);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classical emulator for linear combination of Hamiltonian simulation", "lchs"};
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", LCHS_VERSION);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: LCHS_THREADS, then all cores)");

  SolveOptions solve_opt;
  solve_opt.attach(app.add_subcommand("solve", "LCHS solution of du/dt = -A(t) u + b(t)"));
  EstimateOptions estimate_opt;
  estimate_opt.attach(app.add_subcommand("estimate", "hybrid estimate of u(T)^dagger O u(T)"));
  CapCommandOptions cap_opt;
  cap_opt.attach(app.add_subcommand("cap", "absorbing-potential wave-packet demo"));
  PlanCommandOptions plan_opt;
  plan_opt.attach(app.add_subcommand("plan", "query-count and parameter bounds"));
  VerifyOptions verify_opt;
  verify_opt.attach(app.add_subcommand("verify", "identity and principal-value checks"));
  ConvergenceOptions conv_opt;
  conv_opt.attach(app.add_subcommand("convergence", "error-vs-parameter sweeps with slope fit"));
  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->add_option("manifest", replay_path, "manifest JSON file")->required();

  std::vector<const char*> argv{"lchs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (threads > 0) set_thread_count(threads);

  if (*replay) {
    return guarded(err, [&] {
      const RunManifest m = manifest_from_json(load_json(replay_path));
      const int code = run(m.args, out, err);
      if (code != kExitOk) return code;
      int mismatches = 0;
      for (const auto& o : m.outputs) {
        const bool same = sha256_file(o.path) == o.sha256;
        if (!same) ++mismatches;
        out << (same ? "match    " : "MISMATCH ") << o.path << "\n";
      }
      return mismatches == 0 ? kExitOk : kExitFailure;
    });
  }

  const auto start = std::chrono::steady_clock::now();
  std::string subcommand;
  return guarded(err, [&] {
    CommandOutput c;
    if (app.got_subcommand("solve")) {
      subcommand = "solve";
      c = cmd_solve(solve_opt, out);
    } else if (app.got_subcommand("estimate")) {
      subcommand = "estimate";
      c = cmd_estimate(estimate_opt, out);
    } else if (app.got_subcommand("cap")) {
      subcommand = "cap";
      c = cmd_cap(cap_opt, out);
    } else if (app.got_subcommand("plan")) {
      subcommand = "plan";
      c = cmd_plan(plan_opt, out);
    } else if (app.got_subcommand("verify")) {
      subcommand = "verify";
      c = cmd_verify(verify_opt, out);
    } else {
      subcommand = "convergence";
      c = cmd_convergence(conv_opt, out);
    }
    if (c.manifest_path) {
      RunManifest m;
      m.subcommand = subcommand;
      m.args = args;
      m.config = c.config;
      m.seed = c.seed;
      m.tool_version = LCHS_VERSION;
      m.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      m.outputs = c.files.records();
      OutputSet manifest_file;
      manifest_file.write(*c.manifest_path, dump(to_json(m)));
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace lchs::cli
