#include "diracsim.hpp"

#include "dirac/scenarios.hpp"
#include "dirac/trajectory_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace diracsim {

using dirac::Mat;
using dirac::Vec;

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Mat to_mat(const std::vector<std::vector<double>>& rows, int cols) {
  Mat m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != cols) throw ConfigError("matrix row has the wrong length");
    for (int c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return m;
}

int integer(const ScenarioParams& p, const std::string& key, int fallback) {
  const double v = p.scalar(key, fallback);
  if (v != std::floor(v) || std::abs(v) > 1e6) throw ConfigError("[scenario]." + key + " must be an integer");
  return static_cast<int>(v);
}

Vec sized(const ScenarioParams& p, const std::string& key, const Vec& fallback) {
  if (!p.has(key)) return fallback;
  const Vec v = to_vec(p.vector(key, {}));
  if (v.size() != fallback.size()) {
    throw ConfigError("[scenario]." + key + " must have " + std::to_string(fallback.size()) + " entries");
  }
  return v;
}

Mat metric_of(const ScenarioParams& p, int k) {
  const auto it = p.matrices.find("metric");
  if (it == p.matrices.end()) return Mat::Identity(k, k);
  if (static_cast<int>(it->second.size()) != k) throw ConfigError("[scenario].metric must be " + std::to_string(k) + "x" + std::to_string(k));
  return to_mat(it->second, k);
}

// Builder rejections of user-supplied data are configuration errors.
template <class F>
auto building(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const dirac::InvariantError& e) {
    throw ConfigError(e.what());
  } catch (const dirac::ArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const dirac::DimensionError& e) {
    throw ConfigError(e.what());
  }
}

struct ImplicitSetup {
  dirac::MechanicalSystem sys;
  dirac::MechState init;
};

ImplicitSetup implicit_setup(const Config& cfg) {
  const ScenarioParams& p = cfg.params;
  if (cfg.scenario == "lc") {
    dirac::LcNetlist net;
    net.inductance = to_vec(p.vector("inductance", {1.0}));
    const int n = static_cast<int>(net.inductance.size());
    net.capacitance = sized(p, "capacitance", Vec::Ones(n));
    const auto kcl = p.matrices.find("kcl");
    net.kcl = kcl == p.matrices.end() ? Mat(0, n) : to_mat(kcl->second, n);
    Vec q0 = Vec::Zero(n);
    q0[0] = 1.0;
    dirac::MechState init;
    init.x = sized(p, "q0", q0);
    init.v = sized(p, "v0", Vec::Zero(n));
    return {building([&] { return dirac::build_lc_circuit(net); }), init};
  }
  if (cfg.scenario == "rope") {
    const int nodes = integer(p, "nodes", 16);
    const std::string density = p.strings.count("density") ? p.strings.at("density") : "default";
    dirac::DensityFn rho;
    if (density == "default") {
      rho = dirac::rope_default_density;
    } else if (density == "uniform") {
      rho = [](double) { return 1.0; };
    } else {
      throw ConfigError("[scenario].density must be \"default\" or \"uniform\"");
    }
    const double g = p.scalar("g", 9.81);
    return building([&] {
      return ImplicitSetup{dirac::build_heavy_rope(nodes, rho, g), dirac::rope_initial_state(nodes, p.scalar("sag", 0.25))};
    });
  }
  // heisenberg_particle
  dirac::MechState init;
  init.x = sized(p, "x0", Vec{{1.0, 0.0, 0.0}});
  init.v = sized(p, "v0", Vec{{0.3, 1.0, 0.5}});
  return {building([&] { return dirac::build_heisenberg_particle(p.scalar("kx", 1.0), p.scalar("ky", 4.0)); }), init};
}

dirac::Trajectory run_implicit(const Config& cfg, const ImplicitSetup& s) {
  if (cfg.method == "hamiltonian") {
    const Vec p0 = dirac::legendre(s.sys.lm, s.init.x, s.init.v);
    return dirac::integrate_implicit_hamiltonian(s.sys.lm, s.sys.cd, s.init.x, p0, cfg.T, cfg.dt, cfg.newton);
  }
  return dirac::integrate_implicit_lagrangian(s.sys.lm, s.sys.cd, s.init, cfg.T, cfg.dt, cfg.newton);
}

struct GeodesicSetup {
  dirac::ConicFinslerStructure fs;
  Vec x0;
  Vec p0;
};

GeodesicSetup geodesic_setup(const Config& cfg) {
  const ScenarioParams& p = cfg.params;
  if (cfg.scenario == "heisenberg_geodesic") {
    const dirac::FrameField frame = dirac::heisenberg_frame();
    const Mat g = metric_of(p, 2);
    return building([&] {
      dirac::AnchoredBundle bundle(3, 2, frame.frame);
      bundle.with_derivative(frame.derivative);
      return GeodesicSetup{dirac::ConicFinslerStructure::riemannian(std::move(bundle), g),
                           sized(p, "x0", Vec::Zero(3)), sized(p, "p0", Vec{{1.0, 0.0, 1.0}})};
    });
  }
  // randers_geodesic
  if (p.has("wind") && (p.has("xi") || p.has("metric"))) {
    throw ConfigError("[scenario].wind cannot be combined with metric or xi");
  }
  if (!p.has("wind") && !p.has("xi")) throw ConfigError("randers_geodesic needs either wind or xi");
  return building([&] {
    dirac::ConicFinslerStructure fs = p.has("wind") ? dirac::randers_plane(p.scalar("wind", 0.0))
                                                    : dirac::randers_constant(metric_of(p, 2), sized(p, "xi", Vec::Zero(2)));
    return GeodesicSetup{std::move(fs), sized(p, "x0", Vec::Zero(2)), sized(p, "p0", Vec{{1.0, 0.5}})};
  });
}

dirac::Trajectory run_geodesic(const Config& cfg, const GeodesicSetup& s) {
  dirac::FlowOptions opts;
  opts.newton = cfg.newton;
  return dirac::normal_geodesic(s.fs, s.x0, s.p0, cfg.T, cfg.dt, opts);
}

struct LimitSetup {
  dirac::AscendingFamily family;
  int level;
  int level_prime;
  dirac::MechState init;
};

LimitSetup limit_setup(const Config& cfg) {
  const ScenarioParams& p = cfg.params;
  const std::string name = p.strings.count("family") ? p.strings.at("family") : "";
  if (!p.has("level") || !p.has("level_prime")) throw ConfigError("limit scenarios need level and level_prime");
  const int level = integer(p, "level", 0);
  const int level_prime = integer(p, "level_prime", 0);
  const int max_level = integer(p, "max_level", level_prime);
  const int nodes = integer(p, "nodes", 8);
  dirac::AscendingFamily family = building([&] {
    if (name == "free") return dirac::free_family(max_level);
    if (name == "lc") return dirac::lc_family(max_level);
    if (name == "coupled_lc") return dirac::coupled_lc_family(max_level, p.scalar("kappa", 0.5));
    if (name == "rope") return dirac::rope_family(nodes, max_level);
    throw ConfigError("[scenario].family must be one of free, lc, coupled_lc, rope");
  });
  if (level < family.min_level() || level_prime <= level || level_prime > max_level) {
    throw ConfigError("need min_level <= level < level_prime <= max_level");
  }
  const int d = family.dim(level);
  Vec x0 = Vec::Ones(d);
  if (name == "rope") {
    x0.setZero();
    for (int j = 0; j <= nodes; ++j) x0[2 * j] = 0.05 * std::sin(M_PI * j / nodes);
  }
  dirac::MechState init;
  init.x = sized(p, "x0", x0);
  init.v = sized(p, "v0", Vec::Zero(d));
  return {std::move(family), level, level_prime, init};
}

void emit_csv(const dirac::Trajectory& traj, const Config& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.csv.empty() || cfg.csv == "-") {
    dirac::write_csv(traj, out);
    return;
  }
  dirac::write_csv_file(traj, cfg.csv);
  log << "wrote " << traj.size() << " rows to " << cfg.csv << '\n';
}

void log_warnings(const dirac::Trajectory& traj, std::ostream& log) {
  for (const std::string& w : traj.warnings) log << "warning: " << w << '\n';
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

CheckLine at_most(std::string name, double value, double tol) { return {std::move(name), value, tol, value <= tol}; }

std::vector<CheckLine> implicit_checks(const Config& cfg, const dirac::Trajectory& traj) {
  double vscale = 1.0;
  for (const dirac::MechState& s : traj.states) vscale = std::max(vscale, s.v.cwiseAbs().maxCoeff());
  return {at_most("energy_drift", dirac::relative_energy_drift(traj), cfg.tol.energy),
          at_most("constraint_residual", max_of(traj.constraint_residual) / vscale, cfg.tol.constraint),
          at_most("legendre_residual", max_of(traj.legendre_residual), cfg.tol.legendre),
          at_most("dirac_residual", max_of(traj.dirac_residual), cfg.tol.dirac)};
}

std::vector<CheckLine> geodesic_checks(const Config& cfg, const GeodesicSetup& s, const dirac::Trajectory& traj) {
  double h_drift = 0.0, f_drift = 0.0;
  const double f0 = s.fs.F(traj.states.front().x, traj.controls.front());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    h_drift = std::max(h_drift, std::abs(traj.energy[i] - traj.energy.front()));
    f_drift = std::max(f_drift, std::abs(s.fs.F(traj.states[i].x, traj.controls[i]) - f0));
  }
  double state = 0.0, costate = 0.0, stationarity = 0.0;
  for (const dirac::PontryaginRows& r : dirac::pontryagin_residual(s.fs.lagrangian(), traj, 1.0)) {
    state = std::max(state, r.state);
    costate = std::max(costate, r.costate);
    stationarity = std::max(stationarity, r.stationarity);
  }
  const double pT = traj.states.back().p.norm();
  return {at_most("h_drift", h_drift, cfg.tol.hamiltonian),
          at_most("speed_drift", f_drift, cfg.tol.speed),
          at_most("fibre_residual", max_of(traj.constraint_residual), cfg.tol.legendre),
          at_most("pontryagin_state", state, cfg.tol.pontryagin),
          at_most("pontryagin_costate", costate, cfg.tol.pontryagin),
          at_most("pontryagin_stationarity", stationarity, cfg.tol.pontryagin),
          {"final_costate_norm", pT, 1e-10, pT > 1e-10}};
}

void require_family(const Config& cfg, Family f, const char* command) {
  if (cfg.family != f) throw ConfigError(std::string("scenario '") + cfg.scenario + "' cannot be used with '" + command + "'");
}

}  // namespace

bool all_pass(const std::vector<CheckLine>& lines) {
  for (const CheckLine& l : lines) {
    if (!l.pass) return false;
  }
  return true;
}

void print_checks(const std::vector<CheckLine>& lines, std::ostream& out) {
  for (const CheckLine& l : lines) {
    out << l.name << ' ' << dirac::format_number(l.value) << ' ' << dirac::format_number(l.tol) << ' '
        << (l.pass ? "PASS" : "FAIL") << '\n';
  }
}

void command_run(const Config& cfg, std::ostream& out, std::ostream& log) {
  switch (cfg.family) {
    case Family::kImplicit: {
      const dirac::Trajectory traj = run_implicit(cfg, implicit_setup(cfg));
      log_warnings(traj, log);
      emit_csv(traj, cfg, out, log);
      break;
    }
    case Family::kGeodesic:
      emit_csv(run_geodesic(cfg, geodesic_setup(cfg)), cfg, out, log);
      break;
    case Family::kLimit: {
      const LimitSetup s = limit_setup(cfg);
      const dirac::Trajectory traj = dirac::integrate_at_level(s.family, s.level, s.init, cfg.T, cfg.dt, cfg.newton);
      log_warnings(traj, log);
      emit_csv(traj, cfg, out, log);
      break;
    }
  }
}

std::vector<CheckLine> command_check(const Config& cfg, std::ostream& log) {
  switch (cfg.family) {
    case Family::kImplicit: {
      const dirac::Trajectory traj = run_implicit(cfg, implicit_setup(cfg));
      log_warnings(traj, log);
      return implicit_checks(cfg, traj);
    }
    case Family::kGeodesic: {
      const GeodesicSetup s = geodesic_setup(cfg);
      return geodesic_checks(cfg, s, run_geodesic(cfg, s));
    }
    case Family::kLimit:
      break;
  }
  std::ostringstream discard;
  return command_limit(cfg, discard, log);
}

void command_geodesic(const Config& cfg, std::ostream& out, std::ostream& log) {
  require_family(cfg, Family::kGeodesic, "geodesic");
  const GeodesicSetup s = geodesic_setup(cfg);
  const dirac::Trajectory traj = run_geodesic(cfg, s);
  log << "normal extremal: " << (traj.normal ? "yes" : "no") << ", F = "
      << dirac::format_number(s.fs.F(traj.states.front().x, traj.controls.front())) << '\n';
  emit_csv(traj, cfg, out, log);
}

std::vector<CheckLine> command_limit(const Config& cfg, std::ostream& out, std::ostream& log) {
  require_family(cfg, Family::kLimit, "limit");
  const LimitSetup s = limit_setup(cfg);
  const dirac::LimitReport rep = dirac::limit_consistency(s.family, s.init, s.level, s.level_prime, cfg.T, cfg.dt,
                                                          dirac::Execution::kParallel, cfg.tol.limit);
  log << s.family.name() << ": level " << rep.level << " against " << rep.level_prime << ", data stabilizes at "
      << rep.stabilization << '\n';
  if (!cfg.csv.empty() && cfg.csv != "-") {
    emit_csv(dirac::integrate_at_level(s.family, s.level_prime, s.init, cfg.T, cfg.dt, cfg.newton), cfg, out, log);
  }
  return {at_most("limit_gap", rep.gap, cfg.tol.limit)};
}

void command_report(const std::string& csv_path, std::ostream& out) {
  const dirac::CsvTable table = dirac::read_csv_file(csv_path);
  const auto col = [&](const std::string& name) {
    const int c = table.column(name);
    if (c < 0) throw dirac::IoError(csv_path + ": missing column " + name);
    return static_cast<std::size_t>(c);
  };
  const std::size_t t = col("t"), e = col("E"), r = col("constraint_residual");
  if (table.rows.empty()) throw dirac::IoError(csv_path + ": no data rows");
  const double e0 = table.rows.front()[e];
  double drift = 0.0, residual = 0.0, lambda = 0.0, h_drift = 0.0;
  const int h = table.column("h");
  for (const auto& row : table.rows) {
    drift = std::max(drift, std::abs(row[e] - e0));
    residual = std::max(residual, row[r]);
    if (h >= 0) h_drift = std::max(h_drift, std::abs(row[static_cast<std::size_t>(h)] - table.rows.front()[static_cast<std::size_t>(h)]));
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c].rfind("lambda", 0) == 0) lambda = std::max(lambda, std::abs(row[c]));
    }
  }
  const auto line = [&](const char* name, double v) { out << name << ' ' << dirac::format_number(v) << '\n'; };
  line("rows", static_cast<double>(table.rows.size()));
  line("t_start", table.rows.front()[t]);
  line("t_end", table.rows.back()[t]);
  line("energy_start", e0);
  line("energy_drift_abs", drift);
  line("energy_drift_rel", e0 != 0.0 ? drift / std::abs(e0) : drift);
  line("constraint_residual_max", residual);
  line("lambda_max_abs", lambda);
  if (h >= 0) line("h_drift_abs", h_drift);
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integrate constrained mechanical systems and geodesic flows", "diracsim"};
  app.require_subcommand(1, 1);
  std::string config_path, output;

  CLI::App* run = app.add_subcommand("run", "Integrate a scenario and write its trajectory as CSV");
  CLI::App* check = app.add_subcommand("check", "Integrate a scenario and test its invariants");
  CLI::App* geodesic = app.add_subcommand("geodesic", "Integrate a normal geodesic and write it as CSV");
  CLI::App* limit = app.add_subcommand("limit", "Compare a level run with a higher level of its family");
  limit->footer("With an output path, the higher-level trajectory is written as CSV.");
  CLI::App* report = app.add_subcommand("report", "Summarize a trajectory CSV");
  for (CLI::App* sub : {run, check, geodesic, limit}) {
    sub->add_option("config", config_path, "TOML scenario file")->required();
  }
  for (CLI::App* sub : {run, geodesic, limit}) {
    sub->add_option("-o,--output", output, "CSV path; overrides [output].csv, '-' for stdout");
  }
  std::string csv_path;
  report->add_option("csv", csv_path, "Trajectory CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (report->parsed()) {
      command_report(csv_path, out);
      return kExitOk;
    }
    Config cfg = load_config(config_path);
    if (!output.empty()) cfg.csv = output;
    if (run->parsed()) {
      command_run(cfg, out, err);
      return kExitOk;
    }
    if (geodesic->parsed()) {
      command_geodesic(cfg, out, err);
      return kExitOk;
    }
    const std::vector<CheckLine> lines = check->parsed() ? command_check(cfg, err) : command_limit(cfg, out, err);
    print_checks(lines, out);
    return all_pass(lines) ? kExitOk : kExitInvariant;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dirac::IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const dirac::SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const dirac::DomainError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const dirac::InvariantError& e) {
    err << "invariant failure: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const dirac::Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace diracsim
