#pragma once

#include "dirac/newton.hpp"

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace diracsim {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitInvariant = 4,
  kExitIo = 5,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { kImplicit, kGeodesic, kLimit };

struct Tolerances {
  double energy = 1e-6;        // relative drift of E over the run
  double constraint = 1e-8;    // |omega v| over the velocity scale
  double legendre = 1e-8;
  double dirac = 1e-7;
  double hamiltonian = 1e-8;   // |h(t) - h(0)| on normal extremals
  double speed = 1e-8;         // |F(t) - F(0)| on normal extremals
  double pontryagin = 1e-6;
  double limit = 1e-9;
};

// Values of the [scenario] table other than the name, already type-checked
// by the scenario's schema.
struct ScenarioParams {
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> vectors;
  std::map<std::string, std::vector<std::vector<double>>> matrices;
  std::map<std::string, std::string> strings;

  double scalar(const std::string& key, double fallback) const;
  std::vector<double> vector(const std::string& key, const std::vector<double>& fallback) const;
  bool has(const std::string& key) const;
};

struct Config {
  std::string source;
  std::string scenario;
  Family family = Family::kImplicit;
  ScenarioParams params;
  double T = 1.0;
  double dt = 1e-3;
  std::string method = "lagrangian";
  dirac::NewtonOptions newton;
  Tolerances tol;
  std::string csv;  // empty writes to stdout
};

Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

bool all_pass(const std::vector<CheckLine>& lines);
void print_checks(const std::vector<CheckLine>& lines, std::ostream& out);

// Subcommand bodies. They throw dirac::Error subclasses or ConfigError; the
// exit-code mapping lives in cli_main.
void command_run(const Config& cfg, std::ostream& out, std::ostream& log);
std::vector<CheckLine> command_check(const Config& cfg, std::ostream& log);
void command_geodesic(const Config& cfg, std::ostream& out, std::ostream& log);
std::vector<CheckLine> command_limit(const Config& cfg, std::ostream& out, std::ostream& log);
void command_report(const std::string& csv_path, std::ostream& out);

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace diracsim
