#include "diracsim.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace diracsim {

namespace {

enum class Kind { kScalar, kVector, kMatrix, kString };

struct ScenarioSchema {
  Family family;
  std::map<std::string, Kind> keys;
};

const std::map<std::string, ScenarioSchema>& schemas() {
  static const std::map<std::string, ScenarioSchema> table{
      {"lc",
       {Family::kImplicit,
        {{"inductance", Kind::kVector}, {"capacitance", Kind::kVector}, {"kcl", Kind::kMatrix},
         {"q0", Kind::kVector}, {"v0", Kind::kVector}}}},
      {"rope",
       {Family::kImplicit,
        {{"nodes", Kind::kScalar}, {"g", Kind::kScalar}, {"density", Kind::kString}, {"sag", Kind::kScalar}}}},
      {"heisenberg_particle",
       {Family::kImplicit, {{"kx", Kind::kScalar}, {"ky", Kind::kScalar}, {"x0", Kind::kVector}, {"v0", Kind::kVector}}}},
      {"heisenberg_geodesic",
       {Family::kGeodesic, {{"metric", Kind::kMatrix}, {"x0", Kind::kVector}, {"p0", Kind::kVector}}}},
      {"randers_geodesic",
       {Family::kGeodesic,
        {{"wind", Kind::kScalar}, {"metric", Kind::kMatrix}, {"xi", Kind::kVector}, {"x0", Kind::kVector},
         {"p0", Kind::kVector}}}},
      {"limit",
       {Family::kLimit,
        {{"family", Kind::kString}, {"max_level", Kind::kScalar}, {"level", Kind::kScalar},
         {"level_prime", Kind::kScalar}, {"nodes", Kind::kScalar}, {"kappa", Kind::kScalar},
         {"x0", Kind::kVector}, {"v0", Kind::kVector}}}},
  };
  return table;
}

std::string where(const toml::node& n, const std::string& key) {
  std::ostringstream os;
  os << key << " (line " << n.source().begin.line << ")";
  return os.str();
}

double number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) {
    if (!std::isfinite(*v)) throw ConfigError(where(n, key) + ": must be finite");
    return *v;
  }
  throw ConfigError(where(n, key) + ": expected a number");
}

std::vector<double> numbers(const toml::node& n, const std::string& key) {
  const toml::array* arr = n.as_array();
  if (!arr) throw ConfigError(where(n, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const toml::node& e : *arr) out.push_back(number(e, key));
  return out;
}

void reject_unknown(const toml::table& t, const std::string& table, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : t) {
    bool ok = false;
    for (const char* name : known) ok = ok || k.str() == name;
    if (!ok) throw ConfigError("unknown key [" + table + "]." + std::string(k.str()));
  }
}

void read_scenario(const toml::table& t, Config& cfg) {
  const auto name = t["name"].value<std::string>();
  if (!name) throw ConfigError("[scenario].name is required");
  const auto it = schemas().find(*name);
  if (it == schemas().end()) throw ConfigError("unknown scenario '" + *name + "'");
  cfg.scenario = *name;
  cfg.family = it->second.family;
  for (const auto& [k, node] : t) {
    const std::string key(k.str());
    if (key == "name") continue;
    const auto kind = it->second.keys.find(key);
    if (kind == it->second.keys.end()) throw ConfigError("unknown key [scenario]." + key + " for " + *name);
    switch (kind->second) {
      case Kind::kScalar:
        cfg.params.scalars[key] = number(node, key);
        break;
      case Kind::kVector:
        cfg.params.vectors[key] = numbers(node, key);
        break;
      case Kind::kMatrix: {
        const toml::array* rows = node.as_array();
        if (!rows) throw ConfigError(where(node, key) + ": expected an array of rows");
        std::vector<std::vector<double>> m;
        for (const toml::node& r : *rows) m.push_back(numbers(r, key));
        for (const auto& r : m) {
          if (r.size() != m.front().size()) throw ConfigError(where(node, key) + ": ragged matrix");
        }
        cfg.params.matrices[key] = std::move(m);
        break;
      }
      case Kind::kString: {
        const auto s = node.value<std::string>();
        if (!s) throw ConfigError(where(node, key) + ": expected a string");
        cfg.params.strings[key] = *s;
        break;
      }
    }
  }
}

void read_integrator(const toml::table& t, Config& cfg) {
  reject_unknown(t, "integrator",
                 {"T", "dt", "method", "newton_tol", "newton_max_iter", "energy_tol", "constraint_tol",
                  "legendre_tol", "dirac_tol", "hamiltonian_tol", "speed_tol", "pontryagin_tol", "limit_tol"});
  const auto opt = [&](const char* key, double& slot) {
    if (const toml::node* n = t.get(key)) slot = number(*n, key);
  };
  opt("T", cfg.T);
  opt("dt", cfg.dt);
  opt("newton_tol", cfg.newton.tol);
  opt("energy_tol", cfg.tol.energy);
  opt("constraint_tol", cfg.tol.constraint);
  opt("legendre_tol", cfg.tol.legendre);
  opt("dirac_tol", cfg.tol.dirac);
  opt("hamiltonian_tol", cfg.tol.hamiltonian);
  opt("speed_tol", cfg.tol.speed);
  opt("pontryagin_tol", cfg.tol.pontryagin);
  opt("limit_tol", cfg.tol.limit);
  if (const toml::node* n = t.get("newton_max_iter")) {
    const auto v = n->value<int64_t>();
    if (!v || *v < 1) throw ConfigError(where(*n, "newton_max_iter") + ": expected a positive integer");
    cfg.newton.max_iter = static_cast<int>(*v);
  }
  if (const toml::node* n = t.get("method")) {
    const auto m = n->value<std::string>();
    if (!m || (*m != "lagrangian" && *m != "hamiltonian")) {
      throw ConfigError(where(*n, "method") + ": expected \"lagrangian\" or \"hamiltonian\"");
    }
    cfg.method = *m;
  }
}

void validate(const Config& cfg) {
  if (!(cfg.T > 0.0)) throw ConfigError("[integrator].T must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("[integrator].dt must be positive");
  if (cfg.dt > cfg.T) throw ConfigError("[integrator].dt exceeds T");
  if (!(cfg.newton.tol > 0.0)) throw ConfigError("[integrator].newton_tol must be positive");
  for (double v : {cfg.tol.energy, cfg.tol.constraint, cfg.tol.legendre, cfg.tol.dirac, cfg.tol.hamiltonian,
                   cfg.tol.speed, cfg.tol.pontryagin, cfg.tol.limit}) {
    if (!(v > 0.0)) throw ConfigError("[integrator] tolerances must be positive");
  }
}

}  // namespace

double ScenarioParams::scalar(const std::string& key, double fallback) const {
  const auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

std::vector<double> ScenarioParams::vector(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = vectors.find(key);
  return it == vectors.end() ? fallback : it->second;
}

bool ScenarioParams::has(const std::string& key) const {
  return scalars.count(key) || vectors.count(key) || matrices.count(key) || strings.count(key);
}

Config parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  Config cfg;
  cfg.source = source;
  reject_unknown(root, "", {"scenario", "integrator", "output"});
  const toml::table* scenario = root["scenario"].as_table();
  if (!scenario) throw ConfigError("missing [scenario] table");
  read_scenario(*scenario, cfg);
  if (const toml::node* n = root.get("integrator")) {
    if (!n->as_table()) throw ConfigError("[integrator] must be a table");
    read_integrator(*n->as_table(), cfg);
  }
  if (const toml::node* n = root.get("output")) {
    const toml::table* out = n->as_table();
    if (!out) throw ConfigError("[output] must be a table");
    reject_unknown(*out, "output", {"csv"});
    if (const toml::node* c = out->get("csv")) {
      const auto s = c->value<std::string>();
      if (!s) throw ConfigError(where(*c, "csv") + ": expected a path string");
      cfg.csv = *s;
    }
  }
  validate(cfg);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw dirac::IoError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace diracsim
