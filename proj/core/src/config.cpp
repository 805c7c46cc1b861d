#include "crflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crflow/csv.hpp"
#include "crflow/errors.hpp"
#include "crflow/expression.hpp"
#include "crflow/flow.hpp"

namespace crflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": cannot parse '" + v + "'");
  return out;
}

double num(const std::string& key, const std::string& v) { return parse_number<double>(key, v); }

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string to_string(InitialMode m) {
  switch (m) {
    case InitialMode::constant: return "constant";
    case InitialMode::bubble: return "bubble";
    case InitialMode::file: return "file";
  }
  return "unknown";
}

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, 'x')) parts.push_back(parse_number<int>("grid", trim(item)));
  if (parts.size() != 3) throw ConfigError("grid: expected NxxNyxNs, got '" + text + "'");
  g.nx = parts[0];
  g.ny = parts[1];
  g.ns = parts[2];
  return g;
}

RunConfig scenario_preset(const std::string& name) {
  RunConfig c;
  c.scenario = name;
  if (name == "main2") {
    c.grid = {32, 32, 32, 8};
    c.f = "0.25*(cos(2*pi*x) + cos(2*pi*y)) - 0.05";
    c.initial = InitialMode::bubble;
    c.eps0 = 0.125;
    c.delta = 0.15;
    c.c_cfl = 0.4;
    c.tol_converged = 1e-9;
    c.T_max = 400.0;
    c.sample_interval = 0.5;
  } else if (name == "yamabe") {
    c.grid = {16, 16, 16, 8};
    c.f = "1";
    c.initial = InitialMode::constant;
    c.T_max = 1.0;
  } else {
    throw ConfigError("scenario: unknown scenario '" + name + "' (expected main2 or yamabe)");
  }
  return c;
}

void set_key(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  if (key == "scenario") {
    c = scenario_preset(v);
  } else if (key == "grid") {
    const int K = c.grid.period_divisor;
    c.grid = parse_grid(v);
    c.grid.period_divisor = K;
  } else if (key == "nx") {
    c.grid.nx = parse_number<int>(key, v);
  } else if (key == "ny") {
    c.grid.ny = parse_number<int>(key, v);
  } else if (key == "ns") {
    c.grid.ns = parse_number<int>(key, v);
  } else if (key == "K") {
    c.grid.period_divisor = parse_number<int>(key, v);
  } else if (key == "yamabe_sign") {
    if (v == "zero") c.sign = YamabeSign::zero;
    else if (v == "positive") c.sign = YamabeSign::positive;
    else throw ConfigError("yamabe_sign: expected zero or positive");
  } else if (key == "R0") {
    c.R0 = v;
  } else if (key == "f") {
    c.f = v;
  } else if (key == "initial") {
    if (v == "constant") c.initial = InitialMode::constant;
    else if (v == "bubble") c.initial = InitialMode::bubble;
    else if (v == "file") c.initial = InitialMode::file;
    else throw ConfigError("initial: expected constant, bubble or file");
  } else if (key == "u0_value") {
    c.u0_value = num(key, v);
  } else if (key == "u0_file") {
    c.u0_file = v;
  } else if (key == "a0") {
    std::stringstream ss(v);
    std::string item;
    std::vector<double> p;
    while (std::getline(ss, item, ',')) p.push_back(num(key, trim(item)));
    if (p.size() != 3) throw ConfigError("a0: expected x, y, t");
    c.a0 = PolarPoint{p[0], p[1], p[2]};
  } else if (key == "eps0") {
    c.eps0 = num(key, v);
  } else if (key == "delta") {
    c.delta = num(key, v);
  } else if (key == "noise") {
    c.noise = num(key, v);
  } else if (key == "c_cfl") {
    c.c_cfl = num(key, v);
  } else if (key == "tol_converged") {
    c.tol_converged = num(key, v);
  } else if (key == "tol_eps") {
    c.tol_eps = num(key, v);
  } else if (key == "tol_fit") {
    c.tol_fit = num(key, v);
  } else if (key == "T_max") {
    c.T_max = num(key, v);
  } else if (key == "max_steps") {
    c.max_steps = parse_number<long>(key, v);
  } else if (key == "sample_interval") {
    c.sample_interval = num(key, v);
  } else if (key == "fit_every") {
    c.fit_every = parse_number<int>(key, v);
  } else if (key == "output") {
    c.output = v;
  } else if (key == "summary") {
    c.summary = v;
  } else if (key == "constants_file") {
    c.constants_file = v;
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, v);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::vector<std::string> errors;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    kv.emplace_back(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  RunConfig c;
  for (const auto& [k, v] : kv) {
    if (k != "scenario") continue;
    try {
      set_key(c, k, v);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  for (const auto& [k, v] : kv) {
    if (k == "scenario") continue;
    try {
      set_key(c, k, v);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  if (errors.empty()) {
    for (auto& e : config_violations(c)) errors.push_back(std::move(e));
  }
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> config_violations(const RunConfig& c) {
  std::vector<std::string> v = grid_violations(c.grid);
  auto positive = [&](const char* name, double x) {
    if (!(x > 0.0)) v.push_back(std::string(name) + " must be > 0");
  };
  positive("tol_converged", c.tol_converged);
  positive("tol_eps", c.tol_eps);
  positive("tol_fit", c.tol_fit);
  positive("T_max", c.T_max);
  positive("sample_interval", c.sample_interval);
  if (!(c.c_cfl > 0.0 && c.c_cfl <= kMaxCfl)) v.push_back("c_cfl must lie in (0, 0.5]");
  if (c.max_steps <= 0) v.push_back("max_steps must be > 0");
  if (c.fit_every < 0) v.push_back("fit_every must be >= 0");
  if (c.noise < 0.0 || c.noise >= 1.0) v.push_back("noise must lie in [0, 1)");
  if (c.u0_value < 0.0) v.push_back("u0_value must be >= 0");
  if (c.initial == InitialMode::file && c.u0_file.empty()) v.push_back("initial = file requires u0_file");
  const int K = c.grid.period_divisor > 0 ? c.grid.period_divisor : 1;
  auto check_expr = [&](const char* name, const std::string& text) {
    try {
      const auto e = Expression::parse(text);
      const double m = gluing_mismatch(e, K, c.seed + 1);
      if (!(m <= 1e-9))
        v.push_back(std::string(name) + " is not compatible with the gluing (mismatch " + format_number(m) + ")");
    } catch (const ConfigError& err) {
      v.push_back(std::string(name) + ": " + err.what());
    }
  };
  check_expr("f", c.f);
  if (c.sign == YamabeSign::positive) check_expr("R0", c.R0);
  if (c.delta < 0.0) v.push_back("delta must be >= 0");
  if (c.eps0 < 0.0) v.push_back("eps0 must be >= 0");
  if (grid_violations(c.grid).empty()) {
    const double h = std::min(1.0 / c.grid.nx, 1.0 / c.grid.ny);
    if (c.initial == InitialMode::bubble && c.eps0 > 0.0 && c.eps0 < 4.0 * h * (1.0 - 1e-12))
      v.push_back("eps0 must be at least 4 grid spacings");
    const double inj = std::min(0.5, std::sqrt(2.0 / c.grid.period_divisor));
    if (c.delta >= inj) v.push_back("delta must be below the injectivity radius");
  }
  return v;
}

void validate(const RunConfig& c) {
  const auto v = config_violations(c);
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : v) msg += "\n  - " + e;
  throw ConfigError(msg);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  if (!c.scenario.empty()) o << "scenario = " << c.scenario << "\n";
  o << "nx = " << c.grid.nx << "\n";
  o << "ny = " << c.grid.ny << "\n";
  o << "ns = " << c.grid.ns << "\n";
  o << "K = " << c.grid.period_divisor << "\n";
  o << "yamabe_sign = " << to_string(c.sign) << "\n";
  o << "R0 = " << quoted(c.R0) << "\n";
  o << "f = " << quoted(c.f) << "\n";
  o << "initial = " << to_string(c.initial) << "\n";
  o << "u0_value = " << format_number(c.u0_value) << "\n";
  if (!c.u0_file.empty()) o << "u0_file = " << quoted(c.u0_file) << "\n";
  if (c.a0)
    o << "a0 = " << format_number(c.a0->x) << ", " << format_number(c.a0->y) << ", " << format_number(c.a0->t)
      << "\n";
  o << "eps0 = " << format_number(c.eps0) << "\n";
  o << "delta = " << format_number(c.delta) << "\n";
  o << "noise = " << format_number(c.noise) << "\n";
  o << "c_cfl = " << format_number(c.c_cfl) << "\n";
  o << "tol_converged = " << format_number(c.tol_converged) << "\n";
  o << "tol_eps = " << format_number(c.tol_eps) << "\n";
  o << "tol_fit = " << format_number(c.tol_fit) << "\n";
  o << "T_max = " << format_number(c.T_max) << "\n";
  o << "max_steps = " << c.max_steps << "\n";
  o << "sample_interval = " << format_number(c.sample_interval) << "\n";
  o << "fit_every = " << c.fit_every << "\n";
  o << "output = " << quoted(c.output) << "\n";
  o << "summary = " << quoted(c.summary) << "\n";
  if (!c.constants_file.empty()) o << "constants_file = " << quoted(c.constants_file) << "\n";
  o << "seed = " << c.seed << "\n";
  return o.str();
}

}  // namespace crflow
