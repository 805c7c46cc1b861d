#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crflow/manifold.hpp"

namespace crflow {

enum class InitialMode { constant, bubble, file };

std::string to_string(InitialMode m);

// Flat key = value run configuration. Keys are listed in docs/config.md.
struct RunConfig {
  std::string scenario;
  GridSpec grid;
  YamabeSign sign = YamabeSign::zero;
  std::string R0 = "1";
  std::string f = "1";
  InitialMode initial = InitialMode::constant;
  double u0_value = 0.0;  // 0: normalized constant
  std::string u0_file;
  std::optional<PolarPoint> a0;  // default: grid argmax of f
  double eps0 = 0.0;             // 0: four grid spacings
  double delta = 0.0;            // 0: model default
  double noise = 0.0;            // relative multiplicative noise on u0
  double c_cfl = 0.2;
  double tol_converged = 1e-8;
  double tol_eps = 1e-2;
  double tol_fit = 0.05;
  double T_max = 100.0;
  long max_steps = 10'000'000;
  double sample_interval = 0.5;
  int fit_every = 0;
  std::string output = "flow.csv";
  std::string summary = "summary.json";
  std::string constants_file;
  std::uint64_t seed = 0;
};

// Starts from the preset when a scenario key is present, then applies the
// remaining keys. Throws ConfigError listing every problem found.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

RunConfig scenario_preset(const std::string& name);
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
GridSpec parse_grid(const std::string& text);

// Empty when the configuration is valid.
std::vector<std::string> config_violations(const RunConfig& cfg);
void validate(const RunConfig& cfg);

// Canonical key = value rendering (round-trips through parse_config).
std::string to_text(const RunConfig& cfg);

}  // namespace crflow
