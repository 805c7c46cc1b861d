#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "crflow/bubbles.hpp"
#include "crflow/config.hpp"
#include "crflow/csv.hpp"
#include "crflow/errors.hpp"
#include "crflow/quadrature.hpp"
#include "crflow/scenario.hpp"
#include "crflow/shadow.hpp"

using namespace crflow;
namespace fs = std::filesystem;

namespace {

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("landscape parameter '" + item + "' is not key=value");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("landscape parameter '" + item + "' has a bad value");
    }
  }
  return out;
}

Landscape make_landscape(const std::string& kind, const std::string& params) {
  auto p = parse_params(params);
  auto get = [&](const char* k, double def) {
    auto it = p.find(k);
    if (it == p.end()) return def;
    const double v = it->second;
    p.erase(it);
    return v;
  };
  Landscape l;
  if (kind == "constant") l = constant_landscape(get("value", 1.0));
  else if (kind == "linear") l = linear_landscape(get("base", 1.0), get("gx", 0.1), get("gy", 0.0));
  else if (kind == "peak")
    l = peak_landscape(get("base", 0.5), get("height", 0.5), get("width", 0.4), get("x0", 0.0), get("y0", 0.0));
  else if (kind == "quadratic")
    l = quadratic_landscape(get("top", 1.0), get("kx", 1.0), get("ky", 1.0), get("x0", 0.0), get("y0", 0.0));
  else throw ConfigError("unknown landscape '" + kind + "' (constant, linear, peak, quadratic)");
  if (!p.empty()) throw ConfigError("unknown parameter '" + p.begin()->first + "' for landscape " + kind);
  return l;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else write_file(path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Webster scalar curvature flow lab"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "run the normalized flow from a config or scenario preset");
  std::string config_path, scenario, grid, out_dir = ".", snapshot_out;
  std::uint64_t seed = 0;
  double tol = 0.0;
  run_cmd->add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", scenario, "preset: main2 or yamabe");
  run_cmd->add_option("--grid", grid, "grid as NxxNyxNs, e.g. 32x32x32");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "rng seed");
  run_cmd->add_option("--tol", tol, "tol_converged on F2");
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--snapshot", snapshot_out, "write the final state as a JSON snapshot");

  // constants
  auto* const_cmd = app.add_subcommand("constants", "compute the Heisenberg constants table");
  int n = 1;
  double ctol = 1e-8;
  std::string const_out;
  const_cmd->add_option("--n", n, "CR dimension n (1..3)")->capture_default_str();
  const_cmd->add_option("--tol", ctol, "quadrature tolerance")->capture_default_str();
  const_cmd->add_option("--out", const_out, "output file (default stdout)");

  // shadow
  auto* shadow_cmd = app.add_subcommand("shadow", "integrate the reduced (eps, a) flow");
  std::string landscape = "peak", lparams, shadow_out, constants_file, a0_text = "0,0,0", c_values_text;
  double eps0 = 0.1, lambda = 1.0, mass = 0.1, T = 10.0, dt = 1e-2, eps_floor = 1e-4, eps_ceiling = 1.0;
  bool sweep = false;
  int sample_every = 1;
  shadow_cmd->add_option("--landscape", landscape, "constant, linear, peak or quadratic")->capture_default_str();
  shadow_cmd->add_option("--params", lparams, "landscape parameters, e.g. base=0.5,height=0.5,width=0.4");
  shadow_cmd->add_option("--eps0", eps0)->capture_default_str();
  shadow_cmd->add_option("--a0", a0_text, "initial center x,y,s")->capture_default_str();
  shadow_cmd->add_option("--lambda", lambda)->capture_default_str();
  shadow_cmd->add_option("--mass", mass, "A_a")->capture_default_str();
  shadow_cmd->add_option("--T", T)->capture_default_str();
  shadow_cmd->add_option("--dt", dt)->capture_default_str();
  shadow_cmd->add_option("--eps-floor", eps_floor)->capture_default_str();
  shadow_cmd->add_option("--eps-ceiling", eps_ceiling)->capture_default_str();
  shadow_cmd->add_option("--sample-every", sample_every)->capture_default_str();
  shadow_cmd->add_option("--constants", constants_file, "constants JSON from the constants subcommand");
  shadow_cmd->add_flag("--c-star-sweep", sweep, "sweep the mass over --c-star-values and emit one row each");
  shadow_cmd->add_option("--c-star-values", c_values_text, "comma separated values (default 0.001..0.1)");
  shadow_cmd->add_option("--out", shadow_out, "CSV output file (default stdout)");

  // bubble-fit
  auto* fit_cmd = app.add_subcommand("bubble-fit", "fit alpha phi_{a, eps} to a snapshot");
  std::string snap_in, fit_out;
  double delta = 0.0;
  int budget = 500;
  fit_cmd->add_option("--snapshot", snap_in, "snapshot JSON written by run --snapshot")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--delta", delta, "cutoff radius (0: default)");
  fit_cmd->add_option("--budget", budget, "objective evaluation budget")->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      std::string text;
      if (!scenario.empty()) text += "scenario = " + scenario + "\n";
      if (!config_path.empty()) text += read_file(config_path) + "\n";
      RunConfig cfg = parse_config(text);
      if (!grid.empty()) set_key(cfg, "grid", grid);
      if (*seed_opt) cfg.seed = seed;
      if (tol > 0.0) cfg.tol_converged = tol;
      validate(cfg);
      const auto sr = run_scenario(cfg);
      fs::create_directories(out_dir);
      write_file((fs::path(out_dir) / cfg.output).string(), sr.csv);
      write_file((fs::path(out_dir) / cfg.summary).string(), sr.summary_json);
      if (!snapshot_out.empty()) write_file(snapshot_out, snapshot_to_json(sr.result.final_state));
      std::cerr << "classification: " << to_string(sr.result.classification) << " after " << sr.result.steps
                << " steps\n";
    } else if (*const_cmd) {
      emit(const_out, constants_to_json(compute_constants(n, ctol)) + "\n");
    } else if (*shadow_cmd) {
      ShadowState s;
      s.landscape = std::make_shared<Landscape>(make_landscape(landscape, lparams));
      s.eps = eps0;
      s.lambda = lambda;
      s.mass = mass;
      s.ratios = (constants_file.empty() ? closed_form_constants_n1() : constants_from_json(read_file(constants_file)))
                     .ratios();
      {
        std::stringstream ss(a0_text);
        std::string item;
        std::vector<double> v;
        while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
        if (v.size() != 3) throw ConfigError("--a0 expects x,y,s");
        s.a = {v[0], v[1], v[2]};
      }
      ShadowOptions o;
      o.T = T;
      o.dt = dt;
      o.eps_floor = eps_floor;
      o.eps_ceiling = eps_ceiling;
      o.sample_every = sample_every;
      if (sweep) {
        std::vector<double> values;
        if (c_values_text.empty()) {
          for (int k = 0; k <= 4; ++k) values.push_back(0.001 * std::pow(10.0, 0.5 * k));
        } else {
          std::stringstream ss(c_values_text);
          std::string item;
          while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
        }
        const auto rows = c_star_sweep(s, values, o);
        std::string out = csv_header({"c_star", "threshold", "lap_over_f", "condition", "final_eps", "final_zeta",
                                      "stop", "zeta_nondecreasing"});
        for (const auto& r : rows) {
          out += format_number(r.c_star) + "," + format_number(r.threshold) + "," + format_number(r.lap_over_f) +
                 "," + (r.condition ? "1" : "0") + "," + format_number(r.final_eps) + "," +
                 format_number(r.final_zeta) + "," + to_string(r.stop) + "," + (r.zeta_nondecreasing ? "1" : "0") +
                 "\n";
        }
        emit(shadow_out, out);
      } else {
        emit(shadow_out, shadow_csv(integrate(s, o)));
      }
      std::cerr << "note: remainder terms of the reduced flow are dropped (leading order only)\n";
    } else if (*fit_cmd) {
      const FlowState st = snapshot_from_json(read_file(snap_in));
      FitOptions fo;
      fo.delta = delta;
      fo.budget = budget;
      emit(fit_out, bubble_fit_to_json(fit_bubble(st, std::nullopt, fo), st));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
