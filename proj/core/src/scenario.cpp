#include "crflow/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crflow/csv.hpp"
#include "crflow/errors.hpp"
#include "crflow/expression.hpp"
#include "crflow/random.hpp"

namespace crflow {

namespace {

using ojson = nlohmann::ordered_json;

std::size_t nearest_node(const ManifoldModel& m, const PolarPoint& p) {
  auto wrap = [](long v, long n) { return static_cast<int>(((v % n) + n) % n); };
  const long i = std::lround(p.x * m.nx());
  const long j = std::lround(p.y * m.ny());
  const long k = std::lround(p.t / m.hs());
  return m.index(wrap(i, m.nx()), wrap(j, m.ny()), wrap(k, m.ns()));
}

ojson num_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson diagnostics_json(const FlowDiagnostics& d) {
  ojson j;
  j["t"] = d.t;
  j["lambda"] = d.lambda;
  j["energy"] = d.energy;
  j["dissipation"] = d.dissipation;
  j["volume"] = d.volume;
  j["F2"] = d.F2;
  j["F4"] = d.F4;
  j["min_R_minus_lambda_f"] = d.min_R_minus_lambda_f;
  j["gamma_proxy"] = d.gamma_proxy;
  j["Lambda0"] = d.Lambda0;
  j["Lambda1"] = d.Lambda1;
  j["F2_max"] = d.F2_max;
  j["min_u"] = d.min_u;
  j["max_u"] = d.max_u;
  j["sobolev_norm_u"] = d.sobolev_norm_u;
  j["constraint"] = d.constraint;
  return j;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelPtr build_model(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.sign == YamabeSign::zero) return make_model(cfg.grid);
  const auto R0e = Expression::parse(cfg.R0);
  auto probe = make_model(cfg.grid);
  auto R0 = sample(probe, R0e);
  if (!(R0.min() > 0.0)) throw ConfigError("R0 must be positive at every node in positive mode");
  return make_model(cfg.grid, YamabeSign::positive, R0.values);
}

PreparedRun prepare_run(const RunConfig& cfg) {
  PreparedRun pr;
  pr.model = build_model(cfg);
  const ManifoldModel& m = *pr.model;
  ScalarField f = sample(pr.model, Expression::parse(cfg.f));
  pr.precheck.sup_f = f.max();
  pr.precheck.int_f = integrate(m, f);
  if (cfg.scenario == "main2") {
    pr.precheck.passed = pr.precheck.sup_f > 0.0 && pr.precheck.int_f < 0.0;
    if (!pr.precheck.passed)
      throw DomainError("main2 precondition failed: need sup f > 0 and int f dv < 0 (sup f = " +
                        format_number(pr.precheck.sup_f) + ", int f = " + format_number(pr.precheck.int_f) + ")");
  }
  if (!(pr.precheck.sup_f > 0.0)) throw DomainError("sup f must be positive");

  ScalarField u0(pr.model, 1.0);
  switch (cfg.initial) {
    case InitialMode::constant:
      u0 = ScalarField(pr.model, cfg.u0_value > 0.0 ? cfg.u0_value : 1.0);
      break;
    case InitialMode::bubble: {
      const double eps0 = cfg.eps0 > 0.0 ? cfg.eps0 : 4.0 * m.min_spacing();
      std::optional<std::size_t> a0;
      if (cfg.a0) a0 = nearest_node(m, *cfg.a0);
      pr.bubble = initial_data(pr.model, f, a0, eps0, cfg.delta);
      u0 = pr.bubble->state.u;
      break;
    }
    case InitialMode::file: {
      std::stringstream ss(read_file(cfg.u0_file));
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      if (v.size() != m.size()) throw ShapeError("u0_file: expected " + std::to_string(m.size()) + " values");
      u0 = ScalarField(pr.model, std::move(v));
      break;
    }
  }
  if (cfg.noise > 0.0) {
    Rng rng(cfg.seed);
    for (double& v : u0.values) v *= 1.0 + cfg.noise * (2.0 * rng.uniform() - 1.0);
  }
  if (!(integrate_wrt(m, f, u0) > 0.0))
    throw InfeasibleError("initial data: int f u0^4 dv must be positive (constant data is infeasible when int f <= 0)");
  u0 = normalize_constraint(m, u0, f);
  pr.initial = make_state(pr.model, std::move(u0), std::move(f));

  RunOptions& o = pr.options;
  o.c_cfl = cfg.c_cfl;
  o.T_max = cfg.T_max;
  o.max_steps = cfg.max_steps;
  o.tol_converged = cfg.tol_converged;
  o.tol_eps = cfg.tol_eps;
  o.tol_fit = cfg.tol_fit;
  o.sample_interval = cfg.sample_interval;
  o.fit_every_samples = cfg.fit_every;
  o.fit_delta = pr.bubble ? pr.bubble->delta : 0.0;
  return pr;
}

ScenarioResult run_scenario(const RunConfig& cfg, const StepObserver& observer) {
  ScenarioResult sr;
  sr.prepared = prepare_run(cfg);
  const auto& pr = sr.prepared;
  sr.result = run(pr.initial, pr.options, observer);
  sr.csv = flow_csv(sr.result.samples);

  const FlowState& fin = sr.result.final_state;
  ojson j;
  j["scenario"] = cfg.scenario.empty() ? "custom" : cfg.scenario;
  j["classification"] = to_string(sr.result.classification);
  j["message"] = sr.result.message;
  j["steps"] = sr.result.steps;
  j["t_final"] = fin.t;
  j["seed"] = cfg.seed;
  j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"ns", cfg.grid.ns}, {"K", cfg.grid.period_divisor}};
  j["yamabe_sign"] = to_string(cfg.sign);
  j["f"] = cfg.f;
  j["precheck"] = {{"sup_f", pr.precheck.sup_f}, {"int_f", pr.precheck.int_f}, {"passed", pr.precheck.passed}};
  ojson init;
  init["mode"] = to_string(cfg.initial);
  if (pr.bubble) {
    const auto& b = *pr.bubble;
    const auto c = pr.model->coords(b.center);
    init["center"] = {c.x, c.y, c.t};
    init["alpha0"] = b.alpha0;
    init["eps0"] = b.eps0;
    init["delta"] = b.delta;
    init["Lambda"] = b.Lambda;
    init["energy"] = b.energy;
    init["lambda_star"] = b.lambda_star;
    init["energy_gate"] = b.gate;
  }
  init["noise"] = cfg.noise;
  j["initial"] = init;
  j["final"] = diagnostics_json(sr.result.samples.back().diag);
  const auto nec = necessity_identities(fin);
  j["necessity"] = {{"pde_residual", nec.pde_residual},
                    {"int_f_u3", nec.int_f_u3},
                    {"int_f_u3_scale", nec.int_f_u3_scale},
                    {"lambda_int_f", nec.lambda_int_f},
                    {"gradient_term", nec.gradient_term},
                    {"identity_rel_error", num_or_null(nec.identity_rel_error)}};
  const auto& last = sr.result.samples.back().fit;
  if (last.ok) {
    j["fit"] = {{"alpha", last.alpha}, {"eps", last.eps},           {"a", {last.a_x, last.a_y, last.a_s}},
                {"relative_objective", last.residual}, {"zeta", num_or_null(last.zeta)}};
    if (sr.result.classification == Classification::concentrating) {
      const double fa = Expression::parse(cfg.f)(last.a_x, last.a_y, last.a_s);
      j["lambda_infty_estimate"] = num_or_null(fa > 0.0 ? lambda_star(fa) : NAN);
      j["lambda_final"] = fin.lambda;
    }
  }
  j["empirical_proxies"] = {"Lambda0", "Lambda1", "F2_max", "gamma_proxy"};
  j["provenance"] = {{"energy", "flow: int R u^4 dv"},
                     {"F2", "flow: int (R - lambda f)^2 u^4 dv"},
                     {"necessity", "flow: stationarity identities at the final state"},
                     {"lambda_star", "bubbles: 4 (sup f)^(-1/2) / K_1"},
                     {"Lambda0", "empirical proxy: running max |lambda|"},
                     {"Lambda1", "empirical proxy: running max |lambda'| by finite differences"},
                     {"F2_max", "empirical proxy: running max F2"},
                     {"gamma_proxy", "empirical proxy: gamma bound evaluated with the running maxima"}};
  sr.summary_json = j.dump(2) + "\n";
  return sr;
}

std::string snapshot_to_json(const FlowState& s) {
  const auto& m = *s.model;
  ojson j;
  j["grid"] = {{"nx", m.nx()}, {"ny", m.ny()}, {"ns", m.ns()}, {"K", m.grid().period_divisor}};
  j["yamabe_sign"] = to_string(m.yamabe_sign());
  if (!m.flat()) j["R0"] = m.R0();
  j["t"] = s.t;
  j["f"] = s.f.values;
  j["u"] = s.u.values;
  return j.dump() + "\n";
}

FlowState snapshot_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    GridSpec g;
    g.nx = j.at("grid").at("nx").get<int>();
    g.ny = j.at("grid").at("ny").get<int>();
    g.ns = j.at("grid").at("ns").get<int>();
    g.period_divisor = j.at("grid").at("K").get<int>();
    const auto v = grid_violations(g);
    if (!v.empty()) throw ConfigError("snapshot: " + v.front());
    const std::string sign = j.value("yamabe_sign", std::string("zero"));
    ModelPtr model = sign == "positive"
                         ? make_model(g, YamabeSign::positive, j.at("R0").get<std::vector<double>>())
                         : make_model(g);
    auto u = j.at("u").get<std::vector<double>>();
    auto f = j.at("f").get<std::vector<double>>();
    if (u.size() != model->size() || f.size() != model->size()) throw ShapeError("snapshot: field size mismatch");
    return make_state(model, ScalarField(model, std::move(u)), ScalarField(model, std::move(f)),
                      j.value("t", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
}

std::string bubble_fit_to_json(const BubbleFit& fit, const FlowState& state) {
  const auto c = state.model->coords(fit.center);
  ojson j;
  j["ok"] = fit.ok;
  j["alpha"] = fit.alpha;
  j["eps"] = fit.eps;
  j["center"] = {c.x, c.y, c.t};
  j["center_index"] = fit.center;
  j["delta"] = fit.delta;
  j["objective"] = fit.objective;
  j["relative_objective"] = fit.relative_objective;
  j["residual_norm"] = fit.residual_norm;
  j["membership_eps"] = fit.membership_eps;
  j["membership_alpha"] = fit.membership_alpha;
  j["in_D_u"] = fit.in_D_u;
  j["ambiguous"] = fit.ambiguous;
  j["evaluations"] = fit.evaluations;
  return j.dump(2) + "\n";
}

}  // namespace crflow
