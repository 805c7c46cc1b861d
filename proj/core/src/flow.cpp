#include "crflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crflow/bubbles.hpp"
#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"

namespace crflow {

namespace {

using Acc = long double;

void check_positive(const ScalarField& u, const char* what) {
  for (double v : u.values)
    if (!(v > 0.0)) throw DomainError(std::string(what) + ": conformal factor must be positive");
}

double sup_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ScalarField webster_scalar(const ManifoldModel& model, const ScalarField& u) {
  check_positive(u, "webster_scalar");
  ScalarField L = sublaplacian(model, u);
  const auto& R0 = model.R0();
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double un = u[n];
    L[n] = (-4.0 * L[n] + R0[n] * un) / (un * un * un);
  }
  return L;
}

ScalarField webster_scalar(const FlowState& state) { return webster_scalar(*state.model, state.u); }

double lambda_of(const ManifoldModel& model, const ScalarField& u, const ScalarField& f, const ScalarField& R) {
  Acc num = 0, den = 0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double u2 = u[n] * u[n];
    const double w = u2 * u2;
    num += static_cast<Acc>(f[n] * R[n] * w);
    den += static_cast<Acc>(f[n] * f[n] * w);
  }
  if (!(den > 0)) throw DomainError("lambda_of: int f^2 dv_theta vanishes");
  (void)model;
  return static_cast<double>(num / den);
}

double lambda_of(const FlowState& state) {
  return lambda_of(*state.model, state.u, state.f, state.R);
}

FlowState make_state(const ModelPtr& model, ScalarField u, ScalarField f, double t) {
  if (u.size() != model->size() || f.size() != model->size())
    throw ShapeError("make_state: field length does not match model");
  FlowState s;
  s.model = model;
  s.u = std::move(u);
  s.f = std::move(f);
  s.u.model = model;
  s.f.model = model;
  s.t = t;
  s.R = webster_scalar(*model, s.u);
  s.lambda = lambda_of(*model, s.u, s.f, s.R);
  return s;
}

double constraint_value(const FlowState& state) {
  return integrate_wrt(*state.model, state.f, state.u);
}

ScalarField normalize_constraint(const ManifoldModel& model, const ScalarField& u, const ScalarField& f) {
  const double I = integrate_wrt(model, f, u);
  if (!(I > 0.0)) throw InfeasibleError("normalize_constraint: int f u^4 dv <= 0");
  const double beta = std::pow(I, -0.25);
  ScalarField out = u;
  for (auto& v : out.values) v *= beta;
  return out;
}

double stable_dt(const FlowState& state, double c_cfl) {
  if (!(c_cfl > 0.0) || c_cfl > kMaxCfl) throw DomainError("stable_dt: c_cfl must lie in (0, 0.5]");
  const double umin = state.u.min();
  if (!(umin > 0.0)) throw DomainError("stable_dt: u must be positive");
  const double h = state.model->min_spacing();
  return c_cfl * h * h * umin * umin / (4.0 * kKappaDelta);
}

FlowState step(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  const auto& model = *state.model;
  const std::size_t N = model.size();
  ScalarField u = state.u;
  const double lam = state.lambda;
  for (std::size_t n = 0; n < N; ++n) {
    u[n] -= 0.5 * (state.R[n] - lam * state.f[n]) * state.u[n] * dt;
    if (!(u[n] > 0.0)) throw StepSizeError("step: u <= 0 after update; reduce dt");
  }
  Acc I = 0;
  for (std::size_t n = 0; n < N; ++n) {
    const double u2 = u[n] * u[n];
    I += static_cast<Acc>(state.f[n] * u2 * u2);
  }
  I *= model.uniform_weight();
  if (!(I > 0)) throw InfeasibleError("step: int f u^4 dv <= 0 after the Euler update");
  const double beta = static_cast<double>(std::pow(I, static_cast<Acc>(-0.25)));
  for (auto& v : u.values) v *= beta;

  FlowState next;
  next.model = state.model;
  next.f = state.f;
  next.u = std::move(u);
  next.t = state.t + dt;
  next.R = webster_scalar(model, next.u);
  next.lambda = lambda_of(model, next.u, next.f, next.R);
  return next;
}

double energy(const FlowState& state) {
  Acc e = 0;
  for (std::size_t n = 0; n < state.u.size(); ++n) {
    const double u2 = state.u[n] * state.u[n];
    e += static_cast<Acc>(state.R[n] * u2 * u2);
  }
  return static_cast<double>(e * state.model->uniform_weight());
}

double F_p(const FlowState& state, double p) {
  Acc e = 0;
  for (std::size_t n = 0; n < state.u.size(); ++n) {
    const double u2 = state.u[n] * state.u[n];
    const double d = std::abs(state.R[n] - state.lambda * state.f[n]);
    e += static_cast<Acc>((p == 2.0 ? d * d : std::pow(d, p)) * u2 * u2);
  }
  return static_cast<double>(e * state.model->uniform_weight());
}

namespace {

FlowDiagnostics basic_diagnostics(const FlowState& s, const std::vector<double>& p_list) {
  FlowDiagnostics d;
  const auto& model = *s.model;
  d.t = s.t;
  d.lambda = s.lambda;
  d.energy = energy(s);
  Acc vol = 0, con = 0;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < s.u.size(); ++n) {
    const double u2 = s.u[n] * s.u[n];
    vol += static_cast<Acc>(u2 * u2);
    con += static_cast<Acc>(s.f[n] * u2 * u2);
    mn = std::min(mn, s.R[n] - s.lambda * s.f[n]);
  }
  d.volume = static_cast<double>(vol * model.uniform_weight());
  d.constraint = static_cast<double>(con * model.uniform_weight());
  d.min_R_minus_lambda_f = mn;
  d.F2 = F_p(s, 2.0);
  d.F4 = F_p(s, 4.0);
  for (double p : p_list) d.Fp.emplace_back(p, p == 2.0 ? d.F2 : (p == 4.0 ? d.F4 : F_p(s, p)));
  d.dissipation = -1.0 * d.F2;  // -n F2
  d.min_u = s.u.min();
  d.max_u = s.u.max();
  d.sobolev_norm_u = sobolev_norm(model, s.u);
  return d;
}

double gamma_bound(double Lambda0, double Lambda1, double sup_f, double sup_abs_f, double inf_initial) {
  const double a = -Lambda0 * sup_abs_f;
  const double c = -std::sqrt(4.0 / 3.0 * (Lambda0 * Lambda0 * sup_f * sup_f + Lambda1 * sup_abs_f));
  return std::min({a, inf_initial, c});
}

}  // namespace

FlowDiagnostics DiagnosticsTracker::observe(const FlowState& s) {
  FlowDiagnostics d = basic_diagnostics(s, p_list_);
  if (!started_) {
    started_ = true;
    inf_initial_ = d.min_R_minus_lambda_f;
    last_lambda_dot_ = 0.0;
  } else if (s.t > last_t_) {
    last_lambda_dot_ = (s.lambda - last_lambda_) / (s.t - last_t_);
  }
  d.lambda_dot = last_lambda_dot_;
  Lambda0_ = std::max(Lambda0_, std::abs(s.lambda));
  Lambda1_ = std::max(Lambda1_, std::abs(d.lambda_dot));
  F2max_ = std::max(F2max_, d.F2);
  last_t_ = s.t;
  last_lambda_ = s.lambda;
  d.Lambda0 = Lambda0_;
  d.Lambda1 = Lambda1_;
  d.F2_max = F2max_;
  d.gamma_proxy = gamma_bound(Lambda0_, Lambda1_, s.f.max(), sup_abs(s.f), inf_initial_);
  return d;
}

FlowDiagnostics diagnostics(const FlowState& state, const std::vector<double>& p_list) {
  check_positive(state.u, "diagnostics");
  DiagnosticsTracker tr(p_list);
  return tr.observe(state);
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::converged: return "converged";
    case Classification::concentrating: return "concentrating";
    case Classification::infeasible: return "infeasible";
    case Classification::timeout: return "timeout";
  }
  return "unknown";
}

RunResult run(const FlowState& initial, const RunOptions& opts, const StepObserver& observer) {
  if (!(opts.tol_converged > 0.0) || !(opts.tol_eps > 0.0) || !(opts.sample_interval > 0.0))
    throw ConfigError("run: tolerances and sample interval must be positive");
  RunResult res;
  DiagnosticsTracker tracker(opts.p_list);
  FlowState s = initial;
  const double sup_f = s.f.max();
  double next_sample = s.t;
  long sample_count = 0;
  std::optional<BubbleFit> last_fit;

  auto take_sample = [&](const FlowState& st) {
    SampleRow row;
    row.diag = tracker.observe(st);
    if (opts.fit_every_samples > 0 && sample_count % opts.fit_every_samples == 0) {
      FitOptions fo;
      if (opts.fit_delta > 0.0) fo.delta = opts.fit_delta;
      auto fit = fit_bubble(st, last_fit, fo);
      if (fit.ok) {
        last_fit = fit;
        const auto c = st.model->coords(fit.center);
        row.fit.ok = true;
        row.fit.alpha = fit.alpha;
        row.fit.eps = fit.eps;
        row.fit.a_x = c.x;
        row.fit.a_y = c.y;
        row.fit.a_s = c.t;
        row.fit.residual = fit.relative_objective;
        const double fa = st.f[fit.center];
        row.fit.zeta = fa > 0.0 ? std::log(fit.eps) / fa : std::numeric_limits<double>::quiet_NaN();
      }
    }
    ++sample_count;
    res.samples.push_back(row);
    return row;
  };

  double E = energy(s);
  double F2 = F_p(s, 2.0);
  double Lambda0 = std::abs(s.lambda);
  long steps = 0;
  while (true) {
    if (s.t >= next_sample - 1e-15) {
      const SampleRow row = take_sample(s);
      next_sample = s.t + opts.sample_interval;
      if (row.diag.F2 < opts.tol_converged) {
        res.classification = Classification::converged;
        break;
      }
      if (row.fit.ok && row.fit.eps < opts.tol_eps && row.fit.residual < opts.tol_fit) {
        res.classification = Classification::concentrating;
        break;
      }
    }
    if (F2 < opts.tol_converged) {
      take_sample(s);
      res.classification = Classification::converged;
      break;
    }
    if (s.t >= opts.T_max || steps >= opts.max_steps) {
      take_sample(s);
      res.classification = Classification::timeout;
      break;
    }
    double dt = std::min(stable_dt(s, opts.c_cfl), opts.T_max - s.t + 1e-300);
    FlowState next;
    bool done = false;
    for (int h = 0; h <= opts.max_dt_halvings; ++h) {
      try {
        next = step(s, dt);
        done = true;
        break;
      } catch (const StepSizeError&) {
        dt *= 0.5;
      } catch (const InfeasibleError& e) {
        res.classification = Classification::infeasible;
        res.message = e.what();
        take_sample(s);
        res.final_state = s;
        res.steps = steps;
        return res;
      }
    }
    if (!done) throw StepSizeError("run: step rejected after repeated dt halving");
    ++steps;
    const double E2 = energy(next);
    const double F2n = F_p(next, 2.0);
    Lambda0 = std::max(Lambda0, std::abs(next.lambda));
    if (observer) {
      StepRecord rec;
      rec.step = steps;
      rec.t_before = s.t;
      rec.dt = dt;
      rec.energy_before = E;
      rec.energy_after = E2;
      rec.F2_before = F2;
      rec.F2_after = F2n;
      rec.constraint_after = constraint_value(next);
      Acc vol = 0;
      for (double v : next.u.values) vol += static_cast<Acc>(v * v * v * v);
      rec.volume_after = static_cast<double>(vol * next.model->uniform_weight());
      rec.lambda_before = s.lambda;
      rec.lambda_after = next.lambda;
      rec.Lambda0 = Lambda0;
      rec.sup_f = sup_f;
      observer(rec, next);
    }
    s = std::move(next);
    E = E2;
    F2 = F2n;
  }
  res.final_state = s;
  res.steps = steps;
  return res;
}

NecessityReport necessity_identities(const FlowState& s) {
  const auto& model = *s.model;
  NecessityReport r;
  ScalarField L = sublaplacian(model, s.u);
  std::vector<double> g2(model.size());
  model.gradient_squared(s.u.values, g2);
  const auto& R0 = model.R0();
  double res = 0.0;
  Acc fu3 = 0, u3 = 0, f1 = 0, grad = 0;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double u = s.u[n];
    const double lhs = -4.0 * L[n] + R0[n] * u;
    res = std::max(res, std::abs(lhs - s.lambda * s.f[n] * u * u * u));
    fu3 += static_cast<Acc>(s.f[n] * u * u * u);
    u3 += static_cast<Acc>(u * u * u);
    f1 += static_cast<Acc>(s.f[n]);
    grad += static_cast<Acc>(g2[n] / (u * u * u * u));
  }
  const double w = model.uniform_weight();
  r.pde_residual = res / s.u.max();
  r.int_f_u3 = static_cast<double>(fu3 * w);
  r.int_f_u3_scale = sup_abs(s.f) * static_cast<double>(u3 * w);
  r.lambda_int_f = s.lambda * static_cast<double>(f1 * w);
  r.gradient_term = -12.0 * static_cast<double>(grad * w);
  r.identity_rel_error = std::abs(r.lambda_int_f - r.gradient_term) / std::abs(r.gradient_term);
  return r;
}

}  // namespace crflow
