#include "crflow/bubbles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"

namespace crflow {

namespace {

using Acc = long double;

double resolve_delta(const ManifoldModel& m, double delta) {
  return delta > 0.0 ? delta : 0.45 * m.injectivity_radius();
}

// Chart and Green's function values around one center.
struct Geometry {
  std::vector<ChartPoint> chart;
  std::vector<double> chi;
  std::vector<double> green;
};

Geometry geometry(const ManifoldModel& m, std::size_t a, double delta, const GreenData& g) {
  Geometry geo;
  geo.chart = local_chart(m, a);
  geo.chi.resize(m.size());
  for (std::size_t n = 0; n < m.size(); ++n) geo.chi[n] = cutoff(geo.chart[n].rho, delta);
  if (g.flat && g.field.size() == 0) {
    geo.green.resize(m.size());
    for (std::size_t n = 0; n < m.size(); ++n) {
      const double r = geo.chart[n].rho;
      geo.green[n] = r > 0.0 ? 1.0 / (r * r) + g.mass : INFINITY;
    }
  } else {
    if (g.pole != a) throw DomainError("test_function: Green's function has a different pole");
    geo.green = g.field.values;
  }
  return geo;
}

void fill_phi(const Geometry& geo, double eps, std::vector<double>& out) {
  const double e2 = eps * eps;
  out.resize(geo.chart.size());
  for (std::size_t n = 0; n < geo.chart.size(); ++n) {
    const auto& c = geo.chart[n];
    const double r2 = c.x * c.x + c.y * c.y;
    const double q = e2 + r2;
    const double chi = geo.chi[n];
    double v = 0.0;
    if (chi > 0.0) v += chi / std::sqrt(c.s * c.s + q * q);
    if (chi < 1.0) v += (1.0 - chi) * geo.green[n];
    out[n] = eps * v;
  }
}

void check_fit_args(const ManifoldModel& m, std::size_t a, double eps, double delta) {
  if (a >= m.size()) throw ShapeError("test_function: center out of range");
  if (!(eps > 0.0)) throw DomainError("test_function: eps must be positive");
  if (!(delta > eps)) throw DomainError("test_function: need eps < delta");
  if (!(delta < m.injectivity_radius())) throw DomainError("test_function: delta must be below the injectivity radius");
}

GreenData flat_green(const ModelPtr& model, std::size_t a, double Lambda) {
  GreenData g;
  g.flat = true;
  g.pole = a;
  g.mass = Lambda;
  g.field = ScalarField(model);
  const auto chart = local_chart(*model, a);
  for (std::size_t n = 0; n < chart.size(); ++n) {
    const double r = chart[n].rho;
    g.field[n] = r > 0.0 ? 1.0 / (r * r) + Lambda : INFINITY;
  }
  return g;
}

// Least squares G - rho^{-2} = A + C rho over the annulus.
void fit_mass(const ManifoldModel& m, GreenData& g, double outer) {
  const auto chart = local_chart(m, g.pole);
  const double inner = 2.0 * std::max(m.hx(), m.hy());
  g.annulus_inner = inner;
  g.annulus_outer = outer;
  Acc s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  std::vector<std::size_t> nodes;
  for (std::size_t n = 0; n < chart.size(); ++n) {
    const double r = chart[n].rho;
    if (r < inner || r > outer) continue;
    nodes.push_back(n);
    const double d = g.field[n] - 1.0 / (r * r);
    s0 += 1;
    s1 += r;
    s2 += static_cast<Acc>(r) * r;
    t0 += d;
    t1 += static_cast<Acc>(d) * r;
  }
  g.annulus_nodes = static_cast<int>(nodes.size());
  if (nodes.size() < 3) throw DomainError("green_function: fit annulus contains fewer than 3 nodes");
  const Acc det = s0 * s2 - s1 * s1;
  double A, C;
  if (std::abs(static_cast<double>(det)) < 1e-300) {
    A = static_cast<double>(t0 / s0);
    C = 0.0;
  } else {
    A = static_cast<double>((t0 * s2 - t1 * s1) / det);
    C = static_cast<double>((s0 * t1 - s1 * t0) / det);
  }
  (void)C;
  g.mass = A;
  double cmax = 0.0;
  for (std::size_t n : nodes) {
    const double r = chart[n].rho;
    cmax = std::max(cmax, std::abs(g.field[n] - 1.0 / (r * r) - A) / r);
  }
  g.fit_C = cmax;
}

std::size_t neighbor(const ManifoldModel& m, std::size_t idx, int di, int dj, int dk) {
  auto nd = m.node(idx);
  auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
  return m.index(wrap(nd[0] + di, m.nx()), wrap(nd[1] + dj, m.ny()), wrap(nd[2] + dk, m.ns()));
}

// Minimal Nelder-Mead on R^2.
template <class F>
std::array<double, 2> nelder_mead(F&& fn, std::array<double, 2> x0, std::array<double, 2> step, int max_evals,
                                  double ftol, int& evals) {
  std::array<std::array<double, 2>, 3> p{x0, x0, x0};
  p[1][0] += step[0];
  p[2][1] += step[1];
  std::array<double, 3> v;
  for (int i = 0; i < 3; ++i) v[i] = fn(p[i]), ++evals;
  int used = 3;
  while (used < max_evals) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return v[a] < v[b]; });
    const int b = o[0], s = o[1], w = o[2];
    if (std::abs(v[w] - v[b]) <= ftol * (std::abs(v[b]) + 1e-300)) break;
    std::array<double, 2> c{0.5 * (p[b][0] + p[s][0]), 0.5 * (p[b][1] + p[s][1])};
    auto along = [&](double k) {
      return std::array<double, 2>{c[0] + k * (p[w][0] - c[0]), c[1] + k * (p[w][1] - c[1])};
    };
    auto xr = along(-1.0);
    double fr = fn(xr);
    ++used, ++evals;
    if (fr < v[b]) {
      auto xe = along(-2.0);
      double fe = fn(xe);
      ++used, ++evals;
      if (fe < fr) p[w] = xe, v[w] = fe;
      else p[w] = xr, v[w] = fr;
    } else if (fr < v[s]) {
      p[w] = xr, v[w] = fr;
    } else {
      auto xc = fr < v[w] ? along(-0.5) : along(0.5);
      double fc = fn(xc);
      ++used, ++evals;
      if (fc < std::min(fr, v[w])) {
        p[w] = xc, v[w] = fc;
      } else {
        for (int i : {s, w}) {
          p[i] = {0.5 * (p[i][0] + p[b][0]), 0.5 * (p[i][1] + p[b][1])};
          v[i] = fn(p[i]);
          ++used, ++evals;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (v[i] < v[best]) best = i;
  return p[best];
}

struct Candidate {
  std::size_t center = 0;
  double eps = 0.0, alpha = 0.0, J = INFINITY;
};

class Fitter {
 public:
  Fitter(const FlowState& st, double delta, double eps_lo, double eps_hi, double Lambda, GreenCache* cache, int budget)
      : st_(st), m_(*st.model), delta_(delta), lo_(eps_lo), hi_(eps_hi), Lambda_(Lambda), cache_(cache),
        budget_(budget) {
    u2_.resize(m_.size());
    for (std::size_t n = 0; n < m_.size(); ++n) u2_[n] = st.u[n] * st.u[n];
  }

  int evals() const { return evals_; }
  bool exhausted() const { return evals_ >= budget_; }

  void set_center(std::size_t a) {
    if (geo_valid_ && a == center_) return;
    center_ = a;
    if (m_.flat()) {
      GreenData g;
      g.flat = true;
      g.pole = a;
      g.mass = Lambda_;
      geo_ = geometry(m_, a, delta_, g);
    } else {
      geo_ = geometry(m_, a, delta_, cache_->get(a));
    }
    geo_valid_ = true;
  }

  // J with alpha free; returns J and writes alpha.
  double profile(double eps, double& alpha) {
    ++evals_;
    fill_phi(geo_, eps, phi_);
    Acc num = 0, den = 0;
    for (std::size_t n = 0; n < phi_.size(); ++n) {
      num += static_cast<Acc>(u2_[n] * st_.u[n] * phi_[n]);
      den += static_cast<Acc>(u2_[n] * phi_[n] * phi_[n]);
    }
    alpha = static_cast<double>(num / den);
    return residual(alpha);
  }

  double objective(double alpha, double eps) {
    ++evals_;
    fill_phi(geo_, eps, phi_);
    return residual(alpha);
  }

  double brent(double lo, double hi, double& alpha) {
    lo = std::max(lo, lo_);
    hi = std::min(hi, hi_);
    std::uintmax_t it = 60;
    auto fn = [&](double le) {
      double a;
      return profile(std::exp(le), a);
    };
    auto r = boost::math::tools::brent_find_minima(fn, std::log(lo), std::log(hi), 40, it);
    const double eps = std::exp(r.first);
    profile(eps, alpha);
    return eps;
  }

  Candidate local_search(std::size_t start, std::optional<double> eps_guess) {
    Candidate c;
    c.center = start;
    set_center(start);
    c.eps = eps_guess ? brent(*eps_guess / 3.0, *eps_guess * 3.0, c.alpha) : brent(lo_, hi_, c.alpha);
    c.J = profile(c.eps, c.alpha);
    for (int round = 0; round < 50 && !exhausted(); ++round) {
      Candidate best = c;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          for (int dk = -1; dk <= 1; ++dk) {
            if (!di && !dj && !dk) continue;
            const std::size_t nb = neighbor(m_, c.center, di, dj, dk);
            set_center(nb);
            double a;
            const double J = profile(c.eps, a);
            if (J < best.J) best = Candidate{nb, c.eps, a, J};
          }
      if (best.center == c.center) break;
      c = best;
      set_center(c.center);
      c.eps = brent(c.eps / 1.5, c.eps * 1.5, c.alpha);
      c.J = profile(c.eps, c.alpha);
    }
    set_center(c.center);
    // polish in (log alpha, log eps)
    const int left = std::max(20, budget_ - evals_);
    auto fn = [&](const std::array<double, 2>& x) {
      const double eps = std::exp(x[1]);
      if (eps < lo_ || eps > hi_) return static_cast<double>(INFINITY);
      return objective(std::exp(x[0]), eps);
    };
    int ev = 0;
    auto x = nelder_mead(fn, {std::log(c.alpha), std::log(c.eps)}, {1e-3, 1e-3}, left, 1e-14, ev);
    const double J = fn(x);
    if (J < c.J) {
      c.alpha = std::exp(x[0]);
      c.eps = std::exp(x[1]);
      c.J = J;
    }
    return c;
  }

  const std::vector<double>& phi_at(const Candidate& c) {
    set_center(c.center);
    fill_phi(geo_, c.eps, phi_);
    return phi_;
  }

 private:
  double residual(double alpha) const {
    Acc J = 0;
    for (std::size_t n = 0; n < phi_.size(); ++n) {
      const double d = st_.u[n] - alpha * phi_[n];
      J += static_cast<Acc>(u2_[n] * d * d);
    }
    return static_cast<double>(J) * m_.uniform_weight();
  }

  const FlowState& st_;
  const ManifoldModel& m_;
  double delta_, lo_, hi_, Lambda_;
  GreenCache* cache_;
  int budget_;
  int evals_ = 0;
  std::vector<double> u2_, phi_;
  Geometry geo_;
  std::size_t center_ = 0;
  bool geo_valid_ = false;
};

}  // namespace

double cutoff(double tau, double delta) {
  const double x = tau / delta;
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double t = x - 1.0;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double cutoff_profile_derivative(double x) {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  const double t = x - 1.0;
  return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double flat_mode_Lambda(const ManifoldModel& model, const ScalarField& f) {
  const double sup_f = f.max();
  if (!(sup_f > 0.0)) throw DomainError("flat_mode_Lambda: sup f must be positive");
  const ScalarField lf = sublaplacian(model, f);
  return (std::abs(lf.max()) + 1.0) / sup_f;
}

GreenData green_function(const ModelPtr& model, std::size_t a, const GreenOptions& opts) {
  const ManifoldModel& m = *model;
  if (a >= m.size()) throw ShapeError("green_function: pole out of range");
  const double outer = opts.annulus_outer > 0.0 ? opts.annulus_outer : 0.3 * m.injectivity_radius();
  if (m.flat()) {
    GreenData g = flat_green(model, a, opts.Lambda);
    fit_mass(m, g, outer);
    return g;
  }
  // (-4 Delta + R0) G = delta_a / w by conjugate gradients
  const std::size_t N = m.size();
  const auto& R0 = m.R0();
  std::vector<double> scratch, Ap(N), x(N, 0.0), r(N, 0.0), p(N);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    m.apply_sublaplacian(in, out, scratch);
    for (std::size_t n = 0; n < N; ++n) out[n] = -4.0 * out[n] + R0[n] * in[n];
  };
  r[a] = 1.0 / m.weight(a);
  p = r;
  Acc rr = 0;
  for (double v : r) rr += static_cast<Acc>(v) * v;
  const double stop = opts.cg_tol * opts.cg_tol * static_cast<double>(rr);
  int it = 0;
  for (; it < opts.cg_max_iter && static_cast<double>(rr) > stop; ++it) {
    apply(p, Ap);
    Acc pAp = 0;
    for (std::size_t n = 0; n < N; ++n) pAp += static_cast<Acc>(p[n]) * Ap[n];
    const double alpha = static_cast<double>(rr / pAp);
    Acc rr_new = 0;
    for (std::size_t n = 0; n < N; ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
      rr_new += static_cast<Acc>(r[n]) * r[n];
    }
    const double beta = static_cast<double>(rr_new / rr);
    rr = rr_new;
    for (std::size_t n = 0; n < N; ++n) p[n] = r[n] + beta * p[n];
  }
  if (static_cast<double>(rr) > stop) throw DomainError("green_function: conjugate gradients did not converge");
  GreenData g;
  g.flat = false;
  g.pole = a;
  g.cg_iterations = it;
  g.raw_scale = 8.0 * kPi * m.kappa_v();
  for (double& v : x) v *= g.raw_scale;
  g.pole_value = x[a];
  x[a] = INFINITY;
  g.field = ScalarField(model, std::move(x));
  fit_mass(m, g, outer);
  return g;
}

const GreenData& GreenCache::get(std::size_t a) {
  auto it = cache_.find(a);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(a, green_function(model_, a, opts_)).first->second;
}

ScalarField test_function(const ModelPtr& model, std::size_t a, double eps, double delta, const GreenData& green) {
  check_fit_args(*model, a, eps, delta);
  const Geometry geo = geometry(*model, a, delta, green);
  ScalarField out(model);
  fill_phi(geo, eps, out.values);
  return out;
}

std::vector<ScalarField> phi_k(const ModelPtr& model, std::size_t a, double eps, double delta, const GreenData& green,
                               int k) {
  if (k < 1 || k > 3) throw DomainError("phi_k: k must be 1, 2 or 3");
  check_fit_args(*model, a, eps, delta);
  const Geometry geo = geometry(*model, a, delta, green);
  ScalarField phi(model);
  fill_phi(geo, eps, phi.values);
  if (k == 1) return {phi};
  const double e2 = eps * eps;
  if (k == 2) {
    ScalarField out(model);
    for (std::size_t n = 0; n < out.size(); ++n) {
      const auto& c = geo.chart[n];
      const double q = e2 + c.x * c.x + c.y * c.y;
      const double D = c.s * c.s + q * q;
      out[n] = phi[n];
      if (geo.chi[n] > 0.0) out[n] -= 2.0 * e2 * eps * geo.chi[n] * q / (D * std::sqrt(D));
    }
    return {out};
  }
  // a-derivatives of the chart coordinates: X_a -> (-1, 0, 2 qy), Y_a -> (0, -1, -2 qx)
  ScalarField dx(model), dy(model);
  for (std::size_t n = 0; n < dx.size(); ++n) {
    const auto& c = geo.chart[n];
    const double r2 = c.x * c.x + c.y * c.y;
    const double q = e2 + r2;
    const double D = c.s * c.s + q * q;
    const double B = 1.0 / std::sqrt(D);
    const double chi = geo.chi[n];
    auto dir = [&](double dqx, double dqy, double dsig) {
      const double radial = c.x * dqx + c.y * dqy;
      double v = 0.0;
      const double dB = -B * B * B * (c.s * dsig + 2.0 * q * radial);
      if (chi > 0.0) v += chi * dB;
      if (chi < 1.0) {
        const double rho = c.rho;
        const double drho = (c.s * dsig + 2.0 * r2 * radial) / (2.0 * rho * rho * rho);
        const double dchi = cutoff_profile_derivative(rho / delta) * drho / delta;
        const double dG = -2.0 * drho / (rho * rho * rho);
        v += dchi * (B - geo.green[n]) + (1.0 - chi) * dG;
      }
      return e2 * v;
    };
    dx[n] = dir(-1.0, 0.0, 2.0 * c.y);
    dy[n] = dir(0.0, -1.0, -2.0 * c.x);
  }
  return {dx, dy};
}

BubbleFit fit_bubble(const FlowState& state, const std::optional<BubbleFit>& init, const FitOptions& opts) {
  const ManifoldModel& m = *state.model;
  BubbleFit out;
  out.delta = resolve_delta(m, opts.delta);
  if (!(out.delta < m.injectivity_radius())) throw DomainError("fit_bubble: delta must be below the injectivity radius");
  const double lo = opts.eps_min > 0.0 ? opts.eps_min : 0.25 * m.min_spacing();
  const double hi = 0.9 * out.delta;
  if (!(lo < hi)) throw DomainError("fit_bubble: empty eps range");

  std::optional<GreenCache> local;
  GreenCache* cache = opts.green;
  double Lambda = opts.Lambda;
  if (m.flat()) {
    if (Lambda < 0.0) Lambda = flat_mode_Lambda(m, state.f);
  } else if (!cache) {
    local.emplace(state.model, GreenOptions{});
    cache = &*local;
  }

  Fitter fitter(state, out.delta, lo, hi, Lambda, cache, opts.budget);
  std::vector<std::size_t> starts{argmax(state.u)};
  if (init && init->center < m.size() && init->center != starts[0]) starts.push_back(init->center);
  std::vector<Candidate> results;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::optional<double> guess;
    if (init && init->eps > 0.0 && starts[i] == init->center) guess = std::clamp(init->eps, lo, hi);
    results.push_back(fitter.local_search(starts[i], guess));
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.J < b.J; });
  const Candidate& best = results.front();
  if (results.size() > 1 && results[1].center != best.center && results[1].J <= 1.01 * best.J) out.ambiguous = true;

  out.center = best.center;
  out.alpha = best.alpha;
  out.eps = best.eps;
  out.objective = best.J;
  out.evaluations = fitter.evals();
  Acc u4 = 0;
  for (double v : state.u.values) u4 += static_cast<Acc>(v) * v * v * v;
  const double norm = static_cast<double>(u4) * m.uniform_weight();
  out.relative_objective = norm > 0.0 ? best.J / norm : INFINITY;
  const auto& phi = fitter.phi_at(best);
  ScalarField v(state.model);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = state.u[n] - best.alpha * phi[n];
  out.residual_norm = sobolev_norm(m, v);
  out.membership_eps = best.eps;
  out.membership_alpha = std::abs(state.lambda * best.alpha * best.alpha * state.f[best.center] / 4.0 - 1.0);
  out.in_D_u = out.membership_eps < opts.mu0 && out.membership_alpha < opts.mu0;
  out.ok = std::isfinite(best.J) && best.alpha > 0.0;
  return out;
}

std::vector<double> sigma_k(const FlowState& state, const BubbleFit& fit, const GreenData& green, int k) {
  const ManifoldModel& m = *state.model;
  const auto comps = phi_k(state.model, fit.center, fit.eps, fit.delta, green, k);
  ScalarField L = sublaplacian(m, state.u);
  const auto& R0 = m.R0();
  for (std::size_t n = 0; n < L.size(); ++n) {
    const double u = state.u[n];
    L[n] = -4.0 * L[n] + R0[n] * u - state.lambda * state.f[n] * u * u * u;
  }
  std::vector<double> out;
  for (const auto& c : comps) out.push_back(-inner(m, L, c));
  return out;
}

double lambda_star(double sup_f) {
  if (!(sup_f > 0.0)) throw DomainError("lambda_star: sup f must be positive");
  // 4 (sup f)^{-1/2} / K_1 with K_1 = 1 / (2 pi)
  return 8.0 * kPi / std::sqrt(sup_f);
}

double lambda_star(const ScalarField& f) { return lambda_star(f.max()); }

bool single_bubble_gate(double energy_u0, double lambda_star_value) {
  return energy_u0 < std::sqrt(2.0) * lambda_star_value;
}

std::size_t argmax(const ScalarField& f) {
  if (f.size() == 0) throw ShapeError("argmax: empty field");
  return static_cast<std::size_t>(std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
}

InitialData initial_data(const ModelPtr& model, const ScalarField& f, std::optional<std::size_t> a0, double eps0,
                         double delta, GreenCache* green) {
  const ManifoldModel& m = *model;
  if (f.size() != m.size()) throw ShapeError("initial_data: f has the wrong size");
  if (!(eps0 >= 4.0 * m.min_spacing() * (1.0 - 1e-12)))
    throw DomainError("initial_data: eps0 must be at least 4 grid spacings");
  InitialData d;
  d.center = a0 ? *a0 : argmax(f);
  d.eps0 = eps0;
  d.delta = delta > 0.0 ? delta : m.default_delta(eps0);
  const double sup_f = f.max();
  if (!(sup_f > 0.0)) throw DomainError("initial_data: sup f must be positive");
  ScalarField phi;
  if (m.flat()) {
    d.Lambda = flat_mode_Lambda(m, f);
    GreenData g;
    g.flat = true;
    g.pole = d.center;
    g.mass = d.Lambda;
    phi = test_function(model, d.center, eps0, d.delta, g);
  } else {
    std::optional<GreenCache> local;
    if (!green) green = &local.emplace(model, GreenOptions{});
    const GreenData& g = green->get(d.center);
    d.Lambda = g.mass;
    phi = test_function(model, d.center, eps0, d.delta, g);
  }
  Acc I = 0;
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double p2 = phi[n] * phi[n];
    I += static_cast<Acc>(f[n] * p2 * p2);
  }
  const double Iw = static_cast<double>(I) * m.uniform_weight();
  if (!(Iw > 0.0)) throw InfeasibleError("initial_data: int f phi^4 dv must be positive");
  d.alpha0 = std::pow(Iw, -0.25);
  for (double& v : phi.values) v *= d.alpha0;
  d.state = make_state(model, std::move(phi), f);
  d.energy = energy(d.state);
  d.lambda_star = lambda_star(sup_f);
  d.gate = single_bubble_gate(d.energy, d.lambda_star);
  return d;
}

}  // namespace crflow
