#include "crflow/shadow.hpp"

#include <algorithm>
#include <cmath>

namespace crflow {

namespace {

ChartCoord lift(const ChartCoord& a, double vx, double vy) {
  return {vx, vy, 2.0 * a.y * vx - 2.0 * a.x * vy};
}

struct Deriv {
  double de;
  ChartCoord da;
};

Deriv eval(const ShadowState& base, double eps, const ChartCoord& a) {
  ShadowState s = base;
  s.eps = eps;
  s.a = a;
  const auto r = shadow_rhs(s);
  return {r.eps_dot, r.a_dot};
}

ChartCoord axpy(const ChartCoord& a, double k, const ChartCoord& d) {
  return {a.x + k * d.x, a.y + k * d.y, a.s + k * d.s};
}

ShadowSample sample_of(const ShadowState& s, double t) {
  const double fa = s.landscape->f(s.a);
  return {t, s.eps, s.a, fa, std::log(s.eps) / fa};
}

}  // namespace

Landscape constant_landscape(double value) {
  Landscape l;
  l.name = "constant";
  l.f = [value](const ChartCoord&) { return value; };
  l.grad = [](const ChartCoord&) { return std::array<double, 2>{0.0, 0.0}; };
  l.lap = [](const ChartCoord&) { return 0.0; };
  l.grad_lap = l.grad;
  return l;
}

Landscape linear_landscape(double base, double gx, double gy) {
  Landscape l;
  l.name = "linear";
  l.f = [=](const ChartCoord& p) { return base + gx * p.x + gy * p.y; };
  l.grad = [=](const ChartCoord&) { return std::array<double, 2>{gx, gy}; };
  l.lap = [](const ChartCoord&) { return 0.0; };
  l.grad_lap = [](const ChartCoord&) { return std::array<double, 2>{0.0, 0.0}; };
  return l;
}

Landscape peak_landscape(double base, double height, double width, double x0, double y0) {
  if (!(width > 0.0)) throw DomainError("peak_landscape: width must be positive");
  const double w2 = width * width;
  Landscape l;
  l.name = "peak";
  auto g = [=](const ChartCoord& p) {
    const double dx = p.x - x0, dy = p.y - y0;
    return height * std::exp(-(dx * dx + dy * dy) / w2);
  };
  l.f = [=](const ChartCoord& p) { return base + g(p); };
  l.grad = [=](const ChartCoord& p) {
    const double k = -2.0 / w2 * g(p);
    return std::array<double, 2>{k * (p.x - x0), k * (p.y - y0)};
  };
  l.lap = [=](const ChartCoord& p) {
    const double dx = p.x - x0, dy = p.y - y0;
    return ((dx * dx + dy * dy) / (w2 * w2) - 1.0 / w2) * g(p);
  };
  l.grad_lap = [=](const ChartCoord& p) {
    const double dx = p.x - x0, dy = p.y - y0;
    const double k = (4.0 / (w2 * w2) - 2.0 * (dx * dx + dy * dy) / (w2 * w2 * w2)) * g(p);
    return std::array<double, 2>{k * dx, k * dy};
  };
  return l;
}

Landscape quadratic_landscape(double top, double kx, double ky, double x0, double y0) {
  Landscape l;
  l.name = "quadratic";
  l.f = [=](const ChartCoord& p) {
    const double dx = p.x - x0, dy = p.y - y0;
    return top - 0.5 * (kx * dx * dx + ky * dy * dy);
  };
  l.grad = [=](const ChartCoord& p) { return std::array<double, 2>{-kx * (p.x - x0), -ky * (p.y - y0)}; };
  l.lap = [=](const ChartCoord&) { return -0.25 * (kx + ky); };
  l.grad_lap = [](const ChartCoord&) { return std::array<double, 2>{0.0, 0.0}; };
  return l;
}

ShadowRhs shadow_rhs(const ShadowState& s) {
  if (!s.landscape) throw DomainError("shadow_rhs: no landscape");
  if (!(s.eps > 0.0)) throw DomainError("shadow_rhs: eps must be positive");
  const double fa = s.landscape->f(s.a);
  if (!(fa > 0.0)) throw DomainError("shadow_rhs: f(a) must be positive");
  const auto& r = s.ratios;
  const double e = s.eps, e2 = e * e;
  ShadowRhs out;
  out.eps_dot = s.lambda * e * e2 * (r.d2_c2 / 4.0 * fa * s.mass_at(s.a) + r.e2_c2 * s.landscape->lap(s.a));
  const auto g = s.landscape->grad(s.a);
  const auto gl = s.landscape->grad_lap(s.a);
  const double k1 = s.lambda * r.e3_c3 * e2, k3 = s.lambda * r.e4_c3 * e2 * e2;
  out.a_dot = lift(s.a, k1 * g[0] + k3 * gl[0], k1 * g[1] + k3 * gl[1]);
  return out;
}

double eps_threshold(const ShadowRatios& r, double mass) {
  if (r.e2_c2 == 0.0) throw DomainError("eps_threshold: e2 vanishes");
  return -(r.d2_c2 / (4.0 * r.e2_c2)) * mass;
}

double zeta(const ShadowState& s) {
  const double fa = s.landscape->f(s.a);
  if (!(fa > 0.0)) throw DomainError("zeta: f(a) must be positive");
  return std::log(s.eps) / fa;
}

double zeta_dot(const ShadowState& s) {
  const auto r = shadow_rhs(s);
  const double fa = s.landscape->f(s.a);
  const auto g = s.landscape->grad(s.a);
  const double fdot = g[0] * r.a_dot.x + g[1] * r.a_dot.y;
  return (r.eps_dot / s.eps - std::log(s.eps) * fdot / fa) / fa;
}

std::string to_string(ShadowStop s) {
  switch (s) {
    case ShadowStop::completed: return "completed";
    case ShadowStop::floor: return "eps_floor";
    case ShadowStop::ceiling: return "eps_ceiling";
  }
  return "unknown";
}

ShadowTrajectory integrate(const ShadowState& initial, const ShadowOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("integrate: dt must be positive");
  if (!(opts.T >= 0.0)) throw DomainError("integrate: T must be nonnegative");
  ShadowTrajectory traj;
  ShadowState s = initial;
  const long steps = static_cast<long>(std::ceil(opts.T / opts.dt - 1e-9));
  const int every = std::max(1, opts.sample_every);
  try {
    traj.samples.push_back(sample_of(s, 0.0));
    for (long k = 0; k < steps; ++k) {
      const double h = std::min(opts.dt, opts.T - k * opts.dt);
      const Deriv k1 = eval(s, s.eps, s.a);
      const Deriv k2 = eval(s, s.eps + 0.5 * h * k1.de, axpy(s.a, 0.5 * h, k1.da));
      const Deriv k3 = eval(s, s.eps + 0.5 * h * k2.de, axpy(s.a, 0.5 * h, k2.da));
      const Deriv k4 = eval(s, s.eps + h * k3.de, axpy(s.a, h, k3.da));
      const double eps = s.eps + h / 6.0 * (k1.de + 2.0 * k2.de + 2.0 * k3.de + k4.de);
      if (!(eps > 0.0)) throw DomainError("integrate: eps crossed zero");
      ChartCoord a = s.a;
      a.x += h / 6.0 * (k1.da.x + 2.0 * k2.da.x + 2.0 * k3.da.x + k4.da.x);
      a.y += h / 6.0 * (k1.da.y + 2.0 * k2.da.y + 2.0 * k3.da.y + k4.da.y);
      a.s += h / 6.0 * (k1.da.s + 2.0 * k2.da.s + 2.0 * k3.da.s + k4.da.s);
      s.eps = eps;
      s.a = a;
      const double t = (k + 1 == steps) ? opts.T : (k + 1) * opts.dt;
      const bool stop_floor = s.eps < opts.eps_floor, stop_ceil = s.eps > opts.eps_ceiling;
      if ((k + 1) % every == 0 || k + 1 == steps || stop_floor || stop_ceil) traj.samples.push_back(sample_of(s, t));
      if (stop_floor) {
        traj.stop = ShadowStop::floor;
        break;
      }
      if (stop_ceil) {
        traj.stop = ShadowStop::ceiling;
        break;
      }
    }
  } catch (const ShadowDomainError&) {
    throw;
  } catch (const DomainError& e) {
    traj.final_state = s;
    throw ShadowDomainError(e.what(), std::move(traj));
  }
  traj.final_state = s;
  return traj;
}

ZetaReport zeta_lower_bound_check(const ShadowTrajectory& traj, const Landscape& l, double c_star, double tol) {
  ZetaReport rep;
  if (traj.samples.empty()) return rep;
  rep.min_zeta = traj.samples.front().zeta;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& p = traj.samples[i - 1];
    const auto& q = traj.samples[i];
    rep.min_zeta = std::min(rep.min_zeta, q.zeta);
    const bool active = l.lap(p.a) / l.f(p.a) > -c_star && l.lap(q.a) / l.f(q.a) > -c_star;
    if (!active) continue;
    ++rep.checked;
    const double dec = p.zeta - q.zeta;
    if (dec > tol) {
      ++rep.violations;
      rep.worst_decrease = std::max(rep.worst_decrease, dec);
    }
  }
  rep.ok = rep.violations == 0;
  return rep;
}

bool c_star_condition(const Landscape& l, const std::vector<ChartCoord>& sample, double c_star) {
  if (sample.empty()) return true;
  double sup = -INFINITY;
  for (const auto& p : sample) sup = std::max(sup, l.f(p));
  for (const auto& p : sample) {
    const double fv = l.f(p);
    if (fv < sup - 1e-9) continue;
    if (!(fv > 0.0) || !(l.lap(p) / fv > -c_star)) return false;
  }
  return true;
}

std::vector<CStarRow> c_star_sweep(const ShadowState& base, const std::vector<double>& c_values,
                                   const ShadowOptions& opts) {
  std::vector<ChartCoord> grid;
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) grid.push_back({base.a.x + 0.05 * i, base.a.y + 0.05 * j, base.a.s});
  std::vector<CStarRow> rows;
  for (double c : c_values) {
    ShadowState s = base;
    s.mass = c;
    s.mass_fn = nullptr;
    CStarRow row;
    row.c_star = c;
    row.threshold = eps_threshold(s.ratios, c);
    row.lap_over_f = s.landscape->lap(s.a) / s.landscape->f(s.a);
    row.condition = c_star_condition(*s.landscape, grid, c);
    const auto traj = integrate(s, opts);
    row.final_eps = traj.final_state.eps;
    row.final_zeta = traj.samples.back().zeta;
    row.stop = traj.stop;
    row.zeta_nondecreasing = true;
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
      if (traj.samples[i].zeta < traj.samples[i - 1].zeta) row.zeta_nondecreasing = false;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace crflow
