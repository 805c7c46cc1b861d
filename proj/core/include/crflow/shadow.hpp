#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crflow/errors.hpp"
#include "crflow/quadrature.hpp"

namespace crflow {

// Point in standard Heisenberg chart coordinates.
struct ChartCoord {
  double x = 0.0, y = 0.0, s = 0.0;
};

// Closed-form f together with its horizontal derivatives. lap uses
// Delta = (X^2 + Y^2) / 4 with X = d_x + 2y d_s, Y = d_y - 2x d_s; grad is (Xf, Yf).
struct Landscape {
  std::string name;
  std::function<double(const ChartCoord&)> f;
  std::function<std::array<double, 2>(const ChartCoord&)> grad;
  std::function<double(const ChartCoord&)> lap;
  std::function<std::array<double, 2>(const ChartCoord&)> grad_lap;
};

Landscape constant_landscape(double value);
// base + slope_x x + slope_y y
Landscape linear_landscape(double base, double slope_x, double slope_y);
// base + height exp(-|z - z0|^2 / width^2)
Landscape peak_landscape(double base, double height, double width, double x0 = 0.0, double y0 = 0.0);
// top - (kx (x - x0)^2 + ky (y - y0)^2) / 2
Landscape quadratic_landscape(double top, double kx, double ky, double x0 = 0.0, double y0 = 0.0);

struct ShadowState {
  double eps = 0.1;
  ChartCoord a;
  std::shared_ptr<const Landscape> landscape;
  double mass = 0.0;
  std::function<double(const ChartCoord&)> mass_fn;  // overrides mass when set
  double lambda = 1.0;
  ShadowRatios ratios;

  double mass_at(const ChartCoord& p) const { return mass_fn ? mass_fn(p) : mass; }
};

struct ShadowRhs {
  double eps_dot = 0.0;
  ChartCoord a_dot;
};

// Leading-order reduced flow at n = 1:
//   eps'/eps = lambda f(a) eps^2 [(d2/(4 c2)) A + (e2/c2) Delta f / f]
//   a'/eps   = lambda f(a) [(e3/c3) grad f / f eps + (e4/c3) grad Delta f / f eps^3]
// with the horizontal velocity lifted by s' = 2y x' - 2x y'.
ShadowRhs shadow_rhs(const ShadowState& state);

// Value of Delta f / f at which eps' changes sign when grad f = 0.
double eps_threshold(const ShadowRatios& r, double mass);

double zeta(const ShadowState& state);
// Chain-rule derivative (1/f) (eps'/eps - ln(eps) grad f . a' / f).
double zeta_dot(const ShadowState& state);

struct ShadowSample {
  double t = 0.0, eps = 0.0;
  ChartCoord a;
  double f_a = 0.0, zeta = 0.0;
};

enum class ShadowStop { completed, floor, ceiling };
std::string to_string(ShadowStop s);

struct ShadowTrajectory {
  std::vector<ShadowSample> samples;
  ShadowStop stop = ShadowStop::completed;
  ShadowState final_state;
};

struct ShadowOptions {
  double T = 1.0;
  double dt = 1e-3;
  double eps_floor = 1e-4;
  double eps_ceiling = 1.0;
  int sample_every = 1;
};

// Thrown when the rhs leaves its domain; carries the trajectory so far.
struct ShadowDomainError : DomainError {
  ShadowDomainError(const std::string& what, ShadowTrajectory traj)
      : DomainError(what), trajectory(std::move(traj)) {}
  ShadowTrajectory trajectory;
};

// Classical RK4 with fixed step.
ShadowTrajectory integrate(const ShadowState& initial, const ShadowOptions& opts);

struct ZetaReport {
  bool ok = true;
  int checked = 0;
  int violations = 0;
  double min_zeta = 0.0;
  double worst_decrease = 0.0;
};

// Wherever Delta f(a)/f(a) > -c_star on consecutive samples, zeta must not
// decrease by more than tol.
ZetaReport zeta_lower_bound_check(const ShadowTrajectory& traj, const Landscape& landscape, double c_star,
                                  double tol = 1e-12);

// True iff every sampled point within 1e-9 of the sampled sup has f > 0 and
// Delta f / f > -c_star.
bool c_star_condition(const Landscape& landscape, const std::vector<ChartCoord>& sample, double c_star);

struct CStarRow {
  double c_star = 0.0;
  double threshold = 0.0;
  double lap_over_f = 0.0;
  bool condition = false;
  double final_eps = 0.0;
  double final_zeta = 0.0;
  ShadowStop stop = ShadowStop::completed;
  bool zeta_nondecreasing = false;
};

// Runs the reduced flow once per c_star with the mass set to c_star.
std::vector<CStarRow> c_star_sweep(const ShadowState& base, const std::vector<double>& c_values,
                                   const ShadowOptions& opts);

}  // namespace crflow
