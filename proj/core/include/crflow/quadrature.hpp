#pragma once

#include <functional>
#include <string>
#include <vector>

namespace crflow {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// Integrand g(|z|, s) on H^n. `degree` is the homogeneity degree at infinity
// under (z, s) -> (t z, t^2 s); the integral over H^n converges at infinity
// iff degree + 2n + 2 < 0.
struct RadialKernel {
  std::string name;
  int n = 1;
  double degree = 0.0;
  std::function<double(double r, double s)> g;
};

// Integral of g over H^n against Lebesgue measure dz ds, reduced to
// |S^{2n-1}| * int_0^inf r^{2n-1} int_R g(r, s) ds dr. Both directions are
// compactified by tan substitutions and refined adaptively (Gauss-Kronrod).
Estimate integrate_radial(const RadialKernel& kernel, double tol);

// Integrand registry used by compute_constants.
std::vector<RadialKernel> constant_kernels(int n);
RadialKernel find_kernel(int n, const std::string& name);

struct ShadowRatios {
  double d2_c2 = 0.0;
  double e2_c2 = 0.0;
  double e3_c3 = 0.0;
  double e4_c3 = 0.0;
};

// All quadrature values are with respect to Lebesgue measure dx dy ds in the
// standard coordinates; kappa_v is the factor turning that into the
// calibrated volume form.
struct ConstantsTable {
  int n = 1;
  double K_n = 0.0;
  double kappa_v = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
  double lambda_star_unit = 0.0;
  double sphere_measure = 0.0;
  double ball_volume = 0.0;
  double bubble_integral = 0.0;  // int |U|^{2+2/n} (Lebesgue), mu = 1

  double err_kappa_v = 0.0;
  double err_c1 = 0.0, err_c2 = 0.0, err_c3 = 0.0;
  double err_d1 = 0.0, err_d2 = 0.0;
  double err_e1 = 0.0, err_e2 = 0.0, err_e3 = 0.0, err_e4 = 0.0;
  double err_sphere_measure = 0.0;
  double err_ball_volume = 0.0;
  double err_bubble_integral = 0.0;
  double tol = 0.0;

  ShadowRatios ratios() const;
};

ConstantsTable compute_constants(int n, double tol);

// Closed forms available for n = 1 (used as defaults when no constants file is
// given and as cross-checks).
ConstantsTable closed_form_constants_n1();

struct SobolevReport {
  int n = 1;
  double bubble_integral = 0.0;   // (a) Lebesgue int |U|^{2+2/n}
  double kappa_v = 0.0;           // (b)
  double gradient_integral = 0.0; // Lebesgue int |grad_H U|^2, kappa_Delta-weighted
  double bubble_energy = 0.0;     // (c) under kappa_v
  double target_energy = 0.0;     // K_n^{-(n+1)} / (2(n+1))
  double relative_mismatch = 0.0;
};

SobolevReport verify_sobolev_identities(const ConstantsTable& table, double tol = 1e-9);

// Flat JSON object with every table field and its error bound.
std::string constants_to_json(const ConstantsTable& t, int indent = 2);
ConstantsTable constants_from_json(const std::string& text);
std::string sobolev_report_to_json(const SobolevReport& r, int indent = 2);

}  // namespace crflow
