#include "crflow/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"

namespace crflow {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr unsigned kDepth = 18;

double unit_sphere_area(int dim_minus_one) {
  // |S^{m}| in R^{m+1}
  const double m1 = dim_minus_one + 1.0;
  return 2.0 * std::pow(kPi, m1 / 2.0) / std::tgamma(m1 / 2.0);
}

struct Inner {
  double value;
  double error;
};

Inner inner_integral(const RadialKernel& k, double r) {
  const double c = 1.0 + r * r;
  auto h = [&](double th) {
    const double t = std::tan(th);
    const double sec2 = 1.0 + t * t;
    return k.g(r, c * t) * c * sec2;
  };
  double err = 0.0;
  const double v = GK::integrate(h, -kPi / 2, kPi / 2, kDepth, 1e-13, &err);
  return {v, err};
}

}  // namespace

Estimate integrate_radial(const RadialKernel& kernel, double tol) {
  if (kernel.n < 1) throw DomainError("integrate_radial: n must be >= 1");
  if (!(tol > 0.0)) throw DomainError("integrate_radial: tol must be positive");
  const int n = kernel.n;
  const double Q = 2.0 * n + 2.0;
  if (!(kernel.degree + Q < 0.0))
    throw IntegrabilityError("integrate_radial: kernel '" + kernel.name + "' has decay degree " +
                             std::to_string(kernel.degree) + ", not integrable against homogeneous dimension " +
                             std::to_string(static_cast<int>(Q)));
  const double area = unit_sphere_area(2 * n - 1);

  auto radial_weight = [&](double ph) {
    const double r = std::tan(ph);
    const double sec2 = 1.0 + r * r;
    return std::pair<double, double>{r, area * std::pow(r, 2 * n - 1) * sec2};
  };
  auto outer = [&](double ph) {
    auto [r, w] = radial_weight(ph);
    if (w == 0.0) return 0.0;
    return w * inner_integral(kernel, r).value;
  };
  auto outer_err = [&](double ph) {
    auto [r, w] = radial_weight(ph);
    if (w == 0.0) return 0.0;
    return w * inner_integral(kernel, r).error;
  };

  double err_out = 0.0;
  const double value = GK::integrate(outer, 0.0, kPi / 2, kDepth, 1e-12, &err_out);
  double dummy = 0.0;
  const double err_in = GK::integrate(outer_err, 0.0, kPi / 2, 8, 1e-2, &dummy);
  Estimate e{value, err_out + std::abs(err_in)};
  if (!std::isfinite(e.value) || !std::isfinite(e.error))
    throw IntegrabilityError("integrate_radial: kernel '" + kernel.name + "' produced a non-finite value");
  if (e.error > tol)
    throw IntegrabilityError("integrate_radial: kernel '" + kernel.name + "' error estimate " +
                             std::to_string(e.error) + " exceeds tolerance");
  return e;
}

std::vector<RadialKernel> constant_kernels(int n) {
  if (n < 1) throw DomainError("constant_kernels: n must be >= 1");
  const double nn = n;
  const double in2 = 1.0 / (nn * nn);
  std::vector<RadialKernel> ks;
  auto D = [](double r, double s, double a) {
    const double q = a + r * r;
    return s * s + q * q;
  };
  ks.push_back({"c1", n, -4.0 * (n + 1), [=](double r, double s) {
                  return std::pow(nn, 2 * n + 2) / std::pow(D(r, s, 1.0), n + 1);
                }});
  ks.push_back({"c2", n, -4.0 * n - 4.0, [=](double r, double s) {
                  const double num = s * s + r * r * r * r - 1.0;
                  return std::pow(nn, 2 * n + 4) * num * num / std::pow(D(r, s, 1.0), n + 3);
                }});
  ks.push_back({"c3", n, -4.0 * n - 6.0, [=](double r, double s) {
                  const double q = 1.0 + r * r;
                  return std::pow(nn, 2 * n + 6) * q * q * r * r / std::pow(D(r, s, 1.0), n + 3);
                }});
  ks.push_back({"e1", n, -4.0 * n - 2.0, [=](double r, double s) {
                  return r * r / (2.0 * nn) / std::pow(D(r, s, in2), n + 1);
                }});
  ks.push_back({"e2", n, -4.0 * n - 2.0, [=](double r, double s) {
                  const double num = s * s + r * r * r * r - in2 * in2;
                  return r * r * num / (2.0 * nn) / std::pow(D(r, s, in2), n + 2);
                }});
  ks.push_back({"e3", n, -4.0 * (n + 1), [=](double r, double s) {
                  return nn / (2.0 * (nn + 1.0)) / std::pow(D(r, s, in2), n + 1);
                }});
  ks.push_back({"e4", n, -4.0 * n - 2.0, [=](double r, double s) {
                  return r * r / (4.0 * (nn + 1.0)) / std::pow(D(r, s, in2), n + 1);
                }});
  ks.push_back({"bubble", n, -4.0 * (n + 1), [=](double r, double s) {
                  return 1.0 / std::pow(D(r, s, in2), n + 1);
                }});
  // kappa_Delta * sum_j (X_j U)^2 + (Y_j U)^2 = n^2 r^2 (s^2 + A^2)^{-n-1}
  ks.push_back({"gradient", n, -4.0 * n - 2.0, [=](double r, double s) {
                  return kKappaDelta * 4.0 * nn * nn * r * r / std::pow(D(r, s, in2), n + 1);
                }});
  return ks;
}

RadialKernel find_kernel(int n, const std::string& name) {
  for (auto& k : constant_kernels(n))
    if (k.name == name) return k;
  throw DomainError("find_kernel: unknown kernel '" + name + "'");
}

ShadowRatios ConstantsTable::ratios() const {
  return {d2 / c2, e2 / c2, e3 / c3, e4 / c3};
}

ConstantsTable compute_constants(int n, double tol) {
  if (n < 1 || n > 3) throw DomainError("compute_constants: n must be in 1..3");
  if (!(tol > 0.0)) throw DomainError("compute_constants: tol must be positive");
  ConstantsTable t;
  t.n = n;
  t.tol = tol;
  t.K_n = 1.0 / (2.0 * kPi * n * n);

  auto run = [&](const std::string& name) {
    const auto k = find_kernel(n, name);
    try {
      return integrate_radial(k, tol);
    } catch (const IntegrabilityError& e) {
      throw IntegrabilityError("compute_constants: constant " + name + " failed: " + e.what());
    }
  };
  auto c1 = run("c1"), c2 = run("c2"), c3 = run("c3");
  auto e1 = run("e1"), e2 = run("e2"), e3 = run("e3"), e4 = run("e4");
  auto ub = run("bubble");
  t.c1 = c1.value, t.err_c1 = c1.error;
  t.c2 = c2.value, t.err_c2 = c2.error;
  t.c3 = c3.value, t.err_c3 = c3.error;
  t.e1 = e1.value, t.err_e1 = e1.error;
  t.e2 = e2.value, t.err_e2 = e2.error;
  t.e3 = e3.value, t.err_e3 = e3.error;
  t.e4 = e4.value, t.err_e4 = e4.error;
  t.bubble_integral = ub.value, t.err_bubble_integral = ub.error;

  // Koranyi ball: |S^{2n-1}| int_0^1 r^{2n-1} 2 sqrt(1 - r^4) dr
  boost::math::quadrature::tanh_sinh<double> ts;
  double ball_err = 0.0;
  const double ball_r = ts.integrate(
      [n](double r) { return std::pow(r, 2 * n - 1) * 2.0 * std::sqrt(std::max(0.0, 1.0 - r * r * r * r)); },
      0.0, 1.0, 1e-14, &ball_err);
  const double area = unit_sphere_area(2 * n - 1);
  t.ball_volume = area * ball_r;
  t.err_ball_volume = area * ball_err;
  const double Q = 2.0 * n + 2.0;
  t.sphere_measure = Q * t.ball_volume;
  t.err_sphere_measure = Q * t.err_ball_volume;
  t.d1 = 4.0 * (n + 1) * t.sphere_measure;
  t.d2 = 4.0 * n * (n + 1) * t.sphere_measure;
  t.d3 = 0.0;
  t.err_d1 = 4.0 * (n + 1) * t.err_sphere_measure;
  t.err_d2 = 4.0 * n * (n + 1) * t.err_sphere_measure;

  const double target = std::pow(t.K_n, -(n + 1.0));
  t.kappa_v = target / t.bubble_integral;
  t.err_kappa_v = t.kappa_v * t.err_bubble_integral / t.bubble_integral;
  t.lambda_star_unit = 2.0 * (n + 1.0) / n / t.K_n;
  return t;
}

ConstantsTable closed_form_constants_n1() {
  const double p2 = kPi * kPi;
  ConstantsTable t;
  t.n = 1;
  t.K_n = 1.0 / (2.0 * kPi);
  t.bubble_integral = p2 / 4.0;
  t.kappa_v = 16.0;
  t.c1 = p2 / 4.0;
  t.c2 = p2 / 16.0;
  t.c3 = 5.0 * p2 / 192.0;
  t.e1 = p2 / 8.0;
  t.e2 = p2 / 16.0;
  t.e3 = p2 / 16.0;
  t.e4 = p2 / 32.0;
  t.ball_volume = p2 / 2.0;
  t.sphere_measure = 2.0 * p2;
  t.d1 = 8.0 * t.sphere_measure;
  t.d2 = 8.0 * t.sphere_measure;
  t.d3 = 0.0;
  t.lambda_star_unit = 8.0 * kPi;
  return t;
}

SobolevReport verify_sobolev_identities(const ConstantsTable& table, double tol) {
  SobolevReport r;
  r.n = table.n;
  const int n = table.n;
  r.bubble_integral = integrate_radial(find_kernel(n, "bubble"), tol).value;
  const double target = std::pow(1.0 / (2.0 * kPi * n * n), -(n + 1.0));
  r.kappa_v = target / r.bubble_integral;
  r.gradient_integral = integrate_radial(find_kernel(n, "gradient"), tol).value;
  r.bubble_energy = r.kappa_v * (0.5 * r.gradient_integral - n / (2.0 * (n + 1.0)) * r.bubble_integral);
  r.target_energy = target / (2.0 * (n + 1.0));
  r.relative_mismatch = (r.bubble_energy - r.target_energy) / r.target_energy;
  return r;
}

std::string constants_to_json(const ConstantsTable& t, int indent) {
  nlohmann::ordered_json j;
  j["n"] = t.n;
  j["K_n"] = t.K_n;
  j["kappa_v"] = t.kappa_v;
  j["kappa_v_error"] = t.err_kappa_v;
  j["c1"] = t.c1;
  j["c1_error"] = t.err_c1;
  j["c2"] = t.c2;
  j["c2_error"] = t.err_c2;
  j["c3"] = t.c3;
  j["c3_error"] = t.err_c3;
  j["d1"] = t.d1;
  j["d1_error"] = t.err_d1;
  j["d2"] = t.d2;
  j["d2_error"] = t.err_d2;
  j["d3"] = t.d3;
  j["d3_error"] = 0.0;
  j["e1"] = t.e1;
  j["e1_error"] = t.err_e1;
  j["e2"] = t.e2;
  j["e2_error"] = t.err_e2;
  j["e3"] = t.e3;
  j["e3_error"] = t.err_e3;
  j["e4"] = t.e4;
  j["e4_error"] = t.err_e4;
  j["lambda_star_unit"] = t.lambda_star_unit;
  j["sphere_measure"] = t.sphere_measure;
  j["sphere_measure_error"] = t.err_sphere_measure;
  j["ball_volume"] = t.ball_volume;
  j["ball_volume_error"] = t.err_ball_volume;
  j["bubble_integral"] = t.bubble_integral;
  j["bubble_integral_error"] = t.err_bubble_integral;
  const auto q = t.ratios();
  j["d2_over_c2"] = q.d2_c2;
  j["e2_over_c2"] = q.e2_c2;
  j["e3_over_c3"] = q.e3_c3;
  j["e4_over_c3"] = q.e4_c3;
  j["tol"] = t.tol;
  return j.dump(indent);
}

ConstantsTable constants_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("constants file: ") + e.what());
  }
  ConstantsTable t;
  auto get = [&](const char* key, double& dst, bool required = true) {
    if (j.contains(key)) {
      dst = j.at(key).get<double>();
    } else if (required) {
      throw ConfigError(std::string("constants file: missing field '") + key + "'");
    }
  };
  t.n = j.value("n", 1);
  get("K_n", t.K_n);
  get("kappa_v", t.kappa_v);
  get("c1", t.c1);
  get("c2", t.c2);
  get("c3", t.c3);
  get("d1", t.d1);
  get("d2", t.d2);
  get("d3", t.d3);
  get("e1", t.e1);
  get("e2", t.e2);
  get("e3", t.e3);
  get("e4", t.e4);
  get("lambda_star_unit", t.lambda_star_unit);
  get("sphere_measure", t.sphere_measure);
  get("ball_volume", t.ball_volume);
  get("bubble_integral", t.bubble_integral, false);
  get("tol", t.tol, false);
  get("kappa_v_error", t.err_kappa_v, false);
  get("c1_error", t.err_c1, false);
  get("c2_error", t.err_c2, false);
  get("c3_error", t.err_c3, false);
  get("d1_error", t.err_d1, false);
  get("d2_error", t.err_d2, false);
  get("e1_error", t.err_e1, false);
  get("e2_error", t.err_e2, false);
  get("e3_error", t.err_e3, false);
  get("e4_error", t.err_e4, false);
  get("sphere_measure_error", t.err_sphere_measure, false);
  get("ball_volume_error", t.err_ball_volume, false);
  get("bubble_integral_error", t.err_bubble_integral, false);
  return t;
}

std::string sobolev_report_to_json(const SobolevReport& r, int indent) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["bubble_integral_lebesgue"] = r.bubble_integral;
  j["kappa_v"] = r.kappa_v;
  j["gradient_integral_lebesgue"] = r.gradient_integral;
  j["bubble_energy"] = r.bubble_energy;
  j["target_energy"] = r.target_energy;
  j["relative_mismatch"] = r.relative_mismatch;
  return j.dump(indent);
}

}  // namespace crflow
