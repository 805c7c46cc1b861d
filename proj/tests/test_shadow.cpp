#include <doctest.h>

#include <cmath>
#include <memory>

#include "crflow/errors.hpp"
#include "crflow/quadrature.hpp"
#include "crflow/shadow.hpp"

using namespace crflow;

namespace {

ShadowState base_state(Landscape l, double eps = 0.1, double mass = 0.0) {
  ShadowState s;
  s.eps = eps;
  s.landscape = std::make_shared<const Landscape>(std::move(l));
  s.mass = mass;
  s.lambda = 1.0;
  s.ratios = closed_form_constants_n1().ratios();
  return s;
}

}  // namespace

TEST_SUITE("shadow") {

TEST_CASE("landscape derivatives match finite differences") {
  const double h = 1e-4;
  for (const auto& l : {peak_landscape(0.5, 1.0, 0.4, 0.1, -0.2), quadratic_landscape(1.0, 2.0, 3.0, 0.3, 0.1),
                        linear_landscape(1.0, 0.5, -0.25)}) {
    const ChartCoord p{0.2, -0.15, 0.3};
    // X = d_x + 2y d_s, Y = d_y - 2x d_s; f is independent of s
    const double fx = (l.f({p.x + h, p.y, p.s}) - l.f({p.x - h, p.y, p.s})) / (2 * h);
    const double fy = (l.f({p.x, p.y + h, p.s}) - l.f({p.x, p.y - h, p.s})) / (2 * h);
    const double fxx = (l.f({p.x + h, p.y, p.s}) - 2 * l.f(p) + l.f({p.x - h, p.y, p.s})) / (h * h);
    const double fyy = (l.f({p.x, p.y + h, p.s}) - 2 * l.f(p) + l.f({p.x, p.y - h, p.s})) / (h * h);
    CHECK(l.grad(p)[0] == doctest::Approx(fx).epsilon(1e-6).scale(1.0));
    CHECK(l.grad(p)[1] == doctest::Approx(fy).epsilon(1e-6).scale(1.0));
    CHECK(l.lap(p) == doctest::Approx((fxx + fyy) / 4).epsilon(1e-5).scale(1.0));
    const double gx = (l.lap({p.x + h, p.y, p.s}) - l.lap({p.x - h, p.y, p.s})) / (2 * h);
    CHECK(l.grad_lap(p)[0] == doctest::Approx(gx).epsilon(1e-6).scale(1.0));
  }
  CHECK(quadratic_landscape(1.0, 2.0, 6.0).lap({}) == doctest::Approx(-2.0));
}

TEST_CASE("flat constant landscape without mass is stationary") {
  auto s = base_state(constant_landscape(1.0));
  const auto r = shadow_rhs(s);
  CHECK(r.eps_dot == 0.0);
  CHECK(r.a_dot.x == 0.0);
  CHECK(r.a_dot.y == 0.0);
  CHECK(r.a_dot.s == 0.0);
  const auto traj = integrate(s, {1.0, 0.1});
  CHECK(traj.final_state.eps == s.eps);
  CHECK(traj.stop == ShadowStop::completed);
  CHECK(traj.samples.size() == 11);
}

TEST_CASE("nonpositive f is a domain error") {
  auto s = base_state(constant_landscape(-1.0));
  CHECK_THROWS_AS(shadow_rhs(s), DomainError);
  CHECK_THROWS_AS(zeta(s), DomainError);
  CHECK_THROWS_AS(integrate(s, {1.0, 0.1}), ShadowDomainError);
  // a step far too large drives eps through zero
  auto d = base_state(quadratic_landscape(1.0, 40.0, 40.0), 0.5);
  d.lambda = 100.0;
  try {
    integrate(d, {10.0, 1.0});
    FAIL("expected ShadowDomainError");
  } catch (const ShadowDomainError& e) {
    CHECK(e.trajectory.samples.size() == 1);
    CHECK(e.trajectory.final_state.eps == 0.5);
  }
  CHECK_THROWS_AS(integrate(s, {1.0, 0.0}), DomainError);
}

TEST_CASE("threshold separates growth from decay") {
  const auto r = closed_form_constants_n1().ratios();
  const double mass = 0.01;
  const double thr = eps_threshold(r, mass);
  CHECK(thr == doctest::Approx(-64.0 * mass));
  auto at = [&](double lap) {
    // quadratic(1, k, k) has Delta f = -k/2 at the top
    auto s = base_state(quadratic_landscape(1.0, -2.0 * lap, -2.0 * lap), 0.1, mass);
    return shadow_rhs(s).eps_dot;
  };
  CHECK(std::abs(at(thr)) < 1e-15);
  CHECK(at(thr * 0.9) > 0.0);
  CHECK(at(thr * 1.1) < 0.0);
}

TEST_CASE("center drifts along the gradient") {
  auto s = base_state(linear_landscape(1.0, 0.3, -0.4), 0.1);
  s.a = {0.2, 0.1, 0.0};
  const auto r = shadow_rhs(s);
  // no Laplacian terms: a' = lambda (e3/c3) eps^2 grad f
  const double k = 2.4 * 0.01;
  CHECK(r.a_dot.x == doctest::Approx(k * 0.3));
  CHECK(r.a_dot.y == doctest::Approx(-k * 0.4));
  CHECK(r.a_dot.s == doctest::Approx(2 * 0.1 * r.a_dot.x - 2 * 0.2 * r.a_dot.y));
  CHECK(r.eps_dot == 0.0);
}

TEST_CASE("zeta") {
  auto s = base_state(constant_landscape(1.0), std::exp(-1.0));
  CHECK(zeta(s) == doctest::Approx(-1.0));
  auto t = base_state(constant_landscape(2.0), std::exp(-1.0));
  CHECK(zeta(t) == doctest::Approx(-0.5));
}

TEST_CASE("zeta derivative follows the chain rule along the flow") {
  auto s = base_state(peak_landscape(0.5, 1.0, 0.4), 0.1, 0.01);
  s.a = {0.2, -0.1, 0.0};
  s.lambda = 10.0;
  const double h = 1e-3;
  auto fwd = integrate(s, {h, h / 4});
  ShadowState back = s;
  back.lambda = -s.lambda;
  auto bwd = integrate(back, {h, h / 4});
  const double fd = (fwd.samples.back().zeta - bwd.samples.back().zeta) / (2 * h);
  CHECK(zeta_dot(s) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("positive mass makes eps grow monotonically to the ceiling") {
  auto s = base_state(constant_landscape(1.0), 0.05, 0.5);
  s.lambda = 10.0;
  const auto traj = integrate(s, {100.0, 0.01});
  CHECK(traj.stop == ShadowStop::ceiling);
  CHECK(to_string(traj.stop) == "eps_ceiling");
  for (std::size_t i = 1; i < traj.samples.size(); ++i) CHECK(traj.samples[i].eps > traj.samples[i - 1].eps);
  const auto rep = zeta_lower_bound_check(traj, *s.landscape, 1.0);
  CHECK(rep.ok);
  CHECK(rep.checked == static_cast<int>(traj.samples.size()) - 1);
}

TEST_CASE("lambda rescales time") {
  auto s = base_state(peak_landscape(0.5, 1.0, 0.4), 0.1, 0.01);
  s.a = {0.2, -0.1, 0.0};
  s.lambda = 2.0;
  auto t = s;
  t.lambda = 1.0;
  const auto a = integrate(s, {1.0, 1e-3});
  const auto b = integrate(t, {2.0, 2e-3});
  CHECK(a.final_state.eps == doctest::Approx(b.final_state.eps).epsilon(1e-12));
  CHECK(a.final_state.a.x == doctest::Approx(b.final_state.a.x).epsilon(1e-12));
  CHECK(a.final_state.a.s == doctest::Approx(b.final_state.a.s).epsilon(1e-12));
}

TEST_CASE("RK4 converges at fourth order") {
  auto s = base_state(peak_landscape(0.5, 1.0, 0.4), 0.1, 0.01);
  s.a = {0.2, -0.1, 0.0};
  s.lambda = 10.0;
  const auto ref = integrate(s, {2.0, 0.00125}).final_state;
  std::vector<double> err;
  for (double dt : {0.02, 0.01, 0.005}) {
    const auto f = integrate(s, {2.0, dt}).final_state;
    err.push_back(std::abs(f.eps - ref.eps) + std::abs(f.a.x - ref.a.x) + std::abs(f.a.y - ref.a.y));
  }
  CHECK(err[0] / err[1] > 12.0);
  CHECK(err[1] / err[2] > 12.0);
}

TEST_CASE("c_star condition") {
  const std::vector<ChartCoord> grid{{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}};
  CHECK(c_star_condition(constant_landscape(1.0), grid, 1e-3));
  CHECK_FALSE(c_star_condition(constant_landscape(-1.0), grid, 10.0));
  const auto q = quadratic_landscape(1.0, 4.0, 4.0);
  CHECK_FALSE(c_star_condition(q, grid, 1.5));
  CHECK(c_star_condition(q, grid, 2.5));
  CHECK(c_star_condition(q, {}, 0.0));
}

TEST_CASE("c_star sweep") {
  auto s = base_state(quadratic_landscape(1.0, 0.04, 0.04), 0.1);
  s.lambda = 10.0;
  const auto rows = c_star_sweep(s, {0.0, 0.01}, {1.0, 0.01});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].threshold == 0.0);
  CHECK(rows[1].threshold == doctest::Approx(-0.64));
  CHECK(rows[0].lap_over_f == doctest::Approx(-0.02));
  CHECK(rows[0].final_eps < 0.1);
  CHECK(rows[1].final_eps > 0.1);
  CHECK(rows[1].zeta_nondecreasing);
}

}  // TEST_SUITE
