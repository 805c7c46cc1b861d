#include <doctest.h>

#include <cmath>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"
#include "crflow/quadrature.hpp"

using namespace crflow;

TEST_SUITE("quadrature") {

TEST_CASE("n = 1 table against closed forms") {
  const auto t = compute_constants(1, 1e-8);
  const auto c = closed_form_constants_n1();
  const double pi2 = kPi * kPi;
  CHECK(t.K_n == 1.0 / (2.0 * kPi));
  CHECK(t.d3 == 0.0);
  for (auto [got, want] : {std::pair{t.c1, c.c1}, {t.c2, c.c2}, {t.c3, c.c3}, {t.e1, c.e1}, {t.e2, c.e2},
                           {t.e3, c.e3}, {t.e4, c.e4}, {t.d1, c.d1}, {t.d2, c.d2}, {t.kappa_v, c.kappa_v},
                           {t.sphere_measure, c.sphere_measure}, {t.ball_volume, c.ball_volume}})
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
  CHECK(t.c1 == doctest::Approx(pi2 / 4).epsilon(1e-10));
  CHECK(t.kappa_v * t.c1 == doctest::Approx(4 * pi2).epsilon(1e-10));
  CHECK(t.e3 == doctest::Approx(pi2 / 16).epsilon(1e-10));
  CHECK(t.ball_volume == doctest::Approx(pi2 / 2).epsilon(1e-10));
  CHECK(t.sphere_measure == doctest::Approx(2 * pi2).epsilon(1e-10));
  CHECK(t.e2 > 0.0);
  CHECK(t.err_c1 <= 1e-8);
  CHECK(t.err_e4 <= 1e-8);
}

TEST_CASE("shadow ratios are independent of the volume calibration") {
  const auto t = compute_constants(1, 1e-8);
  const auto r = t.ratios();
  CHECK(r.d2_c2 == doctest::Approx(256.0).epsilon(1e-8));
  CHECK(r.e2_c2 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.e3_c3 == doctest::Approx(2.4).epsilon(1e-8));
  CHECK(r.e4_c3 == doctest::Approx(1.2).epsilon(1e-8));
  ConstantsTable s = t;
  for (double* v : {&s.c1, &s.c2, &s.c3, &s.d1, &s.d2, &s.e1, &s.e2, &s.e3, &s.e4}) *v *= t.kappa_v;
  const auto rs = s.ratios();
  CHECK(rs.d2_c2 == doctest::Approx(r.d2_c2).epsilon(1e-14));
  CHECK(rs.e4_c3 == doctest::Approx(r.e4_c3).epsilon(1e-14));
}

TEST_CASE("sharp Sobolev identities for n = 1, 2, 3") {
  for (int n = 1; n <= 3; ++n) {
    const auto t = compute_constants(n, 1e-8);
    CHECK(t.K_n == doctest::Approx(1.0 / (2.0 * kPi * n * n)));
    const auto rep = verify_sobolev_identities(t);
    CHECK(std::abs(rep.relative_mismatch) < 1e-8);
    CHECK(t.kappa_v * t.bubble_integral == doctest::Approx(std::pow(t.K_n, -(n + 1.0))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(compute_constants(4, 1e-8), DomainError);
  CHECK_THROWS_AS(compute_constants(1, 0.0), DomainError);
}

TEST_CASE("divergent kernels are rejected") {
  RadialKernel k{"slow", 1, -4.0, [](double r, double s) { return 1.0 / (1.0 + std::pow(r * r * r * r + s * s, 1.0)); }};
  CHECK_THROWS_AS(integrate_radial(k, 1e-8), IntegrabilityError);
  CHECK_THROWS_AS(find_kernel(1, "nope"), DomainError);
}

TEST_CASE("Gaussian oracle") {
  // int exp(-|z|^2 - s^2) dz ds = pi * sqrt(pi)
  RadialKernel k{"gauss", 1, -100.0, [](double r, double s) { return std::exp(-r * r - s * s); }};
  const auto e = integrate_radial(k, 1e-10);
  CHECK(e.value == doctest::Approx(kPi * std::sqrt(kPi)).epsilon(1e-10));
}

TEST_CASE("json round trip") {
  const auto t = compute_constants(1, 1e-8);
  const auto back = constants_from_json(constants_to_json(t));
  CHECK(back.c1 == t.c1);
  CHECK(back.e4 == t.e4);
  CHECK(back.err_e2 == t.err_e2);
  CHECK(back.kappa_v == t.kappa_v);
  CHECK_THROWS(constants_from_json("{not json"));
}

}  // TEST_SUITE
