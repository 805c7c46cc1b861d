#include <doctest.h>

#include <cmath>

#include "crflow/bubbles.hpp"
#include "crflow/errors.hpp"
#include "crflow/flow.hpp"
#include "crflow/heisenberg.hpp"

using namespace crflow;

namespace {

GreenData flat(std::size_t a, double Lambda) {
  GreenData g;
  g.flat = true;
  g.pole = a;
  g.mass = Lambda;
  return g;
}

// phi evaluated straight from the chart at an arbitrary center (flat mode)
std::vector<double> phi_at(const ManifoldModel& m, const PolarPoint& a, double eps, double delta, double Lambda) {
  const auto chart = local_chart(m, a);
  std::vector<double> out(chart.size());
  for (std::size_t n = 0; n < chart.size(); ++n) {
    const auto& c = chart[n];
    const double q = eps * eps + c.x * c.x + c.y * c.y;
    const double chi = cutoff(c.rho, delta);
    double v = chi / std::sqrt(c.s * c.s + q * q);
    if (chi < 1.0) v += (1.0 - chi) * (1.0 / (c.rho * c.rho) + Lambda);
    out[n] = eps * v;
  }
  return out;
}

std::vector<double> positive_R0(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_SUITE("bubbles") {

TEST_CASE("cutoff profile") {
  const double d = 0.2;
  CHECK(cutoff(0.0, d) == 1.0);
  CHECK(cutoff(d, d) == 1.0);
  CHECK(cutoff(1.5 * d, d) == doctest::Approx(0.5));
  CHECK(cutoff(2.0 * d, d) == 0.0);
  CHECK(cutoff(5.0 * d, d) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double x = 1.0 + i / 100.0;
    const double c = cutoff(x * d, d);
    CHECK(c <= prev);
    prev = c;
    if (i > 0 && i < 100) {
      const double h = 1e-6;
      const double fd = (cutoff((x + h) * d, d) - cutoff((x - h) * d, d)) / (2 * h);
      CHECK(cutoff_profile_derivative(x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(cutoff_profile_derivative(1.0) == 0.0);
  CHECK(cutoff_profile_derivative(2.0) == 0.0);
}

TEST_CASE("flat Green's function has mass Lambda") {
  auto m = make_model({16, 16, 16, 8});
  const auto g = green_function(m, m->index(3, 5, 7), GreenOptions{2.5});
  CHECK(g.flat);
  CHECK(g.mass == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(g.fit_C < 1e-9);
  CHECK(g.annulus_nodes >= 3);
  CHECK(std::isinf(g.field[m->index(3, 5, 7)]));
}

TEST_CASE("positive mode Green's function integrates to the source") {
  const GridSpec gs{16, 16, 16, 8};
  auto m = make_model(gs, YamabeSign::positive, positive_R0(16 * 16 * 16));
  const std::size_t a = m->index(4, 4, 4);
  const auto g = green_function(m, a, GreenOptions{});
  CHECK_FALSE(g.flat);
  CHECK(std::isinf(g.field[a]));
  double s = g.pole_value * m->weight(a);
  for (std::size_t n = 0; n < m->size(); ++n)
    if (n != a) s += g.field[n] * m->weight(n);
  // R0 int G dv = 8 pi kappa_v
  CHECK(s == doctest::Approx(8.0 * kPi * m->kappa_v()).epsilon(1e-8));
  CHECK(g.raw_scale == doctest::Approx(8.0 * kPi * 16.0));
  CHECK(g.field.min() > 0.0);

  GreenCache cache(m, GreenOptions{});
  const auto& g1 = cache.get(a);
  const auto& g2 = cache.get(a);
  CHECK(&g1 == &g2);
  CHECK(g1.mass == g.mass);
}

TEST_CASE("test function peak and shape") {
  auto m = make_model({16, 16, 16, 8});
  const std::size_t a = m->index(8, 8, 8);
  const double eps = 0.1, delta = 0.2;
  const auto phi = test_function(m, a, eps, delta, flat(a, 1.0));
  CHECK(phi[a] == doctest::Approx(1.0 / eps));
  CHECK(argmax(phi) == a);
  CHECK(phi.min() > 0.0);
  CHECK_THROWS_AS(test_function(m, a, 0.3, 0.2, flat(a, 1.0)), DomainError);
  CHECK_THROWS_AS(test_function(m, a, 0.1, 0.6, flat(a, 1.0)), DomainError);
  CHECK_THROWS_AS(phi_k(m, a, eps, delta, flat(a, 1.0), 4), DomainError);
}

TEST_CASE("phi2 is the eps derivative") {
  auto m = make_model({16, 16, 16, 8});
  const std::size_t a = m->index(5, 9, 2);
  const double eps = 0.08, delta = 0.2, h = 1e-6;
  const auto g = flat(a, 1.3);
  const auto p2 = phi_k(m, a, eps, delta, g, 2)[0];
  const auto up = test_function(m, a, eps + h, delta, g), dn = test_function(m, a, eps - h, delta, g);
  for (std::size_t n = 0; n < m->size(); ++n) {
    const double fd = eps * (up[n] - dn[n]) / (2 * h);
    CHECK(p2[n] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("phi3 is the horizontal derivative in the center") {
  auto m = make_model({16, 16, 32, 8});
  const std::size_t a = m->index(5, 9, 2);
  const auto pa = m->coords(a);
  const double eps = 0.08, delta = 0.15, Lambda = 1.3, h = 1e-6;
  const auto p3 = phi_k(m, a, eps, delta, flat(a, Lambda), 3);
  REQUIRE(p3.size() == 2);
  const auto chart = local_chart(*m, a);
  // X = d_x, Y = d_y + x d_t in polarized coordinates
  const PolarPoint xp{pa.x + h, pa.y, pa.t}, xm{pa.x - h, pa.y, pa.t};
  const PolarPoint yp{pa.x, pa.y + h, pa.t + pa.x * h}, ym{pa.x, pa.y - h, pa.t - pa.x * h};
  const auto fxp = phi_at(*m, xp, eps, delta, Lambda), fxm = phi_at(*m, xm, eps, delta, Lambda);
  const auto fyp = phi_at(*m, yp, eps, delta, Lambda), fym = phi_at(*m, ym, eps, delta, Lambda);
  int checked = 0;
  for (std::size_t n = 0; n < m->size(); ++n) {
    if (chart[n].rho < 0.02 || chart[n].rho > 0.4) continue;
    ++checked;
    CHECK(p3[0][n] == doctest::Approx(eps * (fxp[n] - fxm[n]) / (2 * h)).epsilon(1e-5).scale(1.0));
    CHECK(p3[1][n] == doctest::Approx(eps * (fyp[n] - fym[n]) / (2 * h)).epsilon(1e-5).scale(1.0));
  }
  CHECK(checked > 1000);
}

TEST_CASE("fit recovers an exact glued bubble") {
  auto m = make_model({16, 16, 16, 8});
  const std::size_t a = m->index(6, 10, 3);
  const double eps = 0.1, delta = 0.2, alpha = 2.0;
  auto u = test_function(m, a, eps, delta, flat(a, 1.0));
  for (double& v : u.values) v *= alpha;
  const auto s = make_state(m, u, ScalarField(m, 1.0));
  FitOptions o;
  o.delta = delta;
  o.Lambda = 1.0;
  const auto fit = fit_bubble(s, std::nullopt, o);
  CHECK(fit.ok);
  CHECK(fit.center == a);
  CHECK(fit.eps == doctest::Approx(eps).epsilon(1e-5));
  CHECK(fit.alpha == doctest::Approx(alpha).epsilon(1e-5));
  CHECK(fit.relative_objective < 1e-10);
  CHECK(fit.evaluations <= o.budget + 50);
  CHECK_FALSE(fit.ambiguous);
}

TEST_CASE("constant data is not in the bubble neighbourhood") {
  auto m = make_model({16, 16, 16, 8});
  ScalarField f(m, 1.0);
  const auto s = make_state(m, normalize_constraint(*m, ScalarField(m, 1.0), f), f);
  const auto fit = fit_bubble(s);
  CHECK_FALSE(fit.in_D_u);
  CHECK(fit.relative_objective > 1e-3);
}

TEST_CASE("sigma_k vanishes at an exact solution") {
  const std::size_t N = 16 * 16 * 16;
  auto m = make_model({16, 16, 16, 8}, YamabeSign::positive, positive_R0(N));
  ScalarField f(m, 1.0);
  const auto s = make_state(m, normalize_constraint(*m, ScalarField(m, 1.0), f), f);
  BubbleFit fit;
  fit.center = m->index(4, 4, 4);
  fit.eps = 0.1;
  fit.delta = 0.2;
  GreenCache cache(m, GreenOptions{});
  for (int k = 1; k <= 3; ++k)
    for (double v : sigma_k(s, fit, cache.get(fit.center), k)) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("energy threshold and gate") {
  CHECK(lambda_star(1.0) == doctest::Approx(8.0 * kPi));
  CHECK(lambda_star(4.0) == doctest::Approx(4.0 * kPi));
  CHECK_THROWS_AS(lambda_star(0.0), DomainError);
  CHECK(single_bubble_gate(1.0, 1.0));
  CHECK_FALSE(single_bubble_gate(1.5, 1.0));
}

TEST_CASE("initial data") {
  auto m = make_model({32, 32, 32, 8});
  auto f = sample(m, [](const PolarPoint& p) { return 0.5 + 0.25 * std::cos(2 * kPi * p.x); });
  CHECK_THROWS_AS(initial_data(m, f, std::nullopt, 0.1), DomainError);
  const auto d = initial_data(m, f, std::nullopt, 0.125, 0.2);
  CHECK(d.center == argmax(f));
  CHECK(constraint_value(d.state) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.lambda_star == doctest::Approx(lambda_star(f)));
  CHECK(d.gate == (d.energy < std::sqrt(2.0) * d.lambda_star));
  CHECK(d.Lambda == doctest::Approx(flat_mode_Lambda(*m, f)));
  CHECK_THROWS_AS(initial_data(m, ScalarField(m, -1.0), std::nullopt, 0.125, 0.2), DomainError);
}

}  // TEST_SUITE
