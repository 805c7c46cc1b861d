#include <doctest.h>

#include <cmath>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"
#include "crflow/manifold.hpp"
#include "crflow/random.hpp"

using namespace crflow;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("grid validation") {
  CHECK(grid_violations({32, 32, 32, 8}).empty());
  CHECK(grid_violations({16, 32, 4, 8}).empty());
  const auto v = grid_violations({16, 32, 3, 8});
  CHECK(mentions(v, "K*Ns must be an integer multiple of Ny"));
  CHECK(mentions(v, ">= 4"));
  CHECK(mentions(grid_violations({16, 16, 16, 0}), "K must be >= 1"));
  CHECK_THROWS_AS(make_model({16, 48, 16, 1}), ConfigError);
}

TEST_CASE("model construction rejects inconsistent curvature") {
  GridSpec g{8, 8, 8, 8};
  CHECK_THROWS_AS(make_model(g, YamabeSign::positive, std::vector<double>(8 * 8 * 8, -1.0)), ConfigError);
  CHECK_THROWS_AS(make_model(g, YamabeSign::positive, std::vector<double>(5, 1.0)), ShapeError);
  CHECK_THROWS_AS(make_model(g, YamabeSign::zero, std::vector<double>(8 * 8 * 8, 1.0)), ConfigError);
  CHECK_NOTHROW(make_model(g, YamabeSign::positive, std::vector<double>(8 * 8 * 8, 1.0)));
}

TEST_CASE("operator certificate") {
  for (int N : {8, 16}) {
    auto m = make_model({N, N, N, 8});
    const auto& c = m->certificate();
    CHECK(c.symmetry_error < 1e-12);
    CHECK(c.constant_error < 1e-12);
    CHECK(c.max_quadratic_form <= 0.0);
  }
}

TEST_CASE("volume and weights") {
  auto m = make_model({16, 16, 16, 8});
  const double P = 1.0 / 8.0;
  CHECK(m->s_period() == doctest::Approx(P));
  CHECK(m->total_volume() == doctest::Approx(64.0 * P));
  CHECK(integrate(*m, ScalarField(m, 1.0)) == doctest::Approx(8.0));
  CHECK(sobolev_norm(*m, ScalarField(m, 2.0)) == doctest::Approx(2.0 * std::sqrt(8.0)));
  CHECK(m->injectivity_radius() == doctest::Approx(0.5));
  CHECK(make_model({16, 16, 16, 1})->injectivity_radius() == doctest::Approx(0.5));
  auto small = make_model({16, 16, 64, 64});
  CHECK(small->injectivity_radius() == doctest::Approx(std::sqrt(2.0 / 64.0)));
}

TEST_CASE("sub-Laplacian on horizontal modes converges at second order") {
  // Delta cos(2 pi x) = -kappa 4 pi^2 cos(2 pi x); same for y
  std::vector<double> err;
  for (int N : {8, 16, 32}) {
    auto m = make_model({N, N, N, 8});
    auto u = sample(m, [](const PolarPoint& p) { return std::cos(2 * kPi * p.x) + std::sin(2 * kPi * p.y); });
    auto Lu = sublaplacian(*m, u);
    double e = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) e = std::max(e, std::abs(Lu[n] + kKappaDelta * 4 * kPi * kPi * u[n]));
    err.push_back(e);
  }
  CHECK(err[0] / err[1] > 3.5);
  CHECK(err[1] / err[2] > 3.5);
}

TEST_CASE("gradient squared of a constant vanishes") {
  auto m = make_model({8, 8, 8, 8});
  ScalarField g(m);
  const ScalarField c(m, 3.0);
  m->gradient_squared(c.values, g.values);
  CHECK(g.max() == 0.0);
}

TEST_CASE("chart gauges") {
  auto m = make_model({16, 16, 16, 8});
  const std::size_t a = m->index(0, 4, 3);
  const auto pa = m->coords(a);
  CHECK(m->chart_point(pa, a).rho == 0.0);
  CHECK(m->chart_point(pa, m->index(1, 4, 3)).rho == doctest::Approx(m->hx()));
  // x = 0 so the Y-neighbour in the frame is the lattice neighbour
  CHECK(m->chart_point(pa, m->index(0, 5, 3)).rho == doctest::Approx(m->hy()));
  CHECK(m->chart_point(pa, m->index(0, 4, 4)).rho == doctest::Approx(std::sqrt(4.0 * m->hs())));
}

TEST_CASE("chart is invariant under lattice relabelling of the center") {
  auto m = make_model({16, 16, 16, 8});
  const double P = m->s_period();
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const PolarPoint a{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.0, P)};
    const PolarPoint ay{a.x, a.y + 1.0, a.t};
    const PolarPoint at{a.x, a.y, a.t + P};
    const PolarPoint ax{a.x + 1.0, a.y, a.t + a.y};
    for (std::size_t n = 0; n < m->size(); n += 37) {
      const double r = m->chart_point(a, n).rho;
      CHECK(m->chart_point(ay, n).rho == doctest::Approx(r).epsilon(1e-10));
      CHECK(m->chart_point(at, n).rho == doctest::Approx(r).epsilon(1e-10));
      CHECK(m->chart_point(ax, n).rho == doctest::Approx(r).epsilon(1e-10));
    }
  }
}

TEST_CASE("chart gauge is symmetric in near pairs") {
  auto m = make_model({16, 16, 16, 8});
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = static_cast<std::size_t>(rng.uniform() * m->size());
    const std::size_t b = static_cast<std::size_t>(rng.uniform() * m->size());
    const double r1 = m->chart_point(m->coords(a), b).rho;
    const double r2 = m->chart_point(m->coords(b), a).rho;
    if (r1 < 0.4) CHECK(r2 == doctest::Approx(r1).epsilon(1e-10));
  }
}

TEST_CASE("field shape checks") {
  auto m1 = make_model({8, 8, 8, 8});
  auto m2 = make_model({8, 8, 16, 8});
  CHECK_THROWS_AS(ScalarField(m1, std::vector<double>(3, 1.0)), ShapeError);
  CHECK_THROWS_AS(inner(*m1, ScalarField(m1, 1.0), ScalarField(m2, 1.0)), ShapeError);
  CHECK_THROWS_AS(integrate_wrt(*m1, ScalarField(m1, 1.0), ScalarField(m1, -1.0)), DomainError);
}

}  // TEST_SUITE
