#include "crflow/heisenberg.hpp"

#include <algorithm>
#include <random>

#include "crflow/errors.hpp"

namespace crflow {

double HeisenbergPoint::z_norm2() const {
  double r2 = 0.0;
  for (const auto& c : z) r2 += std::norm(c);
  return r2;
}

double koranyi_gauge(const HeisenbergPoint& p) { return koranyi_gauge(p.z_norm2(), p.s); }

HeisenbergPoint dilate(double delta, const HeisenbergPoint& p) {
  if (!(delta > 0.0)) throw DomainError("dilate: delta must be positive");
  HeisenbergPoint q = p;
  for (auto& c : q.z) c *= delta;
  q.s *= delta * delta;
  return q;
}

double bubble_value(const BubbleSpec& spec, const HeisenbergPoint& p) {
  if (!(spec.scale > 0.0)) throw DomainError("bubble_value: scale must be positive");
  if (spec.n < 1 || p.dim() != spec.n || spec.center.dim() != spec.n)
    throw ShapeError("bubble_value: dimension mismatch");
  const int n = spec.n;
  double r2 = 0.0;
  for (int j = 0; j < n; ++j) r2 += std::norm(p.z[j] - spec.center.z[j]);
  const double ds = p.s - spec.center.s;
  const double m = spec.scale / n;
  const double im = r2 + m * m;
  const double modulus = std::sqrt(ds * ds + im * im);
  return std::pow(spec.scale / modulus, n);
}

namespace {

HeisenbergPoint flow_x(const HeisenbergPoint& p, double t) {
  const double x = p.z[0].real(), y = p.z[0].imag();
  return HeisenbergPoint(x + t, y, p.s + 2.0 * y * t);
}

HeisenbergPoint flow_y(const HeisenbergPoint& p, double t) {
  const double x = p.z[0].real(), y = p.z[0].imag();
  return HeisenbergPoint(x, y + t, p.s - 2.0 * x * t);
}

double frame_square_sum(const std::function<double(const HeisenbergPoint&)>& fn,
                        const HeisenbergPoint& p, double h) {
  const double f0 = fn(p);
  const double xx = fn(flow_x(p, h)) - 2.0 * f0 + fn(flow_x(p, -h));
  const double yy = fn(flow_y(p, h)) - 2.0 * f0 + fn(flow_y(p, -h));
  return (xx + yy) / (h * h);
}

}  // namespace

double continuum_sublaplacian(const std::function<double(const HeisenbergPoint&)>& fn,
                              const HeisenbergPoint& p, double h, double kappa) {
  if (!(h > 0.0)) throw DomainError("continuum_sublaplacian: h must be positive");
  if (p.dim() != 1) throw ShapeError("continuum_sublaplacian: n = 1 only");
  return kappa * frame_square_sum(fn, p, h);
}

KappaCalibration calibrate_kappa_delta(double h, int samples, unsigned seed) {
  const BubbleSpec spec{HeisenbergPoint(0.0, 0.0, 0.0), 1.0, 1};
  auto U = [&](const HeisenbergPoint& q) { return bubble_value(spec, q); };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  KappaCalibration out;
  out.raw.assign(3, 0.0);
  std::vector<double> extrapolated;
  for (int i = 0; i < samples; ++i) {
    const double px = dist(rng), py = dist(rng), ps = dist(rng);
    const HeisenbergPoint p(px, py, ps);
    const double u3 = std::pow(U(p), 3);
    double k[3];
    for (int l = 0; l < 3; ++l) {
      const double hl = h / (1 << l);
      k[l] = -u3 / frame_square_sum(U, p, hl);
      out.raw[l] += k[l] / samples;
    }
    const double r1 = (4.0 * k[1] - k[0]) / 3.0;
    const double r2 = (4.0 * k[2] - k[1]) / 3.0;
    extrapolated.push_back((16.0 * r2 - r1) / 15.0);
  }
  double mean = 0.0;
  for (double v : extrapolated) mean += v;
  mean /= static_cast<double>(extrapolated.size());
  double spread = 0.0;
  for (double v : extrapolated) spread = std::max(spread, std::abs(v - mean));
  out.kappa = mean;
  out.spread = spread;
  return out;
}

}  // namespace crflow
