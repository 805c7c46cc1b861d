#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace crflow {

inline constexpr double kPi = 3.14159265358979323846;

// Sub-Laplacian normalization: Delta = kKappaDelta * (X^2 + Y^2) with
// X = d_x + 2y d_s, Y = d_y - 2x d_s. Checked against calibrate_kappa_delta().
inline constexpr double kKappaDelta = 0.25;

struct HeisenbergPoint {
  std::vector<std::complex<double>> z;
  double s = 0.0;

  HeisenbergPoint() : z(1) {}
  HeisenbergPoint(std::complex<double> z1, double s_) : z{z1}, s(s_) {}
  HeisenbergPoint(double x, double y, double s_) : z{std::complex<double>(x, y)}, s(s_) {}
  HeisenbergPoint(std::vector<std::complex<double>> z_, double s_) : z(std::move(z_)), s(s_) {}

  int dim() const { return static_cast<int>(z.size()); }
  double z_norm2() const;
};

struct BubbleSpec {
  HeisenbergPoint center;
  double scale = 1.0;  // mu
  int n = 1;
};

inline double koranyi_gauge(double z_norm2, double s) {
  return std::sqrt(std::sqrt(s * s + z_norm2 * z_norm2));
}
double koranyi_gauge(const HeisenbergPoint& p);

HeisenbergPoint dilate(double delta, const HeisenbergPoint& p);

// mu^n |(s - s0) + i(|z - z0|^2 + (mu/n)^2)|^{-n}
double bubble_value(const BubbleSpec& spec, const HeisenbergPoint& p);

// Second-order central differences along the exact integral curves of X and Y
// (n = 1 only).
double continuum_sublaplacian(const std::function<double(const HeisenbergPoint&)>& fn,
                              const HeisenbergPoint& p, double h,
                              double kappa = kKappaDelta);

struct KappaCalibration {
  double kappa = 0.0;       // Richardson-extrapolated estimate
  double spread = 0.0;      // max deviation over the sample
  std::vector<double> raw;  // un-extrapolated estimates per h level
};

// Finds kappa such that -kappa (X^2+Y^2) U = U^3 for the n = 1 bubble, from the
// ratio at sample points and step sizes h, h/2, h/4.
KappaCalibration calibrate_kappa_delta(double h = 1e-2, int samples = 64, unsigned seed = 7);

}  // namespace crflow
