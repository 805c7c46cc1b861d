#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace crflow {

enum class YamabeSign { zero, positive };

std::string to_string(YamabeSign s);

// Nilmanifold Gamma \ H in polarized coordinates (x, y, t) with frame
// X = d_x, Y = d_y + x d_t and identifications
//   (x, y, t) ~ (x + 1, y, t + y) ~ (x, y + 1, t) ~ (x, y, t + P),  P = 1/K.
// Nodes sit at (i/Nx, j/Ny, k P/Ns). The x-gluing shift y_j is grid-aligned
// iff Ny divides K*Ns.
struct GridSpec {
  int nx = 32;
  int ny = 32;
  int ns = 32;
  int period_divisor = 8;  // K
};

// Empty when the grid is acceptable; otherwise one message per violated
// constraint.
std::vector<std::string> grid_violations(const GridSpec& g);

struct OperatorCertificate {
  double symmetry_error = 0.0;  // |<Lu,w> - <u,Lw>| / (|Lu| |w|)
  double constant_error = 0.0;  // max |L 1|
  double max_quadratic_form = 0.0;  // max over samples of <u, L u> / <u, u>; must be <= 0
};

struct PolarPoint {
  double x = 0.0, y = 0.0, t = 0.0;
};

// Standard Heisenberg coordinates (z = x + i y, s) of a node relative to a
// chart center, plus its Koranyi gauge.
struct ChartPoint {
  double x = 0.0, y = 0.0, s = 0.0, rho = 0.0;
};

class ManifoldModel {
 public:
  // R0 must be empty (zero mode) or have one positive value per node.
  explicit ManifoldModel(GridSpec grid, YamabeSign sign = YamabeSign::zero, std::vector<double> R0 = {},
                         double kappa_v = 16.0);

  const GridSpec& grid() const { return grid_; }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }
  int ns() const { return grid_.ns; }
  std::size_t size() const { return size_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double hs() const { return hs_; }
  double s_period() const { return period_; }
  double kappa_v() const { return kappa_v_; }
  YamabeSign yamabe_sign() const { return sign_; }
  const std::vector<double>& R0() const { return R0_; }
  bool flat() const { return sign_ == YamabeSign::zero; }

  // dv = kappa_v * |d(2xy - 4t)/dt| dx dy dt = 4 kappa_v dx dy dt per node.
  double weight(std::size_t) const { return weight_; }
  double uniform_weight() const { return weight_; }
  double total_volume() const { return weight_ * static_cast<double>(size_); }
  double min_spacing() const;
  double injectivity_radius() const;
  // Default cutoff radius for the glued test functions.
  double default_delta(double eps) const;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * grid_.ny + j) * grid_.ns + k;
  }
  std::array<int, 3> node(std::size_t idx) const;
  PolarPoint coords(std::size_t idx) const;

  // out = Delta in; scratch is resized as needed.
  void apply_sublaplacian(std::span<const double> in, std::span<double> out, std::vector<double>& scratch) const;
  // kappa_Delta/2 * sum of squared one-sided frame differences at each node.
  void gradient_squared(std::span<const double> in, std::span<double> out) const;

  const OperatorCertificate& certificate() const { return cert_; }

  ChartPoint chart_point(const PolarPoint& a, std::size_t node) const;

 private:
  void shift_x(const double* in, double* out, int dir) const;
  void shift_y(const double* in, double* out, int dir) const;
  OperatorCertificate certify() const;

  GridSpec grid_;
  YamabeSign sign_;
  std::vector<double> R0_;
  double kappa_v_;
  std::size_t size_;
  double hx_, hy_, hs_, period_, weight_;
  std::vector<int> xwrap_;  // index shift d_j of the x-gluing per row j
  struct Interp {
    int base;  // in [0, ns)
    std::array<double, 4> w;
  };
  std::vector<Interp> yplus_, yminus_;  // per i
  OperatorCertificate cert_;
};

using ModelPtr = std::shared_ptr<const ManifoldModel>;

struct ScalarField {
  ModelPtr model;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(ModelPtr m, double fill = 0.0);
  ScalarField(ModelPtr m, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double min() const;
  double max() const;
};

ModelPtr make_model(GridSpec grid, YamabeSign sign = YamabeSign::zero, std::vector<double> R0 = {},
                    double kappa_v = 16.0);

ScalarField sample(const ModelPtr& model, const std::function<double(const PolarPoint&)>& fn);

ScalarField sublaplacian(const ManifoldModel& model, const ScalarField& field);
double integrate(const ManifoldModel& model, const ScalarField& field);
// sum field * u^{2+2/n} * weight (n = 1)
double integrate_wrt(const ManifoldModel& model, const ScalarField& field, const ScalarField& u);
double inner(const ManifoldModel& model, const ScalarField& a, const ScalarField& b);
// Discrete S_1^2 norm: sqrt(<u, -Delta u> + <u, u>).
double sobolev_norm(const ManifoldModel& model, const ScalarField& u);

std::vector<ChartPoint> local_chart(const ManifoldModel& model, std::size_t a);
std::vector<ChartPoint> local_chart(const ManifoldModel& model, const PolarPoint& a);

}  // namespace crflow
