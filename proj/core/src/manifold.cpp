#include "crflow/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"
#include "crflow/random.hpp"

namespace crflow {

std::string to_string(YamabeSign s) { return s == YamabeSign::zero ? "zero" : "positive"; }

std::vector<std::string> grid_violations(const GridSpec& g) {
  std::vector<std::string> out;
  if (g.nx < 4 || g.ny < 4 || g.ns < 4) out.push_back("grid: Nx, Ny, Ns must all be >= 4");
  if (g.period_divisor < 1) out.push_back("grid: period_divisor K must be >= 1");
  if (g.ny >= 1 && g.period_divisor >= 1 && g.ns >= 1 &&
      (static_cast<long long>(g.period_divisor) * g.ns) % g.ny != 0) {
    if (g.period_divisor == 1)
      out.push_back("grid alignment: Ns must be an integer multiple of Ny (got Ns=" + std::to_string(g.ns) +
                    ", Ny=" + std::to_string(g.ny) + ")");
    else
      out.push_back("grid alignment: K*Ns must be an integer multiple of Ny (got K=" +
                    std::to_string(g.period_divisor) + ", Ns=" + std::to_string(g.ns) +
                    ", Ny=" + std::to_string(g.ny) + ")");
  }
  return out;
}

namespace {

std::array<double, 4> lagrange4(double t) {
  // nodes at -1, 0, 1, 2
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

int wrap(long long k, int n) {
  long long r = k % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

ManifoldModel::ManifoldModel(GridSpec grid, YamabeSign sign, std::vector<double> R0, double kappa_v)
    : grid_(grid), sign_(sign), R0_(std::move(R0)), kappa_v_(kappa_v) {
  const auto bad = grid_violations(grid_);
  if (!bad.empty()) {
    std::string msg;
    for (const auto& b : bad) msg += (msg.empty() ? "" : "; ") + b;
    throw ConfigError(msg);
  }
  if (!(kappa_v_ > 0.0)) throw ConfigError("model: kappa_v must be positive");
  size_ = static_cast<std::size_t>(grid_.nx) * grid_.ny * grid_.ns;
  period_ = 1.0 / grid_.period_divisor;
  hx_ = 1.0 / grid_.nx;
  hy_ = 1.0 / grid_.ny;
  hs_ = period_ / grid_.ns;
  weight_ = 4.0 * kappa_v_ * hx_ * hy_ * hs_;

  if (sign_ == YamabeSign::zero) {
    if (!R0_.empty() && std::any_of(R0_.begin(), R0_.end(), [](double r) { return r != 0.0; }))
      throw ConfigError("model: yamabe_sign = zero requires R0 == 0");
    R0_.assign(size_, 0.0);
  } else {
    if (R0_.size() != size_) throw ShapeError("model: R0 must have one value per node");
    if (std::any_of(R0_.begin(), R0_.end(), [](double r) { return !(r > 0.0); }))
      throw ConfigError("model: yamabe_sign = positive requires R0 > 0 at every node");
  }

  const long long kns = static_cast<long long>(grid_.period_divisor) * grid_.ns;
  xwrap_.resize(grid_.ny);
  for (int j = 0; j < grid_.ny; ++j) xwrap_[j] = wrap(j * kns / grid_.ny, grid_.ns);

  // Y-flow over one step moves t by x_i * hy, i.e. m_i = i K Ns / (Nx Ny) s-cells.
  yplus_.resize(grid_.nx);
  yminus_.resize(grid_.nx);
  for (int i = 0; i < grid_.nx; ++i) {
    const double m = static_cast<double>(i) * static_cast<double>(kns) / (static_cast<double>(grid_.nx) * grid_.ny);
    for (int dir : {1, -1}) {
      const double mm = dir * m;
      const double fl = std::floor(mm);
      Interp ip;
      ip.base = wrap(static_cast<long long>(fl) - 1, grid_.ns);
      ip.w = lagrange4(mm - fl);
      (dir == 1 ? yplus_ : yminus_)[i] = ip;
    }
  }
  cert_ = certify();
}

std::array<int, 3> ManifoldModel::node(std::size_t idx) const {
  const int k = static_cast<int>(idx % grid_.ns);
  const std::size_t r = idx / grid_.ns;
  return {static_cast<int>(r / grid_.ny), static_cast<int>(r % grid_.ny), k};
}

PolarPoint ManifoldModel::coords(std::size_t idx) const {
  const auto [i, j, k] = node(idx);
  return {i * hx_, j * hy_, k * hs_};
}

double ManifoldModel::min_spacing() const { return std::min(hx_, hy_); }

double ManifoldModel::injectivity_radius() const {
  // Distinct lattice images differ by an integer horizontal offset (gauge >= 1/2
  // for one of them) or by a central shift of 4P in s (gauge >= sqrt(2P)).
  return std::min(0.5, std::sqrt(2.0 * period_));
}

double ManifoldModel::default_delta(double eps) const {
  return std::min(0.3 * injectivity_radius(), 8.0 * eps);
}

void ManifoldModel::shift_x(const double* in, double* out, int dir) const {
  const int nx = grid_.nx, ny = grid_.ny, ns = grid_.ns;
  for (int i = 0; i < nx; ++i) {
    const bool edge = dir > 0 ? (i == nx - 1) : (i == 0);
    const int src_i = edge ? (dir > 0 ? 0 : nx - 1) : i + dir;
    for (int j = 0; j < ny; ++j) {
      const double* src = in + index(src_i, j, 0);
      double* dst = out + index(i, j, 0);
      if (!edge) {
        std::copy(src, src + ns, dst);
      } else {
        // (1, y, t) ~ (0, y, t - y) and (-hx, y, t) ~ (1 - hx, y, t + y)
        const int d = dir > 0 ? ns - xwrap_[j] : xwrap_[j];
        for (int k = 0; k < ns; ++k) {
          int kk = k + d;
          if (kk >= ns) kk -= ns;
          dst[k] = src[kk];
        }
      }
    }
  }
}

void ManifoldModel::shift_y(const double* in, double* out, int dir) const {
  const int nx = grid_.nx, ny = grid_.ny, ns = grid_.ns;
  const auto& table = dir > 0 ? yplus_ : yminus_;
  for (int i = 0; i < nx; ++i) {
    const Interp& ip = table[i];
    for (int j = 0; j < ny; ++j) {
      const int sj = dir > 0 ? (j + 1 == ny ? 0 : j + 1) : (j == 0 ? ny - 1 : j - 1);
      const double* src = in + index(i, sj, 0);
      double* dst = out + index(i, j, 0);
      for (int k = 0; k < ns; ++k) {
        int k0 = k + ip.base;
        double acc = 0.0;
        for (int l = 0; l < 4; ++l) {
          int kk = k0 + l;
          while (kk >= ns) kk -= ns;
          acc += ip.w[l] * src[kk];
        }
        dst[k] = acc;
      }
    }
  }
}

void ManifoldModel::apply_sublaplacian(std::span<const double> in, std::span<double> out,
                                       std::vector<double>& scratch) const {
  if (in.size() != size_ || out.size() != size_) throw ShapeError("sublaplacian: field size mismatch");
  scratch.resize(3 * size_);
  double* dx = scratch.data();
  double* dy = dx + size_;
  double* tmp = dy + size_;
  const double* u = in.data();
  const double ihx = 1.0 / hx_, ihy = 1.0 / hy_;

  shift_x(u, tmp, 1);
  for (std::size_t n = 0; n < size_; ++n) dx[n] = (tmp[n] - u[n]) * ihx;
  shift_y(u, tmp, 1);
  for (std::size_t n = 0; n < size_; ++n) dy[n] = (tmp[n] - u[n]) * ihy;

  // Delta = -kappa (D_X^T D_X + D_Y^T D_Y), with D^T v = (T_{-} v - v) / h
  shift_x(dx, tmp, -1);
  for (std::size_t n = 0; n < size_; ++n) out[n] = (dx[n] - tmp[n]) * ihx;
  shift_y(dy, tmp, -1);
  for (std::size_t n = 0; n < size_; ++n) out[n] = kKappaDelta * (out[n] + (dy[n] - tmp[n]) * ihy);
}

void ManifoldModel::gradient_squared(std::span<const double> in, std::span<double> out) const {
  if (in.size() != size_ || out.size() != size_) throw ShapeError("gradient_squared: field size mismatch");
  std::vector<double> tmp(size_);
  const double* u = in.data();
  std::fill(out.begin(), out.end(), 0.0);
  const double ihx2 = 1.0 / (hx_ * hx_), ihy2 = 1.0 / (hy_ * hy_);
  for (int dir : {1, -1}) {
    shift_x(u, tmp.data(), dir);
    for (std::size_t n = 0; n < size_; ++n) out[n] += (tmp[n] - u[n]) * (tmp[n] - u[n]) * ihx2;
    shift_y(u, tmp.data(), dir);
    for (std::size_t n = 0; n < size_; ++n) out[n] += (tmp[n] - u[n]) * (tmp[n] - u[n]) * ihy2;
  }
  for (auto& v : out) v *= 0.5 * kKappaDelta;
}

OperatorCertificate ManifoldModel::certify() const {
  OperatorCertificate c;
  Rng rng(0x5eed);
  std::vector<double> u(size_), w(size_), Lu(size_), Lw(size_), scratch;
  for (auto& v : u) v = rng.uniform(-1.0, 1.0);
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  apply_sublaplacian(u, Lu, scratch);
  apply_sublaplacian(w, Lw, scratch);
  double a = 0.0, b = 0.0, nLu = 0.0, nw = 0.0, uu = 0.0, uLu = 0.0;
  for (std::size_t n = 0; n < size_; ++n) {
    a += Lu[n] * w[n];
    b += u[n] * Lw[n];
    nLu += Lu[n] * Lu[n];
    nw += w[n] * w[n];
    uu += u[n] * u[n];
    uLu += u[n] * Lu[n];
  }
  c.symmetry_error = std::abs(a - b) / std::sqrt(nLu * nw);
  c.max_quadratic_form = uLu / uu;
  std::fill(u.begin(), u.end(), 1.0);
  apply_sublaplacian(u, Lu, scratch);
  for (double v : Lu) c.constant_error = std::max(c.constant_error, std::abs(v));
  return c;
}

ChartPoint ManifoldModel::chart_point(const PolarPoint& a0, std::size_t idx) const {
  const PolarPoint p = coords(idx);
  // move the center into the fundamental domain
  PolarPoint a = a0;
  const double kx = std::floor(a.x);
  a.x -= kx;
  a.t -= kx * a.y;
  a.y -= std::floor(a.y);
  const double per = 4.0 * period_;
  ChartPoint best;
  best.rho = INFINITY;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      // image gamma * p with gamma = (dx, dy, 0)
      const double xp = p.x + dx, yp = p.y + dy, tp = p.t + dx * p.y;
      const double qx = xp - a.x, qy = yp - a.y;
      const double qt = tp - a.t - a.x * qy;
      double sig = 2.0 * qx * qy - 4.0 * qt;
      sig -= per * std::floor(sig / per + 0.5);
      const double rho = koranyi_gauge(qx * qx + qy * qy, sig);
      if (rho < best.rho) best = {qx, qy, sig, rho};
    }
  }
  return best;
}

ScalarField::ScalarField(ModelPtr m, double fill) : model(std::move(m)) {
  if (!model) throw ShapeError("ScalarField: null model");
  values.assign(model->size(), fill);
}

ScalarField::ScalarField(ModelPtr m, std::vector<double> v) : model(std::move(m)), values(std::move(v)) {
  if (!model) throw ShapeError("ScalarField: null model");
  if (values.size() != model->size()) throw ShapeError("ScalarField: length does not match node count");
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

ModelPtr make_model(GridSpec grid, YamabeSign sign, std::vector<double> R0, double kappa_v) {
  return std::make_shared<const ManifoldModel>(grid, sign, std::move(R0), kappa_v);
}

ScalarField sample(const ModelPtr& model, const std::function<double(const PolarPoint&)>& fn) {
  ScalarField f(model);
  for (std::size_t n = 0; n < model->size(); ++n) f[n] = fn(model->coords(n));
  return f;
}

namespace {
void check(const ManifoldModel& model, const ScalarField& f, const char* what) {
  if (f.model.get() != &model && (!f.model || f.model->grid().nx != model.grid().nx ||
                                  f.model->grid().ny != model.grid().ny || f.model->grid().ns != model.grid().ns ||
                                  f.model->grid().period_divisor != model.grid().period_divisor))
    throw ShapeError(std::string(what) + ": field belongs to a different model");
  if (f.size() != model.size()) throw ShapeError(std::string(what) + ": field length mismatch");
}
}  // namespace

ScalarField sublaplacian(const ManifoldModel& model, const ScalarField& field) {
  check(model, field, "sublaplacian");
  ScalarField out(field.model);
  std::vector<double> scratch;
  model.apply_sublaplacian(field.values, out.values, scratch);
  return out;
}

double integrate(const ManifoldModel& model, const ScalarField& field) {
  check(model, field, "integrate");
  double s = 0.0;
  for (double v : field.values) s += v;
  return s * model.uniform_weight();
}

double integrate_wrt(const ManifoldModel& model, const ScalarField& field, const ScalarField& u) {
  check(model, field, "integrate_wrt");
  check(model, u, "integrate_wrt");
  double s = 0.0;
  for (std::size_t n = 0; n < field.size(); ++n) {
    const double un = u[n];
    if (!(un > 0.0)) throw DomainError("integrate_wrt: u must be positive");
    const double u2 = un * un;
    s += field[n] * u2 * u2;
  }
  return s * model.uniform_weight();
}

double inner(const ManifoldModel& model, const ScalarField& a, const ScalarField& b) {
  check(model, a, "inner");
  check(model, b, "inner");
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s * model.uniform_weight();
}

double sobolev_norm(const ManifoldModel& model, const ScalarField& u) {
  const ScalarField Lu = sublaplacian(model, u);
  return std::sqrt(std::max(0.0, -inner(model, u, Lu)) + inner(model, u, u));
}

std::vector<ChartPoint> local_chart(const ManifoldModel& model, const PolarPoint& a) {
  std::vector<ChartPoint> out(model.size());
  for (std::size_t n = 0; n < model.size(); ++n) out[n] = model.chart_point(a, n);
  return out;
}

std::vector<ChartPoint> local_chart(const ManifoldModel& model, std::size_t a) {
  if (a >= model.size()) throw ShapeError("local_chart: node out of range");
  return local_chart(model, model.coords(a));
}

}  // namespace crflow
