#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crflow/manifold.hpp"

namespace crflow {

struct BubbleFit;

// Snapshot of the normalized flow (n = 1). R caches the Webster curvature of u
// so that stepping needs one sub-Laplacian per step.
struct FlowState {
  ModelPtr model;
  ScalarField u;
  ScalarField f;
  ScalarField R;
  double t = 0.0;
  double lambda = 0.0;
};

// Builds a state from u and f, computing R and lambda.
FlowState make_state(const ModelPtr& model, ScalarField u, ScalarField f, double t = 0.0);

// R = u^{-3} (-4 Delta u + R0 u)
ScalarField webster_scalar(const FlowState& state);
ScalarField webster_scalar(const ManifoldModel& model, const ScalarField& u);
// int f R dv_theta / int f^2 dv_theta, dv_theta = u^4 dv
double lambda_of(const FlowState& state);
double lambda_of(const ManifoldModel& model, const ScalarField& u, const ScalarField& f, const ScalarField& R);

// int f u^4 dv
double constraint_value(const FlowState& state);
// Rescales u so that int f u^4 dv = 1.
ScalarField normalize_constraint(const ManifoldModel& model, const ScalarField& u, const ScalarField& f);

// c_cfl * h_min^2 / ((2 + 2/n) kappa_Delta max u^{-2/n})
double stable_dt(const FlowState& state, double c_cfl);
inline constexpr double kMaxCfl = 0.5;

// Explicit Euler step u <- u - (1/2)(R - lambda f) u dt followed by the
// multiplicative projection onto int f u^4 dv = 1.
// Throws InfeasibleError if int f u^4 <= 0 after the raw update and
// StepSizeError if u <= 0 at some node.
FlowState step(const FlowState& state, double dt);

struct FlowDiagnostics {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double volume = 0.0;
  double F2 = 0.0;
  double F4 = 0.0;
  std::vector<std::pair<double, double>> Fp;  // (p, F_p)
  double min_R_minus_lambda_f = 0.0;
  double gamma_proxy = 0.0;
  double lambda = 0.0;
  double lambda_dot = 0.0;
  double Lambda0 = 0.0;  // running max |lambda| (empirical proxy)
  double Lambda1 = 0.0;  // running max |lambda'| (empirical proxy)
  double F2_max = 0.0;   // running max F2 (empirical proxy)
  double min_u = 0.0;
  double max_u = 0.0;
  double sobolev_norm_u = 0.0;
  double constraint = 0.0;
};

// Carries the running quantities that the gamma bound needs across calls.
class DiagnosticsTracker {
 public:
  explicit DiagnosticsTracker(std::vector<double> p_list = {2.0, 4.0}) : p_list_(std::move(p_list)) {}
  FlowDiagnostics observe(const FlowState& state);
  const std::vector<double>& p_list() const { return p_list_; }

 private:
  std::vector<double> p_list_;
  bool started_ = false;
  double inf_initial_ = 0.0;  // inf (R(0) - lambda(0) f)
  double last_t_ = 0.0, last_lambda_ = 0.0;
  double Lambda0_ = 0.0, Lambda1_ = 0.0, F2max_ = 0.0;
  double last_lambda_dot_ = 0.0;
};

// Stateless variant: lambda_dot = 0 and the proxies use this state only.
FlowDiagnostics diagnostics(const FlowState& state, const std::vector<double>& p_list = {2.0, 4.0});

double energy(const FlowState& state);
double F_p(const FlowState& state, double p);

enum class Classification { converged, concentrating, infeasible, timeout };
std::string to_string(Classification c);

struct FitColumns {
  bool ok = false;
  double alpha = 0.0, eps = 0.0, a_x = 0.0, a_y = 0.0, a_s = 0.0, residual = 0.0, zeta = 0.0;
};

struct SampleRow {
  FlowDiagnostics diag;
  FitColumns fit;
};

struct RunOptions {
  double c_cfl = 0.2;
  double T_max = 100.0;
  long max_steps = 10'000'000;
  double tol_converged = 1e-8;  // on F2
  double tol_eps = 1e-2;        // fitted eps below this counts as concentrating
  double tol_fit = 0.05;        // relative fit objective for a credible bubble
  double sample_interval = 0.5;  // in flow time
  int fit_every_samples = 0;     // 0 disables bubble fitting
  double fit_delta = 0.0;        // 0 = model default for fitting
  std::vector<double> p_list{2.0, 4.0};
  int max_dt_halvings = 20;
};

struct StepRecord {
  long step = 0;
  double t_before = 0.0, dt = 0.0;
  double energy_before = 0.0, energy_after = 0.0;
  double F2_before = 0.0, F2_after = 0.0;
  double constraint_after = 0.0;
  double volume_after = 0.0;
  double lambda_before = 0.0, lambda_after = 0.0;
  double Lambda0 = 0.0;
  double sup_f = 0.0;
};

struct RunResult {
  Classification classification = Classification::timeout;
  FlowState final_state;
  std::vector<SampleRow> samples;
  long steps = 0;
  std::string message;
};

using StepObserver = std::function<void(const StepRecord&, const FlowState&)>;

RunResult run(const FlowState& initial, const RunOptions& opts, const StepObserver& observer = {});

// Stationarity residuals at a (near) solution of -4 Delta u + R0 u = lambda f u^3.
struct NecessityReport {
  double pde_residual = 0.0;       // |-4 Delta u + R0 u - lambda f u^3|_inf / |u|_inf
  double int_f_u3 = 0.0;           // int f u^3 dv
  double int_f_u3_scale = 0.0;     // sup|f| int u^3 dv
  double lambda_int_f = 0.0;       // lambda int f dv
  double gradient_term = 0.0;      // -12 int u^{-4} |grad u|^2 dv
  double identity_rel_error = 0.0; // |lambda int f - gradient_term| / |gradient_term|
};

NecessityReport necessity_identities(const FlowState& state);

}  // namespace crflow
