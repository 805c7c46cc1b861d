#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "crflow/flow.hpp"
#include "crflow/manifold.hpp"

namespace crflow {

// chi(tau / delta) with the quintic transition
// chi(1 + t) = 1 - (10 t^3 - 15 t^4 + 6 t^5), t in [0, 1].
double cutoff(double tau, double delta);
// d/dtau of chi at tau/delta = x (derivative of the profile, not scaled by 1/delta)
double cutoff_profile_derivative(double x);

// (|sup Delta f| + 1) / sup f
double flat_mode_Lambda(const ManifoldModel& model, const ScalarField& f);

struct GreenOptions {
  double Lambda = 1.0;       // flat mode constant
  double annulus_outer = 0.0;  // 0 = 0.3 * injectivity radius
  double cg_tol = 1e-11;
  int cg_max_iter = 50000;
};

// G normalized so that G ~ rho^{-2} at the pole (the pole node holds +inf).
struct GreenData {
  ScalarField field;
  double mass = 0.0;
  std::size_t pole = 0;
  bool flat = true;
  double fit_C = 0.0;        // max |G - rho^{-2} - mass| / rho over the fit annulus
  double annulus_inner = 0.0, annulus_outer = 0.0;
  int annulus_nodes = 0;
  double raw_scale = 1.0;    // field = raw_scale * (solution with the unit discrete delta)
  int cg_iterations = 0;
  double pole_value = 0.0;  // finite discrete value at the pole (positive mode)
};

GreenData green_function(const ModelPtr& model, std::size_t a, const GreenOptions& opts = {});

// Lazily computes and caches Green's functions per pole.
class GreenCache {
 public:
  GreenCache(ModelPtr model, GreenOptions opts) : model_(std::move(model)), opts_(opts) {}
  const GreenData& get(std::size_t a);
  const GreenOptions& options() const { return opts_; }

 private:
  ModelPtr model_;
  GreenOptions opts_;
  std::map<std::size_t, GreenData> cache_;
};

// eps [chi_delta(rho) / sqrt(s^2 + (eps^2 + |z|^2)^2) + (1 - chi_delta(rho)) G]
ScalarField test_function(const ModelPtr& model, std::size_t a, double eps, double delta, const GreenData& green);

// k = 1: phi; k = 2: eps d/d eps phi; k = 3: eps X_a phi and eps Y_a phi
// (two components, derivatives along the horizontal frame at the center).
std::vector<ScalarField> phi_k(const ModelPtr& model, std::size_t a, double eps, double delta,
                               const GreenData& green, int k);

struct BubbleFit {
  bool ok = false;
  double alpha = 0.0;
  double eps = 0.0;
  std::size_t center = 0;
  double delta = 0.0;
  double residual_norm = 0.0;       // S_1^2 norm of u - alpha phi
  double objective = 0.0;           // int u^2 (u - alpha phi)^2 dv
  double relative_objective = 0.0;  // objective / int u^4 dv
  double membership_eps = 0.0;      // eps
  double membership_alpha = 0.0;    // |lambda alpha^2 f(a) / 4 - 1|
  bool in_D_u = false;
  bool ambiguous = false;
  int evaluations = 0;
};

struct FitOptions {
  double delta = 0.0;      // 0 = 0.45 * injectivity radius
  double eps_min = 0.0;    // 0 = min spacing / 4
  int budget = 500;
  double mu0 = 0.1;        // D_u radius for the membership flag
  GreenCache* green = nullptr;  // required in positive mode
  double Lambda = -1.0;    // flat mode; < 0 means flat_mode_Lambda(f)
};

BubbleFit fit_bubble(const FlowState& state, const std::optional<BubbleFit>& init = std::nullopt,
                     const FitOptions& opts = {});

// -int (L u - lambda f u^3) phi_k dv with L = -4 Delta + R0. k = 3 yields two values.
std::vector<double> sigma_k(const FlowState& state, const BubbleFit& fit, const GreenData& green, int k);

// (2(n+1)/n) (sup f)^{-n/(n+1)} / K_n at n = 1
double lambda_star(double sup_f);
double lambda_star(const ScalarField& f);
bool single_bubble_gate(double energy_u0, double lambda_star_value);

struct InitialData {
  FlowState state;
  std::size_t center = 0;
  double alpha0 = 0.0;
  double eps0 = 0.0;
  double delta = 0.0;
  double Lambda = 0.0;
  double energy = 0.0;
  double lambda_star = 0.0;
  bool gate = false;
};

// u0 = alpha0 phi_{a0, eps0} with alpha0^{-4} = int f phi^4 dv. a0 defaults to
// the grid argmax of f; delta <= 0 selects the model default.
InitialData initial_data(const ModelPtr& model, const ScalarField& f, std::optional<std::size_t> a0, double eps0,
                         double delta = 0.0, GreenCache* green = nullptr);

std::size_t argmax(const ScalarField& f);

}  // namespace crflow
