#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randsee/spatial.hpp"

namespace randsee {

/// sin(pi x) with exact zeros at integer x and exact +-1 at half-integers.
/// Plain sin(M_PI * x) misses the zeros by ~1e-16, which a sqrt in a
/// coefficient function would amplify to ~1e-8.
double sin_pi(double x);

/// Truncated Weierstrass function eta_J(v) = sum_{n=0}^{J} a^n cos(b^n pi v).
struct WeierstrassParams {
  double a = 0.9;
  int b = 7;
  int j_max = 5;
};

double eval_weierstrass(const WeierstrassParams& params, double v);

/// sum_{n<=J} (a b)^n pi, a numerical Lipschitz bound for eta_J.
double weierstrass_lipschitz_bound(const WeierstrassParams& params);

/// The classical nowhere-differentiability condition a b > 1 + 3 pi / 2;
/// violation is reported, not rejected.
bool weierstrass_condition_holds(const WeierstrassParams& params);

/// Noise intensities of the reference experiment.
double sigma1(double t);  // 3 sqrt(t)
double sigma2(double t);  // 4 sqrt(|sin(16 pi t)|), zero on the 1/16 grid

/// One semilinear problem instance du = [u_xx + eta(t,u)] dt + sigma(t) dW
/// on (0,1) with homogeneous Dirichlet conditions. Coefficient functions
/// must be pure; instances are immutable and freely shareable.
struct ProblemSpec {
  std::function<double(double, double)> drift_eta;  // eta(t, v)
  std::function<double(double)> noise_sigma;        // sigma(t) >= 0
  ScalarFunction initial;                           // u0 on (0,1), u0(0)=u0(1)=0
  ModalFunction initial_modal;                      // optional closed-form P_h u0
  double horizon_T = 1.0;
  std::optional<std::pair<double, double>> regularity_meta;  // (r, gamma)
};

/// Registry of the reference problems:
///   weierstrass-sigma1  eta = Weierstrass(0.9,7,5), sigma = 3 sqrt(t)
///   weierstrass-sigma2  same drift, sigma = 4 sqrt(|sin(16 pi t)|)
///   zero-noise          same drift, sigma = 0
///   linear-drift        eta(t,v) = v, sigma = 0 (modal closed-form oracle)
/// All use u0(x) = 2x(1-x) and T = 1.
ProblemSpec builtin_problem(std::string_view name);
std::vector<std::string> builtin_problem_names();

/// Nemytskii drift f(t,v)(x) = -eta(t, v(x)) as a V_h element. FEM: nodal
/// application. Spectral: collocation on the dealiased uniform grid with
/// n_q = max(2 n_modes, 64) points (transform, apply pointwise, transform
/// back, truncate).
GridFunction eval_drift(const ProblemSpec& problem, double t,
                        const GridFunction& v, const Space& space);

namespace detail {

int dealias_points(int n_modes);

/// The three collocation stages of the spectral Nemytskii evaluation,
/// exposed so tests can check pointwise exactness at the collocation nodes
/// before truncation back to n_modes.
std::vector<double> spectral_to_nodal(const std::vector<double>& modal,
                                      int n_q);
std::vector<double> nodal_to_spectral(const std::vector<double>& nodal);

}  // namespace detail

}  // namespace randsee
