#include "randsee/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "randsee/transforms.hpp"

namespace randsee {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double sin_pi(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("sin_pi: non-finite argument");
  }
  double y = std::fmod(x, 2.0);  // exact, y in (-2, 2)
  double sign = 1.0;
  if (y < 0.0) {
    y = -y;
    sign = -1.0;
  }
  if (y >= 1.0) {
    y -= 1.0;  // exact for y in [1, 2)
    sign = -sign;
  }
  // y in [0, 1); fold onto [0, 1/2] where sin(pi y) is well conditioned.
  if (y > 0.5) y = 1.0 - y;
  return sign * std::sin(kPi * y);
}

double eval_weierstrass(const WeierstrassParams& params, double v) {
  double acc = 0.0;
  double a_pow = 1.0;
  double b_pow = 1.0;
  for (int n = 0; n <= params.j_max; ++n) {
    acc += a_pow * std::cos(b_pow * kPi * v);
    a_pow *= params.a;
    b_pow *= params.b;
  }
  return acc;
}

double weierstrass_lipschitz_bound(const WeierstrassParams& params) {
  double acc = 0.0;
  double ab_pow = 1.0;
  for (int n = 0; n <= params.j_max; ++n) {
    acc += ab_pow;
    ab_pow *= params.a * params.b;
  }
  return acc * kPi;
}

bool weierstrass_condition_holds(const WeierstrassParams& params) {
  return params.a > 0.0 && params.a < 1.0 && params.b % 2 == 1 &&
         params.a * params.b > 1.0 + 1.5 * kPi;
}

double sigma1(double t) {
  if (t < 0.0) throw std::invalid_argument("sigma1: negative time");
  return 3.0 * std::sqrt(t);
}

double sigma2(double t) {
  if (t < 0.0) throw std::invalid_argument("sigma2: negative time");
  return 4.0 * std::sqrt(std::fabs(sin_pi(16.0 * t)));
}

namespace {

ScalarFunction parabola_initial() {
  return [](double x) { return 2.0 * x * (1.0 - x); };
}

// P_h (2x(1-x)) in the sine basis: 8 sqrt(2) / (j pi)^3 for odd j.
ModalFunction parabola_initial_modal() {
  return [](int j) {
    if (j % 2 == 0) return 0.0;
    const double jpi = j * kPi;
    return 8.0 * std::sqrt(2.0) / (jpi * jpi * jpi);
  };
}

ProblemSpec weierstrass_base() {
  ProblemSpec spec;
  const WeierstrassParams params{0.9, 7, 5};
  spec.drift_eta = [params](double /*t*/, double v) {
    return eval_weierstrass(params, v);
  };
  spec.initial = parabola_initial();
  spec.initial_modal = parabola_initial_modal();
  spec.horizon_T = 1.0;
  spec.regularity_meta = {{1.0, 0.5}};
  return spec;
}

}  // namespace

ProblemSpec builtin_problem(std::string_view name) {
  if (name == "weierstrass-sigma1") {
    ProblemSpec spec = weierstrass_base();
    spec.noise_sigma = [](double t) { return sigma1(t); };
    return spec;
  }
  if (name == "weierstrass-sigma2") {
    ProblemSpec spec = weierstrass_base();
    spec.noise_sigma = [](double t) { return sigma2(t); };
    return spec;
  }
  if (name == "zero-noise") {
    ProblemSpec spec = weierstrass_base();
    spec.noise_sigma = [](double /*t*/) { return 0.0; };
    return spec;
  }
  if (name == "linear-drift") {
    ProblemSpec spec;
    spec.drift_eta = [](double /*t*/, double v) { return v; };
    spec.noise_sigma = [](double /*t*/) { return 0.0; };
    spec.initial = parabola_initial();
    spec.initial_modal = parabola_initial_modal();
    spec.horizon_T = 1.0;
    spec.regularity_meta = {{1.0, 0.5}};
    return spec;
  }
  throw std::invalid_argument("unknown problem: " + std::string(name));
}

std::vector<std::string> builtin_problem_names() {
  return {"weierstrass-sigma1", "weierstrass-sigma2", "zero-noise",
          "linear-drift"};
}

namespace detail {

int dealias_points(int n_modes) { return std::max(2 * n_modes, 64); }

std::vector<double> spectral_to_nodal(const std::vector<double>& modal,
                                      int n_q) {
  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> padded(n_q, 0.0);
  for (std::size_t j = 0; j < modal.size(); ++j) padded[j] = sqrt2 * modal[j];
  return transforms::dst_apply(padded);
}

std::vector<double> nodal_to_spectral(const std::vector<double>& nodal) {
  const int n_q = static_cast<int>(nodal.size());
  auto modal = transforms::dst_apply(nodal);
  const double scale = 2.0 / ((n_q + 1) * std::sqrt(2.0));
  for (double& c : modal) c *= scale;
  return modal;
}

}  // namespace detail

GridFunction eval_drift(const ProblemSpec& problem, double t,
                        const GridFunction& v, const Space& space) {
  detail::check_bound(space, v);
  const auto eta_at = [&](double x, double value) {
    const double out = -problem.drift_eta(t, value);
    if (!std::isfinite(out)) {
      throw std::runtime_error("eval_drift: eta not finite at (t = " +
                               std::to_string(t) + ", x = " + std::to_string(x) +
                               ", v = " + std::to_string(value) + ")");
    }
    return out;
  };

  if (const auto* fem = std::get_if<FemSpace>(&space)) {
    GridFunction out = zero_function(space);
    const double h = fem->mesh_width();
    for (int i = 0; i < fem->n_dof(); ++i) {
      out.coeffs[i] = eta_at((i + 1) * h, v.coeffs[i]);
    }
    return out;
  }

  const auto& spectral = std::get<SpectralSpace>(space);
  const int n_q = detail::dealias_points(spectral.n_modes());
  auto nodal = detail::spectral_to_nodal(v.coeffs, n_q);
  const double step = 1.0 / (n_q + 1);
  for (int i = 0; i < n_q; ++i) {
    nodal[i] = eta_at((i + 1) * step, nodal[i]);
  }
  auto modal = detail::nodal_to_spectral(nodal);
  modal.resize(spectral.n_modes());
  return GridFunction{std::move(modal), spectral.tag()};
}

}  // namespace randsee
