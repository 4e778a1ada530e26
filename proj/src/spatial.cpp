#include "randsee/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "randsee/rng.hpp"
#include "randsee/transforms.hpp"

namespace randsee {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre rule on [-1,1].
constexpr double kGauss8Nodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGauss8Weights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// 4-point Gauss-Legendre rule on [-1,1].
constexpr double kGauss4Nodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
constexpr double kGauss4Weights[4] = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};

std::uint64_t make_tag(std::uint64_t kind, std::uint64_t size) {
  return rng::mix64(rng::mix64(kind) ^ (size + 0x51D5EE));
}

}  // namespace

SpectralSpace::SpectralSpace(int n_modes) : n_modes_(n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("SpectralSpace: n_modes must be >= 1");
  }
  eigenvalues_.resize(n_modes);
  for (int j = 1; j <= n_modes; ++j) {
    eigenvalues_[j - 1] = static_cast<double>(j) * j * kPi * kPi;
  }
  tag_ = make_tag(1, static_cast<std::uint64_t>(n_modes));
}

FemSpace::FemSpace(int n_dof) : n_dof_(n_dof) {
  if (n_dof < 1) {
    throw std::invalid_argument("FemSpace: n_dof must be >= 1");
  }
  h_ = 1.0 / static_cast<double>(n_dof + 1);
  tag_ = make_tag(2, static_cast<std::uint64_t>(n_dof));
}

std::vector<double> FemSpace::nodes() const {
  std::vector<double> xs(n_dof_);
  for (int i = 1; i <= n_dof_; ++i) xs[i - 1] = i * h_;
  return xs;
}

void FemSpace::apply_mass(std::span<const double> in,
                          std::span<double> out) const {
  const int n = n_dof_;
  const double d = mass_diag();
  const double e = mass_off();
  for (int i = 0; i < n; ++i) {
    double acc = d * in[i];
    if (i > 0) acc += e * in[i - 1];
    if (i + 1 < n) acc += e * in[i + 1];
    out[i] = acc;
  }
}

void FemSpace::apply_stiffness(std::span<const double> in,
                               std::span<double> out) const {
  const int n = n_dof_;
  const double d = stiffness_diag();
  const double e = stiffness_off();
  for (int i = 0; i < n; ++i) {
    double acc = d * in[i];
    if (i > 0) acc += e * in[i - 1];
    if (i + 1 < n) acc += e * in[i + 1];
    out[i] = acc;
  }
}

int dimension(const Space& space) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SpectralSpace>)
          return s.n_modes();
        else
          return s.n_dof();
      },
      space);
}

std::uint64_t space_tag(const Space& space) {
  return std::visit([](const auto& s) { return s.tag(); }, space);
}

GridFunction zero_function(const Space& space) {
  return GridFunction{std::vector<double>(dimension(space), 0.0),
                      space_tag(space)};
}

namespace detail {

void check_bound(const Space& space, const GridFunction& v) {
  if (v.space_tag != space_tag(space) ||
      v.coeffs.size() != static_cast<std::size_t>(dimension(space))) {
    throw std::invalid_argument(
        "GridFunction is not bound to this discretization");
  }
}

std::vector<double> solve_tridiag_toeplitz(double diag, double off,
                                           std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> x(rhs.begin(), rhs.end());
  std::vector<double> w(n);
  w[0] = diag;
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off / w[i - 1];
    w[i] = diag - m * off;
    x[i] -= m * x[i - 1];
  }
  x[n - 1] /= w[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = (x[i] - off * x[i + 1]) / w[i];
  }
  return x;
}

}  // namespace detail

namespace {

// Composite Gauss-Legendre value of integral_0^1 u0(x) sqrt(2) sin(j pi x) dx
// for every mode at once. Panel count scales with the highest mode so the
// quadrature error stays far below the scheme error.
std::vector<double> spectral_projection_quadrature(const SpectralSpace& space,
                                                   const ScalarFunction& u0) {
  const int n_modes = space.n_modes();
  const int panels = std::max(256, 2 * n_modes);
  const double width = 1.0 / panels;
  const std::size_t n_points = static_cast<std::size_t>(panels) * 8;

  std::vector<double> xs(n_points), wu(n_points);
  for (int p = 0; p < panels; ++p) {
    for (int q = 0; q < 8; ++q) {
      const std::size_t idx = static_cast<std::size_t>(p) * 8 + q;
      const double x = (p + 0.5 * (kGauss8Nodes[q] + 1.0)) * width;
      xs[idx] = x;
      const double value = u0(x);
      if (!std::isfinite(value)) {
        throw std::invalid_argument(
            "project_initial: u0 is not finite at x = " + std::to_string(x));
      }
      wu[idx] = 0.5 * width * kGauss8Weights[q] * value;
    }
  }

  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> coeffs(n_modes, 0.0);
  for (int j = 1; j <= n_modes; ++j) {
    double acc = 0.0;
    for (std::size_t idx = 0; idx < n_points; ++idx) {
      acc += wu[idx] * std::sin(j * kPi * xs[idx]);
    }
    coeffs[j - 1] = sqrt2 * acc;
  }
  return coeffs;
}

std::vector<double> fem_load_vector(const FemSpace& space,
                                    const ScalarFunction& u0) {
  const int n = space.n_dof();
  const double h = space.mesh_width();
  std::vector<double> load(n, 0.0);
  // One element per mesh cell, 4 Gauss points each; the two hat functions
  // active on the cell pick up their linear weights.
  for (int e = 0; e <= n; ++e) {
    const double x_left = e * h;
    for (int q = 0; q < 4; ++q) {
      const double x = x_left + 0.5 * (kGauss4Nodes[q] + 1.0) * h;
      const double value = u0(x);
      if (!std::isfinite(value)) {
        throw std::invalid_argument(
            "project_initial: u0 is not finite at x = " + std::to_string(x));
      }
      const double w = 0.5 * h * kGauss4Weights[q] * value;
      const double s = (x - x_left) / h;
      if (e >= 1) load[e - 1] += w * (1.0 - s);
      if (e + 1 <= n) load[e] += w * s;
    }
  }
  return load;
}

}  // namespace

GridFunction project_initial(const Space& space, const ScalarFunction& u0) {
  return std::visit(
      [&](const auto& s) -> GridFunction {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>,
                                     SpectralSpace>) {
          return GridFunction{spectral_projection_quadrature(s, u0), s.tag()};
        } else {
          const auto load = fem_load_vector(s, u0);
          auto coeffs = detail::solve_tridiag_toeplitz(s.mass_diag(),
                                                       s.mass_off(), load);
          return GridFunction{std::move(coeffs), s.tag()};
        }
      },
      space);
}

GridFunction project_initial(const Space& space, const ScalarFunction& u0,
                             const ModalFunction& closed_form) {
  if (closed_form && std::holds_alternative<SpectralSpace>(space)) {
    const auto& s = std::get<SpectralSpace>(space);
    std::vector<double> coeffs(s.n_modes());
    for (int j = 1; j <= s.n_modes(); ++j) {
      coeffs[j - 1] = closed_form(j);
      if (!std::isfinite(coeffs[j - 1])) {
        throw std::invalid_argument(
            "project_initial: closed form is not finite at mode " +
            std::to_string(j));
      }
    }
    return GridFunction{std::move(coeffs), s.tag()};
  }
  return project_initial(space, u0);
}

GridFunction apply_Ah(const Space& space, const GridFunction& v) {
  detail::check_bound(space, v);
  return std::visit(
      [&](const auto& s) -> GridFunction {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>,
                                     SpectralSpace>) {
          GridFunction out = v;
          const auto lambda = s.eigenvalues();
          for (int i = 0; i < s.n_modes(); ++i) out.coeffs[i] *= lambda[i];
          return out;
        } else {
          std::vector<double> image(v.coeffs.size());
          s.apply_stiffness(v.coeffs, image);
          auto coeffs = detail::solve_tridiag_toeplitz(s.mass_diag(),
                                                       s.mass_off(), image);
          return GridFunction{std::move(coeffs), s.tag()};
        }
      },
      space);
}

GridFunction resolvent_solve(const Space& space, double kappa,
                             const GridFunction& v) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("resolvent_solve: kappa must be positive");
  }
  detail::check_bound(space, v);
  return std::visit(
      [&](const auto& s) -> GridFunction {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>,
                                     SpectralSpace>) {
          GridFunction out = v;
          const auto lambda = s.eigenvalues();
          for (int i = 0; i < s.n_modes(); ++i) {
            out.coeffs[i] /= 1.0 + kappa * lambda[i];
          }
          return out;
        } else {
          std::vector<double> rhs(v.coeffs.size());
          s.apply_mass(v.coeffs, rhs);
          auto coeffs = detail::solve_tridiag_toeplitz(
              s.mass_diag() + kappa * s.stiffness_diag(),
              s.mass_off() + kappa * s.stiffness_off(), rhs);
          return GridFunction{std::move(coeffs), s.tag()};
        }
      },
      space);
}

double norm_l2(const Space& space, const GridFunction& v) {
  detail::check_bound(space, v);
  double sum_sq = 0.0;
  for (double c : v.coeffs) sum_sq += c * c;
  if (std::holds_alternative<FemSpace>(space)) {
    sum_sq *= std::get<FemSpace>(space).mesh_width();
  }
  return std::sqrt(sum_sq);
}

double norm_mass(const FemSpace& space, const GridFunction& v) {
  detail::check_bound(Space{space}, v);
  std::vector<double> mv(v.coeffs.size());
  space.apply_mass(v.coeffs, mv);
  double acc = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) acc += v.coeffs[i] * mv[i];
  return std::sqrt(std::max(acc, 0.0));
}

std::vector<double> evaluate_on_grid(const Space& space, const GridFunction& v,
                                     std::span<const double> nodes) {
  detail::check_bound(space, v);
  for (double x : nodes) {
    if (!(x > 0.0 && x < 1.0)) {
      throw std::invalid_argument("evaluate_on_grid: node outside (0,1)");
    }
  }
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        std::vector<double> out(nodes.size());
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>,
                                     SpectralSpace>) {
          const double sqrt2 = std::sqrt(2.0);
          for (std::size_t p = 0; p < nodes.size(); ++p) {
            double acc = 0.0;
            for (int j = 1; j <= s.n_modes(); ++j) {
              acc += v.coeffs[j - 1] * std::sin(j * kPi * nodes[p]);
            }
            out[p] = sqrt2 * acc;
          }
        } else {
          const double h = s.mesh_width();
          const int n = s.n_dof();
          for (std::size_t p = 0; p < nodes.size(); ++p) {
            const double s_pos = nodes[p] / h;
            int cell = static_cast<int>(s_pos);
            cell = std::clamp(cell, 0, n);
            const double frac = s_pos - cell;
            const double left = (cell >= 1) ? v.coeffs[cell - 1] : 0.0;
            const double right = (cell + 1 <= n) ? v.coeffs[cell] : 0.0;
            out[p] = left + frac * (right - left);
          }
        }
        return out;
      },
      space);
}

std::vector<double> evaluate_on_uniform_grid(const Space& space,
                                             const GridFunction& v,
                                             int n_points) {
  if (n_points < 1) {
    throw std::invalid_argument("evaluate_on_uniform_grid: n_points < 1");
  }
  detail::check_bound(space, v);
  if (const auto* s = std::get_if<SpectralSpace>(&space);
      s != nullptr && s->n_modes() <= n_points) {
    // Uniform interior nodes are exactly the DST-I grid.
    const double sqrt2 = std::sqrt(2.0);
    std::vector<double> padded(n_points, 0.0);
    for (int j = 0; j < s->n_modes(); ++j) padded[j] = sqrt2 * v.coeffs[j];
    return transforms::dst_apply(padded);
  }
  if (const auto* s = std::get_if<FemSpace>(&space);
      s != nullptr && s->n_dof() == n_points) {
    return v.coeffs;
  }
  const double step = 1.0 / (n_points + 1);
  std::vector<double> nodes(n_points);
  for (int i = 1; i <= n_points; ++i) nodes[i - 1] = i * step;
  return evaluate_on_grid(space, v, nodes);
}

}  // namespace randsee
