#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace randsee {

/// Coefficient vector of an element of V_h. Modal coefficients for the
/// spectral space, interior nodal values for the finite element space.
/// The tag binds the function to one discretization instance.
struct GridFunction {
  std::vector<double> coeffs;
  std::uint64_t space_tag = 0;
};

using ScalarFunction = std::function<double(double)>;
/// Closed-form projection coefficients, mode index is 1-based.
using ModalFunction = std::function<double(int)>;

/// Spectral Galerkin space V_h = span{sqrt(2) sin(j pi x) : j = 1..N} for the
/// Dirichlet Laplacian on (0,1), eigenvalues lambda_j = j^2 pi^2.
class SpectralSpace {
 public:
  explicit SpectralSpace(int n_modes);

  int n_modes() const { return n_modes_; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  double eigenvalue(int mode) const { return eigenvalues_[mode - 1]; }
  std::uint64_t tag() const { return tag_; }

 private:
  int n_modes_;
  std::vector<double> eigenvalues_;
  std::uint64_t tag_;
};

/// Piecewise linear finite elements on the uniform mesh x_i = i h,
/// h = 1/(n_dof+1), homogeneous Dirichlet dofs excluded. Mass and stiffness
/// matrices are symmetric tridiagonal Toeplitz, kept as scalar entries.
class FemSpace {
 public:
  explicit FemSpace(int n_dof);

  int n_dof() const { return n_dof_; }
  double mesh_width() const { return h_; }
  double mass_diag() const { return 2.0 * h_ / 3.0; }
  double mass_off() const { return h_ / 6.0; }
  double stiffness_diag() const { return 2.0 / h_; }
  double stiffness_off() const { return -1.0 / h_; }
  std::uint64_t tag() const { return tag_; }

  /// Mesh nodes x_i = i h, i = 1..n_dof.
  std::vector<double> nodes() const;

  void apply_mass(std::span<const double> in, std::span<double> out) const;
  void apply_stiffness(std::span<const double> in, std::span<double> out) const;

 private:
  int n_dof_;
  double h_;
  std::uint64_t tag_;
};

using Space = std::variant<SpectralSpace, FemSpace>;

int dimension(const Space& space);
std::uint64_t space_tag(const Space& space);
GridFunction zero_function(const Space& space);

/// L2-orthogonal projection P_h u0. Spectral coefficients come from composite
/// Gauss quadrature unless a closed form is registered; the FEM version
/// assembles the load vector and solves against the mass matrix.
GridFunction project_initial(const Space& space, const ScalarFunction& u0);
GridFunction project_initial(const Space& space, const ScalarFunction& u0,
                             const ModalFunction& closed_form);

/// Discrete generator A_h. Spectral: multiply by lambda_j. FEM: mass solve
/// against the stiffness image, M w = S v.
GridFunction apply_Ah(const Space& space, const GridFunction& v);

/// (Id + kappa A_h)^{-1} v, the solve behind S_{kappa,h}. Spectral: modal
/// multipliers 1/(1 + kappa lambda_j). FEM: Thomas solve of
/// (M + kappa S) w = M v.
GridFunction resolvent_solve(const Space& space, double kappa,
                             const GridFunction& v);

/// Discrete L2 norm: Parseval for the spectral space, trapezoidal rule
/// sqrt(h sum v_i^2) for FEM.
double norm_l2(const Space& space, const GridFunction& v);

/// Natural V_h norm sqrt(v^T M v) for FEM functions.
double norm_mass(const FemSpace& space, const GridFunction& v);

/// Point values at nodes strictly inside (0,1). Spectral: sine series
/// evaluation; FEM: piecewise linear interpolation.
std::vector<double> evaluate_on_grid(const Space& space, const GridFunction& v,
                                     std::span<const double> nodes);

/// Values on the uniform interior grid x_i = i/(n_points+1); uses the DST
/// fast path for spectral functions when the grid can hold every mode.
std::vector<double> evaluate_on_uniform_grid(const Space& space,
                                             const GridFunction& v,
                                             int n_points);

namespace detail {

/// Thomas solve for a symmetric tridiagonal Toeplitz system
/// diag*x_i + off*(x_{i-1} + x_{i+1}) = rhs_i. No pivoting; callers pass
/// diagonally dominant SPD systems.
std::vector<double> solve_tridiag_toeplitz(double diag, double off,
                                           std::span<const double> rhs);

void check_bound(const Space& space, const GridFunction& v);

}  // namespace detail

}  // namespace randsee
