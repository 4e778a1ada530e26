#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "randsee/noise.hpp"
#include "randsee/problem.hpp"
#include "randsee/rng.hpp"
#include "randsee/spatial.hpp"

namespace randsee {

enum class Method { randomized, classical };

const char* method_name(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Time stepping configuration for one trajectory on the uniform grid
/// t_n = n k. truncation_m selects how many store modes the full-step
/// increment uses; inner_modes (<= truncation_m) optionally reduces the
/// stage-one increment. injected_tau is a testing hook: one value is
/// broadcast, otherwise entry n-1 is used for step n.
struct SchemeConfig {
  double step_k = 0.0;
  std::int64_t n_steps = 0;
  Method method = Method::randomized;
  int truncation_m = 0;
  std::optional<int> inner_modes;
  std::vector<double> injected_tau;

  int stage_modes() const {
    return inner_modes ? *inner_modes : truncation_m;
  }
  void validate() const;
};

struct TrajectoryState {
  GridFunction current;
  std::int64_t time_index = 0;
  std::vector<double> tau_log;
};

/// Raised when a trajectory leaves the finite range; carries the step,
/// the drawn tau and the offending norm.
class TrajectoryFailure : public std::runtime_error {
 public:
  TrajectoryFailure(std::int64_t step, double tau, double norm);
  std::int64_t step() const { return step_; }
  double tau() const { return tau_; }
  double norm() const { return norm_; }

 private:
  std::int64_t step_;
  double tau_;
  double norm_;
};

/// X^0 = P_h X_0 (closed-form coefficients when the problem registers them).
TrajectoryState init_state(const Space& space, const ProblemSpec& problem);

/// One step of the randomized two-stage method
///   X^{n,tau} = S_{tau k}[X^{n-1} - tau k f(t_{n-1}, X^{n-1})
///                         + sigma(t_{n-1}) dW_{tau k}]
///   X^{n}     = S_{k}   [X^{n-1} - k f(t^tau, X^{n,tau})
///                         + sigma(t^tau) dW_k]
/// with t^tau = t_{n-1} + tau k, tau ~ U(0,1). tau = 0 degenerates the
/// stage to X^{n,tau} = X^{n-1}; tau = 1 uses the full-step increment as
/// the stage increment. Both are the continuous limits of the recursion.
TrajectoryState step_randomized(const TrajectoryState& state,
                                const SchemeConfig& config, const Space& space,
                                const ProblemSpec& problem,
                                const NoiseModel& noise,
                                rng::StreamKey trajectory_key);

/// Linearly-implicit Euler-Galerkin step
///   X^n = S_k[X^{n-1} - k f(t_{n-1}, X^{n-1}) + sigma(t_{n-1}) dW_k].
/// Identical arithmetic to the randomized step with tau = 0.
TrajectoryState step_classical(const TrajectoryState& state,
                               const SchemeConfig& config, const Space& space,
                               const ProblemSpec& problem,
                               const NoiseModel& noise);

/// Run the configured stepper n_steps times. record_every = 0 keeps only the
/// final state; s > 0 records X^0 and every s-th state (the final state is
/// always included). Same inputs and key give bit-identical output.
std::vector<GridFunction> run_trajectory(const SchemeConfig& config,
                                         const Space& space,
                                         const ProblemSpec& problem,
                                         const NoiseModel& noise,
                                         rng::StreamKey trajectory_key,
                                         std::int64_t record_every = 0);

}  // namespace randsee
