#include "randsee/scheme.hpp"

#include <cmath>
#include <string>

namespace randsee {

namespace {

// Stream tags under the trajectory key.
constexpr std::uint64_t kTauStreamTag = 0x746175;     // "tau"
constexpr std::uint64_t kBridgeStreamTag = 0x62726467;  // "brdg"

// One linearly-implicit substep: (Id + kappa A_h)^{-1} applied to
// x - kappa*drift + sigma*noise. The classical step and both stages of the
// randomized step route through this one expression, so the tau = 0
// degeneration to the classical method is bitwise, not approximate.
GridFunction euler_substep(const Space& space, const GridFunction& x,
                           double kappa, const GridFunction& drift,
                           double sigma, const GridFunction& noise) {
  GridFunction bracket = x;
  for (std::size_t i = 0; i < bracket.coeffs.size(); ++i) {
    bracket.coeffs[i] =
        x.coeffs[i] - kappa * drift.coeffs[i] + sigma * noise.coeffs[i];
  }
  return resolvent_solve(space, kappa, bracket);
}

void check_can_step(const TrajectoryState& state, const SchemeConfig& config,
                    const NoiseModel& noise) {
  config.validate();
  if (state.time_index >= config.n_steps) {
    throw std::invalid_argument("step: trajectory already at the final time");
  }
  const double t_end = (state.time_index + 1) * config.step_k;
  if (t_end > noise.store.horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("step: noise store exhausted (time beyond T)");
  }
}

double state_norm(const Space& space, const GridFunction& g) {
  return norm_l2(space, g);
}

void check_finite(const Space& space, const GridFunction& g, std::int64_t step,
                  double tau) {
  for (double c : g.coeffs) {
    if (!std::isfinite(c)) {
      throw TrajectoryFailure(step, tau, state_norm(space, g));
    }
  }
}

}  // namespace

const char* method_name(Method method) {
  return method == Method::randomized ? "randomized" : "classical";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "randomized") return Method::randomized;
  if (name == "classical") return Method::classical;
  return std::nullopt;
}

void SchemeConfig::validate() const {
  if (!(step_k > 0.0)) {
    throw std::invalid_argument("SchemeConfig: step_k must be positive");
  }
  if (n_steps < 0) {
    throw std::invalid_argument("SchemeConfig: n_steps must be nonnegative");
  }
  if (truncation_m < 1) {
    throw std::invalid_argument("SchemeConfig: truncation_m must be >= 1");
  }
  if (inner_modes && (*inner_modes < 1 || *inner_modes > truncation_m)) {
    throw std::invalid_argument(
        "SchemeConfig: inner_modes must lie in [1, truncation_m]");
  }
}

TrajectoryFailure::TrajectoryFailure(std::int64_t step, double tau,
                                     double norm)
    : std::runtime_error("trajectory left the finite range at step " +
                         std::to_string(step) + " (tau = " +
                         std::to_string(tau) + ", norm = " +
                         std::to_string(norm) + ")"),
      step_(step),
      tau_(tau),
      norm_(norm) {}

TrajectoryState init_state(const Space& space, const ProblemSpec& problem) {
  TrajectoryState state;
  state.current = problem.initial_modal
                      ? project_initial(space, problem.initial,
                                        problem.initial_modal)
                      : project_initial(space, problem.initial);
  state.time_index = 0;
  return state;
}

TrajectoryState step_classical(const TrajectoryState& state,
                               const SchemeConfig& config, const Space& space,
                               const ProblemSpec& problem,
                               const NoiseModel& noise) {
  check_can_step(state, config, noise);
  const double k = config.step_k;
  const double t_prev = static_cast<double>(state.time_index) * k;

  const auto full = full_step_increment(noise.store, noise.cov, t_prev, k);
  const auto noise_full =
      increment_to_gridfunction(full, space, config.truncation_m);
  const auto drift = eval_drift(problem, t_prev, state.current, space);

  TrajectoryState next;
  next.current = euler_substep(space, state.current, k, drift,
                               problem.noise_sigma(t_prev), noise_full);
  next.time_index = state.time_index + 1;
  next.tau_log = state.tau_log;
  check_finite(space, next.current, next.time_index, 0.0);
  return next;
}

TrajectoryState step_randomized(const TrajectoryState& state,
                                const SchemeConfig& config, const Space& space,
                                const ProblemSpec& problem,
                                const NoiseModel& noise,
                                rng::StreamKey trajectory_key) {
  check_can_step(state, config, noise);
  const double k = config.step_k;
  const double t_prev = static_cast<double>(state.time_index) * k;

  double tau;
  if (!config.injected_tau.empty()) {
    tau = config.injected_tau.size() == 1
              ? config.injected_tau.front()
              : config.injected_tau.at(
                    static_cast<std::size_t>(state.time_index));
    if (tau < 0.0 || tau > 1.0) {
      throw std::invalid_argument("step_randomized: injected tau outside [0,1]");
    }
  } else {
    tau = rng::uniform01(rng::derive(trajectory_key, kTauStreamTag),
                         static_cast<std::uint64_t>(state.time_index));
  }
  const double t_tau = t_prev + tau * k;

  const auto full = full_step_increment(noise.store, noise.cov, t_prev, k);
  const auto noise_full =
      increment_to_gridfunction(full, space, config.truncation_m);

  // Stage one: approximation at the randomized node t^tau.
  GridFunction stage;
  if (tau == 0.0) {
    stage = state.current;
  } else {
    const auto stage_increment =
        tau == 1.0 ? full
                   : bridge_increment(
                         noise.store, noise.cov, t_prev, k, tau,
                         rng::derive(trajectory_key, kBridgeStreamTag,
                                     static_cast<std::uint64_t>(
                                         state.time_index)));
    const auto noise_stage =
        increment_to_gridfunction(stage_increment, space, config.stage_modes());
    const auto drift_prev = eval_drift(problem, t_prev, state.current, space);
    stage = euler_substep(space, state.current, tau * k, drift_prev,
                          problem.noise_sigma(t_prev), noise_stage);
  }

  // Stage two: full step with coefficients evaluated at t^tau.
  const auto drift_stage = eval_drift(problem, t_tau, stage, space);

  TrajectoryState next;
  next.current = euler_substep(space, state.current, k, drift_stage,
                               problem.noise_sigma(t_tau), noise_full);
  next.time_index = state.time_index + 1;
  next.tau_log = state.tau_log;
  next.tau_log.push_back(tau);
  check_finite(space, next.current, next.time_index, tau);
  return next;
}

std::vector<GridFunction> run_trajectory(const SchemeConfig& config,
                                         const Space& space,
                                         const ProblemSpec& problem,
                                         const NoiseModel& noise,
                                         rng::StreamKey trajectory_key,
                                         std::int64_t record_every) {
  if (config.n_steps > 0) config.validate();
  if (!config.injected_tau.empty() && config.injected_tau.size() != 1 &&
      config.injected_tau.size() < static_cast<std::size_t>(config.n_steps)) {
    throw std::invalid_argument(
        "run_trajectory: injected tau sequence shorter than n_steps");
  }

  TrajectoryState state = init_state(space, problem);
  std::vector<GridFunction> recorded;
  if (record_every > 0) recorded.push_back(state.current);

  for (std::int64_t n = 0; n < config.n_steps; ++n) {
    state = config.method == Method::randomized
                ? step_randomized(state, config, space, problem, noise,
                                  trajectory_key)
                : step_classical(state, config, space, problem, noise);
    if (record_every > 0 && state.time_index % record_every == 0) {
      recorded.push_back(state.current);
    }
  }
  if (record_every <= 0 ||
      (config.n_steps % record_every != 0 && config.n_steps > 0)) {
    recorded.push_back(state.current);
  }
  return recorded;
}

}  // namespace randsee
