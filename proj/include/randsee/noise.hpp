#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "randsee/rng.hpp"
#include "randsee/spatial.hpp"

namespace randsee {

/// Covariance spectrum of the Q-Wiener process: eigenvalues mu_1..mu_M of Q
/// in the sine basis, materialized up to the truncation level.
struct CovarianceSpec {
  std::vector<double> mu;
  std::optional<double> decay_alpha;  // metadata for reporting only

  int truncation_m() const { return static_cast<int>(mu.size()); }
  double trace() const;

  /// mu_j = j^-exponent; the experiment default is exponent 3.
  static CovarianceSpec polynomial(int truncation_m, double exponent = 3.0);
  static CovarianceSpec custom(int truncation_m,
                               const std::function<double(int)>& law);
};

/// Per-mode standard Brownian increments at the reference resolution k_ref,
/// shared by every run on the same path. Entries are N(0, k_ref) before the
/// covariance scaling sqrt(mu_j), which is applied on read. Each entry is a
/// pure function of (seed, mode, step), so the table is reproducible in any
/// fill order. Immutable after build; concurrent readers are fine.
struct BrownianStore {
  double ref_step = 0.0;
  std::int64_t n_ref_steps = 0;
  int n_modes = 0;
  std::uint64_t seed = 0;
  std::vector<double> increments;  // [mode][step], row-major

  double entry(int mode_index, std::int64_t step) const {
    return increments[static_cast<std::size_t>(mode_index) *
                          static_cast<std::size_t>(n_ref_steps) +
                      static_cast<std::size_t>(step)];
  }
  double horizon() const { return ref_step * static_cast<double>(n_ref_steps); }

  friend bool operator==(const BrownianStore&, const BrownianStore&) = default;
};

/// Covariance spectrum plus the Brownian path table it scales.
struct NoiseModel {
  CovarianceSpec cov;
  BrownianStore store;
};

/// Increment of sqrt(mu_j) beta_j over (t_begin, t_end), per mode.
struct WienerIncrement {
  std::vector<double> per_mode;
  double t_begin = 0.0;
  double t_end = 0.0;
};

BrownianStore build_store(const CovarianceSpec& cov, double horizon,
                          double ref_step, std::uint64_t seed);

/// Increment over [t_start, t_start + k]; both endpoints must lie on the
/// reference grid. Sub-sums combine over a fixed dyadic tree, so the
/// increment at step 2k is bit-identical to the sum of its two k-halves at
/// every refinement level (trajectories at different step sizes see one
/// consistent path).
WienerIncrement full_step_increment(const BrownianStore& store,
                                    const CovarianceSpec& cov, double t_start,
                                    double k);

/// W(t_start + tau k) - W(t_start) sampled conditionally on the full-step
/// increment via the Brownian bridge: raw partial = tau dB +
/// sqrt(tau(1-tau)k) Z, with Z from the stream keyed by (stream_key, mode).
WienerIncrement bridge_increment(const BrownianStore& store,
                                 const CovarianceSpec& cov, double t_start,
                                 double k, double tau,
                                 rng::StreamKey stream_key);

/// Realize an increment as a V_h element. Spectral: modal coefficients
/// (zero-padded or truncated). FEM: nodal values of the sine expansion via a
/// type-I DST when the modes fit, direct summation otherwise. inner_modes
/// further truncates the expansion (stage-one mode reduction).
GridFunction increment_to_gridfunction(const WienerIncrement& increment,
                                       const Space& space,
                                       std::optional<int> inner_modes = {});

/// Binary dump of the increment table: 16-byte header
/// (magic 'RSEE', version, M, n_ref_steps) followed by the raw doubles.
/// The time step is not stored; pass it back in on load.
void save_store(const BrownianStore& store, const std::filesystem::path& path);
BrownianStore load_store(const std::filesystem::path& path, double ref_step);

/// Named pass/fail result of one statistical self-check.
struct NoiseCheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The noise module's statistical suite: determinism, per-mode variance,
/// cross-mode covariance, bridge moments, refinement coupling, DST-vs-direct
/// agreement. Backs the validate-noise CLI command.
std::vector<NoiseCheckResult> run_noise_checks(std::uint64_t seed);

}  // namespace randsee
