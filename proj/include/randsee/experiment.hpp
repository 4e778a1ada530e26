#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randsee/scheme.hpp"

namespace randsee {

enum class SpaceKind { spectral, fem };
enum class ErrorMode { final_time, max_over_grid };

/// Full description of one convergence study: which problem, which
/// discretization, the reference resolution, the coarse step sizes, and the
/// Monte Carlo budget. Identical configs (including master_seed) produce
/// bit-identical reports.
struct StudyConfig {
  std::string problem = "weierstrass-sigma1";
  // Optional coefficient overrides applied on top of the named problem.
  std::optional<double> weierstrass_a;
  std::optional<int> weierstrass_b;
  std::optional<int> weierstrass_j;
  std::optional<std::string> sigma_override;  // sigma1 | sigma2 | zero

  SpaceKind space = SpaceKind::spectral;
  int n_modes = 100;
  int n_dof = 100;
  int truncation_m = 100;
  std::optional<int> inner_modes;

  int ref_exponent = 10;                        // k_ref = T 2^-i_ref
  std::vector<int> step_exponents = {3, 4, 5, 6, 7};
  int n_samples = 20;
  std::vector<Method> methods = {Method::randomized, Method::classical};
  ErrorMode error_mode = ErrorMode::final_time;
  Method ref_scheme = Method::randomized;       // scheme of the reference run
  std::uint64_t master_seed = 20180704;
  std::uint64_t sample_offset = 0;  // global index of the first sample; lets
                                    // pooled sub-studies reuse exact seeds
  int threads = 0;                  // 0 = hardware concurrency

  void validate() const;  // throws std::invalid_argument naming the key
};

struct ReportRow {
  Method method = Method::randomized;
  int exponent = 0;
  double step_k = 0.0;
  double rms_error = 0.0;
  std::optional<double> eoc;  // undefined for the coarsest step or bad errors
};

struct SampleError {
  Method method = Method::randomized;
  int exponent = 0;
  std::uint64_t sample = 0;  // global sample index
  double error = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<ReportRow> rows;  // method-major, exponents ascending
  struct Slope {
    Method method;
    std::optional<double> value;
  };
  std::vector<Slope> slopes;
  std::vector<SampleError> sample_errors;
  int failed_samples = 0;
  double wall_seconds = 0.0;  // not part of any CSV payload
};

/// Pairwise experimental orders of convergence,
/// eoc_i = [log e_i - log e_{i+1}] / [log k_i - log k_{i+1}].
/// Requires positive errors and strictly decreasing step sizes.
std::vector<double> compute_eoc(std::span<const double> errors,
                                std::span<const double> ks);

/// Same pairwise slopes but tolerant: nonpositive or non-finite errors give
/// an undefined entry instead of an error (self-comparisons produce zeros).
std::vector<std::optional<double>> compute_eoc_safe(
    std::span<const double> errors, std::span<const double> ks);

/// Least-squares slope of log(error) against log(k).
double regression_order(std::span<const double> errors,
                        std::span<const double> ks);

/// Run the Monte Carlo study: per sample one Brownian store, one reference
/// trajectory at k_ref, and coupled coarse trajectories for every
/// (method, step size) off the same store. Samples whose trajectory leaves
/// the finite range are excluded and counted; more than 10% failures aborts.
ConvergenceReport run_study(const StudyConfig& config);

/// CSV payloads. Both start with the config echoed as '# key = value' lines
/// (no timing metadata, so identical studies serialize byte-identically).
void write_results_csv(const ConvergenceReport& report, std::ostream& out);
void write_samples_csv(const ConvergenceReport& report, std::ostream& out);

/// Config echo in the flat key = value format understood by the CLI.
std::string config_echo(const StudyConfig& config);

const char* space_kind_name(SpaceKind kind);
const char* error_mode_name(ErrorMode mode);

/// Materialize the problem named by the config with overrides applied.
ProblemSpec make_problem(const StudyConfig& config);
Space make_space(const StudyConfig& config);

}  // namespace randsee
