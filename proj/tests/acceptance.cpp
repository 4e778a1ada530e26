// Acceptance suite: end-to-end checks of the solver against its contract,
// one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "randsee/experiment.hpp"

using namespace randsee;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double grid_distance(const Space& space, const GridFunction& a,
                     const GridFunction& b) {
  GridFunction diff = a;
  for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
    diff.coeffs[i] -= b.coeffs[i];
  }
  return norm_l2(space, diff);
}

// 1. Injected tau = 0 makes the randomized scheme reproduce the classical
//    one bitwise on a shared noise store.
Outcome criterion_degeneration() {
  const auto problem = builtin_problem("weierstrass-sigma1");
  const Space space = FemSpace(100);
  const auto cov = CovarianceSpec::polynomial(100);
  const NoiseModel noise{cov, build_store(cov, 1.0, std::ldexp(1.0, -7), 51)};

  SchemeConfig config;
  config.step_k = std::ldexp(1.0, -5);
  config.n_steps = 32;
  config.truncation_m = 100;

  config.method = Method::randomized;
  config.injected_tau = {0.0};
  const auto randomized =
      run_trajectory(config, space, problem, noise, rng::master_key(1), 1);
  config.method = Method::classical;
  config.injected_tau.clear();
  const auto classical =
      run_trajectory(config, space, problem, noise, rng::master_key(2), 1);

  if (randomized.size() != classical.size()) {
    return {false, "trajectory lengths differ"};
  }
  for (std::size_t n = 0; n < randomized.size(); ++n) {
    if (randomized[n].coeffs != classical[n].coeffs) {
      return {false, "state mismatch at step " + std::to_string(n)};
    }
  }
  return {true, "33 states bit-identical (FEM N_h=100, k=2^-5)"};
}

// 2. sigma_2 vanishes on the k = 2^-4 grid: the classical trajectory equals
//    the sigma = 0 run exactly, and the randomized method's RMS error is at
//    least 1.5x smaller than the classical one.
Outcome criterion_fooling() {
  const Space space = FemSpace(100);
  const auto cov = CovarianceSpec::polynomial(100);
  const NoiseModel noise{cov, build_store(cov, 1.0, std::ldexp(1.0, -10), 7)};

  SchemeConfig config;
  config.step_k = std::ldexp(1.0, -4);
  config.n_steps = 16;
  config.method = Method::classical;
  config.truncation_m = 100;

  const auto with_sigma2 =
      run_trajectory(config, space, builtin_problem("weierstrass-sigma2"),
                     noise, rng::master_key(3), 1);
  const auto without_noise =
      run_trajectory(config, space, builtin_problem("zero-noise"), noise,
                     rng::master_key(4), 1);
  for (std::size_t n = 0; n < with_sigma2.size(); ++n) {
    if (with_sigma2[n].coeffs != without_noise[n].coeffs) {
      return {false, "sigma_2 run differs from the zero-noise run at step " +
                         std::to_string(n)};
    }
  }

  StudyConfig study;
  study.problem = "weierstrass-sigma2";
  study.space = SpaceKind::fem;
  study.n_dof = 100;
  study.truncation_m = 100;
  study.ref_exponent = 10;
  study.step_exponents = {4};
  study.n_samples = 50;
  study.master_seed = 1881;
  const auto report = run_study(study);

  double rms_randomized = 0.0, rms_classical = 0.0;
  for (const auto& row : report.rows) {
    (row.method == Method::randomized ? rms_randomized : rms_classical) =
        row.rms_error;
  }
  const double ratio = rms_classical / rms_randomized;
  std::ostringstream detail;
  detail.precision(4);
  detail << "trajectories identical; classical rms " << rms_classical
         << " vs randomized " << rms_randomized << ", ratio " << ratio
         << " (need >= 1.5)";
  return {ratio >= 1.5, detail.str()};
}

// 3. Desk-scale sigma_1 study: regression slopes of both methods lie in
//    [0.6, 1.1].
Outcome criterion_temporal_order() {
  StudyConfig study;
  study.problem = "weierstrass-sigma1";
  study.space = SpaceKind::spectral;
  study.n_modes = 100;
  study.truncation_m = 100;
  study.ref_exponent = 10;
  study.step_exponents = {3, 4, 5, 6, 7};
  study.n_samples = 20;
  study.master_seed = 24601;
  const auto report = run_study(study);

  std::ostringstream detail;
  detail.precision(3);
  bool pass = true;
  for (const auto& slope : report.slopes) {
    if (!slope.value) return {false, "slope undefined"};
    pass = pass && *slope.value >= 0.6 && *slope.value <= 1.1;
    detail << method_name(slope.method) << " slope " << *slope.value << "  ";
  }
  detail << "(need [0.6, 1.1])";
  return {pass, detail.str()};
}

// 4. Feeding the published classic sigma_1 error column through the EOC and
//    regression routines reproduces the published numbers.
Outcome criterion_eoc_arithmetic() {
  const std::vector<double> errors = {0.2696, 0.1688, 0.1023,
                                      0.0553, 0.0287, 0.0151};
  const std::vector<double> printed = {0.67, 0.72, 0.89, 0.95, 0.93};
  std::vector<double> ks;
  for (int i = 4; i <= 9; ++i) ks.push_back(std::ldexp(1.0, -i));

  const auto eoc = compute_eoc(errors, ks);
  bool pass = true;
  std::ostringstream detail;
  detail.precision(4);
  for (std::size_t i = 0; i < eoc.size(); ++i) {
    const double deviation = std::fabs(eoc[i] - printed[i]);
    if (deviation > 0.005) {
      pass = false;
      detail << "pair " << i + 1 << ": computed " << eoc[i] << " vs printed "
             << printed[i] << " deviates by " << deviation << " > 0.005; ";
    }
  }
  const double slope = regression_order(errors, ks);
  if (std::fabs(slope - 0.84) > 0.02) {
    pass = false;
    detail << "slope " << slope << " outside 0.84 +- 0.02; ";
  } else {
    detail << "slope " << slope << " within 0.84 +- 0.02";
  }
  return {pass, detail.str()};
}

// 5. With f = sigma = 0 the spectral iteration is exact per mode:
//    the n-step multiplier equals (1 + k lambda_j)^-n to 1e-12 relative,
//    and the norm never increases.
Outcome criterion_modal_exactness() {
  ProblemSpec problem;
  problem.drift_eta = [](double, double) { return 0.0; };
  problem.noise_sigma = [](double) { return 0.0; };
  problem.initial = [](double) { return 0.0; };
  problem.initial_modal = [](int) { return 1.0; };
  problem.horizon_T = 1.0;

  const int n_modes = 8;
  const Space space = SpectralSpace(n_modes);
  const auto& spectral = std::get<SpectralSpace>(space);
  const auto cov = CovarianceSpec::polynomial(n_modes);

  double worst_rel = 0.0;
  for (const int exponent : {2, 5}) {
    const NoiseModel noise{
        cov, build_store(cov, 1.0, std::ldexp(1.0, -exponent), 77)};
    for (const Method method : {Method::randomized, Method::classical}) {
      SchemeConfig config;
      config.step_k = std::ldexp(1.0, -exponent);
      config.n_steps = std::int64_t{1} << exponent;
      config.method = method;
      config.truncation_m = n_modes;
      const auto states =
          run_trajectory(config, space, problem, noise, rng::master_key(5), 1);
      for (std::size_t n = 1; n < states.size(); ++n) {
        if (norm_l2(space, states[n]) >
            norm_l2(space, states[n - 1]) * (1.0 + 1e-15)) {
          return {false, "norm increased at step " + std::to_string(n)};
        }
      }
      for (int j = 1; j <= n_modes; ++j) {
        const double expected = std::pow(
            1.0 + config.step_k * spectral.eigenvalue(j),
            -static_cast<double>(config.n_steps));
        const double rel =
            std::fabs(states.back().coeffs[j - 1] - expected) / expected;
        worst_rel = std::max(worst_rel, rel);
      }
    }
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "worst relative deviation " << worst_rel << " (need <= 1e-12)";
  return {worst_rel <= 1e-12, detail.str()};
}

// 6. Noise sampler statistics: variance, cross-covariance, bridge moments
//    within 5 standard errors; DST agrees with direct summation to 1e-10.
Outcome criterion_noise_statistics() {
  const auto checks = run_noise_checks(8086);
  std::ostringstream detail;
  bool pass = true;
  for (const auto& check : checks) {
    if (!check.pass) {
      pass = false;
      detail << check.name << ": " << check.detail << "; ";
    }
  }
  if (pass) {
    detail << checks.size() << " checks within tolerance";
  }
  return {pass, detail.str()};
}

// 7. Deterministic heat equation: FEM at widths 1/64, 1/128, 1/256 against a
//    1000-mode spectral reference at T = 0.1 shows spatial order >= 1.8.
Outcome criterion_spatial_order() {
  ProblemSpec problem;
  problem.drift_eta = [](double, double) { return 0.0; };
  problem.noise_sigma = [](double) { return 0.0; };
  problem.initial = [](double x) { return 2.0 * x * (1.0 - x); };
  problem.horizon_T = 0.1;

  const auto cov = CovarianceSpec::polynomial(1);
  const int n_steps = 256;
  const double k = problem.horizon_T / n_steps;
  const NoiseModel noise{cov, build_store(cov, problem.horizon_T, k, 3)};

  SchemeConfig config;
  config.step_k = k;
  config.n_steps = n_steps;
  config.method = Method::classical;
  config.truncation_m = 1;

  const Space reference_space = SpectralSpace(1000);
  const auto reference = run_trajectory(config, reference_space, problem,
                                        noise, rng::master_key(6), 0);

  std::vector<double> errors;
  for (const int n_dof : {63, 127, 255}) {
    const FemSpace fem(n_dof);
    const Space space = fem;
    const auto states =
        run_trajectory(config, space, problem, noise, rng::master_key(6), 0);
    const auto ref_values =
        evaluate_on_grid(reference_space, reference.back(), fem.nodes());
    GridFunction ref_nodal{ref_values, space_tag(space)};
    errors.push_back(grid_distance(space, states.back(), ref_nodal));
  }
  const double order_a = std::log2(errors[0] / errors[1]);
  const double order_b = std::log2(errors[1] / errors[2]);
  std::ostringstream detail;
  detail.precision(3);
  detail << "observed orders " << order_a << ", " << order_b
         << " (need >= 1.8)";
  return {order_a >= 1.8 && order_b >= 1.8, detail.str()};
}

// 8. Identical study configurations produce byte-identical CSV payloads.
Outcome criterion_reproducibility() {
  StudyConfig study;
  study.problem = "weierstrass-sigma1";
  study.space = SpaceKind::spectral;
  study.n_modes = 64;
  study.truncation_m = 64;
  study.ref_exponent = 8;
  study.step_exponents = {3, 4, 5};
  study.n_samples = 10;
  study.master_seed = 13579;

  const auto first = run_study(study);
  const auto second = run_study(study);
  std::ostringstream results_a, results_b, samples_a, samples_b;
  write_results_csv(first, results_a);
  write_results_csv(second, results_b);
  write_samples_csv(first, samples_a);
  write_samples_csv(second, samples_b);
  const bool pass = results_a.str() == results_b.str() &&
                    samples_a.str() == samples_b.str();
  std::ostringstream detail;
  detail << "results CSV " << results_a.str().size() << " bytes, samples CSV "
         << samples_a.str().size() << " bytes"
         << (pass ? ", byte-identical across reruns" : ": reruns differ");
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria =
      {
          {"exact scheme degeneration (tau = 0)", criterion_degeneration},
          {"fooling-function zeroing and error gap", criterion_fooling},
          {"temporal order, sigma_1 study", criterion_temporal_order},
          {"EOC arithmetic on published data", criterion_eoc_arithmetic},
          {"modal exactness of the resolvent iteration",
           criterion_modal_exactness},
          {"noise increment statistics", criterion_noise_statistics},
          {"spatial order against the spectral reference",
           criterion_spatial_order},
          {"study reproducibility", criterion_reproducibility},
      };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s  criterion %zu: %s — %s [%.2fs]\n",
                outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
