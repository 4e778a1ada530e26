#include "randsee/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace randsee {

namespace {

constexpr std::uint64_t kStoreSeedTag = 0x5EED;
constexpr std::uint64_t kReferenceTag = 0x5EF;
constexpr std::uint64_t kRunTag = 0x52;

std::uint64_t encode_run(Method method, int exponent) {
  return (method == Method::randomized ? 1000u : 2000u) +
         static_cast<std::uint64_t>(exponent);
}

}  // namespace

const char* space_kind_name(SpaceKind kind) {
  return kind == SpaceKind::spectral ? "spectral" : "fem";
}

const char* error_mode_name(ErrorMode mode) {
  return mode == ErrorMode::final_time ? "final_time" : "max_over_grid";
}

void StudyConfig::validate() const {
  if (problem.empty()) {
    throw std::invalid_argument("problem: name must not be empty");
  }
  if (space == SpaceKind::spectral && n_modes < 1) {
    throw std::invalid_argument("modes: must be >= 1");
  }
  if (space == SpaceKind::fem && n_dof < 1) {
    throw std::invalid_argument("ndof: must be >= 1");
  }
  if (truncation_m < 1) {
    throw std::invalid_argument("M: truncation level must be >= 1");
  }
  if (inner_modes && (*inner_modes < 1 || *inner_modes > truncation_m)) {
    throw std::invalid_argument("inner_modes: must lie in [1, M]");
  }
  if (ref_exponent < 1 || ref_exponent > 30) {
    throw std::invalid_argument("kref_exp: must lie in [1, 30]");
  }
  if (step_exponents.empty()) {
    throw std::invalid_argument("step_exps: at least one exponent required");
  }
  for (int i : step_exponents) {
    if (i < 0) {
      throw std::invalid_argument("step_exps: exponents must be nonnegative");
    }
    if (i >= ref_exponent) {
      throw std::invalid_argument(
          "step_exps: exponent " + std::to_string(i) +
          " is not coarser than kref_exp " + std::to_string(ref_exponent));
    }
  }
  for (std::size_t a = 1; a < step_exponents.size(); ++a) {
    if (step_exponents[a] <= step_exponents[a - 1]) {
      throw std::invalid_argument(
          "step_exps: exponents must be strictly increasing");
    }
  }
  if (n_samples < 2) {
    throw std::invalid_argument("samples: need at least 2");
  }
  if (methods.empty()) {
    throw std::invalid_argument("method: at least one method required");
  }
  if (threads < 0) {
    throw std::invalid_argument("threads: must be nonnegative");
  }
  if (sigma_override && *sigma_override != "sigma1" &&
      *sigma_override != "sigma2" && *sigma_override != "zero") {
    throw std::invalid_argument("sigma: must be sigma1, sigma2 or zero");
  }
}

ProblemSpec make_problem(const StudyConfig& config) {
  ProblemSpec spec = builtin_problem(config.problem);
  if (config.weierstrass_a || config.weierstrass_b || config.weierstrass_j) {
    WeierstrassParams params;
    params.a = config.weierstrass_a.value_or(0.9);
    params.b = config.weierstrass_b.value_or(7);
    params.j_max = config.weierstrass_j.value_or(5);
    if (params.a <= 0.0 || params.a >= 1.0) {
      throw std::invalid_argument("weierstrass_a: must lie in (0,1)");
    }
    if (params.b < 1 || params.b % 2 == 0) {
      throw std::invalid_argument("weierstrass_b: must be an odd positive integer");
    }
    if (params.j_max < 0) {
      throw std::invalid_argument("weierstrass_j: must be nonnegative");
    }
    if (!weierstrass_condition_holds(params)) {
      std::cerr << "warning: weierstrass parameters violate ab > 1 + 3pi/2\n";
    }
    spec.drift_eta = [params](double /*t*/, double v) {
      return eval_weierstrass(params, v);
    };
  }
  if (config.sigma_override) {
    if (*config.sigma_override == "sigma1") {
      spec.noise_sigma = [](double t) { return sigma1(t); };
    } else if (*config.sigma_override == "sigma2") {
      spec.noise_sigma = [](double t) { return sigma2(t); };
    } else {
      spec.noise_sigma = [](double /*t*/) { return 0.0; };
    }
  }
  return spec;
}

Space make_space(const StudyConfig& config) {
  if (config.space == SpaceKind::spectral) {
    return SpectralSpace(config.n_modes);
  }
  return FemSpace(config.n_dof);
}

std::vector<double> compute_eoc(std::span<const double> errors,
                                std::span<const double> ks) {
  if (errors.size() != ks.size() || errors.size() < 2) {
    throw std::invalid_argument(
        "compute_eoc: need matching arrays of length >= 2");
  }
  for (double e : errors) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("compute_eoc: errors must be positive");
    }
  }
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (!(ks[i] < ks[i - 1])) {
      throw std::invalid_argument("compute_eoc: ks must be strictly decreasing");
    }
  }
  std::vector<double> out(errors.size() - 1);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    out[i] = (std::log(errors[i]) - std::log(errors[i + 1])) /
             (std::log(ks[i]) - std::log(ks[i + 1]));
  }
  return out;
}

std::vector<std::optional<double>> compute_eoc_safe(
    std::span<const double> errors, std::span<const double> ks) {
  std::vector<std::optional<double>> out(errors.empty() ? 0
                                                        : errors.size() - 1);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const bool ok = errors[i] > 0.0 && errors[i + 1] > 0.0 &&
                    std::isfinite(errors[i]) && std::isfinite(errors[i + 1]) &&
                    ks[i + 1] < ks[i];
    if (ok) {
      out[i] = (std::log(errors[i]) - std::log(errors[i + 1])) /
               (std::log(ks[i]) - std::log(ks[i + 1]));
    }
  }
  return out;
}

double regression_order(std::span<const double> errors,
                        std::span<const double> ks) {
  if (errors.size() != ks.size() || errors.size() < 2) {
    throw std::invalid_argument(
        "regression_order: need matching arrays of length >= 2");
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(ks[i] > 0.0)) {
      throw std::invalid_argument(
          "regression_order: errors and ks must be positive");
    }
  }
  const std::size_t n = errors.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += std::log(ks[i]);
    mean_y += std::log(errors[i]);
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(ks[i]) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - mean_y);
  }
  return sxy / sxx;
}

namespace {

// Everything one sample contributes, merged by sample index afterwards so
// parallel and serial execution produce identical reports.
struct SampleOutcome {
  bool failed = false;
  std::string failure;
  // Indexed [run][coarse grid point]; a single entry in final_time mode.
  std::vector<std::vector<double>> squared_errors;
  std::vector<double> audit_errors;  // one per run
};

struct RunPlan {
  Method method;
  int exponent;
  double step_k;
  std::int64_t n_steps;
};

SampleOutcome run_one_sample(const StudyConfig& config, const Space& space,
                             const ProblemSpec& problem,
                             const CovarianceSpec& cov,
                             const std::vector<RunPlan>& plans,
                             std::uint64_t global_index) {
  const double horizon = problem.horizon_T;
  const double k_ref = horizon * std::ldexp(1.0, -config.ref_exponent);
  const auto master = rng::master_key(config.master_seed);

  SampleOutcome outcome;
  outcome.squared_errors.resize(plans.size());
  outcome.audit_errors.resize(plans.size(), 0.0);
  try {
    const auto store_key = rng::derive(master, kStoreSeedTag, global_index);
    NoiseModel noise{cov, build_store(cov, horizon, k_ref,
                                      store_key.hi ^ store_key.lo)};

    const int finest = *std::max_element(config.step_exponents.begin(),
                                         config.step_exponents.end());
    const std::int64_t ref_steps = std::int64_t{1} << config.ref_exponent;
    const std::int64_t ref_stride =
        config.error_mode == ErrorMode::max_over_grid
            ? (std::int64_t{1} << (config.ref_exponent - finest))
            : 0;

    SchemeConfig ref_config;
    ref_config.step_k = k_ref;
    ref_config.n_steps = ref_steps;
    ref_config.method = config.ref_scheme;
    ref_config.truncation_m = config.truncation_m;
    ref_config.inner_modes = config.inner_modes;
    const auto reference =
        run_trajectory(ref_config, space, problem, noise,
                       rng::derive(master, kReferenceTag, global_index),
                       ref_stride);

    for (std::size_t r = 0; r < plans.size(); ++r) {
      const RunPlan& plan = plans[r];
      SchemeConfig run_config;
      run_config.step_k = plan.step_k;
      run_config.n_steps = plan.n_steps;
      run_config.method = plan.method;
      run_config.truncation_m = config.truncation_m;
      run_config.inner_modes = config.inner_modes;
      const auto key = rng::derive(
          master, kRunTag + encode_run(plan.method, plan.exponent),
          global_index);

      if (config.error_mode == ErrorMode::final_time) {
        const auto states =
            run_trajectory(run_config, space, problem, noise, key, 0);
        GridFunction diff = states.back();
        const GridFunction& ref_final = reference.back();
        for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
          diff.coeffs[i] -= ref_final.coeffs[i];
        }
        const double err = norm_l2(space, diff);
        outcome.squared_errors[r].push_back(err * err);
        outcome.audit_errors[r] = err;
      } else {
        const auto states =
            run_trajectory(run_config, space, problem, noise, key, 1);
        // Reference states sit on the finest coarse grid; this run's grid is
        // every (2^(finest - i))-th entry.
        const std::int64_t skip = std::int64_t{1} << (finest - plan.exponent);
        double worst = 0.0;
        outcome.squared_errors[r].resize(states.size(), 0.0);
        for (std::size_t n = 0; n < states.size(); ++n) {
          GridFunction diff = states[n];
          const GridFunction& ref_state =
              reference[static_cast<std::size_t>(skip) * n];
          for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
            diff.coeffs[i] -= ref_state.coeffs[i];
          }
          const double err = norm_l2(space, diff);
          outcome.squared_errors[r][n] = err * err;
          worst = std::max(worst, err);
        }
        outcome.audit_errors[r] = worst;
      }
    }
  } catch (const TrajectoryFailure& failure) {
    outcome.failed = true;
    outcome.failure = failure.what();
  }
  return outcome;
}

}  // namespace

ConvergenceReport run_study(const StudyConfig& config) {
  config.validate();
  const auto t_begin = std::chrono::steady_clock::now();

  const ProblemSpec problem = make_problem(config);
  const Space space = make_space(config);
  const auto cov = CovarianceSpec::polynomial(config.truncation_m);
  const double horizon = problem.horizon_T;

  std::vector<RunPlan> plans;
  for (Method method : config.methods) {
    for (int exponent : config.step_exponents) {
      RunPlan plan;
      plan.method = method;
      plan.exponent = exponent;
      plan.step_k = horizon * std::ldexp(1.0, -exponent);
      plan.n_steps = std::int64_t{1} << exponent;
      plans.push_back(plan);
    }
  }

  std::vector<SampleOutcome> outcomes(config.n_samples);
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int n_threads =
      std::max(1, std::min(config.threads > 0 ? config.threads : hw,
                           config.n_samples));
  if (n_threads <= 1) {
    for (int s = 0; s < config.n_samples; ++s) {
      outcomes[s] = run_one_sample(config, space, problem, cov, plans,
                                   config.sample_offset + s);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int s = next.fetch_add(1); s < config.n_samples;
           s = next.fetch_add(1)) {
        outcomes[s] = run_one_sample(config, space, problem, cov, plans,
                                     config.sample_offset + s);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ConvergenceReport report;
  report.config = config;
  for (int s = 0; s < config.n_samples; ++s) {
    if (outcomes[s].failed) {
      ++report.failed_samples;
      std::cerr << "warning: sample " << (config.sample_offset + s)
                << " excluded: " << outcomes[s].failure << "\n";
    }
  }
  if (report.failed_samples * 10 > config.n_samples) {
    throw std::runtime_error("run_study: more than 10% of samples failed (" +
                             std::to_string(report.failed_samples) + " of " +
                             std::to_string(config.n_samples) + ")");
  }
  const int n_good = config.n_samples - report.failed_samples;

  // Deterministic merge by sample index.
  std::vector<double> rms(plans.size(), 0.0);
  for (std::size_t r = 0; r < plans.size(); ++r) {
    std::vector<double> grid_sums;
    for (int s = 0; s < config.n_samples; ++s) {
      if (outcomes[s].failed) continue;
      const auto& sq = outcomes[s].squared_errors[r];
      if (grid_sums.size() < sq.size()) grid_sums.resize(sq.size(), 0.0);
      for (std::size_t n = 0; n < sq.size(); ++n) grid_sums[n] += sq[n];
      report.sample_errors.push_back(SampleError{
          plans[r].method, plans[r].exponent,
          config.sample_offset + static_cast<std::uint64_t>(s),
          outcomes[s].audit_errors[r]});
    }
    double worst = 0.0;
    for (double acc : grid_sums) {
      worst = std::max(worst, acc / static_cast<double>(n_good));
    }
    rms[r] = std::sqrt(worst);
  }

  for (Method method : config.methods) {
    std::vector<double> errors, ks;
    for (std::size_t r = 0; r < plans.size(); ++r) {
      if (plans[r].method != method) continue;
      errors.push_back(rms[r]);
      ks.push_back(plans[r].step_k);
    }
    const auto eocs = compute_eoc_safe(errors, ks);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < plans.size(); ++r) {
      if (plans[r].method != method) continue;
      ReportRow row;
      row.method = method;
      row.exponent = plans[r].exponent;
      row.step_k = plans[r].step_k;
      row.rms_error = rms[r];
      if (pos > 0) row.eoc = eocs[pos - 1];
      report.rows.push_back(row);
      ++pos;
    }
    ConvergenceReport::Slope slope{method, std::nullopt};
    const bool positive = std::all_of(errors.begin(), errors.end(),
                                      [](double e) { return e > 0.0; });
    if (errors.size() >= 2 && positive) {
      slope.value = regression_order(errors, ks);
    }
    report.slopes.push_back(slope);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return report;
}

std::string config_echo(const StudyConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "problem = " << config.problem << "\n";
  if (config.weierstrass_a) out << "weierstrass_a = " << *config.weierstrass_a << "\n";
  if (config.weierstrass_b) out << "weierstrass_b = " << *config.weierstrass_b << "\n";
  if (config.weierstrass_j) out << "weierstrass_j = " << *config.weierstrass_j << "\n";
  if (config.sigma_override) out << "sigma = " << *config.sigma_override << "\n";
  out << "space = " << space_kind_name(config.space) << "\n";
  if (config.space == SpaceKind::spectral) {
    out << "modes = " << config.n_modes << "\n";
  } else {
    out << "ndof = " << config.n_dof << "\n";
  }
  out << "M = " << config.truncation_m << "\n";
  if (config.inner_modes) out << "inner_modes = " << *config.inner_modes << "\n";
  out << "kref_exp = " << config.ref_exponent << "\n";
  out << "step_exps = ";
  for (std::size_t i = 0; i < config.step_exponents.size(); ++i) {
    out << (i > 0 ? "," : "") << config.step_exponents[i];
  }
  out << "\n";
  out << "samples = " << config.n_samples << "\n";
  out << "method = ";
  if (config.methods.size() == 2) {
    out << "both";
  } else {
    out << method_name(config.methods.front());
  }
  out << "\n";
  out << "error_mode = " << error_mode_name(config.error_mode) << "\n";
  out << "ref_scheme = " << method_name(config.ref_scheme) << "\n";
  out << "seed = " << config.master_seed << "\n";
  if (config.sample_offset != 0) {
    out << "sample_offset = " << config.sample_offset << "\n";
  }
  if (config.threads != 0) out << "threads = " << config.threads << "\n";
  return out.str();
}

namespace {

void write_config_comment(const StudyConfig& config, std::ostream& out) {
  std::istringstream echo(config_echo(config));
  std::string line;
  while (std::getline(echo, line)) out << "# " << line << "\n";
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(12);
  out << value;
  return out.str();
}

}  // namespace

void write_results_csv(const ConvergenceReport& report, std::ostream& out) {
  write_config_comment(report.config, out);
  out << "method,k,rms_error,eoc,n_samples,error_mode\n";
  for (const ReportRow& row : report.rows) {
    out << method_name(row.method) << "," << format_double(row.step_k) << ","
        << format_double(row.rms_error) << ",";
    if (row.eoc) {
      std::ostringstream eoc;
      eoc.precision(6);
      eoc << std::fixed << *row.eoc;
      out << eoc.str();
    }
    out << "," << (report.config.n_samples - report.failed_samples) << ","
        << error_mode_name(report.config.error_mode) << "\n";
  }
}

void write_samples_csv(const ConvergenceReport& report, std::ostream& out) {
  write_config_comment(report.config, out);
  std::map<int, double> step_by_exponent;
  for (const ReportRow& row : report.rows) {
    step_by_exponent[row.exponent] = row.step_k;
  }
  out << "method,k,sample,error\n";
  for (const SampleError& entry : report.sample_errors) {
    out << method_name(entry.method) << ","
        << format_double(step_by_exponent.at(entry.exponent)) << ","
        << entry.sample << "," << format_double(entry.error) << "\n";
  }
}

}  // namespace randsee
