#include "randsee/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace randsee::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long long parse_integer(const std::string& key, const std::string& value,
                        long long lo, long long hi) {
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not an integer: '" + value + "'");
  }
  if (used != value.size()) {
    throw std::invalid_argument(key + ": not an integer: '" + value + "'");
  }
  if (parsed < lo || parsed > hi) {
    throw std::invalid_argument(key + ": value " + value + " out of range");
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double parsed = 0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + value + "'");
  }
  if (used != value.size() || !std::isfinite(parsed)) {
    throw std::invalid_argument(key + ": not a number: '" + value + "'");
  }
  return parsed;
}

std::vector<int> parse_exponent_list(const std::string& key,
                                     const std::string& value) {
  std::vector<int> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw std::invalid_argument(key + ": empty entry in list '" + value + "'");
    }
    out.push_back(static_cast<int>(parse_integer(key, item, 0, 30)));
  }
  if (out.empty()) {
    throw std::invalid_argument(key + ": empty list");
  }
  return out;
}

}  // namespace

void apply_key(StudyConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "problem") {
    config.problem = value;
  } else if (key == "space") {
    if (value == "spectral") {
      config.space = SpaceKind::spectral;
    } else if (value == "fem") {
      config.space = SpaceKind::fem;
    } else {
      throw std::invalid_argument("space: must be spectral or fem");
    }
  } else if (key == "modes") {
    config.n_modes = static_cast<int>(parse_integer(key, value, 1, 1 << 20));
  } else if (key == "ndof") {
    config.n_dof = static_cast<int>(parse_integer(key, value, 1, 1 << 20));
  } else if (key == "M") {
    config.truncation_m =
        static_cast<int>(parse_integer(key, value, 1, 1 << 20));
  } else if (key == "inner_modes") {
    config.inner_modes =
        static_cast<int>(parse_integer(key, value, 1, 1 << 20));
  } else if (key == "kref_exp") {
    config.ref_exponent = static_cast<int>(parse_integer(key, value, 1, 30));
  } else if (key == "step_exps") {
    config.step_exponents = parse_exponent_list(key, value);
  } else if (key == "samples") {
    config.n_samples = static_cast<int>(parse_integer(key, value, 1, 1 << 24));
  } else if (key == "seed") {
    config.master_seed = static_cast<std::uint64_t>(
        parse_integer(key, value, 0, std::numeric_limits<long long>::max()));
  } else if (key == "method") {
    if (value == "both") {
      config.methods = {Method::randomized, Method::classical};
    } else if (auto method = parse_method(value)) {
      config.methods = {*method};
    } else {
      throw std::invalid_argument(
          "method: must be randomized, classical or both");
    }
  } else if (key == "error_mode") {
    if (value == "final_time") {
      config.error_mode = ErrorMode::final_time;
    } else if (value == "max_over_grid") {
      config.error_mode = ErrorMode::max_over_grid;
    } else {
      throw std::invalid_argument(
          "error_mode: must be final_time or max_over_grid");
    }
  } else if (key == "ref_scheme") {
    if (auto method = parse_method(value)) {
      config.ref_scheme = *method;
    } else {
      throw std::invalid_argument(
          "ref_scheme: must be randomized or classical");
    }
  } else if (key == "threads") {
    config.threads = static_cast<int>(parse_integer(key, value, 0, 4096));
  } else if (key == "sample_offset") {
    config.sample_offset = static_cast<std::uint64_t>(
        parse_integer(key, value, 0, std::numeric_limits<long long>::max()));
  } else if (key == "weierstrass_a") {
    config.weierstrass_a = parse_real(key, value);
  } else if (key == "weierstrass_b") {
    config.weierstrass_b =
        static_cast<int>(parse_integer(key, value, 1, 1 << 20));
  } else if (key == "weierstrass_j") {
    config.weierstrass_j =
        static_cast<int>(parse_integer(key, value, 0, 64));
  } else if (key == "sigma") {
    config.sigma_override = value;
  } else {
    throw std::invalid_argument("unknown key: " + key);
  }
}

void apply_config_text(StudyConfig& config, const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(StudyConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open file " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(config, text.str());
}

CliConfig parse_config(const std::vector<std::string>& args) {
  CliConfig cli;
  if (args.empty()) {
    throw std::invalid_argument(
        "usage: randsee <study|solve|validate-noise|list-problems> [options]");
  }
  cli.command = args[0];

  // First pass: find --config so flags can override file values.
  std::vector<std::pair<std::string, std::string>> flags;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0) {
      throw std::invalid_argument("unexpected argument: " + arg);
    }
    std::string key = arg.substr(2);
    std::string value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= args.size()) {
        throw std::invalid_argument(key + ": missing value");
      }
      value = args[++i];
    }
    flags.emplace_back(key, value);
  }

  for (const auto& [key, value] : flags) {
    if (key == "config") cli.config_path = value;
  }
  if (!cli.config_path.empty()) {
    apply_config_file(cli.study, cli.config_path);
  }
  if (const char* env_seed = std::getenv("RANDSEE_SEED")) {
    apply_key(cli.study, "seed", env_seed);
  }
  for (const auto& [key, value] : flags) {
    if (key == "config") continue;
    if (key == "out") {
      cli.out_path = value;
      continue;
    }
    // Flag spelling --step-exps maps onto the config key step_exps.
    std::string mapped = key;
    for (char& c : mapped) {
      if (c == '-') c = '_';
    }
    apply_key(cli.study, mapped, value);
  }
  return cli;
}

std::string samples_path_for(const std::string& out_path) {
  const auto dot = out_path.rfind('.');
  if (dot == std::string::npos || out_path.find('/', dot) != std::string::npos) {
    return out_path + "_samples";
  }
  return out_path.substr(0, dot) + "_samples" + out_path.substr(dot);
}

void emit_report(const ConvergenceReport& report, const std::string& out_path,
                 std::ostream& console) {
  {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("emit_report: cannot write " + out_path);
    }
    write_results_csv(report, out);
  }
  const std::string samples_path = samples_path_for(out_path);
  {
    std::ofstream out(samples_path);
    if (!out) {
      throw std::runtime_error("emit_report: cannot write " + samples_path);
    }
    write_samples_csv(report, out);
  }

  console << std::left << std::setw(12) << "method" << std::setw(14) << "k"
          << std::setw(14) << "error" << std::setw(8) << "EOC" << "\n";
  for (const ReportRow& row : report.rows) {
    std::ostringstream k_text, err_text, eoc_text;
    k_text << std::setprecision(6) << row.step_k;
    err_text << std::setprecision(5) << row.rms_error;
    if (row.eoc) {
      eoc_text << std::fixed << std::setprecision(2) << *row.eoc;
    } else {
      eoc_text << "--";
    }
    console << std::left << std::setw(12) << method_name(row.method)
            << std::setw(14) << k_text.str() << std::setw(14) << err_text.str()
            << std::setw(8) << eoc_text.str() << "\n";
  }
  for (const auto& slope : report.slopes) {
    console << "order(" << method_name(slope.method) << ") = ";
    if (slope.value) {
      console << std::fixed << std::setprecision(2) << *slope.value;
      console.unsetf(std::ios::fixed);
    } else {
      console << "undefined";
    }
    console << "\n";
  }
  if (report.failed_samples > 0) {
    console << "excluded samples: " << report.failed_samples << "\n";
  }
  console << "wall time: " << std::setprecision(3) << report.wall_seconds
          << " s\n";
  console << "results written to " << out_path << " and " << samples_path
          << "\n";
}

namespace {

int run_study_command(const CliConfig& cli, std::ostream& console) {
  const auto report = run_study(cli.study);
  emit_report(report, cli.out_path, console);
  return kOk;
}

int run_solve_command(const CliConfig& cli, std::ostream& console) {
  StudyConfig cfg = cli.study;
  const ProblemSpec problem = make_problem(cfg);
  const Space space = make_space(cfg);
  const int exponent = cfg.step_exponents.front();
  const double k = problem.horizon_T * std::ldexp(1.0, -exponent);

  const auto cov = CovarianceSpec::polynomial(cfg.truncation_m);
  const auto master = rng::master_key(cfg.master_seed);
  const auto store_key = rng::derive(master, 0x5EED, cfg.sample_offset);
  NoiseModel noise{
      cov, build_store(cov, problem.horizon_T,
                       problem.horizon_T * std::ldexp(1.0, -cfg.ref_exponent),
                       store_key.hi ^ store_key.lo)};

  SchemeConfig scheme;
  scheme.step_k = k;
  scheme.n_steps = std::int64_t{1} << exponent;
  scheme.method = cfg.methods.front();
  scheme.truncation_m = cfg.truncation_m;
  scheme.inner_modes = cfg.inner_modes;

  const auto states = run_trajectory(scheme, space, problem, noise,
                                     rng::derive(master, 0x501E, 0), 0);
  const GridFunction& final_state = states.back();

  const int n_points = std::max(127, dimension(space));
  const auto values = evaluate_on_uniform_grid(space, final_state, n_points);

  std::ofstream file;
  std::ostream* out = &console;
  if (!cli.out_path.empty() && cli.out_path != "-") {
    file.open(cli.out_path);
    if (!file) {
      throw std::runtime_error("solve: cannot write " + cli.out_path);
    }
    out = &file;
  }
  (*out) << "x,u\n";
  out->precision(12);
  for (int i = 1; i <= n_points; ++i) {
    (*out) << static_cast<double>(i) / (n_points + 1) << ","
           << values[i - 1] << "\n";
  }
  console << "method " << method_name(scheme.method) << ", k = " << k
          << ", steps = " << scheme.n_steps
          << ", final L2 norm = " << norm_l2(space, final_state) << "\n";
  return kOk;
}

int run_validate_noise_command(const CliConfig& cli, std::ostream& console) {
  const auto results = run_noise_checks(cli.study.master_seed);
  bool all_pass = true;
  for (const auto& check : results) {
    console << (check.pass ? "PASS" : "FAIL") << "  " << check.name << " ("
            << check.detail << ")\n";
    all_pass = all_pass && check.pass;
  }
  return all_pass ? kOk : kRuntimeError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& console,
            std::ostream& errors) {
  CliConfig cli;
  try {
    cli = parse_config(args);
    if (cli.command == "list-problems") {
      for (const auto& name : builtin_problem_names()) {
        console << name << "\n";
      }
      return kOk;
    }
    if (cli.command != "study" && cli.command != "solve" &&
        cli.command != "validate-noise") {
      throw std::invalid_argument("unknown command: " + cli.command);
    }
    cli.study.validate();
  } catch (const std::invalid_argument& e) {
    errors << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (cli.command == "study") return run_study_command(cli, console);
    if (cli.command == "solve") return run_solve_command(cli, console);
    return run_validate_noise_command(cli, console);
  } catch (const std::exception& e) {
    errors << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace randsee::cli
