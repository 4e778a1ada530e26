#include <iostream>
#include <string>
#include <vector>

#include "randsee/cli.hpp"

namespace {

void print_usage(std::ostream& out) {
  out << "randsee - randomized Galerkin solver for semilinear SPDEs\n"
         "\n"
         "usage: randsee <command> [options]\n"
         "\n"
         "commands:\n"
         "  study           Monte Carlo convergence study against a fine\n"
         "                  reference; writes results and per-sample CSVs\n"
         "  solve           run one trajectory and write the final-time\n"
         "                  solution as x,u rows\n"
         "  validate-noise  run the noise sampler's statistical self-tests\n"
         "  list-problems   print the built-in problem names\n"
         "\n"
         "options (flags override config file values):\n"
         "  --config PATH        flat key = value file, '#' comments\n"
         "  --problem NAME       weierstrass-sigma1 (default), "
         "weierstrass-sigma2,\n"
         "                       zero-noise, linear-drift\n"
         "  --method NAME        randomized | classical | both (default both)\n"
         "  --space KIND         spectral (default) | fem\n"
         "  --modes N            spectral modes (default 100)\n"
         "  --ndof N             FEM interior nodes (default 100)\n"
         "  --M N                noise truncation level (default 100)\n"
         "  --inner-modes N      stage-one mode reduction (default M)\n"
         "  --kref-exp I         reference step k_ref = T 2^-I (default 10)\n"
         "  --step-exps LIST     comma list of coarse exponents (default "
         "3,4,5,6,7)\n"
         "  --samples N          Monte Carlo samples (default 20)\n"
         "  --seed N             master seed (env RANDSEE_SEED overrides "
         "file/default)\n"
         "  --error-mode MODE    final_time (default) | max_over_grid\n"
         "  --ref-scheme NAME    scheme of the reference run (default "
         "randomized)\n"
         "  --out PATH           results CSV path (default randsee_study.csv)\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h" ||
      args[0] == "help") {
    print_usage(args.empty() ? std::cerr : std::cout);
    return args.empty() ? randsee::cli::kUsageError : randsee::cli::kOk;
  }
  return randsee::cli::run_cli(args, std::cout, std::cerr);
}
