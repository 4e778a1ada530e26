#include "randsee/noise.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "randsee/transforms.hpp"

namespace randsee {

namespace {

// Stream tags under the store's master key.
constexpr std::uint64_t kModeStreamTag = 0x6D6F6465;  // per-mode increments

std::int64_t grid_index(const BrownianStore& store, double t,
                        const char* what) {
  const double ratio = t / store.ref_step;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-9 || rounded < 0.0 ||
      rounded > static_cast<double>(store.n_ref_steps)) {
    throw std::invalid_argument(std::string(what) +
                                ": time off the reference grid: t = " +
                                std::to_string(t));
  }
  return static_cast<std::int64_t>(rounded);
}

// Sum of scale * entry over [begin, end) combined on the implicit dyadic
// tree: an aligned block is always the sum of its two halves, one float add.
// This makes coarse increments bit-identical to sums of finer ones.
double aligned_block_sum(const BrownianStore& store, int mode,
                         std::int64_t begin, std::int64_t size, double scale) {
  if (size == 1) return scale * store.entry(mode, begin);
  const std::int64_t half = size / 2;
  return aligned_block_sum(store, mode, begin, half, scale) +
         aligned_block_sum(store, mode, begin + half, half, scale);
}

double scaled_range_sum(const BrownianStore& store, int mode,
                        std::int64_t begin, std::int64_t end, double scale) {
  double acc = 0.0;
  bool first = true;
  std::int64_t p = begin;
  while (p < end) {
    const std::uint64_t up = static_cast<std::uint64_t>(p);
    std::int64_t size = (p == 0) ? std::bit_floor(static_cast<std::uint64_t>(
                                       end - p))
                                 : std::min<std::int64_t>(
                                       up & (~up + 1),
                                       std::bit_floor(
                                           static_cast<std::uint64_t>(end - p)));
    const double block = aligned_block_sum(store, mode, p, size, scale);
    acc = first ? block : acc + block;
    first = false;
    p += size;
  }
  return acc;
}

}  // namespace

double CovarianceSpec::trace() const {
  double acc = 0.0;
  for (double m : mu) acc += m;
  return acc;
}

CovarianceSpec CovarianceSpec::polynomial(int truncation_m, double exponent) {
  return custom(truncation_m, [exponent](int j) {
    return std::pow(static_cast<double>(j), -exponent);
  });
}

CovarianceSpec CovarianceSpec::custom(int truncation_m,
                                      const std::function<double(int)>& law) {
  if (truncation_m < 1) {
    throw std::invalid_argument("CovarianceSpec: truncation level must be >= 1");
  }
  CovarianceSpec spec;
  spec.mu.resize(truncation_m);
  for (int j = 1; j <= truncation_m; ++j) {
    const double value = law(j);
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("CovarianceSpec: mu_" + std::to_string(j) +
                                  " must be finite and nonnegative");
    }
    spec.mu[j - 1] = value;
  }
  return spec;
}

BrownianStore build_store(const CovarianceSpec& cov, double horizon,
                          double ref_step, std::uint64_t seed) {
  if (cov.truncation_m() < 1) {
    throw std::invalid_argument("build_store: truncation level must be >= 1");
  }
  if (!(ref_step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("build_store: horizon and ref_step must be positive");
  }
  const double ratio = horizon / ref_step;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(
        "build_store: horizon is not an integer multiple of ref_step");
  }

  BrownianStore store;
  store.ref_step = ref_step;
  store.n_ref_steps = static_cast<std::int64_t>(rounded);
  store.n_modes = cov.truncation_m();
  store.seed = seed;
  store.increments.resize(static_cast<std::size_t>(store.n_modes) *
                          static_cast<std::size_t>(store.n_ref_steps));

  const double sqrt_k = std::sqrt(ref_step);
  const auto master = rng::master_key(seed);
  for (int mode = 0; mode < store.n_modes; ++mode) {
    const auto stream = rng::derive(master, kModeStreamTag,
                                    static_cast<std::uint64_t>(mode + 1));
    double* row = store.increments.data() +
                  static_cast<std::size_t>(mode) *
                      static_cast<std::size_t>(store.n_ref_steps);
    for (std::int64_t n = 0; n < store.n_ref_steps; n += 2) {
      const auto pair =
          rng::normal_pair(stream, static_cast<std::uint64_t>(n / 2));
      row[n] = sqrt_k * pair[0];
      if (n + 1 < store.n_ref_steps) row[n + 1] = sqrt_k * pair[1];
    }
  }
  return store;
}

WienerIncrement full_step_increment(const BrownianStore& store,
                                    const CovarianceSpec& cov, double t_start,
                                    double k) {
  if (!(k > 0.0)) {
    throw std::invalid_argument("full_step_increment: k must be positive");
  }
  if (cov.truncation_m() > store.n_modes) {
    throw std::invalid_argument(
        "full_step_increment: covariance has more modes than the store");
  }
  const std::int64_t begin = grid_index(store, t_start, "full_step_increment");
  const std::int64_t end =
      grid_index(store, t_start + k, "full_step_increment");
  if (end <= begin) {
    throw std::invalid_argument("full_step_increment: empty interval");
  }

  WienerIncrement inc;
  inc.t_begin = t_start;
  inc.t_end = t_start + k;
  inc.per_mode.resize(cov.truncation_m());
  for (int mode = 0; mode < cov.truncation_m(); ++mode) {
    inc.per_mode[mode] =
        scaled_range_sum(store, mode, begin, end, std::sqrt(cov.mu[mode]));
  }
  return inc;
}

WienerIncrement bridge_increment(const BrownianStore& store,
                                 const CovarianceSpec& cov, double t_start,
                                 double k, double tau,
                                 rng::StreamKey stream_key) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("bridge_increment: tau must lie in (0,1)");
  }
  if (cov.truncation_m() > store.n_modes) {
    throw std::invalid_argument(
        "bridge_increment: covariance has more modes than the store");
  }
  const std::int64_t begin = grid_index(store, t_start, "bridge_increment");
  const std::int64_t end = grid_index(store, t_start + k, "bridge_increment");
  if (end <= begin) {
    throw std::invalid_argument("bridge_increment: empty interval");
  }

  const double bridge_sd = std::sqrt(tau * (1.0 - tau) * k);
  WienerIncrement inc;
  inc.t_begin = t_start;
  inc.t_end = t_start + tau * k;
  inc.per_mode.resize(cov.truncation_m());
  for (int mode = 0; mode < cov.truncation_m(); ++mode) {
    const double raw_full = scaled_range_sum(store, mode, begin, end, 1.0);
    const double z =
        rng::normal(stream_key, static_cast<std::uint64_t>(mode + 1));
    inc.per_mode[mode] =
        std::sqrt(cov.mu[mode]) * (tau * raw_full + bridge_sd * z);
  }
  return inc;
}

GridFunction increment_to_gridfunction(const WienerIncrement& increment,
                                       const Space& space,
                                       std::optional<int> inner_modes) {
  const int available = static_cast<int>(increment.per_mode.size());
  int m_use = available;
  if (inner_modes) {
    if (*inner_modes < 0 || *inner_modes > available) {
      throw std::invalid_argument(
          "increment_to_gridfunction: inner_modes out of range");
    }
    m_use = *inner_modes;
  }

  if (const auto* spectral = std::get_if<SpectralSpace>(&space)) {
    GridFunction out = zero_function(space);
    const int n_copy = std::min(m_use, spectral->n_modes());
    for (int j = 0; j < n_copy; ++j) out.coeffs[j] = increment.per_mode[j];
    return out;
  }

  const auto& fem = std::get<FemSpace>(space);
  const int n = fem.n_dof();
  const double sqrt2 = std::sqrt(2.0);
  if (m_use <= n) {
    std::vector<double> padded(n, 0.0);
    for (int j = 0; j < m_use; ++j) padded[j] = sqrt2 * increment.per_mode[j];
    return GridFunction{transforms::dst_apply(padded), fem.tag()};
  }
  // More modes than the DST grid can address; sum the sine expansion directly.
  GridFunction out = zero_function(space);
  const double h = fem.mesh_width();
  for (int i = 1; i <= n; ++i) {
    double acc = 0.0;
    for (int j = 1; j <= m_use; ++j) {
      acc += increment.per_mode[j - 1] *
             std::sin(j * 3.14159265358979323846 * i * h);
    }
    out.coeffs[i - 1] = sqrt2 * acc;
  }
  return out;
}

namespace {
constexpr std::uint32_t kStoreMagic = 0x52534545;  // "RSEE"
constexpr std::uint32_t kStoreVersion = 1;
}  // namespace

void save_store(const BrownianStore& store,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_store: cannot open " + path.string());
  }
  const std::uint32_t header[4] = {
      kStoreMagic, kStoreVersion, static_cast<std::uint32_t>(store.n_modes),
      static_cast<std::uint32_t>(store.n_ref_steps)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(store.increments.data()),
            static_cast<std::streamsize>(store.increments.size() *
                                         sizeof(double)));
  if (!out) {
    throw std::runtime_error("save_store: write failed for " + path.string());
  }
}

BrownianStore load_store(const std::filesystem::path& path, double ref_step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_store: cannot open " + path.string());
  }
  std::uint32_t header[4] = {};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] != kStoreMagic || header[1] != kStoreVersion) {
    throw std::runtime_error("load_store: bad header in " + path.string());
  }
  BrownianStore store;
  store.ref_step = ref_step;
  store.n_modes = static_cast<int>(header[2]);
  store.n_ref_steps = static_cast<std::int64_t>(header[3]);
  store.increments.resize(static_cast<std::size_t>(store.n_modes) *
                          static_cast<std::size_t>(store.n_ref_steps));
  in.read(reinterpret_cast<char*>(store.increments.data()),
          static_cast<std::streamsize>(store.increments.size() *
                                       sizeof(double)));
  if (!in) {
    throw std::runtime_error("load_store: truncated table in " + path.string());
  }
  return store;
}

namespace {

struct Welford {
  double mean = 0.0, m2 = 0.0;
  std::int64_t n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return m2 / static_cast<double>(n - 1); }
};

NoiseCheckResult make_result(const std::string& name, bool pass,
                             const std::string& detail) {
  return NoiseCheckResult{name, pass, detail};
}

}  // namespace

std::vector<NoiseCheckResult> run_noise_checks(std::uint64_t seed) {
  std::vector<NoiseCheckResult> results;
  std::ostringstream detail;

  // Shared fixtures: 6 modes, 2^14 reference steps of a unit horizon.
  const int n_modes = 6;
  const auto cov = CovarianceSpec::polynomial(n_modes);
  const double horizon = 1.0;
  const std::int64_t n_ref = 1 << 14;
  const double k_ref = horizon / static_cast<double>(n_ref);
  const auto store = build_store(cov, horizon, k_ref, seed);

  {  // Determinism and seed sensitivity.
    const auto again = build_store(cov, horizon, k_ref, seed);
    const auto other = build_store(cov, horizon, k_ref, seed + 1);
    const bool pass = again == store && !(other == store);
    results.push_back(make_result("store determinism", pass,
                                  pass ? "rebuild bit-identical, distinct seed differs"
                                       : "stores disagree"));
  }

  // One increment draw per reference interval, reused by several checks.
  std::vector<std::vector<double>> draws(n_modes,
                                         std::vector<double>(n_ref));
  for (std::int64_t n = 0; n < n_ref; ++n) {
    const auto inc = full_step_increment(store, cov, n * k_ref, k_ref);
    for (int mode = 0; mode < n_modes; ++mode) {
      draws[mode][n] = inc.per_mode[mode];
    }
  }

  {  // Per-mode variance of the increments, mu_j * k.
    bool pass = true;
    detail.str("");
    const double band = 5.0 * std::sqrt(2.0 / static_cast<double>(n_ref));
    for (int mode = 0; mode < n_modes; ++mode) {
      Welford w;
      for (std::int64_t n = 0; n < n_ref; ++n) w.add(draws[mode][n]);
      const double rel = w.variance() / (cov.mu[mode] * k_ref) - 1.0;
      if (std::fabs(rel) > band) {
        pass = false;
        detail << "mode " << (mode + 1) << " rel dev " << rel << "; ";
      }
    }
    results.push_back(make_result(
        "per-mode increment variance", pass,
        pass ? "all modes within 5 standard errors of mu_j k" : detail.str()));
  }

  {  // Cross-mode covariance of the increments.
    bool pass = true;
    detail.str("");
    for (int a = 0; a < n_modes; ++a) {
      for (int b = a + 1; b < n_modes; ++b) {
        double acc = 0.0;
        for (std::int64_t n = 0; n < n_ref; ++n) {
          acc += draws[a][n] * draws[b][n];
        }
        const double cov_ab = acc / static_cast<double>(n_ref);
        const double band = 5.0 * std::sqrt(cov.mu[a] * cov.mu[b]) * k_ref /
                            std::sqrt(static_cast<double>(n_ref));
        if (std::fabs(cov_ab) > band) {
          pass = false;
          detail << "(" << a + 1 << "," << b + 1 << ") cov " << cov_ab << "; ";
        }
      }
    }
    results.push_back(make_result(
        "cross-mode covariance", pass,
        pass ? "all pairs within 5 standard errors of zero" : detail.str()));
  }

  {  // Trace formula E||Delta W^M||^2 = k * trace(Q_M).
    double acc = 0.0, acc_sq = 0.0;
    for (std::int64_t n = 0; n < n_ref; ++n) {
      const auto inc = full_step_increment(store, cov, n * k_ref, k_ref);
      double norm_sq = 0.0;
      for (double c : inc.per_mode) norm_sq += c * c;
      acc += norm_sq;
      acc_sq += norm_sq * norm_sq;
    }
    const double mean = acc / static_cast<double>(n_ref);
    const double expected = k_ref * cov.trace();
    const double var =
        acc_sq / static_cast<double>(n_ref) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n_ref));
    const bool pass = std::fabs(mean - expected) <= 5.0 * se;
    detail.str("");
    detail << "mean " << mean << " vs k*trace " << expected;
    results.push_back(make_result("increment trace formula", pass, detail.str()));
  }

  {  // Bridge moments at tau = 1/2 across single-step intervals.
    const double tau = 0.5;
    const auto key = rng::derive(rng::master_key(seed), 0xB51D6E);
    const int probe_mode = 1;  // mu_2 = 2^-3
    Welford partial;
    double cross = 0.0;
    std::vector<double> fulls(n_ref), partials(n_ref);
    for (std::int64_t n = 0; n < n_ref; ++n) {
      const auto full = full_step_increment(store, cov, n * k_ref, k_ref);
      const auto part =
          bridge_increment(store, cov, n * k_ref, k_ref, tau,
                           rng::derive(key, static_cast<std::uint64_t>(n)));
      fulls[n] = full.per_mode[probe_mode];
      partials[n] = part.per_mode[probe_mode];
      partial.add(partials[n]);
      cross += fulls[n] * partials[n];
    }
    const double mu = cov.mu[probe_mode];
    const double expected = mu * k_ref * tau;
    const double var_band =
        5.0 * expected * std::sqrt(2.0 / static_cast<double>(n_ref));
    const double cov_hat = cross / static_cast<double>(n_ref);
    // Var(XY) = E[X^2 Y^2] - E[XY]^2 for the Gaussian pair; bounded by
    // 3 Var(X) Var(Y) which is good enough for a 5-sigma band.
    const double cov_band =
        5.0 * std::sqrt(3.0 * (mu * k_ref) * (mu * k_ref * tau) /
                        static_cast<double>(n_ref));
    const bool var_ok = std::fabs(partial.variance() - expected) <= var_band;
    const bool cov_ok = std::fabs(cov_hat - expected) <= cov_band;
    detail.str("");
    detail << "Var " << partial.variance() << " vs " << expected << ", Cov "
           << cov_hat << " vs " << expected;
    results.push_back(
        make_result("bridge moments", var_ok && cov_ok, detail.str()));
  }

  {  // Stage consistency: the complement is full - bridge, never resampled,
     // so bridge + complement reconstructs the full increment to the last
     // rounding (one subtraction and one addition).
    const auto key = rng::derive(rng::master_key(seed), 0xC0515);
    bool pass = true;
    for (std::int64_t n = 0; n < 1000 && pass; ++n) {
      const double t = n * 8 * k_ref;
      const auto full = full_step_increment(store, cov, t, 8 * k_ref);
      const auto part =
          bridge_increment(store, cov, t, 8 * k_ref, 0.37,
                           rng::derive(key, static_cast<std::uint64_t>(n)));
      for (int mode = 0; mode < n_modes; ++mode) {
        const double f = full.per_mode[mode];
        const double b = part.per_mode[mode];
        const double rest = f - b;
        const double tol = 0x1.0p-52 * (std::fabs(f) + std::fabs(rest));
        if (std::fabs((b + rest) - f) > tol) pass = false;
      }
    }
    results.push_back(make_result("stage consistency", pass,
                                  pass ? "reconstruction within one rounding"
                                       : "mismatch found"));
  }

  {  // Refinement coupling: increments at 2k equal sums of the k-halves.
    bool pass = true;
    for (int level = 1; level <= 6 && pass; ++level) {
      const double k = k_ref * static_cast<double>(1 << level);
      const std::int64_t count = n_ref >> level;
      for (std::int64_t n = 0; n < count && pass; ++n) {
        const auto coarse = full_step_increment(store, cov, n * k, k);
        const auto left = full_step_increment(store, cov, n * k, 0.5 * k);
        const auto right =
            full_step_increment(store, cov, n * k + 0.5 * k, 0.5 * k);
        for (int mode = 0; mode < n_modes; ++mode) {
          if (left.per_mode[mode] + right.per_mode[mode] !=
              coarse.per_mode[mode]) {
            pass = false;
          }
        }
      }
    }
    results.push_back(make_result("refinement coupling", pass,
                                  pass ? "bitwise through 6 dyadic levels"
                                       : "telescoping violated"));
  }

  {  // DST path against direct summation, M = N_h = 64.
    const int m = 64;
    const auto cov64 = CovarianceSpec::polynomial(m);
    const auto store64 = build_store(cov64, 1.0, 1.0 / 16, seed ^ 0xD57);
    const Space fem = FemSpace(m);
    const double h = std::get<FemSpace>(fem).mesh_width();
    double worst = 0.0;
    double scale = 0.0;
    for (std::int64_t n = 0; n < 16; ++n) {
      const auto inc = full_step_increment(store64, cov64, n / 16.0, 1.0 / 16);
      const auto fast = increment_to_gridfunction(inc, fem);
      for (int i = 1; i <= m; ++i) {
        double acc = 0.0;
        for (int j = 1; j <= m; ++j) {
          acc += inc.per_mode[j - 1] *
                 std::sin(j * 3.14159265358979323846 * i * h);
        }
        acc *= std::sqrt(2.0);
        worst = std::max(worst, std::fabs(acc - fast.coeffs[i - 1]));
        scale = std::max(scale, std::fabs(acc));
      }
    }
    const bool pass = worst <= 1e-10 * scale;
    detail.str("");
    detail << "relative deviation " << worst / scale;
    results.push_back(make_result("DST vs direct summation", pass, detail.str()));
  }

  {  // Covariance scaling: doubling every mu doubles the energy.
    const auto cov2 = CovarianceSpec::custom(
        n_modes, [&](int j) { return 2.0 * cov.mu[j - 1]; });
    const auto a = full_step_increment(store, cov, 0.0, horizon);
    const auto b = full_step_increment(store, cov2, 0.0, horizon);
    double ea = 0.0, eb = 0.0;
    for (int mode = 0; mode < n_modes; ++mode) {
      ea += a.per_mode[mode] * a.per_mode[mode];
      eb += b.per_mode[mode] * b.per_mode[mode];
    }
    const bool pass = std::fabs(eb / ea - 2.0) < 1e-12;
    detail.str("");
    detail << "energy ratio " << eb / ea;
    results.push_back(make_result("covariance scaling", pass, detail.str()));
  }

  return results;
}

}  // namespace randsee
