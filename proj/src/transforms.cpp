#include "randsee/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace randsee::transforms {

namespace {

// FFTW planning is not thread-safe; executing distinct plans is. Each thread
// keeps its own plans and buffers, creation is serialized.
std::mutex g_planner_mutex;

struct PlanEntry {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  double* out = nullptr;
  std::size_t n = 0;

  PlanEntry() = default;
  PlanEntry(const PlanEntry&) = delete;
  PlanEntry& operator=(const PlanEntry&) = delete;

  ~PlanEntry() {
    if (plan != nullptr) fftw_destroy_plan(plan);
    if (in != nullptr) fftw_free(in);
    if (out != nullptr) fftw_free(out);
  }
};

PlanEntry& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, PlanEntry> cache;
  PlanEntry& entry = cache[n];
  if (entry.plan == nullptr) {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    entry.in = fftw_alloc_real(n);
    entry.out = fftw_alloc_real(n);
    entry.plan = fftw_plan_r2r_1d(static_cast<int>(n), entry.in, entry.out,
                                  FFTW_RODFT00, FFTW_ESTIMATE);
    entry.n = n;
    if (entry.plan == nullptr) {
      throw std::runtime_error("transforms: FFTW plan creation failed");
    }
  }
  return entry;
}

}  // namespace

std::vector<double> dst_apply(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  PlanEntry& entry = plan_for(n);
  std::memcpy(entry.in, values.data(), n * sizeof(double));
  fftw_execute(entry.plan);
  // RODFT00 computes 2x the kernel above.
  std::vector<double> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = 0.5 * entry.out[i];
  return result;
}

std::vector<double> dst_apply_direct(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> result(n, 0.0);
  const double step = 3.14159265358979323846 / static_cast<double>(n + 1);
  for (std::size_t m = 1; m <= n; ++m) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      acc += values[i - 1] * std::sin(step * static_cast<double>(m * i));
    }
    result[m - 1] = acc;
  }
  return result;
}

}  // namespace randsee::transforms
