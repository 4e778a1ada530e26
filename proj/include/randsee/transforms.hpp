#pragma once

#include <span>
#include <vector>

namespace randsee::transforms {

/// Type-I discrete sine transform, fixed convention:
///
///   forward:  S_m = sum_{i=1}^{N} v_i sin(pi m i / (N+1)),   m = 1..N
///   inverse:  v_i = 2/(N+1) sum_{m=1}^{N} S_m sin(pi m i / (N+1))
///
/// The kernel is its own inverse up to the factor 2/(N+1); dst_apply
/// computes the unnormalized kernel, callers scale as needed.
/// Backed by FFTW (RODFT00, ESTIMATE plans, so results are reproducible
/// across runs); dst_apply_direct is the O(N^2) summation used as the
/// independent reference path.
std::vector<double> dst_apply(std::span<const double> values);

std::vector<double> dst_apply_direct(std::span<const double> values);

}  // namespace randsee::transforms
