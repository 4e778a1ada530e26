#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "randsee/rng.hpp"
#include "randsee/transforms.hpp"

using namespace randsee;

namespace {

std::vector<double> random_vector(int n, std::uint64_t tag) {
  const auto key = rng::derive(rng::master_key(99), tag);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 2.0 * rng::uniform01(key, i) - 1.0;
  return v;
}

}  // namespace

TEST_CASE("dst round trip is the identity") {
  for (int n : {1, 2, 5, 64, 100, 129}) {
    const auto v = random_vector(n, n);
    const auto once = transforms::dst_apply(v);
    auto twice = transforms::dst_apply(once);
    const double scale = 2.0 / (n + 1);
    for (int i = 0; i < n; ++i) {
      CHECK(twice[i] * scale == doctest::Approx(v[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("dst matches direct summation") {
  for (int n : {3, 16, 64, 101}) {
    const auto v = random_vector(n, 1000 + n);
    const auto fast = transforms::dst_apply(v);
    const auto slow = transforms::dst_apply_direct(v);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(slow[i]));
    for (int i = 0; i < n; ++i) {
      CHECK(std::fabs(fast[i] - slow[i]) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("dst maps a pure sine to one bin") {
  const int n = 31;
  std::vector<double> v(n);
  const double pi = 3.14159265358979323846;
  for (int i = 1; i <= n; ++i) v[i - 1] = std::sin(3.0 * pi * i / (n + 1));
  const auto s = transforms::dst_apply(v);
  for (int m = 1; m <= n; ++m) {
    const double expected = (m == 3) ? 0.5 * (n + 1) : 0.0;
    CHECK(s[m - 1] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("dst is linear") {
  const int n = 40;
  const auto a = random_vector(n, 7);
  const auto b = random_vector(n, 8);
  std::vector<double> combo(n);
  for (int i = 0; i < n; ++i) combo[i] = 2.5 * a[i] - 0.75 * b[i];
  const auto sa = transforms::dst_apply(a);
  const auto sb = transforms::dst_apply(b);
  const auto sc = transforms::dst_apply(combo);
  for (int i = 0; i < n; ++i) {
    CHECK(sc[i] ==
          doctest::Approx(2.5 * sa[i] - 0.75 * sb[i]).epsilon(1e-11));
  }
}

TEST_CASE("empty input gives empty output") {
  CHECK(transforms::dst_apply({}).empty());
}
