#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "randsee/rng.hpp"

using namespace randsee;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 distribution.
  const rng::Block zero =
      rng::philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  const rng::Block ones = rng::philox4x32(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  const rng::Block pi_digits = rng::philox4x32(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi_digits[0] == 0xd16cfe09u);
  CHECK(pi_digits[1] == 0x94fdccebu);
  CHECK(pi_digits[2] == 0x5001e420u);
  CHECK(pi_digits[3] == 0x24126ea1u);
}

TEST_CASE("draws are pure functions of key and index") {
  const auto key = rng::derive(rng::master_key(42), 7);
  CHECK(rng::uniform01(key, 5) == rng::uniform01(key, 5));
  CHECK(rng::normal_pair(key, 11) == rng::normal_pair(key, 11));
  CHECK(rng::uniform01(key, 5) != rng::uniform01(key, 6));
}

TEST_CASE("derived streams differ") {
  const auto master = rng::master_key(1);
  const auto a = rng::derive(master, 1);
  const auto b = rng::derive(master, 2);
  const auto c = rng::derive(master, 1, 2);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(rng::uniform01(a, 0) != rng::uniform01(b, 0));
  CHECK(rng::master_key(1) == rng::master_key(1));
  CHECK(!(rng::master_key(1) == rng::master_key(2)));
}

TEST_CASE("uniform01 stays in [0,1)") {
  const auto key = rng::derive(rng::master_key(3), 9);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng::uniform01(key, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal moments") {
  const auto key = rng::derive(rng::master_key(4), 13);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    const auto pair = rng::normal_pair(key, i);
    sum += pair[0] + pair[1];
    sum_sq += pair[0] * pair[0] + pair[1] * pair[1];
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("uniform draws are distinct across a stream") {
  const auto key = rng::derive(rng::master_key(5), 21);
  std::set<double> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(rng::uniform01(key, i));
  CHECK(seen.size() == 1000);
}
