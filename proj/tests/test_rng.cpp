#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qprl/rng.hpp"

using namespace qprl;

TEST_SUITE("rng") {

// Reference outputs computed with an independent implementation of the
// published splitmix64 algorithm.
TEST_CASE("splitmix64 matches the reference sequence") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(0x9e3779b97f4a7c15ull) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(0x123456789ull) == 0x42eeea529b561ecfull);
}

TEST_CASE("derive_seed matches reference values and separates streams") {
  CHECK(derive_seed(0, 0) == 0x5e41ab087439611eull);
  CHECK(derive_seed(0, 1) == 0x64684c4f0fd784b4ull);
  CHECK(derive_seed(7, 0) == 0x7716da39cba275b2ull);
  CHECK(derive_seed(123456789, 42) == 0x83032f9779957605ull);

  // No collisions across a window of roots and indexes.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t root = 0; root < 8; ++root) {
    for (std::uint64_t i = 0; i < 64; ++i) {
      seen.push_back(derive_seed(root, i));
    }
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

// The C++ standard pins this value for a default-constructed engine, which
// anchors every downstream draw to the same bytes on any toolchain.
TEST_CASE("mt19937_64 10000th output matches the standard") {
  std::mt19937_64 engine;
  for (int i = 0; i < 9999; ++i) engine();
  CHECK(engine() == 9981545732273789042ull);
}

TEST_CASE("streams with equal seeds agree and different seeds diverge") {
  RandomStream a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform applies the documented 53-bit mapping") {
  RandomStream s(7), twin(7);
  for (int i = 0; i < 100; ++i) {
    const double expected =
        static_cast<double>(twin.next_u64() >> 11) * 0x1.0p-53;
    CHECK(s.uniform() == expected);
  }
}

TEST_CASE("uniform stays in [0,1) with the right mean") {
  RandomStream s(1);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // 4-sigma band around 1/2, sigma = 1/sqrt(12 n).
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("uniform(lo, hi) respects its bounds") {
  RandomStream s(2);
  for (int i = 0; i < 1000; ++i) {
    const double u = s.uniform(-3.0, 5.0);
    REQUIRE(u >= -3.0);
    REQUIRE(u < 5.0);
  }
}

TEST_CASE("uniform_below reduces the raw engine output") {
  RandomStream s(9), twin(9);
  for (int i = 0; i < 100; ++i) {
    CHECK(s.uniform_below(17) == twin.next_u64() % 17);
  }
}

TEST_CASE("gaussian follows Box-Muller on the uniform stream") {
  RandomStream s(5), twin(5);
  for (int pair = 0; pair < 20; ++pair) {
    double u1 = twin.uniform();
    const double u2 = twin.uniform();
    while (u1 <= 0.0) u1 = twin.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    CHECK(s.gaussian() == r * std::cos(a));
    CHECK(s.gaussian() == r * std::sin(a));
  }
}

TEST_CASE("gaussian moments are standard-normal") {
  RandomStream s(11);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  // Var of the sample variance of a normal is ~2/n.
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("shuffle permutes and matches a hand-rolled Fisher-Yates") {
  RandomStream s(3), twin(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  std::vector<int> expected = v;
  s.shuffle(v);

  // Same algorithm, written out here against the twin stream.
  for (std::size_t i = expected.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(twin.next_u64() % i);
    std::swap(expected[i - 1], expected[j]);
  }
  CHECK(v == expected);

  std::sort(v.begin(), v.end());
  for (int i = 0; i < 50; ++i) REQUIRE(v[i] == i);
}

}  // TEST_SUITE
