#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "credal/rng.hpp"

using credal::RngStream;

TEST_CASE("identical (seed, stream) reproduces the draw sequence", "[rng]") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams decorrelate", "[rng]") {
  RngStream a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  REQUIRE(equal == 0);
}

TEST_CASE("split children are independent of parent draw position", "[rng]") {
  RngStream parent(9, 3);
  RngStream child_before = parent.split(5);
  parent.next_u64();
  parent.next_u64();
  RngStream child_after = parent.split(5);
  REQUIRE(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("uniform doubles land in [0,1) with mean near 1/2", "[rng]") {
  RngStream rng(123);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("normal moments", "[rng]") {
  RngStream rng(321);
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    s1 += z;
    s2 += z * z;
  }
  REQUIRE(std::abs(s1 / n) < 0.02);
  REQUIRE(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("gamma mean and variance match alpha", "[rng]") {
  RngStream rng(555);
  const double alpha = 3.5;
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gamma(alpha);
    s1 += g;
    s2 += g * g;
  }
  const double mean = s1 / n;
  REQUIRE(std::abs(mean - alpha) < 0.05);
  REQUIRE(std::abs(s2 / n - mean * mean - alpha) < 0.2);
}

TEST_CASE("gamma rejects non-positive alpha", "[rng]") {
  RngStream rng(1);
  REQUIRE_THROWS_AS(rng.next_gamma(0.0), credal::domain_error);
}
