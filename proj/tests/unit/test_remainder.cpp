#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "cknlab/errors.hpp"
#include "cknlab/remainder.hpp"

using namespace cknlab;

TEST_CASE("R_2 is the squared distance") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> G;
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 3> a{G(rng), G(rng), G(rng)}, b{G(rng), G(rng), G(rng)};
    double d2 = 0;
    for (int k = 0; k < 3; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    CHECK(rp(a, b, 2.0) == doctest::Approx(d2).epsilon(1e-12));
  }
}

TEST_CASE("scalar and vector forms agree") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double x : {-2.0, -0.3, 0.0, 0.7}) {
      for (double y : {-1.0, 0.0, 0.4, 3.0}) {
        const std::array<double, 1> a{x}, b{y};
        CHECK(rp(x, y, p) == doctest::Approx(rp(a, b, p)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("hand values") {
  // p = 3, a = 1, b = 0: 0 + 2 - 0
  CHECK(rp(1.0, 0.0, 3.0) == doctest::Approx(2.0));
  // p = 3, a = 0, b = 2: 8
  CHECK(rp(0.0, 2.0, 3.0) == doctest::Approx(8.0));
  // p = 4, a = 1, b = -1: 1 + 3 + 4
  CHECK(rp(1.0, -1.0, 4.0) == doctest::Approx(8.0));
}

TEST_CASE("nonnegativity, equality case and homogeneity") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> G;
  std::uniform_real_distribution<double> T(0.1, 10.0);
  for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (int i = 0; i < 2000; ++i) {
      std::array<double, 2> a{G(rng), G(rng)}, b{G(rng), G(rng)};
      const double v = rp(a, b, p);
      const double scale = std::pow(std::hypot(a[0], a[1]) + std::hypot(b[0], b[1]), p);
      CHECK(v >= -1e-13 * scale);
      CHECK(rp(a, a, p) == doctest::Approx(0.0).scale(scale).epsilon(1e-13));
      const double t = T(rng);
      std::array<double, 2> ta{t * a[0], t * a[1]}, tb{t * b[0], t * b[1]};
      CHECK(rp(ta, tb, p) == doctest::Approx(std::pow(t, p) * v).epsilon(1e-9).scale(
                                 std::pow(t, p) * scale * 1e-4));
    }
  }
}

TEST_CASE("M_p lower bound") {
  CHECK(mp_lower_bound(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  double prev = 1.0;
  for (double p : {2.5, 3.0, 4.0}) {
    const MpScan s = mp_scan(p);
    CHECK(s.value > 0.0);
    CHECK(s.value <= prev + 1e-12);
    prev = s.value;
    // the far field along the line gives ratio -> 1
    CHECK(mp_ratio(p, 1e6, 0.0) == doctest::Approx(1.0).epsilon(1e-5));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> L(-8, 8), A(0, 6.283185307179586);
    for (int i = 0; i < 5000; ++i)
      CHECK(mp_ratio(p, std::exp(L(rng)), A(rng)) >= s.value * (1 - 1e-9));
  }
  CHECK_THROWS_AS(mp_lower_bound(1.5), RegimeError);
}
