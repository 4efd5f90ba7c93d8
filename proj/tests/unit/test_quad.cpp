#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cknlab/errors.hpp"
#include "cknlab/quad.hpp"

using namespace cknlab;

namespace {
const double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("gamma moments on the half line") {
  // int_0^inf r^k e^{-r} dr = Gamma(k+1)
  for (double k : {0.0, 0.5, 2.0, 5.5, -0.5, -0.9}) {
    QuadOptions o;
    o.tail = TailDecay{1.0, 1.0};
    const QuadResult r = integrate_radial([](double x) { return std::exp(-x); }, 0, inf, k, o);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(std::tgamma(k + 1.0)).epsilon(1e-10));
  }
}

TEST_CASE("gaussian tails without a hint") {
  // int_0^inf r^2 e^{-r^2} = sqrt(pi)/4
  const QuadResult r =
      integrate_radial([](double x) { return std::exp(-x * x); }, 0, inf, 2.0);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi) / 4).epsilon(1e-10));
}

TEST_CASE("algebraic tail") {
  // int_0^inf r / (1 + r^2)^2 = 1/2
  const QuadResult r = integrate_radial(
      [](double x) { return 1.0 / ((1 + x * x) * (1 + x * x)); }, 0, inf, 1.0);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("finite interval with endpoint singularity") {
  // int_0^1 r^{-1/2} = 2
  const QuadResult r = integrate_radial([](double) { return 1.0; }, 0, 1, -0.5);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
  // int_1^2 sin = cos 1 - cos 2
  const QuadResult s = integrate_interval([](double x) { return std::sin(x); }, 1, 2);
  CHECK(s.value == doctest::Approx(std::cos(1.0) - std::cos(2.0)).epsilon(1e-13));
}

TEST_CASE("power weight meeting a vanishing profile near the origin") {
  // r^{-3} exp(-1/r) r^3 on (0, 1): int e^{-1/r} dr = e^{-1} - E1(1)
  const double E1 = 0.21938393439552029;
  const QuadResult r = integrate_radial(
      [](double x) { return std::pow(x, -3.0) * std::exp(-1.0 / x); }, 0, 1, 3.0);
  CHECK(std::isfinite(r.value));
  CHECK(r.value == doctest::Approx(std::exp(-1.0) - E1).epsilon(1e-9));
}

TEST_CASE("polar and sector quadrature") {
  // int over the unit disc of (1 + x^2): pi + pi/4
  auto h = [](double r, double t) {
    const double x = r * std::cos(t);
    return 1.0 + x * x;
  };
  const double exact = std::numbers::pi * 1.25;
  CHECK(integrate_polar2d(h, 0, 1).value == doctest::Approx(exact).epsilon(1e-12));
  // quarter disc gives a quarter
  CHECK(integrate_sector2d(h, 0, 1, 0, std::numbers::pi / 2).value ==
        doctest::Approx(exact / 4).epsilon(1e-10));
  // cos^2 e^{-r^2} on the plane: pi * 1/2
  QuadOptions o;
  o.tail = TailDecay{1.0, 2.0};
  const double g = integrate_polar2d(
      [](double r, double t) { return std::cos(t) * std::cos(t) * std::exp(-r * r); }, 0,
      std::numeric_limits<double>::infinity(), o).value;
  CHECK(g == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
}

TEST_CASE("non-convergence is reported") {
  QuadOptions o;
  o.max_intervals = 4;
  o.throw_on_failure = true;
  CHECK_THROWS_AS(
      integrate_interval([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, o),
      ConvergenceError);
  o.throw_on_failure = false;
  CHECK_FALSE(
      integrate_interval([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, o).converged);
}

TEST_CASE("slower tail") {
  const auto t = slower_tail(TailDecay{2, 1}, TailDecay{1, 1});
  REQUIRE(t);
  CHECK(t->rate == 1.0);
  CHECK_FALSE(slower_tail(TailDecay{2, 1}, std::nullopt));
}

TEST_CASE("breaks keep the tail search past a late window") {
  // integrand vanishes below 1 and decays like e^{-4r}
  auto g = [](double r) { return r < 1.0 ? 0.0 : std::exp(-4.0 * r); };
  QuadOptions o;
  o.tail = TailDecay{4.0, 1.0};
  o.breaks = {1.0};
  const QuadResult q = integrate_radial(g, 0.0, std::numeric_limits<double>::infinity(), 0.0, o);
  CHECK(q.value == doctest::Approx(std::exp(-4.0) / 4.0).epsilon(1e-10));
}
