#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cknlab/bessel.hpp"
#include "cknlab/errors.hpp"

using namespace cknlab;

namespace {

double max_rel_phi(const PBesselSolution& s, const RadialProfile& phi) {
  double worst = 0.0;
  const std::size_t n = s.r.size();
  for (std::size_t i = n / 20; i < n - n / 20; ++i)
    worst = std::max(worst, std::abs(s.phi[i] - phi(s.r[i])) / std::abs(phi(s.r[i])));
  return worst;
}

}  // namespace

TEST_CASE("hardy pair weights") {
  const BesselPair h = hardy_pair(5, 3);
  // ((n-p)/p)^p r^{-p}
  CHECK(h.W(2.0) == doctest::Approx(std::pow(2.0 / 3.0, 3) / 8.0));
  CHECK(h.phi(2.0) == doctest::Approx(std::pow(2.0, -2.0 / 3.0)));
  CHECK(ode_residual(h, log_grid(0.1, 10, 64)) < 1e-8);
}

TEST_CASE("closed form W matches pointwise formula") {
  const WeightSpec V = WeightSpec::tilted(0.5, -0.2, 1.0);
  const RadialProfile phi = make_power_exp(1.0, -0.5, -0.3, 1.0);
  REQUIRE(has_closed_form_W(V, phi, 2.0));
  const WeightSpec W = derive_W(V, phi, 2.0, 3.0, log_grid(0.01, 10, 16));
  CHECK_FALSE(W.is_tabulated());
  for (double r : {0.05, 0.3, 1.0, 4.0})
    CHECK(W(r) == doctest::Approx(bessel_W_at(V, phi, 2.0, 3.0, r)).epsilon(1e-12));
}

TEST_CASE("tabulated W when no closed form exists") {
  // p = 3 and phi'/phi with two powers
  const WeightSpec V = WeightSpec::power(0.0);
  const RadialProfile phi = make_power_exp(1.0, -0.2, -0.5, 1.0);
  CHECK_FALSE(has_closed_form_W(V, phi, 3.0));
  const auto grid = log_grid(0.01, 5, 2049);
  const WeightSpec W = derive_W(V, phi, 3.0, 4.0, grid);
  CHECK(W.is_tabulated());
  CHECK(W(0.77) == doctest::Approx(bessel_W_at(V, phi, 3.0, 4.0, 0.77)).epsilon(1e-6));
}

TEST_CASE("positivity") {
  const RadialProfile bad = make_bump(1, 2);  // zero outside (1, 2)
  CHECK_THROWS_AS(derive_W(WeightSpec::power(0), bad, 2, 3, log_grid(0.5, 3, 32)),
                  PositivityError);
}

TEST_CASE("solve reproduces the hardy solution") {
  for (auto [n, p] : {std::pair{3.0, 2.0}, std::pair{5.0, 3.0}}) {
    const BesselPair h = hardy_pair(n, p);
    const double r0 = 0.1;
    const PBesselSolution s = solve_pbessel(h.V, h.W, p, n, r0, 10, h.phi.deriv(r0), h.phi(r0));
    CHECK(s.positive);
    CHECK(max_rel_phi(s, h.phi) < 1e-6);
  }
}

TEST_CASE("solve detects a zero above the critical constant") {
  // V = 1, W = 2 r^{-2} at n = 3 exceeds the Hardy constant 1/4
  const PBesselSolution s =
      solve_pbessel(WeightSpec::power(0), WeightSpec::power(-2, 2.0), 2, 3, 0.01, 100, 0.0, 1.0);
  CHECK_FALSE(s.positive);
  CHECK(s.certified_hi < 100.0);
  CHECK(s.certified_hi > 0.01);
}

TEST_CASE("ckn exponential pair") {
  const BesselPair c = ckn_exp_pair({3, 2, -1, 0}, -1.0);
  CHECK(c.phi(1.5) == doctest::Approx(std::exp(-1.5 * 1.5 / 2)));
  CHECK(ode_residual(c, log_grid(0.05, 5, 64)) < 1e-8);
  CHECK_THROWS_AS(ckn_exp_pair({3, 2, -1, 0}, 1.0), RegimeError);
}

TEST_CASE("tilted pair") {
  const BesselPair t = tilted_pair(3, 2, 0.5, -0.2, 1, -0.5, -0.3, 1);
  CHECK(ode_residual(t, log_grid(0.05, t.R, 64)) < 1e-6);
  const double r0 = 0.05;
  const PBesselSolution s =
      solve_pbessel(t.V, t.W, 2, 3, r0, t.R, t.phi.deriv(r0), t.phi(r0));
  CHECK(max_rel_phi(s, t.phi) < 1e-6);
}
