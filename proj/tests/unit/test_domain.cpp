#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cknlab/domain.hpp"
#include "cknlab/errors.hpp"

using namespace cknlab;

TEST_CASE("regime constants match closed forms") {
  // Heisenberg: N/2 at (a, b) = (-1, 0)
  for (int N = 2; N <= 7; ++N) {
    const Regime r = classify_regime({N, 2.0, -1.0, 0.0});
    CHECK(r.tag == RegimeTag::R1);
    CHECK(r.sharp_constant == N / 2.0);
    CHECK(r.extremizer == ExtremizerKind::PlainExp);
  }
  // Hardy (N-2)/2 at (1, 0); g = 0 so the constant is not attained
  for (int N = 3; N <= 7; ++N) {
    const Regime r = classify_regime({N, 2.0, 1.0, 0.0});
    CHECK(r.tag == RegimeTag::Degenerate);
    CHECK(r.sharp_constant == (N - 2) / 2.0);
    CHECK_FALSE(r.attained);
  }
  CHECK(classify_regime({5, 3.0, 0.0, 0.0}).sharp_constant == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("four p = 2 regimes") {
  CHECK(classify_regime({4, 2, 0, 0}).tag == RegimeTag::R1);
  CHECK(classify_regime({3, 2, 2, 0.5}).tag == RegimeTag::R2);
  CHECK(classify_regime({4, 2, 1.5, 0}).tag == RegimeTag::R3);
  CHECK(classify_regime({4, 2, 1.5, 1.5}).tag == RegimeTag::R4);

  const Regime r4 = classify_regime({4, 2, 1.5, 1.5});
  CHECK(r4.sharp_constant == std::abs(4 - 4.5 + 1.5 - 3) / 2.0);
  CHECK(r4.extremizer == ExtremizerKind::PowerExp);
}

TEST_CASE("boundary b = (N-2)/2 gives equal R1 and R4 constants") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const double a = U(rng);
    for (int N = 3; N <= 6; ++N) {
      const double b = (N - 2) / 2.0;
      CHECK(std::abs(N - 3 * b + a - 3) == doctest::Approx(std::abs(N - a - b - 1)));
    }
  }
  // ties go to the plain-exponential regimes
  CHECK(classify_regime({4, 2, 0.5, 1.0}).tag == RegimeTag::R1);
  CHECK(classify_regime({4, 2, 3.0, 1.0}).tag == RegimeTag::R2);
}

TEST_CASE("zero constant is degenerate") {
  // N - 1 - (p-1)a - b = 0 with g = 1
  const Regime z = classify_regime({4, 3, 1.0, 1.0});
  CHECK(z.tag == RegimeTag::Degenerate);
  CHECK(z.sharp_constant == 0.0);
  CHECK(classify_regime({4, 2, 2.0, 1.0}).tag == RegimeTag::Degenerate);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(classify_regime({0, 2, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(classify_regime({3, 1.0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(classify_regime({3, 2, NAN, 0}), std::invalid_argument);
}

TEST_CASE("tag strings round trip") {
  for (auto t : {RegimeTag::R1, RegimeTag::R2, RegimeTag::R3, RegimeTag::R4,
                 RegimeTag::Degenerate})
    CHECK(regime_tag_from_string(to_string(t)) == t);
  CHECK(to_string(RegimeTag::Degenerate) == "DEGENERATE");
  CHECK(to_string(ExtremizerKind::PowerExp) == "power_exp");
}

TEST_CASE("profile derivatives agree with finite differences") {
  const CknParams c{4, 2, 1.5, 1.5};
  for (const auto& f : {make_bump(1, 2), make_log_bump(0.5, 3), make_gauss_power(1.5, 1, 2),
                        make_power_exp(2, -0.5, -0.7, 1.5), make_extremizer(c, RegimeTag::R4, 1.0),
                        make_perturbed_extremizer(c, RegimeTag::R4, 1.0, 0.2, 0.5, 1.5)})
    CHECK(derivative_self_check(f, 32, 0.05) < 1e-4);

  // bump: f' = f (hi + lo - 2r) / ((r-lo)(hi-r))^2
  const RadialProfile b = make_bump(1, 2);
  const double r = 1.2, d = (r - 1) * (2 - r);
  CHECK(b.deriv(r) == doctest::Approx(b(r) * (3 - 2 * r) / (d * d)).epsilon(1e-13));
}

TEST_CASE("bump values") {
  const RadialProfile f = make_bump(1, 2);
  CHECK(f(0.5) == 0.0);
  CHECK(f(2.5) == 0.0);
  CHECK(f(1.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
  CHECK(f.deriv(1.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.support().lo == 1.0);
  CHECK(f.support().hi == 2.0);
}

TEST_CASE("extremizers") {
  // R1: exp(-beta r^g / g)
  const CknParams c{3, 2, -1, 0};
  const RadialProfile e = make_extremizer(c, RegimeTag::R1, 2.0);
  CHECK(e(1.3) == doctest::Approx(std::exp(-2.0 * 1.3 * 1.3 / 2.0)).epsilon(1e-14));
  // R4: power prefactor r^{2b+2-N}
  const CknParams c4{4, 2, 1.5, 1.5};
  const RadialProfile e4 = make_extremizer(c4, RegimeTag::R4, 1.0);
  const double g = c4.gap();
  CHECK(e4(1.7) == doctest::Approx(std::pow(1.7, 1.0) * std::exp(-std::pow(1.7, g) / g)));
  CHECK_THROWS_AS(make_extremizer(c, RegimeTag::Degenerate, 1.0), RegimeError);
}

TEST_CASE("scaling and dilation") {
  const RadialProfile f = make_gauss_power(1, 1, 2);
  CHECK(f.scaled(3)(0.7) == doctest::Approx(3 * f(0.7)));
  CHECK(f.dilated(2)(0.7) == doctest::Approx(f(1.4)));
  CHECK(f.dilated(2).deriv(0.7) == doctest::Approx(2 * f.deriv(1.4)));
}

TEST_CASE("weights and fields") {
  const WeightSpec w = WeightSpec::power(-2.0, 3.0);
  CHECK(w(2.0) == doctest::Approx(0.75));
  CHECK(w.deriv(2.0) == doctest::Approx(-0.75));
  const WeightSpec t = WeightSpec::tilted(1.0, -0.5, 2.0);
  CHECK(t(1.2) == doctest::Approx(1.2 * std::exp(-0.5 * 1.44)));
  const double h = 1e-6;
  CHECK(t.deriv(1.2) == doctest::Approx((t(1.2 + h) - t(1.2 - h)) / (2 * h)).epsilon(1e-7));

  std::vector<double> r, v;
  for (int i = 0; i <= 200; ++i) {
    r.push_back(std::exp(-2.0 + 4.0 * i / 200));
    v.push_back(std::pow(r.back(), 1.5));
  }
  const WeightSpec s = WeightSpec::tabulated(r, v);
  CHECK(s(1.3) == doctest::Approx(std::pow(1.3, 1.5)).epsilon(1e-6));

  const RadialField X = RadialField::log_derivative(make_gauss_power(0.0, 1.0, 2.0));
  CHECK(X(1.5) == doctest::Approx(-3.0));
  CHECK(X.deriv(1.5) == doctest::Approx(-2.0));
}

TEST_CASE("integrability") {
  // r^{-2a} |f|^2 r^{N-1} with a = 3, N = 3 and f ~ 1 at 0 diverges
  const RadialProfile f = make_gauss_power(0.0, 1.0, 2.0);
  CHECK_FALSE(integrability_violations(2, 3, f, ckn_exponents({3, 2, 3, 1})).empty());
  CHECK_THROWS_AS(check_integrability(2, 3, f, ckn_exponents({3, 2, 3, 1})),
                  IntegrabilityError);
  CHECK(integrability_violations(2, 3, make_bump(1, 2), ckn_exponents({3, 2, 3, 1})).empty());
  // algebraic tail r^{-1} at N = 3 with no weight diverges
  const RadialProfile alg = make_power_exp(1.0, -1.0, 0.0, 1.0);
  CHECK_FALSE(integrability_violations(2, 3, alg, {IntegrandExponent(0.0)}).empty());
}

TEST_CASE("stability hypotheses") {
  CHECK(stability_param_violations({4, 2, -1, 0}, StabilityTheorem::T8).empty());
  CHECK(stability_param_violations({4, 2, 1.5, 1.5}, StabilityTheorem::T6).empty());
  CHECK_THROWS_AS(check_stability_params({4, 2, 0.5, 0}, StabilityTheorem::T8), RegimeError);
  CHECK_THROWS_AS(check_stability_params({4, 3, 0, 0}, StabilityTheorem::P2Scan), RegimeError);
  CHECK(stability_theorem_from_string("P2_scan") == StabilityTheorem::P2Scan);
}
