#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cknlab/errors.hpp"
#include "cknlab/stability.hpp"

using namespace cknlab;

namespace {
const CknParams kT8{4, 2, -1, 0};
const CknParams kT6{4, 2, 1.5, 1.5};
}  // namespace

TEST_CASE("deficit vanishes on the model family") {
  for (auto [c, th] : {std::pair{kT8, StabilityTheorem::T8}, std::pair{kT6, StabilityTheorem::T6}}) {
    const ModelFamily fam = model_family(c, th);
    for (double lam : {0.5, 2.0}) {
      const DeficitValue d = deficit(c, fam.model(lam, 1.7), th);
      CHECK(std::abs(d.value) <= 1e-10 * d.product);
    }
  }
  CHECK(stability_constant(kT8, StabilityTheorem::T8) == 2.0);
  CHECK(stability_constant(kT6, StabilityTheorem::T6) == std::abs(4.5 - 1.5 - 4 + 3) / 2);
  CHECK(model_family(kT6, StabilityTheorem::T6).kappa() == 2 * 1.5 + 2 - 4);
}

TEST_CASE("exact model gives the sentinel") {
  const ModelFamily fam = model_family(kT8, StabilityTheorem::T8);
  const StabilityResult r = stability_ratio(kT8, fam.model(1.3, 2.0), StabilityTheorem::T8);
  CHECK(r.sentinel);
  CHECK(std::isinf(r.ratio));
}

TEST_CASE("inner minimisation: closed form against root finding") {
  InnerProblem pb;
  pb.f = [](double r) { return std::exp(-r) * (1 + 0.3 * std::sin(r)); };
  pb.m = [](double r) { return std::exp(-r); };
  pb.w = [](double r) { return 1.0 / r; };
  pb.p = 2;
  pb.n_eff = 4;
  pb.tail = TailDecay{2.0, 1.0};
  const InnerMin a = inner_min(pb);
  const InnerMin b = inner_min(pb, {}, true);
  CHECK(a.c == doctest::Approx(b.c).epsilon(1e-8));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
  // perturbing c raises the objective
  CHECK(a.value > 0.0);
}

TEST_CASE("ratio is invariant under scaling and dilation") {
  const ModelFamily fam = model_family(kT8, StabilityTheorem::T8);
  const RadialProfile f = scan_profile(fam, 0.2, 1.0, 2.0, 1.0);
  const StabilityResult r = stability_ratio(kT8, f, StabilityTheorem::T8);
  REQUIRE_FALSE(r.sentinel);
  CHECK(r.ratio > 0.0);
  CHECK(stability_ratio(kT8, f.scaled(5.0), StabilityTheorem::T8).ratio ==
        doctest::Approx(r.ratio).epsilon(1e-6));
  CHECK(stability_ratio(kT8, f.dilated(1.7), StabilityTheorem::T8).ratio ==
        doctest::Approx(r.ratio).epsilon(1e-6));
}

TEST_CASE("scan grid and csv") {
  const ScanGrid g = default_scan_grid();
  CHECK(g.size() == 27);
  CHECK(g.refined().size() == 125);
  ScanGrid small{{0.1}, {{1.0, 2.0}}, {1.0, 2.0}};
  const ScanResult s = stability_scan(kT8, StabilityTheorem::T8, small, false, {}, 1);
  REQUIRE(s.rows.size() == 2);
  for (const auto& r : s.rows) {
    CHECK(r.status == "ok");
    CHECK(r.result.ratio > 0.0);
  }
  CHECK(s.min_ratio == std::min(s.rows[0].result.ratio, s.rows[1].result.ratio));
  const std::string csv = scan_csv(s);
  CHECK(csv.rfind("sample_id,eps,bump_lo,bump_hi,lambda0,deficit,distance,c_star,lambda_star,ratio,status\n", 0) == 0);
  CHECK_THROWS_AS(stability_scan({4, 2, 0.5, 0}, StabilityTheorem::T8, small), RegimeError);
  const ScanResult ex = stability_scan({4, 2, 0.5, 0}, StabilityTheorem::T8, small, true, {}, 1);
  CHECK(ex.unbalanced);
  CHECK(ex.rows[0].status.find("UNBALANCED") != std::string::npos);
  CHECK_THROWS_AS(stability_scan(kT8, StabilityTheorem::T8, ScanGrid{}), ConfigError);
}

TEST_CASE("balance exponents") {
  const ExponentCheck c = theorem6_exponent_check(4, 1.5);
  CHECK(c.a == doctest::Approx(1.5));
  CHECK(c.sobolev_exp == doctest::Approx(2.0));
  CHECK(c.proof_matches_sobolev);
  CHECK_FALSE(c.statement_matches_sobolev);
  CHECK(c.conjugated_matches_sobolev);
}

TEST_CASE("poincare ratio") {
  const PoincareParams pp{4, 2, 1, 1, 1, 1};
  const RadialProfile v = make_modulated(PowerExp{1, 0, 0, 1}, 0.0, 1.0, Bump{1, 2, 1, 1, false});
  const RadialProfile v3 = make_modulated(PowerExp{1, 0, 0, 1}, 3.0, 1.0, Bump{1, 2, 1, 1, false});
  const PoincareResult a = poincare_ratio(v, pp);
  const PoincareResult b = poincare_ratio(v3, pp);
  CHECK(a.ratio > 0.0);
  CHECK(std::isfinite(a.ratio));
  CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-10));
  CHECK(b.c_star == doctest::Approx(a.c_star + 3.0).epsilon(1e-10));
  CHECK_THROWS_AS(poincare_ratio(v, {4, 2, 3, 1, 1, 1}), RegimeError);
  CHECK_THROWS_AS(poincare_ratio(v, {4, 2, 1, 1, 0.1, 1}), RegimeError);
  CHECK_FALSE(poincare_violations({4, 2, 1, -1, 1, 1}).empty());
}
