#pragma once

// Parameter types, regime classification, radial test functions, weights and
// radial vector fields shared by every other module.

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace cknlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// The tuple (N, p, a, b) of a weighted CKN inequality
//   (int |grad u|^p |x|^{-pb})^{1/p} (int |u|^p |x|^{-pa})^{(p-1)/p}
//     >= C int |u|^p |x|^{-((p-1)a+b+1)}.
struct CknParams {
  int N = 3;
  double p = 2.0;
  double a = 0.0;
  double b = 0.0;

  // (p-1)a + b + 1, the exponent of the right-hand weight.
  double sigma() const { return (p - 1.0) * a + b + 1.0; }
  // b + 1 - a, the exponent in the extremizer exp(t r^g / g).
  double gap() const { return b + 1.0 - a; }

  // Throws std::invalid_argument unless N >= 1, p > 1 and a, b are finite.
  void validate() const;
};

enum class RegimeTag { R1, R2, R3, R4, Degenerate };
enum class ExtremizerKind { PlainExp, PowerExp, None };

struct Regime {
  RegimeTag tag = RegimeTag::Degenerate;
  double sharp_constant = 0.0;
  ExtremizerKind extremizer = ExtremizerKind::None;
  // True when the constant is known to be attained (p = 2 regimes R1-R4, or
  // the two sign cases b <= (N-p)/p, b >= (N-p)/p for general p).
  bool attained = false;
};

std::string to_string(RegimeTag tag);
std::string to_string(ExtremizerKind kind);
RegimeTag regime_tag_from_string(const std::string& s);

// Regime, sharp constant and extremizer family of the CKN inequality.
//
// For p = 2 the four sign regimes R1-R4 are distinguished; ties on
// b = (N-2)/2 go to the plain-exponential regime (R1 for g > 0, R2 for
// g < 0), where both extremizer families coincide. For p != 2 only the
// sign of g is distinguished (R1 / R2) and the constant is
// |N-1-(p-1)a-b|/p. g = 0 or a zero constant yields Degenerate, which still
// carries the (unattained) constant.
Regime classify_regime(const CknParams& params);

// ---------------------------------------------------------------------------
// Radial profiles

// coef * exp(-width / ((r-lo)(hi-r))) on (lo, hi), zero outside. With
// log_coords the same bump is taken in t = ln r over (ln lo, ln hi).
struct Bump {
  double lo = 1.0;
  double hi = 2.0;
  double width = 1.0;
  double coef = 1.0;
  bool log_coords = false;
};

// coef * r^kappa * exp(rate * r^m).
struct PowerExp {
  double coef = 1.0;
  double kappa = 0.0;
  double rate = 0.0;
  double m = 1.0;
};

// base(r) * (c0 + eps * window(r)).
struct Modulated {
  PowerExp base;
  double c0 = 1.0;
  double eps = 0.0;
  Bump window;
};

// Piecewise cubic Hermite data on an increasing grid (f and f' at nodes).
struct Tabulated {
  std::vector<double> r;
  std::vector<double> f;
  std::vector<double> df;
};

using ProfileSpec = std::variant<Bump, PowerExp, Modulated, Tabulated>;

struct Jet {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

struct Support {
  double lo = 0.0;
  double hi = kInf;
};

enum class TailKind { Compact, Exponential, Algebraic };

// Endpoint behaviour used for integrability checks and tail truncation.
// Powers are +inf for faster-than-any-power decay, -inf for blow-up.
struct Asymptotics {
  bool touches_origin = false;
  double origin_value_power = 0.0;  // f ~ r^s near 0
  double origin_deriv_power = 0.0;  // f' ~ r^s' near 0
  TailKind tail = TailKind::Compact;
  double tail_rate = 0.0;  // |f| <~ exp(-tail_rate r^tail_power)
  double tail_power = 1.0;
  double tail_value_power = 0.0;  // algebraic: f ~ r^k
  double tail_deriv_power = 0.0;
};

class RadialProfile {
 public:
  RadialProfile() : RadialProfile(PowerExp{}) {}
  explicit RadialProfile(ProfileSpec spec, std::string family = {});

  double operator()(double r) const { return jet(r).f; }
  double deriv(double r) const { return jet(r).df; }
  double deriv2(double r) const { return jet(r).d2f; }
  Jet jet(double r) const;

  Support support() const;
  // interior points where f is not analytic (a modulation window switching on)
  std::vector<double> kinks() const;
  Asymptotics asymptotics() const;

  const std::string& family() const { return family_; }
  const ProfileSpec& spec() const { return spec_; }

  // t * f
  RadialProfile scaled(double t) const;
  // r -> f(s r)
  RadialProfile dilated(double s) const;

 private:
  ProfileSpec spec_;
  std::string family_;
};

RadialProfile make_bump(double lo, double hi, double width = 1.0);
RadialProfile make_log_bump(double lo, double hi, double width = 1.0);
RadialProfile make_gauss_power(double s, double q, double m);
RadialProfile make_power_exp(double coef, double kappa, double rate, double m);
// The regime extremizer with rate beta > 0 (R1..R4); throws RegimeError for
// Degenerate.
RadialProfile make_extremizer(const CknParams& params, RegimeTag tag,
                              double beta, double coef = 1.0);
RadialProfile make_perturbed_extremizer(const CknParams& params, RegimeTag tag,
                                        double beta, double eps, double lo,
                                        double hi);
RadialProfile make_modulated(const PowerExp& base, double c0, double eps,
                             const Bump& window);

// Relative mismatch between the analytic derivative and a central
// difference, maximised over `samples` interior points of the support.
double derivative_self_check(const RadialProfile& f, int samples = 32,
                             double endpoint_margin = 1e-3);

// ---------------------------------------------------------------------------
// Weights and radial fields

struct PowerTerm {
  double coef = 1.0;
  double exponent = 0.0;
};

// Radial weight: (sum_i c_i r^{e_i}) * exp(s r^m) in closed form, or a
// natural cubic spline in ln r through tabulated values.
class WeightSpec {
 public:
  WeightSpec() : WeightSpec(power(0.0)) {}

  static WeightSpec power(double gamma, double coef = 1.0);
  static WeightSpec tilted(double gamma, double s, double m, double coef = 1.0);
  static WeightSpec power_sum(std::vector<PowerTerm> terms, double s = 0.0,
                              double m = 1.0);
  static WeightSpec tabulated(std::vector<double> r, std::vector<double> values);

  double operator()(double r) const;
  double deriv(double r) const;

  bool is_tabulated() const { return tabulated_; }
  const std::vector<PowerTerm>& terms() const { return terms_; }
  double exp_rate() const { return s_; }
  double exp_power() const { return m_; }
  const std::vector<double>& grid() const { return r_; }
  const std::vector<double>& values() const { return v_; }

  // c * W, exact for both representations.
  WeightSpec scaled(double c) const;

  // Smallest / largest power exponent (closed form only); drives the
  // integrability exponents at 0 and infinity.
  double min_exponent() const;
  double max_exponent() const;

 private:
  WeightSpec(std::vector<PowerTerm> terms, double s, double m)
      : terms_(std::move(terms)), s_(s), m_(m) {}
  double spline_eval(double r, bool derivative) const;

  bool tabulated_ = false;
  std::vector<PowerTerm> terms_;
  double s_ = 0.0;
  double m_ = 1.0;
  std::vector<double> r_, v_, t_, m2_;  // grid, values, ln r, spline moments
};

// X_r in X(x) = X_r(|x|) x/|x|; either a power sum or phi'/phi.
class RadialField {
 public:
  RadialField() : RadialField(power_sum({})) {}

  static RadialField power_sum(std::vector<PowerTerm> terms);
  static RadialField log_derivative(RadialProfile phi);

  double operator()(double r) const;
  double deriv(double r) const;

  bool is_power_sum() const { return std::holds_alternative<Terms>(rep_); }
  const std::vector<PowerTerm>& terms() const;

 private:
  struct Terms {
    std::vector<PowerTerm> terms;
  };
  struct LogDeriv {
    RadialProfile phi;
  };
  explicit RadialField(std::variant<Terms, LogDeriv> rep) : rep_(std::move(rep)) {}
  std::variant<Terms, LogDeriv> rep_;
};

struct MonomialWeight {
  std::vector<double> P;
  double total() const;
  // Throws std::invalid_argument on negative components.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Validation

// Power-law exponent of an integrand weight at the origin and at infinity,
// applied either to |f|^p or to |f'|^p.
struct IntegrandExponent {
  double origin = 0.0;
  double tail = 0.0;
  bool derivative = false;
  std::string label;

  IntegrandExponent() = default;
  IntegrandExponent(double gamma, bool deriv = false, std::string name = {})
      : origin(gamma), tail(gamma), derivative(deriv), label(std::move(name)) {}
  IntegrandExponent(double at_origin, double at_tail, bool deriv,
                    std::string name)
      : origin(at_origin), tail(at_tail), derivative(deriv),
        label(std::move(name)) {}
};

// Returns one message per divergent integral int w |f|^p r^{N_eff-1} dr
// (empty when everything converges).
std::vector<std::string> integrability_violations(
    double p, double n_eff, const RadialProfile& f,
    const std::vector<IntegrandExponent>& exponents);

// Throws IntegrabilityError listing every violation.
void check_integrability(double p, double n_eff, const RadialProfile& f,
                         const std::vector<IntegrandExponent>& exponents);

// The weight exponents behind the CKN terms for params (gradient r^{-pb},
// potential r^{-pa}, right-hand side r^{-sigma}).
std::vector<IntegrandExponent> ckn_exponents(const CknParams& params);

enum class StabilityTheorem { T6, T8, P2Scan };

std::string to_string(StabilityTheorem t);
StabilityTheorem stability_theorem_from_string(const std::string& s);

// Literal evaluation of the theorem hypotheses; returns violated ones.
std::vector<std::string> stability_param_violations(const CknParams& params,
                                                    StabilityTheorem theorem);
// Throws RegimeError naming the violated hypotheses.
void check_stability_params(const CknParams& params, StabilityTheorem theorem);

}  // namespace cknlab
