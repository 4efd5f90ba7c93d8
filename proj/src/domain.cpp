#include "cknlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cknlab/errors.hpp"

namespace cknlab {

namespace {

constexpr double kExpUnderflow = -745.0;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

bool nearly_equal(double x, double y, double tol = 1e-12) {
  return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

void CknParams::validate() const {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be > 1");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("a and b must be finite");
}

std::string to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::R1: return "R1";
    case RegimeTag::R2: return "R2";
    case RegimeTag::R3: return "R3";
    case RegimeTag::R4: return "R4";
    case RegimeTag::Degenerate: return "DEGENERATE";
  }
  return "DEGENERATE";
}

std::string to_string(ExtremizerKind kind) {
  switch (kind) {
    case ExtremizerKind::PlainExp: return "plain_exp";
    case ExtremizerKind::PowerExp: return "power_exp";
    case ExtremizerKind::None: return "none";
  }
  return "none";
}

RegimeTag regime_tag_from_string(const std::string& s) {
  if (s == "R1") return RegimeTag::R1;
  if (s == "R2") return RegimeTag::R2;
  if (s == "R3") return RegimeTag::R3;
  if (s == "R4") return RegimeTag::R4;
  if (s == "DEGENERATE") return RegimeTag::Degenerate;
  throw std::invalid_argument("unknown regime tag: " + s);
}

Regime classify_regime(const CknParams& params) {
  params.validate();
  const double N = params.N;
  const double a = params.a;
  const double b = params.b;
  const double p = params.p;
  const double g = params.gap();

  Regime out;
  if (p == 2.0) {
    const double half_crit = (N - 2.0) / 2.0;
    const double c13 = std::abs(N - a - b - 1.0) / 2.0;
    const double c34 = std::abs(N - 3.0 * b + a - 3.0) / 2.0;
    if (g > 0.0 && b <= half_crit) {
      out = {RegimeTag::R1, c13, ExtremizerKind::PlainExp, true};
    } else if (g > 0.0) {
      out = {RegimeTag::R4, c34, ExtremizerKind::PowerExp, true};
    } else if (g < 0.0 && b >= half_crit) {
      out = {RegimeTag::R2, c13, ExtremizerKind::PlainExp, true};
    } else if (g < 0.0) {
      out = {RegimeTag::R3, c34, ExtremizerKind::PowerExp, true};
    } else {
      out = {RegimeTag::Degenerate, c13, ExtremizerKind::None, false};
    }
  } else {
    const double c = std::abs(N - 1.0 - (p - 1.0) * a - b) / p;
    const double crit = (N - p) / p;
    if (g > 0.0) {
      const bool sharp = b <= crit;
      out = {RegimeTag::R1, c, sharp ? ExtremizerKind::PlainExp : ExtremizerKind::None,
             sharp};
    } else if (g < 0.0) {
      const bool sharp = b >= crit;
      out = {RegimeTag::R2, c, sharp ? ExtremizerKind::PlainExp : ExtremizerKind::None,
             sharp};
    } else {
      out = {RegimeTag::Degenerate, c, ExtremizerKind::None, false};
    }
  }
  if (out.sharp_constant == 0.0) {
    out.tag = RegimeTag::Degenerate;
    out.extremizer = ExtremizerKind::None;
    out.attained = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

namespace {

Jet bump_jet(const Bump& bump, double r) {
  double x, tl, th;
  if (bump.log_coords) {
    if (r <= bump.lo || r >= bump.hi) return {};
    x = std::log(r);
    tl = std::log(bump.lo);
    th = std::log(bump.hi);
  } else {
    if (r <= bump.lo || r >= bump.hi) return {};
    x = r;
    tl = bump.lo;
    th = bump.hi;
  }
  const double s = (x - tl) * (th - x);
  const double ds = (th - x) - (x - tl);
  const double w = bump.width;
  const double arg = -w / s;
  if (arg < kExpUnderflow) return {};
  const double f = bump.coef * std::exp(arg);
  const double s2 = s * s;
  const double l1 = w * ds / s2;  // (ln f)'
  const double l2 = w * (-2.0) / s2 - 2.0 * w * ds * ds / (s2 * s);  // (ln f)''
  Jet j{f, f * l1, f * (l1 * l1 + l2)};
  if (bump.log_coords) {
    // d/dr = (1/r) d/dt
    const double d1 = j.df / r;
    const double d2 = (j.d2f - j.df) / (r * r);
    j.df = d1;
    j.d2f = d2;
  }
  return j;
}

Jet power_exp_jet(const PowerExp& pe, double r) {
  if (pe.coef == 0.0) return {};
  if (r <= 0.0) {
    // limit from the right where it exists
    return {};
  }
  const double lr = std::log(r);
  const double rm = pe.rate == 0.0 ? 0.0 : std::exp(pe.m * lr);
  const double arg = pe.kappa * lr + pe.rate * rm;
  if (arg < kExpUnderflow) return {};
  const double f = pe.coef * std::exp(arg);
  // (ln f)' and (ln f)''
  double l1 = pe.kappa / r;
  double l2 = -pe.kappa / (r * r);
  if (pe.rate != 0.0) {
    l1 += pe.rate * pe.m * rm / r;
    l2 += pe.rate * pe.m * (pe.m - 1.0) * rm / (r * r);
  }
  return {f, f * l1, f * (l1 * l1 + l2)};
}

Jet tabulated_jet(const Tabulated& tab, double r) {
  const auto& x = tab.r;
  if (x.size() < 2 || r < x.front() || r > x.back()) return {};
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
  i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
  const double h = x[i + 1] - x[i];
  const double t = (r - x[i]) / h;
  const double f0 = tab.f[i], f1 = tab.f[i + 1];
  const double m0 = tab.df[i] * h, m1 = tab.df[i + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double e00 = 12 * t - 6, e10 = 6 * t - 4, e01 = -12 * t + 6, e11 = 6 * t - 2;
  Jet j;
  j.f = h00 * f0 + h10 * m0 + h01 * f1 + h11 * m1;
  j.df = (d00 * f0 + d10 * m0 + d01 * f1 + d11 * m1) / h;
  j.d2f = (e00 * f0 + e10 * m0 + e01 * f1 + e11 * m1) / (h * h);
  return j;
}

Asymptotics power_exp_asymptotics(const PowerExp& pe) {
  Asymptotics a;
  a.touches_origin = true;
  if (pe.coef == 0.0) {
    a.origin_value_power = a.origin_deriv_power = kInf;
    a.tail = TailKind::Compact;
    return a;
  }
  const bool has_exp = pe.rate != 0.0;
  // origin
  if (has_exp && pe.m < 0.0) {
    const double sgn = pe.rate < 0.0 ? kInf : -kInf;
    a.origin_value_power = a.origin_deriv_power = sgn;
  } else {
    a.origin_value_power = pe.kappa;
    if (pe.kappa != 0.0)
      a.origin_deriv_power = pe.kappa - 1.0;
    else if (has_exp)
      a.origin_deriv_power = pe.m - 1.0;
    else
      a.origin_deriv_power = kInf;
  }
  // infinity
  if (has_exp && pe.m > 0.0) {
    if (pe.rate < 0.0) {
      a.tail = TailKind::Exponential;
      a.tail_rate = -pe.rate;
      a.tail_power = pe.m;
    } else {
      a.tail = TailKind::Algebraic;
      a.tail_value_power = a.tail_deriv_power = kInf;
    }
  } else {
    a.tail = TailKind::Algebraic;
    a.tail_value_power = pe.kappa;
    if (pe.kappa != 0.0)
      a.tail_deriv_power = pe.kappa - 1.0;
    else if (has_exp)
      a.tail_deriv_power = pe.m - 1.0;
    else
      a.tail_deriv_power = -kInf;
  }
  return a;
}

}  // namespace

RadialProfile::RadialProfile(ProfileSpec spec, std::string family)
    : spec_(std::move(spec)), family_(std::move(family)) {
  if (const auto* b = std::get_if<Bump>(&spec_)) {
    if (!(b->lo > 0.0 && b->lo < b->hi && std::isfinite(b->hi)) || !(b->width > 0.0))
      throw std::invalid_argument("bump needs 0 < lo < hi < inf and width > 0");
  } else if (const auto* m = std::get_if<Modulated>(&spec_)) {
    const Bump& b = m->window;
    if (!(b.lo > 0.0 && b.lo < b.hi && std::isfinite(b.hi)) || !(b.width > 0.0))
      throw std::invalid_argument("modulation window needs 0 < lo < hi < inf");
  } else if (const auto* t = std::get_if<Tabulated>(&spec_)) {
    if (t->r.size() < 2 || t->f.size() != t->r.size() || t->df.size() != t->r.size())
      throw std::invalid_argument("tabulated profile needs matching r/f/df arrays");
    if (!std::is_sorted(t->r.begin(), t->r.end()))
      throw std::invalid_argument("tabulated profile grid must be increasing");
  }
  if (family_.empty()) {
    family_ = std::visit(
        [](const auto& s) -> std::string {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Bump>) return s.log_coords ? "log_bump" : "bump";
          if constexpr (std::is_same_v<T, PowerExp>) return "power_exp";
          if constexpr (std::is_same_v<T, Modulated>) return "modulated";
          return "tabulated";
        },
        spec_);
  }
}

Jet RadialProfile::jet(double r) const {
  return std::visit(
      [r](const auto& s) -> Jet {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Bump>) {
          return bump_jet(s, r);
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          return power_exp_jet(s, r);
        } else if constexpr (std::is_same_v<T, Modulated>) {
          const Jet w = bump_jet(s.window, r);
          if (s.c0 == 0.0 && w.f == 0.0) return {};
          const Jet e = power_exp_jet(s.base, r);
          const double m = s.c0 + s.eps * w.f;
          const double dm = s.eps * w.df;
          const double d2m = s.eps * w.d2f;
          return {e.f * m, e.df * m + e.f * dm, e.d2f * m + 2.0 * e.df * dm + e.f * d2m};
        } else {
          return tabulated_jet(s, r);
        }
      },
      spec_);
}

Support RadialProfile::support() const {
  return std::visit(
      [](const auto& s) -> Support {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Bump>) {
          return {s.lo, s.hi};
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          return {0.0, kInf};
        } else if constexpr (std::is_same_v<T, Modulated>) {
          if (s.c0 == 0.0) return {s.window.lo, s.window.hi};
          return {0.0, kInf};
        } else {
          return {s.r.front(), s.r.back()};
        }
      },
      spec_);
}

std::vector<double> RadialProfile::kinks() const {
  if (const auto* m = std::get_if<Modulated>(&spec_); m && m->c0 != 0.0 && m->eps != 0.0)
    return {m->window.lo, m->window.hi};
  return {};
}

Asymptotics RadialProfile::asymptotics() const {
  return std::visit(
      [](const auto& s) -> Asymptotics {
        using T = std::decay_t<decltype(s)>;
        Asymptotics compact;
        compact.touches_origin = false;
        compact.tail = TailKind::Compact;
        if constexpr (std::is_same_v<T, Bump>) {
          return compact;
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          return power_exp_asymptotics(s);
        } else if constexpr (std::is_same_v<T, Modulated>) {
          if (s.c0 == 0.0) return compact;
          return power_exp_asymptotics(s.base);
        } else {
          return compact;
        }
      },
      spec_);
}

RadialProfile RadialProfile::scaled(double t) const {
  ProfileSpec out = std::visit(
      [t](auto s) -> ProfileSpec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Bump>) {
          s.coef *= t;
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          s.coef *= t;
        } else if constexpr (std::is_same_v<T, Modulated>) {
          s.base.coef *= t;
        } else {
          for (auto& v : s.f) v *= t;
          for (auto& v : s.df) v *= t;
        }
        return s;
      },
      spec_);
  return RadialProfile(std::move(out), family_);
}

namespace {

Bump dilate_bump(Bump b, double s) {
  b.lo /= s;
  b.hi /= s;
  if (!b.log_coords) b.width /= s * s;
  return b;
}

PowerExp dilate_power_exp(PowerExp pe, double s) {
  pe.coef *= std::pow(s, pe.kappa);
  pe.rate *= std::pow(s, pe.m);
  return pe;
}

}  // namespace

RadialProfile RadialProfile::dilated(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  ProfileSpec out = std::visit(
      [s](auto spec) -> ProfileSpec {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Bump>) {
          return dilate_bump(spec, s);
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          return dilate_power_exp(spec, s);
        } else if constexpr (std::is_same_v<T, Modulated>) {
          spec.base = dilate_power_exp(spec.base, s);
          spec.window = dilate_bump(spec.window, s);
          return spec;
        } else {
          for (auto& r : spec.r) r /= s;
          for (auto& d : spec.df) d *= s;
          return spec;
        }
      },
      spec_);
  return RadialProfile(std::move(out), family_);
}

RadialProfile make_bump(double lo, double hi, double width) {
  return RadialProfile(Bump{lo, hi, width, 1.0, false}, "bump");
}

RadialProfile make_log_bump(double lo, double hi, double width) {
  return RadialProfile(Bump{lo, hi, width, 1.0, true}, "log_bump");
}

RadialProfile make_gauss_power(double s, double q, double m) {
  if (!(q > 0.0) || !(m > 0.0))
    throw std::invalid_argument("gauss_power needs q > 0 and m > 0");
  return RadialProfile(PowerExp{1.0, s, -q, m}, "gauss_power");
}

RadialProfile make_power_exp(double coef, double kappa, double rate, double m) {
  return RadialProfile(PowerExp{coef, kappa, rate, m}, "power_exp");
}

namespace {

PowerExp extremizer_spec(const CknParams& params, RegimeTag tag, double beta,
                         double coef) {
  if (!(beta > 0.0)) throw std::invalid_argument("extremizer needs beta > 0");
  const double g = params.gap();
  const double kappa = 2.0 * params.b + 2.0 - params.N;
  switch (tag) {
    case RegimeTag::R1:
      if (!(g > 0.0)) throw RegimeError("R1 extremizer needs b + 1 - a > 0");
      return {coef, 0.0, -beta / g, g};
    case RegimeTag::R2:
      if (!(g < 0.0)) throw RegimeError("R2 extremizer needs b + 1 - a < 0");
      return {coef, 0.0, beta / g, g};
    case RegimeTag::R3:
      if (!(g < 0.0)) throw RegimeError("R3 extremizer needs b + 1 - a < 0");
      return {coef, kappa, beta / g, g};
    case RegimeTag::R4:
      if (!(g > 0.0)) throw RegimeError("R4 extremizer needs b + 1 - a > 0");
      return {coef, kappa, -beta / g, g};
    case RegimeTag::Degenerate:
      break;
  }
  throw RegimeError("no extremizer in the DEGENERATE regime");
}

}  // namespace

RadialProfile make_extremizer(const CknParams& params, RegimeTag tag, double beta,
                              double coef) {
  return RadialProfile(extremizer_spec(params, tag, beta, coef), "extremizer");
}

RadialProfile make_perturbed_extremizer(const CknParams& params, RegimeTag tag,
                                        double beta, double eps, double lo,
                                        double hi) {
  Modulated m;
  m.base = extremizer_spec(params, tag, beta, 1.0);
  m.c0 = 1.0;
  m.eps = eps;
  m.window = Bump{lo, hi, 1.0, 1.0, false};
  return RadialProfile(m, "perturbed_extremizer");
}

RadialProfile make_modulated(const PowerExp& base, double c0, double eps,
                             const Bump& window) {
  return RadialProfile(Modulated{base, c0, eps, window}, "modulated");
}

double derivative_self_check(const RadialProfile& f, int samples,
                             double endpoint_margin) {
  const Support sup = f.support();
  double lo = sup.lo > 0.0 ? sup.lo : 0.05;
  double hi = std::isfinite(sup.hi) ? sup.hi : lo + 5.0;
  if (std::isfinite(sup.hi) && sup.lo > 0.0) {
    lo += endpoint_margin;
    hi -= endpoint_margin;
  }
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = lo + (hi - lo) * (i + 0.5) / samples;
    const double h = 1e-5 * std::max(r, 1e-3);
    const double fd = (f(r + h) - f(r - h)) / (2.0 * h);
    const double an = f.deriv(r);
    const double scale =
        std::max({std::abs(an), std::abs(f(r)) / std::max(r, 1e-3), 1e-300});
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Weights

WeightSpec WeightSpec::power(double gamma, double coef) {
  return WeightSpec({{coef, gamma}}, 0.0, 1.0);
}

WeightSpec WeightSpec::tilted(double gamma, double s, double m, double coef) {
  return WeightSpec({{coef, gamma}}, s, m);
}

WeightSpec WeightSpec::power_sum(std::vector<PowerTerm> terms, double s, double m) {
  return WeightSpec(std::move(terms), s, m);
}

WeightSpec WeightSpec::tabulated(std::vector<double> r, std::vector<double> values) {
  const std::size_t n = r.size();
  if (n < 4 || values.size() != n)
    throw std::invalid_argument("tabulated weight needs >= 4 matching samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(r[i] > 0.0) || (i > 0 && !(r[i] > r[i - 1])))
      throw std::invalid_argument("tabulated weight grid must be positive and increasing");
  }
  WeightSpec w({}, 0.0, 1.0);
  w.tabulated_ = true;
  w.r_ = std::move(r);
  w.v_ = std::move(values);
  w.t_.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.t_[i] = std::log(w.r_[i]);
  // natural cubic spline in t = ln r (tridiagonal solve for second derivatives)
  std::vector<double> c(n, 0.0), d(n, 0.0);
  w.m2_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = w.t_[i] - w.t_[i - 1];
    const double h1 = w.t_[i + 1] - w.t_[i];
    const double rhs =
        6.0 * ((w.v_[i + 1] - w.v_[i]) / h1 - (w.v_[i] - w.v_[i - 1]) / h0);
    const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
    c[i] = h1 / diag;
    d[i] = (rhs - h0 * d[i - 1]) / diag;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    w.m2_[i] = d[i] - c[i] * w.m2_[i + 1];
    if (i == 1) break;
  }
  return w;
}

double WeightSpec::spline_eval(double r, bool derivative) const {
  const double t = std::log(r);
  if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
    throw std::domain_error("tabulated weight evaluated outside its grid");
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(std::distance(t_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, t_.size() - 1) - 1;
  const double h = t_[i + 1] - t_[i];
  const double A = (t_[i + 1] - t) / h;
  const double B = (t - t_[i]) / h;
  if (!derivative) {
    return A * v_[i] + B * v_[i + 1] +
           ((A * A * A - A) * m2_[i] + (B * B * B - B) * m2_[i + 1]) * h * h / 6.0;
  }
  const double dvdt = (v_[i + 1] - v_[i]) / h +
                      (-(3 * A * A - 1) * m2_[i] + (3 * B * B - 1) * m2_[i + 1]) * h / 6.0;
  return dvdt / r;
}

double WeightSpec::operator()(double r) const {
  if (tabulated_) return spline_eval(r, false);
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.coef * std::pow(r, t.exponent);
  if (s_ != 0.0) sum *= std::exp(s_ * std::pow(r, m_));
  return sum;
}

double WeightSpec::deriv(double r) const {
  if (tabulated_) {
    // fourth-order central difference with step r * 1e-5
    const double h = r * 1e-5;
    const double lo = r_.front(), hi = r_.back();
    if (r - 2 * h < lo || r + 2 * h > hi) return spline_eval(r, true);
    return (-(*this)(r + 2 * h) + 8.0 * (*this)(r + h) - 8.0 * (*this)(r - h) +
            (*this)(r - 2 * h)) /
           (12.0 * h);
  }
  double sum = 0.0, dsum = 0.0;
  for (const auto& t : terms_) {
    const double v = t.coef * std::pow(r, t.exponent);
    sum += v;
    dsum += t.exponent * v / r;
  }
  if (s_ == 0.0) return dsum;
  const double rm = std::pow(r, m_);
  const double e = std::exp(s_ * rm);
  return (dsum + sum * s_ * m_ * rm / r) * e;
}

WeightSpec WeightSpec::scaled(double c) const {
  WeightSpec out = *this;
  if (tabulated_) {
    for (auto& v : out.v_) v *= c;
    for (auto& m : out.m2_) m *= c;
  } else {
    for (auto& t : out.terms_) t.coef *= c;
  }
  return out;
}

double WeightSpec::min_exponent() const {
  double e = kInf;
  for (const auto& t : terms_)
    if (t.coef != 0.0) e = std::min(e, t.exponent);
  return std::isfinite(e) ? e : 0.0;
}

double WeightSpec::max_exponent() const {
  double e = -kInf;
  for (const auto& t : terms_)
    if (t.coef != 0.0) e = std::max(e, t.exponent);
  return std::isfinite(e) ? e : 0.0;
}

// ---------------------------------------------------------------------------
// Radial fields

RadialField RadialField::power_sum(std::vector<PowerTerm> terms) {
  return RadialField(Terms{std::move(terms)});
}

RadialField RadialField::log_derivative(RadialProfile phi) {
  return RadialField(LogDeriv{std::move(phi)});
}

double RadialField::operator()(double r) const {
  if (const auto* t = std::get_if<Terms>(&rep_)) {
    double s = 0.0;
    for (const auto& term : t->terms) s += term.coef * std::pow(r, term.exponent);
    return s;
  }
  const Jet j = std::get<LogDeriv>(rep_).phi.jet(r);
  return j.df / j.f;
}

double RadialField::deriv(double r) const {
  if (const auto* t = std::get_if<Terms>(&rep_)) {
    double s = 0.0;
    for (const auto& term : t->terms)
      s += term.coef * term.exponent * std::pow(r, term.exponent - 1.0);
    return s;
  }
  const Jet j = std::get<LogDeriv>(rep_).phi.jet(r);
  const double y = j.df / j.f;
  return j.d2f / j.f - y * y;
}

const std::vector<PowerTerm>& RadialField::terms() const {
  static const std::vector<PowerTerm> empty;
  if (const auto* t = std::get_if<Terms>(&rep_)) return t->terms;
  return empty;
}

double MonomialWeight::total() const {
  double s = 0.0;
  for (double x : P) s += x;
  return s;
}

void MonomialWeight::validate() const {
  for (double x : P)
    if (!(x >= 0.0)) throw std::invalid_argument("monomial exponents must be >= 0");
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> integrability_violations(
    double p, double n_eff, const RadialProfile& f,
    const std::vector<IntegrandExponent>& exponents) {
  std::vector<std::string> out;
  const Asymptotics as = f.asymptotics();
  for (const auto& e : exponents) {
    const std::string name =
        e.label.empty() ? (e.derivative ? "int w|f'|^p" : "int w|f|^p") : e.label;
    if (as.touches_origin) {
      const double s = e.derivative ? as.origin_deriv_power : as.origin_value_power;
      const double total = e.origin + (n_eff - 1.0) + p * s;
      if (!(total > -1.0))
        out.push_back(name + " diverges at r=0 (exponent " + fmt(total) + " <= -1)");
    }
    if (as.tail == TailKind::Algebraic) {
      const double k = e.derivative ? as.tail_deriv_power : as.tail_value_power;
      const double total = e.tail + (n_eff - 1.0) + p * k;
      if (!(total < -1.0))
        out.push_back(name + " diverges at r=inf (exponent " + fmt(total) + " >= -1)");
    }
  }
  return out;
}

void check_integrability(double p, double n_eff, const RadialProfile& f,
                         const std::vector<IntegrandExponent>& exponents) {
  const auto v = integrability_violations(p, n_eff, f, exponents);
  if (v.empty()) return;
  std::string msg = "integrability violated:";
  for (const auto& s : v) msg += "\n  " + s;
  throw IntegrabilityError(msg);
}

std::vector<IntegrandExponent> ckn_exponents(const CknParams& params) {
  const double p = params.p;
  return {
      IntegrandExponent(-p * params.b, true, "int |f'|^p r^{-pb}"),
      IntegrandExponent(-p * params.a, false, "int |f|^p r^{-pa}"),
      IntegrandExponent(-params.sigma(), false, "int |f|^p r^{-((p-1)a+b+1)}"),
  };
}

std::string to_string(StabilityTheorem t) {
  switch (t) {
    case StabilityTheorem::T6: return "T6";
    case StabilityTheorem::T8: return "T8";
    case StabilityTheorem::P2Scan: return "P2_scan";
  }
  return "T8";
}

StabilityTheorem stability_theorem_from_string(const std::string& s) {
  if (s == "T6") return StabilityTheorem::T6;
  if (s == "T8") return StabilityTheorem::T8;
  if (s == "P2_scan") return StabilityTheorem::P2Scan;
  throw std::invalid_argument("unknown stability theorem: " + s);
}

std::vector<std::string> stability_param_violations(const CknParams& params,
                                                    StabilityTheorem theorem) {
  params.validate();
  std::vector<std::string> out;
  const double N = params.N, p = params.p, a = params.a, b = params.b;
  switch (theorem) {
    case StabilityTheorem::T6: {
      if (p != 2.0) out.push_back("p = 2");
      if (!((N - 2.0) / 2.0 < b)) out.push_back("(N-2)/2 < b");
      if (!(b <= N - 2.0)) out.push_back("b <= N-2");
      if (!nearly_equal(N * (b - a + 3.0), 2.0 * (3.0 * b - a + 3.0)))
        out.push_back("N(b-a+3) = 2(3b-a+3)");
      break;
    }
    case StabilityTheorem::T8:
    case StabilityTheorem::P2Scan: {
      const bool strict_a = theorem == StabilityTheorem::P2Scan;
      if (theorem == StabilityTheorem::P2Scan && p != 2.0) out.push_back("p = 2");
      if (!(p >= 2.0)) out.push_back("p >= 2");
      if (!(N > p)) {
        out.push_back("N > p");
        break;
      }
      if (!(0.0 <= b)) out.push_back("0 <= b");
      if (!(b < (N - p) / p)) out.push_back("b < (N-p)/p");
      const double amax = N * b / (N - p);
      if (strict_a ? !(a < amax) : !(a <= amax))
        out.push_back(strict_a ? "a < Nb/(N-p)" : "a <= Nb/(N-p)");
      if (!nearly_equal((p - 1.0) * a + b + 1.0, p * b * N / (N - p)))
        out.push_back("(p-1)a+b+1 = pbN/(N-p)");
      break;
    }
  }
  return out;
}

void check_stability_params(const CknParams& params, StabilityTheorem theorem) {
  const auto v = stability_param_violations(params, theorem);
  if (v.empty()) return;
  std::string msg = to_string(theorem) + " hypotheses violated:";
  for (const auto& s : v) msg += " [" + s + "]";
  throw RegimeError(msg);
}

}  // namespace cknlab
