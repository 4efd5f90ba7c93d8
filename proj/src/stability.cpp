#include "cknlab/stability.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "cknlab/errors.hpp"
#include "cknlab/identities.hpp"
#include "cknlab/parallel.hpp"

namespace cknlab {

namespace {

double powabs(double x, double p) { return std::pow(std::abs(x), p); }

Integral integrate(const Fn1& h, double lo, double hi, double n_eff,
                   const std::optional<TailDecay>& tail, const QuadOptions& q,
                   double abs_floor = 0.0, const std::vector<double>& breaks = {}) {
  QuadOptions o = q;
  o.breaks.insert(o.breaks.end(), breaks.begin(), breaks.end());
  if (!o.tail) o.tail = tail;
  o.abs_tol = std::max(o.abs_tol, abs_floor);
  const QuadResult r = integrate_radial(h, lo, hi, n_eff - 1.0, o);
  return {r.value, r.abs_error_estimate};
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

double ModelFamily::kappa() const {
  return kind == Kind::PlainExp ? 0.0 : 2.0 * params.b + 2.0 - params.N;
}

RadialProfile ModelFamily::model(double lambda, double c) const {
  const double g = gap();
  if (!(g > 0.0)) throw RegimeError("model family needs b + 1 - a > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("model needs lambda > 0");
  return RadialProfile(PowerExp{c, kappa(), -lambda / g, g}, "model");
}

ModelFamily model_family(const CknParams& params, StabilityTheorem theorem) {
  ModelFamily f;
  f.params = params;
  f.kind = theorem == StabilityTheorem::T6 ? ModelFamily::Kind::PowerExp
                                           : ModelFamily::Kind::PlainExp;
  return f;
}

double stability_constant(const CknParams& c, StabilityTheorem theorem) {
  if (theorem == StabilityTheorem::T6) return (3.0 * c.b - c.a - c.N + 3.0) / 2.0;
  return (c.N - 1.0 - (c.p - 1.0) * c.a - c.b) / c.p;
}

DeficitValue deficit(const CknParams& c, const RadialProfile& f, StabilityTheorem theorem,
                     const QuadOptions& q) {
  c.validate();
  check_integrability(c.p, c.N, f, ckn_exponents(c));
  const double p = c.p;
  const Support s = f.support();
  const auto tail = tail_hint(f, p);
  const Integral g = integrate(
      [&](double r) { return std::pow(r, -p * c.b) * powabs(f.deriv(r), p); }, s.lo, s.hi,
      c.N, tail, q, 0.0, f.kinks());
  const Integral pa = integrate(
      [&](double r) { return std::pow(r, -p * c.a) * powabs(f(r), p); }, s.lo, s.hi, c.N,
      tail, q, 0.0, f.kinks());
  const Integral rh = integrate(
      [&](double r) { return std::pow(r, -c.sigma()) * powabs(f(r), p); }, s.lo, s.hi,
      c.N, tail, q, 0.0, f.kinks());
  DeficitValue d;
  d.constant = stability_constant(c, theorem);
  d.grad = g.value;
  d.pot = pa.value;
  d.product = std::pow(std::max(g.value, 0.0), 1.0 / p) *
              std::pow(std::max(pa.value, 0.0), (p - 1.0) / p);
  d.rhs_term = d.constant * rh.value;
  d.value = d.product - d.rhs_term;
  const double gr = g.value > 0 ? g.error / (p * g.value) : 0.0;
  const double pr = pa.value > 0 ? (p - 1.0) * pa.error / (p * pa.value) : 0.0;
  d.error = d.product * (gr + pr) + std::abs(d.constant) * rh.error +
            1e-15 * (d.product + std::abs(d.rhs_term));
  return d;
}

InnerMin inner_min(const InnerProblem& pb, const QuadOptions& q, bool force_generic) {
  const double p = pb.p;
  InnerMin out;
  auto I = [&](const Fn1& h, double floor) {
    ++out.evals;
    return integrate(h, pb.lo, pb.hi, pb.n_eff, pb.tail, q, floor, pb.breaks);
  };
  const Integral fm = I([&](double r) { return pb.f(r) * pb.m(r) * pb.w(r); }, 0.0);
  const Integral mm = I([&](double r) { const double v = pb.m(r); return v * v * pb.w(r); }, 0.0);
  if (!(mm.value > 0.0)) throw ZeroDenominator("inner_min: model has zero norm");
  const double c2 = fm.value / mm.value;
  const Integral ff = I([&](double r) { return powabs(pb.f(r), p) * pb.w(r); }, 0.0);
  const double floor = 1e-3 * q.rel_tol * ff.value;

  double c = c2;
  if (p != 2.0 || force_generic) {
    // D'(c)/(-p) = int |f - c m|^{p-2} (f - c m) m w, decreasing in c
    auto dD = [&](double cc) {
      const Fn1 h = [&](double r) {
        const double e = pb.f(r) - cc * pb.m(r);
        if (e == 0.0) return 0.0;
        return std::pow(std::abs(e), p - 1.0) * (e > 0 ? 1.0 : -1.0) * pb.m(r) * pb.w(r);
      };
      const Integral scale = I(
          [&](double r) { return powabs(pb.f(r), p - 1.0) * std::abs(pb.m(r)) * pb.w(r); },
          0.0);
      return I(h, 1e-3 * q.rel_tol * scale.value).value;
    };
    double h = std::max(std::abs(c2), 1e-300) * 0.25 + 1e-300;
    double lo = c2 - h, hi = c2 + h;
    double dlo = dD(lo), dhi = dD(hi);
    for (int it = 0; it < 200 && !(dlo >= 0.0 && dhi <= 0.0); ++it) {
      h *= 2.0;
      if (dlo < 0.0) lo = c2 - h, dlo = dD(lo);
      if (dhi > 0.0) hi = c2 + h, dhi = dD(hi);
    }
    if (!(dlo >= 0.0 && dhi <= 0.0)) throw ConvergenceError("inner_min: no sign change in c");
    if (dlo == 0.0) {
      c = lo;
    } else if (dhi == 0.0) {
      c = hi;
    } else {
      std::uintmax_t iters = 200;
      const auto tol = boost::math::tools::eps_tolerance<double>(50);
      const auto br = boost::math::tools::toms748_solve(dD, lo, hi, dlo, dhi, tol, iters);
      c = 0.5 * (br.first + br.second);
    }
  }
  out.c = c;
  const Integral d = I(
      [&](double r) { return powabs(pb.f(r) - c * pb.m(r), p) * pb.w(r); }, floor);
  out.value = d.value;
  out.error = d.error;
  return out;
}

namespace {

InnerProblem inner_problem(const CknParams& params, const RadialProfile& f,
                           const RadialProfile& m, double lambda, const ModelFamily& fam) {
  InnerProblem pb;
  const double sigma = params.sigma();
  pb.f = [&f](double r) { return f(r); };
  pb.m = [m](double r) { return m(r); };
  pb.w = [sigma](double r) { return std::pow(r, -sigma); };
  pb.p = params.p;
  pb.n_eff = params.N;
  // the model lives on (0, inf) even when f is compact
  pb.lo = 0.0;
  pb.hi = kInf;
  const std::optional<TailDecay> model_tail = TailDecay{params.p * lambda / fam.gap(), fam.gap()};
  const auto ft = tail_hint(f, params.p);
  const Asymptotics as = f.asymptotics();
  pb.tail = as.tail == TailKind::Compact ? model_tail : slower_tail(ft, model_tail);
  pb.breaks = f.kinks();
  return pb;
}

}  // namespace

double distance_at(const CknParams& params, const RadialProfile& f,
                   const ModelFamily& family, double c, double lambda,
                   const QuadOptions& q) {
  const RadialProfile m = family.model(lambda);
  const InnerProblem pb = inner_problem(params, f, m, lambda, family);
  return integrate(
             [&](double r) { return powabs(pb.f(r) - c * pb.m(r), pb.p) * pb.w(r); }, pb.lo,
             pb.hi, pb.n_eff, pb.tail, q, 0.0, pb.breaks)
      .value;
}

StabilityResult distance(const CknParams& params, const RadialProfile& f,
                         const ModelFamily& family, const QuadOptions& q,
                         const DistanceOptions& opt) {
  params.validate();
  const double p = params.p, g = family.gap();
  if (!(g > 0.0)) throw RegimeError("distance needs b + 1 - a > 0");
  // the model r^kappa e^{...} must itself be admissible for the distance weight
  std::vector<IntegrandExponent> ex{IntegrandExponent(-params.sigma(), false, "distance")};
  check_integrability(p, params.N, f, ex);
  if (params.N + p * family.kappa() - params.sigma() <= 0.0)
    throw IntegrabilityError("model is not integrable against the distance weight at r=0");

  StabilityResult res;
  const Support s = f.support();
  const auto tail = tail_hint(f, p);
  res.scale = integrate([&](double r) { return std::pow(r, -params.sigma()) * powabs(f(r), p); },
                        s.lo, s.hi, params.N, tail, q, 0.0, f.kinks())
                  .value;
  const Integral G = integrate(
      [&](double r) { return std::pow(r, -p * params.b) * powabs(f.deriv(r), p); }, s.lo, s.hi,
      params.N, tail, q, 0.0, f.kinks());
  const Integral Pa = integrate(
      [&](double r) { return std::pow(r, -p * params.a) * powabs(f(r), p); }, s.lo, s.hi,
      params.N, tail, q, 0.0, f.kinks());
  if (!(G.value > 0.0)) throw ZeroDenominator("distance: gradient integral vanishes");
  const double lam_hat = std::pow(Pa.value / G.value, 1.0 / (p * g));
  res.lambda_hat = std::pow(lam_hat, -g);

  int evals = 0;
  double best_c = 0.0;
  auto obj = [&](double t) {
    const double lambda = std::exp(t);
    const RadialProfile m = family.model(lambda);
    const InnerProblem pb = inner_problem(params, f, m, lambda, family);
    const InnerMin im = inner_min(pb, q, opt.force_generic_inner);
    evals += im.evals;
    return im.value;
  };
  const double centre = std::log(res.lambda_hat);
  const double span = std::log(32.0);
  double lo = centre - span, hi = centre + span;
  const int bits = std::min(26, static_cast<int>(std::ceil(-std::log2(opt.lambda_rel_tol))) + 1);
  std::pair<double, double> best;
  for (int expansion = 0;; ++expansion) {
    std::uintmax_t it = 200;
    best = boost::math::tools::brent_find_minima(obj, lo, hi, bits, it);
    const double edge = 1e-4 * (hi - lo);
    const bool at_lo = best.first - lo < edge, at_hi = hi - best.first < edge;
    if (!at_lo && !at_hi) break;
    if (expansion >= opt.max_expansions)
      throw ConvergenceError("distance: lambda optimum stuck at the bracket edge after " +
                             std::to_string(opt.max_expansions) + " expansions");
    if (at_lo) lo -= span;
    if (at_hi) hi += span;
  }
  res.lambda_star = std::exp(best.first);
  {
    const RadialProfile m = family.model(res.lambda_star);
    const InnerProblem pb = inner_problem(params, f, m, res.lambda_star, family);
    const InnerMin im = inner_min(pb, q, opt.force_generic_inner);
    best_c = im.c;
    res.distance = std::max(im.value, 0.0);
    evals += im.evals;
  }
  res.c_star = best_c;
  res.optimizer_evals = evals;
  res.sentinel = res.distance < 1e-14 * res.scale;
  return res;
}

StabilityResult stability_ratio(const CknParams& params, const RadialProfile& f,
                                StabilityTheorem theorem, const QuadOptions& q,
                                const DistanceOptions& opt) {
  const DeficitValue d = deficit(params, f, theorem, q);
  StabilityResult res = distance(params, f, model_family(params, theorem), q, opt);
  res.deficit = d.value;
  res.deficit_error = d.error;
  res.ratio = res.sentinel ? kInf : d.value / res.distance;
  return res;
}

ScanGrid ScanGrid::refined() const {
  auto mid = [](const std::vector<double>& v, bool geometric) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(v[i]);
      if (i + 1 < v.size())
        out.push_back(geometric ? std::sqrt(v[i] * v[i + 1]) : 0.5 * (v[i] + v[i + 1]));
    }
    return out;
  };
  ScanGrid g;
  g.eps = mid(eps, false);
  g.lambda0 = mid(lambda0, true);
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    g.bumps.push_back(bumps[i]);
    if (i + 1 < bumps.size())
      g.bumps.emplace_back(0.5 * (bumps[i].first + bumps[i + 1].first),
                           0.5 * (bumps[i].second + bumps[i + 1].second));
  }
  return g;
}

ScanGrid default_scan_grid() {
  ScanGrid g;
  g.eps = {0.05, 0.1, 0.2};
  g.bumps = {{0.5, 1.0}, {1.0, 2.0}, {2.0, 3.0}};
  g.lambda0 = {0.5, 1.0, 2.0};
  return g;
}

RadialProfile scan_profile(const ModelFamily& family, double eps, double lo, double hi,
                           double lambda0) {
  const double g = family.gap();
  Modulated m;
  m.base = PowerExp{1.0, family.kappa(), -lambda0 / g, g};
  m.c0 = 1.0;
  m.eps = eps;
  // width ((hi-lo)/2)^2 puts the window peak at e^{-1} for every interval
  const double half = 0.5 * (hi - lo);
  m.window = Bump{lo, hi, half * half, 1.0, false};
  return RadialProfile(m, "perturbed_model");
}

ScanResult stability_scan(const CknParams& params, StabilityTheorem theorem,
                          const ScanGrid& grid, bool exploratory, const QuadOptions& q,
                          int threads) {
  if (grid.size() == 0) throw ConfigError("stability grid is empty");
  ScanResult out;
  out.violations = stability_param_violations(params, theorem);
  if (!out.violations.empty()) {
    if (!exploratory) check_stability_params(params, theorem);
    out.unbalanced = true;
  }
  const ModelFamily fam = model_family(params, theorem);
  const std::size_t nb = grid.bumps.size(), nl = grid.lambda0.size();
  out.rows.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    ScanRow& row = out.rows[i];
    row.sample_id = static_cast<int>(i);
    row.eps = grid.eps[i / (nb * nl)];
    const auto& bump = grid.bumps[(i / nl) % nb];
    row.bump_lo = bump.first;
    row.bump_hi = bump.second;
    row.lambda0 = grid.lambda0[i % nl];
    try {
      const RadialProfile f = scan_profile(fam, row.eps, row.bump_lo, row.bump_hi, row.lambda0);
      row.result = stability_ratio(params, f, theorem, q);
      row.status = row.result.sentinel ? "sentinel" : "ok";
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      row.result.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    if (out.unbalanced) row.status += " UNBALANCED";
  });
  for (const auto& row : out.rows) {
    if (row.status.rfind("ok", 0) != 0) continue;
    if (row.result.ratio < out.min_ratio) {
      out.min_ratio = row.result.ratio;
      out.min_sample = row.sample_id;
    }
  }
  return out;
}

std::string scan_csv(const ScanResult& scan) {
  std::ostringstream os;
  os << "sample_id,eps,bump_lo,bump_hi,lambda0,deficit,distance,c_star,lambda_star,ratio,status\n";
  for (const auto& r : scan.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << r.sample_id << ',' << num(r.eps) << ',' << num(r.bump_lo) << ',' << num(r.bump_hi)
       << ',' << num(r.lambda0) << ',' << num(r.result.deficit) << ','
       << num(r.result.distance) << ',' << num(r.result.c_star) << ','
       << num(r.result.lambda_star) << ',' << num(r.result.ratio) << ',' << status << '\n';
  }
  return os.str();
}

ExponentCheck theorem6_exponent_check(int N, double b) {
  if (N <= 2) throw RegimeError("exponent check needs N > 2");
  ExponentCheck c;
  c.N = N;
  c.b = b;
  // N(b - a + 3) = 2(3b - a + 3)  =>  a (2 - N) = 6b + 6 - Nb - 3N
  c.a = (N * b + 3.0 * N - 6.0 * b - 6.0) / (N - 2.0);
  c.mu = 2.0 * N - 2.0 * b - 4.0;
  c.sobolev_exp = N * c.mu / (N - 2.0);
  c.proof_exp = (c.a - b + 1.0) * N / 2.0;
  c.statement_exp = c.a + b + 1.0;
  c.conjugated_exp = c.statement_exp + 2.0 * (N - 2.0 * b - 2.0);
  auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
  c.proof_matches_sobolev = same(c.proof_exp, c.sobolev_exp);
  c.statement_matches_sobolev = same(c.statement_exp, c.sobolev_exp);
  c.conjugated_matches_sobolev = same(c.conjugated_exp, c.sobolev_exp);
  std::ostringstream os;
  os << "N mu/(N-2) = " << c.sobolev_exp << ", (a-b+1)N/2 = " << c.proof_exp
     << ", a+b+1 = " << c.statement_exp << ", a+b+1+2(N-2b-2) = " << c.conjugated_exp << "; ";
  if (c.proof_matches_sobolev && c.conjugated_matches_sobolev && !c.statement_matches_sobolev)
    os << "consistent: the proof exponent is the statement exponent after the "
          "r^{N-2b-2} conjugation";
  else if (c.proof_matches_sobolev && c.statement_matches_sobolev)
    os << "consistent: all exponents coincide";
  else
    os << "inconsistent";
  c.finding = os.str();
  return c;
}

std::vector<std::string> poincare_violations(const PoincareParams& pp) {
  std::vector<std::string> v;
  const double np = pp.N - pp.p;
  if (!(pp.p > 1.0)) v.push_back("p > 1");
  if (!(np > pp.mu)) v.push_back("N - p > mu");
  if (!(pp.mu >= 0.0)) v.push_back("mu >= 0");
  if (np > 0.0 && !(pp.alpha >= (np - pp.mu) / np)) v.push_back("alpha >= (N-p-mu)/(N-p)");
  if (!(pp.delta > 0.0)) v.push_back("delta > 0");
  if (!(pp.lambda > 0.0)) v.push_back("lambda > 0");
  return v;
}

PoincareResult poincare_ratio(const RadialProfile& v, const PoincareParams& pp,
                              const QuadOptions& q) {
  const auto bad = poincare_violations(pp);
  if (!bad.empty()) {
    std::string msg = "Poincare hypotheses violated:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw RegimeError(msg);
  }
  const double p = pp.p, np = pp.N - pp.p;
  const double w_exp = pp.N * pp.mu / np;
  const double rate = pp.delta / std::pow(pp.lambda, pp.alpha);
  auto gauss = [&](double r) { return std::exp(-rate * std::pow(r, pp.alpha)); };
  const std::optional<TailDecay> tail = TailDecay{rate, pp.alpha};
  const Support s = v.support();

  PoincareResult out;
  const double pre = std::pow(pp.lambda, p + pp.mu - w_exp);
  const Integral num = integrate(
      [&](double r) { return powabs(v.deriv(r), p) * std::pow(r, -pp.mu) * gauss(r); }, s.lo,
      s.hi, pp.N, tail, q, 0.0, v.kinks());
  out.numerator = pre * num.value;

  InnerProblem pb;
  pb.f = [&v](double r) { return v(r); };
  pb.m = [](double) { return 1.0; };
  pb.w = [&](double r) { return std::pow(r, -w_exp) * gauss(r); };
  pb.p = p;
  pb.n_eff = pp.N;
  pb.lo = 0.0;
  pb.hi = kInf;
  pb.tail = tail;
  pb.breaks = v.kinks();
  const InnerMin im = inner_min(pb, q);
  out.c_star = im.c;
  out.denominator = std::max(im.value, 0.0);
  const double scale = integrate([&](double r) { return powabs(v(r), p) * pb.w(r); }, 0.0,
                                 kInf, pp.N, tail, q, 0.0, pb.breaks)
                           .value;
  out.sentinel = out.denominator <= 1e-14 * scale;
  out.ratio = out.sentinel ? kInf : out.numerator / out.denominator;
  return out;
}

}  // namespace cknlab
