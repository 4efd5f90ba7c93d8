#include "cknlab/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cknlab/errors.hpp"

namespace cknlab {

namespace {

using Poly = std::vector<PowerTerm>;  // sum c_i r^{e_i}

Poly simplify(Poly p) {
  std::sort(p.begin(), p.end(),
            [](const PowerTerm& x, const PowerTerm& y) { return x.exponent < y.exponent; });
  Poly out;
  for (const auto& t : p) {
    if (!out.empty() && std::abs(out.back().exponent - t.exponent) <=
                            1e-14 * std::max(1.0, std::abs(t.exponent))) {
      out.back().coef += t.coef;
    } else {
      out.push_back(t);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const PowerTerm& t) { return t.coef == 0.0; }),
            out.end());
  return out;
}

Poly operator+(Poly x, const Poly& y) {
  x.insert(x.end(), y.begin(), y.end());
  return simplify(std::move(x));
}

Poly operator*(const Poly& x, const Poly& y) {
  Poly out;
  for (const auto& a : x)
    for (const auto& b : y) out.push_back({a.coef * b.coef, a.exponent + b.exponent});
  return simplify(std::move(out));
}

Poly scale(Poly x, double c, double shift = 0.0) {
  for (auto& t : x) {
    t.coef *= c;
    t.exponent += shift;
  }
  return x;
}

Poly diff(const Poly& x) {
  Poly out;
  for (const auto& t : x) out.push_back({t.coef * t.exponent, t.exponent - 1.0});
  return simplify(std::move(out));
}

// phi'/phi for phi = coef r^kappa exp(rate r^m)
Poly log_derivative_terms(const PowerExp& pe) {
  Poly y;
  if (pe.kappa != 0.0) y.push_back({pe.kappa, -1.0});
  if (pe.rate != 0.0 && pe.m != 0.0) y.push_back({pe.rate * pe.m, pe.m - 1.0});
  return simplify(std::move(y));
}

const PowerExp* as_power_exp(const RadialProfile& phi) {
  return std::get_if<PowerExp>(&phi.spec());
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("log_grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double bessel_W_at(const WeightSpec& V, const RadialProfile& phi, double p,
                   double n_eff, double r) {
  const Jet j = phi.jet(r);
  if (!(j.f > 0.0)) {
    std::ostringstream os;
    os << "phi is not positive at r = " << r;
    throw PositivityError(os.str());
  }
  const double y = j.df / j.f;
  const double v = V(r);
  const double dv = V.deriv(r);
  const double bracket = ((n_eff - 1.0) / r * v + dv) * y + (p - 1.0) * v * j.d2f / j.f;
  if (p == 2.0) return -bracket;
  if (y == 0.0) return 0.0;
  return -std::pow(std::abs(y), p - 2.0) * bracket;
}

bool has_closed_form_W(const WeightSpec& V, const RadialProfile& phi, double p) {
  if (V.is_tabulated()) return false;
  const PowerExp* pe = as_power_exp(phi);
  if (!pe || !(pe->coef > 0.0)) return false;
  return p == 2.0 || log_derivative_terms(*pe).size() <= 1;
}

WeightSpec derive_W(const WeightSpec& V, const RadialProfile& phi, double p,
                    double n_eff, const std::vector<double>& grid) {
  for (double r : grid) {
    if (!(phi(r) > 0.0)) {
      std::ostringstream os;
      os << "derive_W: phi <= 0 at r = " << r;
      throw PositivityError(os.str());
    }
  }
  if (has_closed_form_W(V, phi, p)) {
    const PowerExp& pe = *as_power_exp(phi);
    const Poly y = log_derivative_terms(pe);
    if (y.empty()) return WeightSpec::power_sum({}, V.exp_rate(), V.exp_power());
    const Poly P = simplify(V.terms());
    const double s = V.exp_rate(), mv = V.exp_power();
    // V' / E with V = P E, E = exp(s r^mv)
    Poly dP = diff(P);
    if (s != 0.0) dP = dP + scale(P, s * mv, mv - 1.0);
    const Poly yy = diff(y) + y * y;  // phi''/phi
    Poly bracket = (scale(P, n_eff - 1.0, -1.0) + dP) * y + scale(P * yy, p - 1.0);
    if (p == 2.0) {
      bracket = scale(bracket, -1.0);
    } else {
      const PowerTerm& t = y.front();
      bracket = scale(bracket, -std::pow(std::abs(t.coef), p - 2.0), t.exponent * (p - 2.0));
    }
    return WeightSpec::power_sum(bracket, s, mv);
  }
  if (grid.size() < 4) throw std::invalid_argument("derive_W: grid too small");
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    w[i] = bessel_W_at(V, phi, p, n_eff, grid[i]);
  return WeightSpec::tabulated(grid, w);
}

RadialProfile PBesselSolution::profile() const {
  return RadialProfile(Tabulated{r, phi, dphi}, "pbessel_solution");
}

namespace {

struct OdeState {
  double phi, q;
};

struct Shooter {
  const WeightSpec& V;
  const WeightSpec& W;
  double p, n;

  double dphi(double r, double q) const {
    if (q == 0.0) return 0.0;
    const double den = std::pow(r, n - 1.0) * V(r);
    const double mag = std::pow(std::abs(q) / den, 1.0 / (p - 1.0));
    return q > 0.0 ? mag : -mag;
  }

  double flux(double r, double dphi) const {
    if (dphi == 0.0) return 0.0;
    return std::pow(r, n - 1.0) * V(r) * std::pow(std::abs(dphi), p - 2.0) * dphi;
  }

  // d/dt with r = e^t
  OdeState rhs(double t, const OdeState& s) const {
    const double r = std::exp(t);
    const double ph = s.phi;
    const double src = std::pow(r, n - 1.0) * W(r) *
                       (ph == 0.0 ? 0.0 : std::pow(std::abs(ph), p - 2.0) * ph);
    return {r * dphi(r, s.q), -r * src};
  }

  OdeState step(double t, const OdeState& s, double h) const {
    const OdeState k1 = rhs(t, s);
    const OdeState k2 = rhs(t + 0.5 * h, {s.phi + 0.5 * h * k1.phi, s.q + 0.5 * h * k1.q});
    const OdeState k3 = rhs(t + 0.5 * h, {s.phi + 0.5 * h * k2.phi, s.q + 0.5 * h * k2.q});
    const OdeState k4 = rhs(t + h, {s.phi + h * k3.phi, s.q + h * k3.q});
    return {s.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
            s.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q)};
  }
};

PBesselSolution shoot(const Shooter& sh, double r0, double r1, double phi0,
                      double slope, int steps) {
  PBesselSolution out;
  out.steps = steps;
  out.certified_lo = r0;
  const double t0 = std::log(r0), t1 = std::log(r1);
  const double h = (t1 - t0) / steps;
  OdeState s{phi0, sh.flux(r0, slope)};
  out.r.push_back(r0);
  out.phi.push_back(phi0);
  out.dphi.push_back(slope);
  out.flux.push_back(s.q);
  if (!(phi0 > 0.0)) {
    out.positive = false;
    out.certified_hi = r0;
    return out;
  }
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const OdeState next = sh.step(t, s, h);
    if (!(next.phi > 0.0)) {
      // bisect on the step length for the first zero
      double lo = 0.0, hi = h;
      for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::abs(t + hi) + 1e-300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sh.step(t, s, mid).phi > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      out.positive = false;
      out.certified_hi = std::exp(t + hi);
      return out;
    }
    s = next;
    const double r = std::exp(t + h);
    out.r.push_back(r);
    out.phi.push_back(s.phi);
    out.dphi.push_back(sh.dphi(r, s.q));
    out.flux.push_back(s.q);
  }
  out.r.back() = r1;
  out.certified_hi = r1;
  return out;
}

}  // namespace

PBesselSolution solve_pbessel(const WeightSpec& V, const WeightSpec& W, double p,
                              double n_eff, double r0, double R, double init_slope,
                              double phi0, int steps) {
  if (!(p > 1.0)) throw std::invalid_argument("solve_pbessel: p must be > 1");
  if (!(r0 > 0.0) || !(R > r0)) throw std::invalid_argument("solve_pbessel needs 0 < r0 < R");
  steps = std::max(steps, 4096);
  const double r1 = std::min(R, 1e4 * r0);
  for (double r : {r0, std::sqrt(r0 * r1), r1}) {
    if (!(V(r) > 0.0)) throw std::invalid_argument("solve_pbessel: V must be positive");
  }
  const Shooter sh{V, W, p, n_eff};
  // double the step count until halving moves the terminal value by <= 1e-6
  double change = 0.0;
  for (int attempt = 0;; ++attempt, steps *= 2) {
    PBesselSolution coarse = shoot(sh, r0, r1, phi0, init_slope, steps);
    PBesselSolution fine = shoot(sh, r0, r1, phi0, init_slope, 2 * steps);
    if (coarse.positive != fine.positive) {
      change = 1.0;
    } else if (!fine.positive) {
      change = std::abs(coarse.certified_hi - fine.certified_hi) / fine.certified_hi;
    } else {
      change = std::abs(coarse.phi.back() - fine.phi.back()) /
               std::max(std::abs(fine.phi.back()), 1e-300);
    }
    fine.halving_change = change;
    if (change <= 1e-6) return fine;
    if (attempt == 4) break;
  }
  std::ostringstream os;
  os << "solve_pbessel: step halving changed the terminal value by " << change;
  throw ConvergenceError(os.str());
}

double ode_residual(const BesselPair& pair, const std::vector<double>& grid) {
  const double p = pair.p, n = pair.n_eff;
  auto flux = [&](double r) {
    const Jet j = pair.phi.jet(r);
    if (j.df == 0.0) return 0.0;
    return std::pow(r, n - 1.0) * pair.V(r) * std::pow(std::abs(j.df), p - 2.0) * j.df;
  };
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double r = grid[i];
    const double h = r * 1e-3;
    const double t1 = (-flux(r + 2 * h) + 8.0 * flux(r + h) - 8.0 * flux(r - h) +
                       flux(r - 2 * h)) /
                      (12.0 * h);
    const double ph = pair.phi(r);
    const double t2 = std::pow(r, n - 1.0) * pair.W(r) * std::pow(std::abs(ph), p - 2.0) * ph;
    const double scale = std::max(std::abs(t1), std::abs(t2));
    if (scale < 1e-300) continue;
    worst = std::max(worst, std::abs(t1 + t2) / scale);
  }
  return worst;
}

BesselPair hardy_pair(double n_eff, double p) {
  const double k = (n_eff - p) / p;
  BesselPair pair;
  std::ostringstream os;
  os << "hardy(n=" << n_eff << ",p=" << p << ")";
  pair.name = os.str();
  pair.V = WeightSpec::power(0.0);
  pair.W = WeightSpec::power(-p, std::pow(std::abs(k), p));
  pair.phi = make_power_exp(1.0, -k, 0.0, 1.0);
  pair.p = p;
  pair.n_eff = n_eff;
  return pair;
}

BesselPair ckn_exp_pair(const CknParams& params, double t) {
  const double g = params.gap();
  if (g == 0.0) throw RegimeError("ckn_exp_pair needs b + 1 - a != 0");
  if (!(t * g < 0.0)) throw RegimeError("ckn_exp_pair needs t g < 0 (decay at the open end)");
  BesselPair pair;
  std::ostringstream os;
  os << "ckn_exp(N=" << params.N << ",p=" << params.p << ",a=" << params.a
     << ",b=" << params.b << ",t=" << t << ")";
  pair.name = os.str();
  pair.p = params.p;
  pair.n_eff = params.N;
  pair.V = WeightSpec::power(-params.p * params.b);
  pair.phi = make_power_exp(1.0, 0.0, t / g, g);
  pair.W = derive_W(pair.V, pair.phi, pair.p, pair.n_eff, {});
  return pair;
}

BesselPair tilted_pair(double n_eff, double p, double gamma, double s, double m,
                       double kappa, double rate, double mu) {
  BesselPair pair;
  std::ostringstream os;
  os << "tilted(n=" << n_eff << ",p=" << p << ",gamma=" << gamma << ",s=" << s
     << ",m=" << m << ",kappa=" << kappa << ",rate=" << rate << ",mu=" << mu << ")";
  pair.name = os.str();
  pair.p = p;
  pair.n_eff = n_eff;
  pair.V = WeightSpec::tilted(gamma, s, m);
  pair.phi = make_power_exp(1.0, kappa, rate, mu);
  // keep the growing companion solution below ~e^14 on the working grid so
  // forward shooting stays accurate
  double R = 10.0;
  auto growth = [&](double r) {
    return 2.0 * std::abs(rate) * std::pow(r, mu) + std::abs(s) * std::pow(r, m);
  };
  while (growth(R) > 14.0 && R > 0.1) R *= 0.9;
  pair.R = R;
  pair.W = derive_W(pair.V, pair.phi, p, n_eff, log_grid(1e-3, pair.R, 8193));
  return pair;
}

}  // namespace cknlab
