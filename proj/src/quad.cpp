#include "cknlab/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cknlab/errors.hpp"

namespace cknlab {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
  double a, b;
  double value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One GK15 panel with the QUADPACK error heuristic.
Panel gk15(const Fn1& f, double a, double b, int depth, long& evals) {
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);

  std::array<double, 15> fv{};
  fv[0] = f(c);
  for (std::size_t i = 1; i < 8; ++i) {
    fv[2 * i - 1] = f(c - h * xk[i]);
    fv[2 * i] = f(c + h * xk[i]);
  }
  evals += 15;

  double rk = wk[0] * fv[0];
  double rg = wg[0] * fv[0];
  double rabs = wk[0] * std::abs(fv[0]);
  for (std::size_t i = 1; i < 8; ++i) {
    const double s = fv[2 * i - 1] + fv[2 * i];
    rk += wk[i] * s;
    rabs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
    if (i % 2 == 0) rg += wg[i / 2] * s;
  }
  const double mean = 0.5 * rk;
  double rasc = wk[0] * std::abs(fv[0] - mean);
  for (std::size_t i = 1; i < 8; ++i)
    rasc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

  rk *= h;
  rabs *= std::abs(h);
  rasc *= std::abs(h);
  double err = std::abs((rk - rg * h));
  if (rasc != 0.0 && err != 0.0)
    err = rasc * std::min(1.0, std::pow(200.0 * err / rasc, 1.5));
  if (rabs > std::numeric_limits<double>::min() / (50.0 * kEps))
    err = std::max(50.0 * kEps * rabs, err);
  if (!std::isfinite(rk)) err = std::numeric_limits<double>::infinity();
  return {a, b, rk, err, depth};
}

double tolerance(const QuadOptions& o, double value) {
  return std::max(o.abs_tol, o.rel_tol * std::abs(value));
}

QuadResult adaptive(const Fn1& f, double a, double b, const QuadOptions& o,
                    const char* what) {
  long evals = 0;
  std::priority_queue<Panel> queue;
  std::vector<Panel> frozen;
  queue.push(gk15(f, a, b, 0, evals));
  double total = queue.top().value;
  double err = queue.top().error;
  int intervals = 1;
  bool capped = false;
  bool too_deep = false;

  while (!queue.empty() && err > tolerance(o, total)) {
    if (intervals >= o.max_intervals) {
      capped = true;
      break;
    }
    Panel top = queue.top();
    queue.pop();
    const double mid = 0.5 * (top.a + top.b);
    const bool tiny = !(mid > top.a && mid < top.b) ||
                      std::abs(top.b - top.a) <= 64.0 * kEps * std::max(1.0, std::abs(mid));
    if (top.depth >= o.max_depth || tiny) {
      too_deep = too_deep || top.depth >= o.max_depth;
      frozen.push_back(top);
      continue;
    }
    Panel l = gk15(f, top.a, mid, top.depth + 1, evals);
    Panel r = gk15(f, mid, top.b, top.depth + 1, evals);
    total += l.value + r.value - top.value;
    err += l.error + r.error - top.error;
    queue.push(l);
    queue.push(r);
    ++intervals;
  }

  // resum to shed the drift of the running updates
  long double sum = 0.0L, esum = 0.0L;
  for (const auto& p : frozen) {
    sum += p.value;
    esum += p.error;
  }
  while (!queue.empty()) {
    sum += queue.top().value;
    esum += queue.top().error;
    queue.pop();
  }
  QuadResult out;
  out.value = static_cast<double>(sum);
  out.abs_error_estimate = static_cast<double>(esum);
  out.nodes_used = evals;
  out.converged = std::isfinite(out.value) && out.abs_error_estimate <= tolerance(o, out.value);
  if (!out.converged && o.throw_on_failure) {
    std::ostringstream os;
    os << what << ": no convergence (value " << out.value << ", error estimate "
       << out.abs_error_estimate << ", " << intervals << " intervals"
       << (too_deep ? ", depth limit reached" : "") << (capped ? ", interval cap reached" : "")
       << ")";
    throw ConvergenceError(os.str());
  }
  return out;
}

// t-space integrand g(e^t) e^{t (k+1)}. Beyond |t| = 690 power weights
// overflow before the measure underflows; those ends are dropped (the
// integrand there is below e^{-690 c} for any integrable power c).
Fn1 log_integrand(const Fn1& g, double k) {
  return [&g, k](double t) {
    if (!(std::abs(t) <= 690.0)) return 0.0;
    const double r = std::exp(t);
    const double v = g(r);
    if (v == 0.0) return 0.0;
    const double out = v * std::exp((k + 1.0) * t);
    // inf * 0 from a power weight meeting the vanishing measure
    if (!std::isfinite(out) && std::abs(t) > 25.0) return 0.0;
    return out;
  };
}

double find_truncation(const Fn1& g, double lo, double k, const TailDecay& tail,
                       const QuadOptions& o) {
  if (!(tail.rate > 0.0) || !(tail.power > 0.0))
    throw std::invalid_argument("tail decay hint needs rate > 0 and power > 0");
  double R = 1.1 * std::pow(1.0 / tail.rate, 1.0 / tail.power);
  R = std::max(R, lo > 0.0 ? 1.1 * lo : R);
  // a zero integrand below the last break says nothing about the tail
  for (double b : o.breaks) R = std::max(R, 1.1 * b);
  auto F = [&](double r) {
    const double v = g(r);
    return v == 0.0 ? 0.0 : std::abs(v) * std::pow(r, k + 1.0);
  };
  // magnitude scale from a coarse log scan below R
  const double r_min = lo > 0.0 ? lo : R * 1e-4;
  double peak = 0.0;
  for (int i = 0; i <= 64; ++i) {
    const double r = r_min * std::pow(R / r_min, i / 64.0);
    const double v = F(r);
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  for (int it = 0; it < 4000; ++it) {
    const double fr = F(R);
    if (std::isfinite(fr)) peak = std::max(peak, fr);
    const double tail_est =
        fr / (tail.rate * tail.power * std::pow(R, tail.power));  // |h| R / (rate m R^m)
    const double target = 1e-3 * std::max(o.abs_tol, o.rel_tol * peak);
    if (tail_est <= target && F(1.2 * R) <= fr) return R;
    R *= 1.2;
    if (!std::isfinite(R) || R > 1e300) break;
  }
  throw ConvergenceError("integrate_radial: tail truncation point not found");
}

}  // namespace

std::optional<TailDecay> slower_tail(const std::optional<TailDecay>& x,
                                     const std::optional<TailDecay>& y) {
  if (!x || !y) return std::nullopt;
  if (x->power != y->power) return x->power < y->power ? x : y;
  return x->rate < y->rate ? x : y;
}

QuadResult integrate_interval(const Fn1& g, double lo, double hi,
                              const QuadOptions& opts) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("integrate_interval needs a finite interval");
  if (lo == hi) return {0.0, 0.0, 0, true};
  return adaptive(g, lo, hi, opts, "integrate_interval");
}

QuadResult integrate_radial(const Fn1& g, double lo, double hi,
                            double dim_weight_exponent, const QuadOptions& opts) {
  if (!(lo >= 0.0) || !(hi > lo))
    throw std::invalid_argument("integrate_radial needs 0 <= lo < hi");
  const double k = dim_weight_exponent;
  const Fn1 G = log_integrand(g, k);

  if (!std::isfinite(hi) && opts.tail) hi = find_truncation(g, lo, k, *opts.tail, opts);

  std::vector<double> cuts;
  for (double b : opts.breaks)
    if (b > lo && b < hi) cuts.push_back(b);
  if (!cuts.empty()) {
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    QuadOptions piece = opts;
    piece.breaks.clear();
    piece.abs_tol /= static_cast<double>(cuts.size() + 1);
    QuadResult sum;
    sum.converged = true;
    double a = lo;
    cuts.push_back(hi);
    for (double b : cuts) {
      const QuadResult r = integrate_radial(g, a, b, k, piece);
      sum.value += r.value;
      sum.abs_error_estimate += r.abs_error_estimate;
      sum.nodes_used += r.nodes_used;
      sum.converged = sum.converged && r.converged;
      a = b;
    }
    return sum;
  }

  if (lo > 0.0 && std::isfinite(hi))
    return adaptive(G, std::log(lo), std::log(hi), opts, "integrate_radial");

  // half-line pieces in u in [0, 1)
  auto to_origin = [&G](double t_ref) -> Fn1 {
    return [&G, t_ref](double u) {
      const double s = 1.0 - u;
      if (s <= 0.0) return 0.0;
      return G(t_ref - u / s) / (s * s);
    };
  };
  auto to_infinity = [&G](double t_ref) -> Fn1 {
    return [&G, t_ref](double u) {
      const double s = 1.0 - u;
      if (s <= 0.0) return 0.0;
      return G(t_ref + u / s) / (s * s);
    };
  };

  if (lo == 0.0 && std::isfinite(hi)) {
    const Fn1 H = to_origin(std::log(hi));
    return adaptive(H, 0.0, 1.0, opts, "integrate_radial");
  }
  if (lo > 0.0) {
    const Fn1 H = to_infinity(std::log(lo));
    return adaptive(H, 0.0, 1.0, opts, "integrate_radial");
  }
  // (0, inf) without a tail hint: split at r = 1
  const Fn1 H0 = to_origin(0.0);
  const Fn1 H1 = to_infinity(0.0);
  QuadOptions half = opts;
  half.abs_tol *= 0.5;
  QuadResult a = adaptive(H0, 0.0, 1.0, half, "integrate_radial");
  QuadResult b = adaptive(H1, 0.0, 1.0, half, "integrate_radial");
  return {a.value + b.value, a.abs_error_estimate + b.abs_error_estimate,
          a.nodes_used + b.nodes_used, a.converged && b.converged};
}

QuadResult integrate_polar2d(const Fn2& h, double lo, double hi,
                             const QuadOptions& opts) {
  auto average = [&h](int n) -> Fn1 {
    return [&h, n](double r) {
      long double s = 0.0L;
      for (int j = 0; j < n; ++j) s += h(r, 2.0 * std::numbers::pi * j / n);
      return static_cast<double>(s * (2.0L * std::numbers::pi_v<long double> / n));
    };
  };
  // double the angular nodes until two successive radial integrals agree;
  // |grad u|^p is only C^2 in theta where grad u vanishes, so 64 may not do
  QuadResult coarse = integrate_radial(average(64), lo, hi, 1.0, opts);
  long nodes = coarse.nodes_used * 64;
  QuadResult fine;
  double gap = 0.0;
  for (int n = 128;; n *= 2) {
    fine = integrate_radial(average(n), lo, hi, 1.0, opts);
    nodes += fine.nodes_used * n;
    gap = std::abs(fine.value - coarse.value);
    if (gap <= tolerance(opts, fine.value) || n >= 8192) break;
    coarse = fine;
  }
  fine.nodes_used = nodes;
  fine.abs_error_estimate += gap;
  fine.converged = fine.converged && gap <= tolerance(opts, fine.value);
  if (!fine.converged && opts.throw_on_failure) {
    std::ostringstream os;
    os << "integrate_polar2d: trapezoid doubling moved the value by " << gap;
    throw ConvergenceError(os.str());
  }
  return fine;
}

QuadResult integrate_sector2d(const Fn2& h, double lo, double hi, double th_lo,
                              double th_hi, const QuadOptions& opts) {
  QuadOptions inner = opts;
  inner.rel_tol *= 0.1;
  inner.abs_tol *= 0.1;
  long evals = 0;
  double inner_err = 0.0;
  const Fn1 outer = [&](double th) {
    const Fn1 radial = [&h, th](double r) { return h(r, th); };
    QuadResult q = integrate_radial(radial, lo, hi, 1.0, inner);
    evals += q.nodes_used;
    inner_err = std::max(inner_err, q.abs_error_estimate);
    return q.value;
  };
  QuadResult res = integrate_interval(outer, th_lo, th_hi, opts);
  res.nodes_used = evals;
  res.abs_error_estimate += inner_err * (th_hi - th_lo);
  return res;
}

}  // namespace cknlab
