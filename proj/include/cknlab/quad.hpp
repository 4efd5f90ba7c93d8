#pragma once

// Adaptive Gauss-Kronrod quadrature for radial integrals on [lo, hi] with
// 0 <= lo < hi <= inf, plus 2D polar quadrature for non-radial checks.

#include <functional>
#include <optional>
#include <vector>

namespace cknlab {

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long nodes_used = 0;
  bool converged = false;
};

// The integrand decays like exp(-rate r^power) at infinity; used to pick the
// truncation radius instead of mapping the half-line.
struct TailDecay {
  double rate = 1.0;
  double power = 1.0;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::optional<TailDecay> tail;
  int max_depth = 60;
  int max_intervals = 20000;
  bool throw_on_failure = true;
  // interior points where the integrand has a kink or switches on; the
  // radial integral is split there
  std::vector<double> breaks;
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// int_lo^hi g(r) r^dim_weight_exponent dr, computed in t = ln r.
QuadResult integrate_radial(const Fn1& g, double lo, double hi,
                            double dim_weight_exponent,
                            const QuadOptions& opts = {});

// Plain adaptive GK15 on a finite interval, no change of variables.
QuadResult integrate_interval(const Fn1& g, double lo, double hi,
                              const QuadOptions& opts = {});

// int_0^{2pi} int_lo^hi h(r, theta) r dr dtheta. Each theta-average uses the
// periodic trapezoid rule, starting at 64 nodes and doubling (up to 8192)
// until two successive radial integrals agree within
// max(abs_tol, rel_tol |value|).
QuadResult integrate_polar2d(const Fn2& h, double lo, double hi,
                             const QuadOptions& opts = {});

// int_{th_lo}^{th_hi} int_lo^hi h(r, theta) r dr dtheta by nested adaptive
// GK (independent of the trapezoid path above).
QuadResult integrate_sector2d(const Fn2& h, double lo, double hi, double th_lo,
                              double th_hi, const QuadOptions& opts = {});

// Smallest tail decay of two hints (nullopt if either is missing).
std::optional<TailDecay> slower_tail(const std::optional<TailDecay>& x,
                                     const std::optional<TailDecay>& y);

}  // namespace cknlab
