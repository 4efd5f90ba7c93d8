#include "cknlab/remainder.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cknlab/errors.hpp"

namespace cknlab {

double rp(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) throw std::invalid_argument("rp: vector lengths differ");
  if (!(p > 1.0)) throw std::invalid_argument("rp: p must be > 1");
  double na2 = 0.0, nb2 = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na2 += a[i] * a[i];
    nb2 += b[i] * b[i];
    dot += a[i] * b[i];
  }
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  double out = std::pow(nb, p) + (p - 1.0) * std::pow(na, p);
  if (na > 0.0) out -= p * std::pow(na, p - 2.0) * dot;
  return out;
}

double rp(double a, double b, double p) {
  const double aa = std::abs(a);
  double out = std::pow(std::abs(b), p) + (p - 1.0) * std::pow(aa, p);
  if (aa > 0.0) out -= p * std::pow(aa, p - 1.0) * (a > 0.0 ? b : -b);
  return out;
}

double mp_ratio(double p, double rho, double theta) {
  const double c = std::cos(theta);
  const double d2 = rho * rho + 1.0 - 2.0 * rho * c;
  if (!(d2 >= 1e-24)) return std::numeric_limits<double>::infinity();
  const double r = std::pow(rho, p) + (p - 1.0) - p * rho * c;
  return r / std::pow(d2, 0.5 * p);
}

MpScan mp_scan(double p, int sample_budget) {
  if (!(p >= 2.0)) throw RegimeError("mp_lower_bound requires p >= 2");
  if (sample_budget < 2) throw std::invalid_argument("sample budget must be >= 2");
  // p-homogeneity and rotation invariance: only |b|/|a| and the angle matter,
  // so fix a = (1, 0).
  const int n_rho = 2 * sample_budget - 1;
  const int n_theta = 64;
  const double lr0 = std::log(1e-6), lr1 = std::log(1e6);
  MpScan best;
  best.value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_rho; ++i) {
    const double rho = std::exp(lr0 + (lr1 - lr0) * i / (n_rho - 1));
    for (int j = 0; j < n_theta; ++j) {
      const double th = 2.0 * std::numbers::pi * j / n_theta;
      const double v = mp_ratio(p, rho, th);
      ++best.evaluations;
      if (v < best.value) best = {v, rho, th, best.evaluations};
    }
  }
  // local zoom in (ln rho, theta)
  double hl = (lr1 - lr0) / (n_rho - 1);
  double ht = 2.0 * std::numbers::pi / n_theta;
  for (int level = 0; level < 60 && (hl > 1e-15 || ht > 1e-15); ++level) {
    const double l0 = std::log(best.rho), t0 = best.theta;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const double rho = std::exp(l0 + hl * i / 10.0);
        const double th = t0 + ht * j / 10.0;
        const double v = mp_ratio(p, rho, th);
        ++best.evaluations;
        if (v < best.value) {
          best.value = v;
          best.rho = rho;
          best.theta = th;
        }
      }
    }
    hl *= 0.25;
    ht *= 0.25;
  }
  best.theta = std::remainder(best.theta, 2.0 * std::numbers::pi);
  if (best.theta < 0.0) best.theta += 2.0 * std::numbers::pi;
  return best;
}

double mp_lower_bound(double p, int sample_budget) {
  return mp_scan(p, sample_budget).value;
}

}  // namespace cknlab
