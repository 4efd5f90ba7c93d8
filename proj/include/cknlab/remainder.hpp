#pragma once

#include <span>

namespace cknlab {

// R_p(a, b) = |b|^p + (p-1)|a|^p - p |a|^{p-2} a.b, with the last term taken
// as 0 at a = 0.
double rp(std::span<const double> a, std::span<const double> b, double p);
double rp(double a, double b, double p);

// Location of the smallest sampled R_p(a,b)/|b-a|^p with |a| = 1 and
// b = rho (cos theta, sin theta).
struct MpScan {
  double value = 1.0;
  double rho = 1.0;
  double theta = 0.0;
  long evaluations = 0;
};

// Coarse scan over rho in [1e-6, 1e6] (2*budget-1 log points) and 64 angles,
// followed by a shrinking local grid zoom. Throws RegimeError for p < 2.
MpScan mp_scan(double p, int sample_budget = 256);
double mp_lower_bound(double p, int sample_budget = 256);

// Ratio R_p / |b-a|^p for |a| = 1, b = rho (cos theta, sin theta).
double mp_ratio(double p, double rho, double theta);

}  // namespace cknlab
