#pragma once

// p-Bessel pairs: (r^{n-1} V, r^{n-1} W) such that
//   (r^{n-1} V |y'|^{p-2} y')' + r^{n-1} W |y|^{p-2} y = 0
// has a positive solution phi.

#include <string>
#include <vector>

#include "cknlab/domain.hpp"

namespace cknlab {

struct BesselPair {
  std::string name;
  WeightSpec V;
  WeightSpec W;
  RadialProfile phi;
  double p = 2.0;
  double n_eff = 3.0;
  double R = kInf;
};

std::vector<double> log_grid(double lo, double hi, int n);

// W(r) from the rearranged ODE, evaluated pointwise from the jets of V and phi.
double bessel_W_at(const WeightSpec& V, const RadialProfile& phi, double p,
                   double n_eff, double r);

// True when derive_W can return W in closed form: V is not tabulated, phi is
// r^k exp(s r^m), and either p = 2 or phi'/phi is a single power.
bool has_closed_form_W(const WeightSpec& V, const RadialProfile& phi, double p);

// Closed form W when available, else a tabulated W on `grid`. Throws
// PositivityError if phi <= 0 somewhere on the grid.
WeightSpec derive_W(const WeightSpec& V, const RadialProfile& phi, double p,
                    double n_eff, const std::vector<double>& grid);

struct PBesselSolution {
  std::vector<double> r, phi, dphi, flux;
  bool positive = true;
  double certified_lo = 0.0;
  double certified_hi = 0.0;  // first zero when !positive
  int steps = 0;
  double halving_change = 0.0;  // relative terminal change under step halving

  RadialProfile profile() const;
};

// RK4 in t = ln r on (phi, q = r^{n-1} V |phi'|^{p-2} phi') over
// [r0, min(R, 1e4 r0)], with a step-halving check (ConvergenceError above
// 1e-6 relative) and bisection onto the first zero of phi.
PBesselSolution solve_pbessel(const WeightSpec& V, const WeightSpec& W, double p,
                              double n_eff, double r0, double R,
                              double init_slope, double phi0 = 1.0,
                              int steps = 4096);

// Largest relative ODE residual |(flux)' + r^{n-1} W phi^{p-1}| over the
// grid interior, each point normalised by the larger of the two terms.
double ode_residual(const BesselPair& pair, const std::vector<double>& grid);

// Classical Hardy pair V = 1, phi = r^{-(n-p)/p}, W = ((n-p)/p)^p r^{-p}.
BesselPair hardy_pair(double n_eff, double p);
// V = r^{-pb}, phi = exp(t r^g / g) with t < 0 for g > 0 (t > 0 for g < 0).
BesselPair ckn_exp_pair(const CknParams& params, double t);
// V = r^gamma exp(s r^m), phi = r^kappa exp(rate r^mu), W derived.
BesselPair tilted_pair(double n_eff, double p, double gamma, double s, double m,
                       double kappa, double rate, double mu);

}  // namespace cknlab
