#pragma once

// Deficits, model distances, deficit/distance ratios, grid scans and the
// weighted Poincare ratio.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cknlab/domain.hpp"
#include "cknlab/quad.hpp"

namespace cknlab {

// m_lambda(r) = r^kappa exp(-lambda r^g / g), g = b + 1 - a; kappa = 0 for the
// plain family and 2b + 2 - N for the power family.
struct ModelFamily {
  enum class Kind { PlainExp, PowerExp };
  Kind kind = Kind::PlainExp;
  CknParams params;

  double kappa() const;
  double gap() const { return params.gap(); }
  RadialProfile model(double lambda, double c = 1.0) const;
};

// The family matching a stability theorem (power family for T6).
ModelFamily model_family(const CknParams& params, StabilityTheorem theorem);

struct DeficitValue {
  double value = 0.0;
  double error = 0.0;
  double product = 0.0;   // (int|u'|^p r^{-pb})^{1/p} (int|u|^p r^{-pa})^{(p-1)/p}
  double rhs_term = 0.0;  // constant * int |u|^p r^{-sigma}
  double constant = 0.0;
  double grad = 0.0;
  double pot = 0.0;
};

// Constant (N-1-(p-1)a-b)/p for T8 and P2_scan, (3b-a-N+3)/2 for T6.
double stability_constant(const CknParams& params, StabilityTheorem theorem);
DeficitValue deficit(const CknParams& params, const RadialProfile& f,
                     StabilityTheorem theorem, const QuadOptions& q = {});

// argmin_c int |f - c m|^p w r^{n-1} dr over [lo, hi].
struct InnerMin {
  double c = 0.0;
  double value = 0.0;
  double error = 0.0;
  int evals = 0;
};
struct InnerProblem {
  Fn1 f, m, w;
  double p = 2.0;
  double n_eff = 3.0;
  double lo = 0.0, hi = kInf;
  std::optional<TailDecay> tail;
  std::vector<double> breaks;
};
// Closed form for p = 2 unless force_generic; otherwise the root of the
// monotone derivative in c (TOMS 748).
InnerMin inner_min(const InnerProblem& prob, const QuadOptions& q = {},
                   bool force_generic = false);

struct StabilityResult {
  double deficit = 0.0;
  double deficit_error = 0.0;
  double distance = 0.0;
  double c_star = 0.0;
  double lambda_star = 0.0;
  double lambda_hat = 0.0;  // bracket centre
  double ratio = 0.0;
  double scale = 0.0;       // int |f|^p r^{-sigma}
  bool sentinel = false;    // distance below 1e-14 * scale: ratio = +inf
  int optimizer_evals = 0;
};

struct DistanceOptions {
  double lambda_rel_tol = 1e-8;
  int max_expansions = 2;
  bool force_generic_inner = false;
};

// Distance part of StabilityResult (distance, c_star, lambda_star, lambda_hat,
// scale, sentinel, optimizer_evals).
StabilityResult distance(const CknParams& params, const RadialProfile& f,
                         const ModelFamily& family, const QuadOptions& q = {},
                         const DistanceOptions& opt = {});

// int |f - c m_lambda|^p r^{-sigma} at a fixed probe.
double distance_at(const CknParams& params, const RadialProfile& f,
                   const ModelFamily& family, double c, double lambda,
                   const QuadOptions& q = {});

StabilityResult stability_ratio(const CknParams& params, const RadialProfile& f,
                                StabilityTheorem theorem, const QuadOptions& q = {},
                                const DistanceOptions& opt = {});

struct ScanGrid {
  std::vector<double> eps;
  std::vector<std::pair<double, double>> bumps;
  std::vector<double> lambda0;

  std::size_t size() const { return eps.size() * bumps.size() * lambda0.size(); }
  // Inserts midpoints on every axis (geometric for lambda0).
  ScanGrid refined() const;
};
ScanGrid default_scan_grid();

struct ScanRow {
  int sample_id = 0;
  double eps = 0.0, bump_lo = 0.0, bump_hi = 0.0, lambda0 = 0.0;
  StabilityResult result;
  std::string status;  // ok | sentinel | error: ... (suffix UNBALANCED in exploratory)
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double min_ratio = kInf;
  int min_sample = -1;
  bool unbalanced = false;
  std::vector<std::string> violations;
};

// Perturbed models m_{lambda0} (1 + eps bump) over the grid, in parallel.
// Strict mode throws RegimeError on violated hypotheses; exploratory mode
// proceeds and flags rows UNBALANCED.
ScanResult stability_scan(const CknParams& params, StabilityTheorem theorem,
                          const ScanGrid& grid, bool exploratory = false,
                          const QuadOptions& q = {}, int threads = 0);

RadialProfile scan_profile(const ModelFamily& family, double eps, double lo, double hi,
                           double lambda0);

std::string scan_csv(const ScanResult& scan);

// Balance condition N(b-a+3) = 2(3b-a+3) at p = 2 solved for a, and the
// exponents it ties together.
struct ExponentCheck {
  int N = 4;
  double a = 0.0, b = 0.0;
  double mu = 0.0;            // 2N - 2b - 4
  double sobolev_exp = 0.0;   // N mu / (N - 2)
  double proof_exp = 0.0;     // (a - b + 1) N / 2
  double statement_exp = 0.0; // a + b + 1
  double conjugated_exp = 0.0;// a + b + 1 + 2(N - 2b - 2)
  bool proof_matches_sobolev = false;
  bool statement_matches_sobolev = false;
  bool conjugated_matches_sobolev = false;
  std::string finding;
};
ExponentCheck theorem6_exponent_check(int N, double b);

struct PoincareParams {
  int N = 4;
  double p = 2.0;
  double mu = 0.0;
  double delta = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
};
std::vector<std::string> poincare_violations(const PoincareParams& pp);

struct PoincareResult {
  double numerator = 0.0;
  double denominator = 0.0;
  double c_star = 0.0;
  double ratio = 0.0;
  bool sentinel = false;
};
// Radial v only. Throws RegimeError on violated hypotheses.
PoincareResult poincare_ratio(const RadialProfile& v, const PoincareParams& pp,
                              const QuadOptions& q = {});

}  // namespace cknlab
