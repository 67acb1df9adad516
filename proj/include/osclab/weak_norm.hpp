#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osclab/ball_quadrature.hpp"
#include "osclab/function_catalog.hpp"
#include "osclab/oscillation.hpp"

namespace osclab {

/// c'_d = pi^{-1/2} Gamma((d+2)/2) / Gamma((d+3)/2): the average of
/// |e . (x - a)| / r over B_r(a) for a unit vector e.
double c_d_prime(int d);

/// c_{d,p} = (c'_d)^p / p, the limit constant of kappa^p nu_p({m_f > kappa}).
double c_dp(int d, double p);

/// 3d/(d+2): |m_f(a,r) - c'_d r |grad f(a)|| <= (3d/(d+2)) A r^2 when
/// grad f is A-Lipschitz.
double local_expansion_constant(int d);

/// Integral of r^{-(p+1)} over (r_lo, r_hi); r_hi may be +infinity.
double radial_weight(double r_lo, double r_hi, double p);

/// Axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  double volume() const;
  double diameter() const;
  void validate() const;

  static Box cube(int d, double lo, double hi);
};

/// omega x [r_min, r_max]: the truncated piece of the upper half-space on
/// which superlevel measures are computed.
struct Domain {
  Box omega;
  double r_max = 10.0;
  /// Below r_min smooth functions are resolved with the certified local
  /// expansion; for other functions the domain simply starts at r_min.
  double r_min = 1e-4;

  void validate() const;

  /// omega = [-R_0, R_0]^d for compactly supported gradients, [0,1]^d
  /// otherwise; r_max = 10 (diam omega + R_0); r_min = 1e-4 * feature scale.
  static Domain default_for(const TestFunction& f);
};

/// One component (lo, hi] of {r : m_f(a, r) > kappa}.
struct RadiusInterval {
  double lo = 0.0;
  double hi = 0.0;
  /// An endpoint sits where the quadrature noise exceeds the local change
  /// of m_f across a scan cell.
  bool ambiguous = false;
  /// lo was clipped at r_min (no certified expansion available).
  bool floor_truncated = false;
  /// Weight of the scan cells around ambiguous endpoints.
  double weight_uncertainty = 0.0;
};

struct ScanOptions {
  /// Ratio of consecutive scan radii.
  double scan_ratio = 1.02;
  /// Relative width at which bisection of a crossing stops.
  double bisect_rel_tol = 1e-6;
};

/// Tabulates r -> m_f(a, r) on a geometric grid over [r_min, r_max] for one
/// center and extracts superlevel sets for any kappa from it.
class SuperlevelScanner {
 public:
  SuperlevelScanner(const TestFunction& f, std::vector<double> a, const Domain& domain,
                    const QuadratureSpec& spec, ScanOptions options = {});

  std::vector<RadiusInterval> intervals(double kappa, double p = 2.0) const;

  std::span<const double> radii() const noexcept { return radii_; }
  std::span<const double> values() const noexcept { return values_; }
  const OscillationProfile& profile() const noexcept { return profile_; }

 private:
  double bisect(double lo, double hi, double kappa, bool lo_above) const;
  double floor_crossing(double kappa, bool& ambiguous, bool& truncated) const;

  OscillationProfile profile_;
  Domain domain_;
  ScanOptions options_;
  std::vector<double> radii_;
  std::vector<double> values_;
  std::vector<double> errors_;
  bool smooth_ = false;
  double grad_norm_ = 0.0;
  double lipschitz_ = 0.0;
};

std::vector<RadiusInterval> superlevel_radius_set(const TestFunction& f,
                                                  std::span<const double> a, double kappa,
                                                  const Domain& domain,
                                                  const QuadratureSpec& spec,
                                                  ScanOptions options = {});

struct CurveOptions {
  /// Centers a drawn uniformly from omega. With stratification the count is
  /// rounded up to k^d and one center is drawn per cell of a k^d grid.
  int a_samples = 4096;
  bool stratified = true;
  unsigned threads = 0;
  ScanOptions scan;
};

/// Centers used for the a-integral, determined by (spec.seed, count, omega).
std::vector<std::vector<double>> sample_centers(const Box& omega, const CurveOptions& options,
                                                std::uint64_t seed);

/// nu_p({m_f > kappa} cap omega x (0, r_max]) by Monte-Carlo over centers.
/// The standard error is the spread over centers.
EstimatedValue superlevel_measure(const TestFunction& f, double p, double kappa,
                                  const Domain& domain, const QuadratureSpec& spec,
                                  const CurveOptions& options = {});

struct DistributionCurve {
  std::string function_id;
  int dim = 1;
  double p = 2.0;
  Domain domain;
  std::uint64_t seed = 0;
  int a_samples = 0;
  std::vector<double> kappa;
  std::vector<EstimatedValue> nu;
  /// kappa^p * nu
  std::vector<double> scaled;
  std::vector<double> scaled_std_error;
  /// kappa^p times a certified bound on the measure above r_max.
  std::vector<double> tail_bound;
  /// kappa^p |omega| times the mean weight of scan cells holding an
  /// ambiguous crossing. Quadrature noise is already part of
  /// scaled_std_error because every center has its own node layouts; this
  /// column says how much of the measure sits on noise-dominated crossings.
  std::vector<double> ambiguity;
};

/// Decreasing geometric grid from kappa_max down to kappa_min.
std::vector<double> geometric_kappa_grid(double kappa_max, double kappa_min, double ratio);

/// [1e-4, 1] * c'_d * r_typ * sup|grad f|, ratio 10^{1/4}.
std::vector<double> default_kappa_grid(const TestFunction& f, const Domain& domain);

/// Superlevel measures for every kappa of the grid from one shared set of
/// centers and node layouts, so the curve is monotone up to bisection error.
DistributionCurve distribution_curve(const TestFunction& f, double p,
                                     std::span<const double> kappa_grid, const Domain& domain,
                                     const QuadratureSpec& spec, const CurveOptions& options = {});

/// kappa^p times the certified bound on nu_p({m_f > kappa} cap omega x (r_max, inf)).
double tail_bound(const TestFunction& f, double p, double kappa, const Domain& domain);

struct SupEstimate {
  double value = 0.0;        ///< max scaled value plus its standard error
  double max_scaled = 0.0;
  double argmax_kappa = 0.0;
};

SupEstimate weak_sup(const DistributionCurve& curve);

struct LimitEstimate {
  bool converged = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  double uncertainty = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  int points_used = 0;
  std::string diagnostic;
};

/// Fits scaled(kappa) = L + c kappa^alpha, alpha in [0.5, 1.5], over the
/// smallest decade of the grid. Returns converged = false with a diagnostic
/// instead of a value when the data or the fit are not good enough.
LimitEstimate limit_extrapolate(const DistributionCurve& curve);

/// c_{d,p} times the integral of |grad f|^p over omega, when known.
std::optional<double> reference_limit(const TestFunction& f, double p, const Domain& domain);

inline constexpr const char* kCurveCsvSchema = "osclab-curve/1";

/// Header "# schema=osclab-curve/1" then kappa,nu,nu_stderr,kappa_p_nu,tail_bound.
void write_curve_csv(std::ostream& os, const DistributionCurve& curve);

}  // namespace osclab
