#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "osclab/ball_quadrature.hpp"
#include "osclab/function_catalog.hpp"
#include "osclab/weak_norm.hpp"

namespace osclab {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict verdict);

/// One checked inequality. passed is exactly (measured_margin <= tolerance);
/// the verdict is inconclusive instead when only the noise allowance could
/// decide the case and the estimate behind the margin is too noisy.
struct CaseResult {
  std::string inputs;
  double measured_margin = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  Verdict verdict = Verdict::fail;
  std::string note;
};

/// tolerance = bound + k * sigma (plus a rounding floor relative to scale).
/// Inconclusive when the bound alone does not settle the case and
/// sigma > rel_noise_limit * scale.
CaseResult make_case(std::string inputs, double margin, double bound, double sigma,
                     double scale, double k_sigma = 3.0, double rel_noise_limit = 1e-2);

struct ReportSummary {
  int passed = 0;
  int failed = 0;
  int inconclusive = 0;
  int total() const noexcept { return passed + failed + inconclusive; }
};

struct VerificationReport {
  std::string suite_name;
  std::vector<CaseResult> cases;
  /// Observed quantities that are reported but not asserted (ratios, fitted
  /// constants, ...).
  std::vector<std::pair<std::string, double>> observations;
  /// Set when the suite threw before finishing.
  std::string error;

  ReportSummary summary() const;
  /// No failed case and no error.
  bool passed() const;
  void add(CaseResult c) { cases.push_back(std::move(c)); }
  void observe(std::string key, double value) { observations.emplace_back(std::move(key), value); }
};

nlohmann::json to_json(const VerificationReport& report);

/// phi(x) = c_d (1 - |x|^2)^3 on the unit ball, unit mass; phi_t(x) = t^{-d} phi(x / t).
struct Mollifier {
  int dim = 1;
  double scale = 0.1;

  double normalization() const;
  double operator()(std::span<const double> x) const;
  double support_radius() const noexcept { return scale; }
  /// Mass of phi_t by quadrature (radial Gauss rule).
  double mass() const;
  void validate() const;
};

/// x -> (phi_t * f)(x), evaluated pointwise by Gauss quadrature between the
/// shifted breakpoints of f. d = 1 only.
TestFunction mollified(const TestFunction& f, const Mollifier& phi, int nodes = 8);

struct SuiteOptions {
  std::uint64_t seed = 0x5eed;
  unsigned threads = 0;
  /// Batch false-failure rate. Suites with many noisy cases raise their
  /// nominal k so that all n cases pass together with probability about
  /// 1 - family_alpha; 0 keeps the nominal k for every case.
  double family_alpha = 0.01;
};

/// |m_f(a,r) - c'_d r |grad f(a)|| <= (3d/(d+2)) A r^2 + 3 sigma on random
/// (a, r) with r <= r_ceiling. Also checks that the remainder constant agrees
/// with three times the normalized second moment of the ball.
VerificationReport check_local_expansion(const TestFunction& f, int n_samples, double r_ceiling,
                                         const QuadratureSpec& spec, SuiteOptions options = {});

/// m_{phi_t * f}(a, r) <= int phi_t(z) m_f(a - z, r) dz on random (a, r). d = 1.
VerificationReport check_mollification(const TestFunction& f, const Mollifier& phi,
                                       int n_samples, const QuadratureSpec& spec,
                                       SuiteOptions options = {});

/// m_f(a, r) <= K r M|grad f|(a) with K = 1, the L^1 Poincare constant
/// (diameter / 2) of convex sets. Reports the largest observed ratio and
/// its stability when the sample is doubled.
VerificationReport check_maximal_domination(const TestFunction& f, int n_samples,
                                            const QuadratureSpec& spec,
                                            SuiteOptions options = {});

/// kappa nu_1({m_f > kappa}) for the indicator of [-radius, radius] from the
/// closed form m_f = 2 lambda (1 - lambda). p must be 1.
VerificationReport check_bv_divergence(double radius, const std::vector<double>& kappa_grid,
                                       const Domain& domain, double p = 1.0);

/// m_f = 0 when |a| - r >= R_0 and m_f <= gamma r^{-d} everywhere.
VerificationReport check_tail_bounds(const TestFunction& f, int n_samples,
                                     const QuadratureSpec& spec, SuiteOptions options = {});

/// kappa^p nu_p = c_{d,p} |omega| |v|^p at every kappa on the unit box, and
/// the relative spread across kappa stays below 1%.
VerificationReport check_linear_distribution(const TestFunction& f, double p,
                                             const QuadratureSpec& spec,
                                             const CurveOptions& curve_options = {});

/// The extrapolated kappa -> 0 limit of kappa^p nu_p agrees with
/// c_{d,p} |grad f|_p^p within rel_tol, on the default domain and grid.
VerificationReport check_limit(const TestFunction& f, double p, double rel_tol,
                               const QuadratureSpec& spec, const CurveOptions& curve_options = {});

/// q -> m^{(q)} nondecreasing and m^{(q)} <= pair^{(q)} <= 2 m^{(q)}, each up
/// to 2 sigma, on random queries over the given functions.
VerificationReport check_q_sandwich(const std::vector<TestFunction>& functions, int n_queries,
                                    SuiteOptions options = {});

/// Quadrature used by the suites: split Gauss in d = 1, Monte-Carlo otherwise.
QuadratureSpec default_spec_for(int d, int mc_nodes, std::uint64_t seed);

struct RunConfig {
  std::vector<std::string> function_ids = default_catalog_ids();
  std::uint64_t seed = 0x5eed;
  unsigned threads = 0;
  /// Scales sample counts; 1 is the reference configuration.
  double effort = 1.0;
};

struct AggregateReport {
  std::vector<VerificationReport> suites;
  ReportSummary summary() const;
  bool passed() const;
};

nlohmann::json to_json(const AggregateReport& report);

/// Runs every suite that applies to the selected functions. Suite errors are
/// recorded in the report and never abort the batch.
AggregateReport run_all(const RunConfig& config);

}  // namespace osclab
