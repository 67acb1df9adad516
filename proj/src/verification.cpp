#include "osclab/verification.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "osclab/errors.hpp"
#include "osclab/line_rules.hpp"
#include "osclab/oscillation.hpp"
#include "osclab/parallel.hpp"
#include "osclab/rng.hpp"

namespace osclab {
namespace {

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string point_str(std::span<const double> a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ",";
    s += fmt("%.6g", a[i]);
  }
  return s + ")";
}

// Half-width of the cube that centers are drawn from.
double sampling_half_width(const TestFunction& f, double factor) {
  return f.support_radius() ? factor * *f.support_radius() : 1.0;
}

std::vector<double> random_point(CounterRng& rng, int d, double half) {
  std::vector<double> a(static_cast<std::size_t>(d));
  for (double& x : a) x = -half + 2.0 * half * rng.uniform();
  return a;
}

double log_uniform(CounterRng& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, rng.uniform());
}

QuadratureSpec case_spec(const QuadratureSpec& spec, std::uint64_t seed, std::size_t i) {
  QuadratureSpec s = spec;
  s.seed = derive_seed(derive_seed(seed, i), 1);
  return s;
}

VerificationReport collect(std::string name, std::vector<CaseResult> cases) {
  VerificationReport report;
  report.suite_name = std::move(name);
  report.cases = std::move(cases);
  return report;
}

// Noise multiplier for a batch of n cases: the nominal k, raised so that the
// chance of any false failure across the batch stays near alpha.
double batch_k(double nominal, std::size_t n, double alpha) {
  if (!(alpha > 0.0) || n == 0) return nominal;
  const boost::math::normal_distribution<double> unit;
  const double z = boost::math::quantile(boost::math::complement(unit, alpha / (2.0 * n)));
  return std::max(nominal, z);
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "fail";
}

CaseResult make_case(std::string inputs, double margin, double bound, double sigma, double scale,
                     double k_sigma, double rel_noise_limit) {
  CaseResult c;
  c.inputs = std::move(inputs);
  c.measured_margin = margin;
  c.tolerance = bound + k_sigma * sigma + 1e-11 * std::abs(scale);
  c.passed = margin <= c.tolerance;
  c.verdict = c.passed ? Verdict::pass : Verdict::fail;
  if (std::isnan(margin)) {
    c.passed = false;
    c.verdict = Verdict::fail;
  } else if (margin > bound && sigma > rel_noise_limit * std::abs(scale)) {
    c.verdict = Verdict::inconclusive;
    c.note = "estimate error exceeds the noise limit";
  }
  return c;
}

ReportSummary VerificationReport::summary() const {
  ReportSummary s;
  for (const CaseResult& c : cases) {
    switch (c.verdict) {
      case Verdict::pass: ++s.passed; break;
      case Verdict::fail: ++s.failed; break;
      case Verdict::inconclusive: ++s.inconclusive; break;
    }
  }
  return s;
}

bool VerificationReport::passed() const { return error.empty() && summary().failed == 0; }

nlohmann::json to_json(const VerificationReport& report) {
  const ReportSummary s = report.summary();
  nlohmann::json j;
  j["suite"] = report.suite_name;
  j["passed"] = report.passed();
  j["summary"] = {{"passed", s.passed},
                  {"failed", s.failed},
                  {"inconclusive", s.inconclusive},
                  {"total", s.total()}};
  if (!report.error.empty()) j["error"] = report.error;
  nlohmann::json obs = nlohmann::json::object();
  for (const auto& [key, value] : report.observations) obs[key] = value;
  j["observations"] = obs;
  nlohmann::json cases = nlohmann::json::array();
  for (const CaseResult& c : report.cases) {
    nlohmann::json jc = {{"inputs", c.inputs},
                         {"measured_margin", c.measured_margin},
                         {"tolerance", c.tolerance},
                         {"passed", c.passed},
                         {"verdict", to_string(c.verdict)}};
    if (!c.note.empty()) jc["note"] = c.note;
    cases.push_back(std::move(jc));
  }
  j["cases"] = std::move(cases);
  return j;
}

ReportSummary AggregateReport::summary() const {
  ReportSummary total;
  for (const VerificationReport& r : suites) {
    const ReportSummary s = r.summary();
    total.passed += s.passed;
    total.failed += s.failed;
    total.inconclusive += s.inconclusive;
  }
  return total;
}

bool AggregateReport::passed() const {
  return std::all_of(suites.begin(), suites.end(),
                     [](const VerificationReport& r) { return r.passed(); });
}

nlohmann::json to_json(const AggregateReport& report) {
  const ReportSummary s = report.summary();
  int failed_suites = 0;
  nlohmann::json suites = nlohmann::json::array();
  for (const VerificationReport& r : report.suites) {
    if (!r.passed()) ++failed_suites;
    suites.push_back(to_json(r));
  }
  return {{"passed", report.passed()},
          {"summary",
           {{"suites", report.suites.size()},
            {"failed_suites", failed_suites},
            {"passed", s.passed},
            {"failed", s.failed},
            {"inconclusive", s.inconclusive},
            {"total", s.total()}}},
          {"suites", std::move(suites)}};
}

// ---- mollifier ------------------------------------------------------------

double Mollifier::normalization() const {
  // |S^{d-1}| * int_0^1 rho^{d-1} (1 - rho^2)^3 d rho = |S^{d-1}| B(d/2, 4) / 2
  const double half_d = 0.5 * dim;
  const double sphere = 2.0 * std::pow(std::numbers::pi, half_d) / std::tgamma(half_d);
  const double beta = std::tgamma(half_d) * std::tgamma(4.0) / std::tgamma(half_d + 4.0);
  return 1.0 / (sphere * 0.5 * beta);
}

double Mollifier::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (double v : x) s += v * v;
  s /= scale * scale;
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s;
  return normalization() * u * u * u / std::pow(scale, dim);
}

double Mollifier::mass() const {
  const double half_d = 0.5 * dim;
  const double sphere = 2.0 * std::pow(std::numbers::pi, half_d) / std::tgamma(half_d);
  const double radial = integrate_piecewise(
      [&](double rho) {
        std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
        x[0] = rho;
        return std::pow(rho, dim - 1) * (*this)(x);
      },
      0.0, scale, {}, 16);
  return sphere * radial;
}

void Mollifier::validate() const {
  if (dim < 1) throw std::invalid_argument("mollifier: dimension must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("mollifier: scale must be positive");
}

namespace {

class MollifiedModel final : public FunctionModel {
 public:
  MollifiedModel(TestFunction f, Mollifier phi, int nodes)
      : f_(std::move(f)), phi_(phi), nodes_(nodes) {}

  double value(std::span<const double> x) const override {
    const double t = phi_.scale;
    std::vector<double> cuts;
    for (double b : f_.breakpoints()) cuts.push_back(x[0] - b);
    std::sort(cuts.begin(), cuts.end());
    return integrate_piecewise(
        [&](double z) {
          const double y = x[0] - z;
          return phi_(std::span<const double>(&z, 1)) * f_.eval(std::span<const double>(&y, 1));
        },
        -t, t, cuts, nodes_);
  }
  bool has_gradient() const override { return false; }
  void gradient(std::span<const double>, std::span<double>) const override {
    throw UnsupportedFunction("mollified function carries no gradient");
  }

 private:
  TestFunction f_;
  Mollifier phi_;
  int nodes_;
};

}  // namespace

TestFunction mollified(const TestFunction& f, const Mollifier& phi, int nodes) {
  phi.validate();
  if (f.dim() != 1 || phi.dim != 1)
    throw UnsupportedFunction("mollification is implemented for d = 1 only");
  FunctionMetadata meta;
  meta.dim = 1;
  meta.id = "mollified(" + f.id() + fmt(",t=%g)", phi.scale);
  meta.tag = SmoothnessTag::custom;
  meta.far_field = f.metadata().far_field;
  if (f.support_radius()) meta.support_radius = *f.support_radius() + phi.scale;
  for (double b : f.breakpoints()) {
    meta.breakpoints.push_back(b - phi.scale);
    meta.breakpoints.push_back(b + phi.scale);
  }
  std::sort(meta.breakpoints.begin(), meta.breakpoints.end());
  meta.breakpoints.erase(std::unique(meta.breakpoints.begin(), meta.breakpoints.end()),
                         meta.breakpoints.end());
  return TestFunction(std::make_shared<MollifiedModel>(f, phi, nodes), std::move(meta));
}

QuadratureSpec default_spec_for(int d, int mc_nodes, std::uint64_t seed) {
  return d == 1 ? QuadratureSpec::gauss(8) : QuadratureSpec::monte_carlo(mc_nodes, seed);
}

// ---- local expansion -------------------------------------------------------

VerificationReport check_local_expansion(const TestFunction& f, int n_samples, double r_ceiling,
                                         const QuadratureSpec& spec, SuiteOptions options) {
  if (!f.differentiable() || !f.grad_lipschitz())
    throw UnsupportedFunction("local expansion: '" + f.id() + "' needs a gradient Lipschitz bound");
  if (n_samples < 1 || !(r_ceiling > 0.0))
    throw std::invalid_argument("local expansion: need n_samples >= 1 and r_ceiling > 0");
  const int d = f.dim();
  spec.validate(d);
  const double slope_const = c_d_prime(d);
  const double remainder_const = local_expansion_constant(d);
  const double lip = *f.grad_lipschitz();
  const double half = sampling_half_width(f, 1.2);

  std::vector<CaseResult> cases(static_cast<std::size_t>(n_samples));
  const double k_sigma = batch_k(3.0, cases.size(), options.family_alpha);
  parallel_for(cases.size(), options.threads, [&](std::size_t i) {
    CounterRng rng(derive_seed(derive_seed(options.seed, i), 0));
    const std::vector<double> a = random_point(rng, d, half);
    const double r = r_ceiling * rng.uniform_open();
    const EstimatedValue m = mean_oscillation(f, {a, r}, case_spec(spec, options.seed, i));
    const double linear = slope_const * r * f.grad_norm(a);
    const double bound = remainder_const * lip * r * r;
    cases[i] = make_case(f.id() + " a=" + point_str(a) + fmt(" r=%.6g", r),
                         std::abs(m.value - linear), bound, m.std_error,
                         std::max(linear, m.value) + bound, k_sigma, spec.target_rel_error);
  });

  // The remainder constant is 3 times the normalized second moment of the
  // ball: avg |x - a|^2 over B_r(a) = d r^2 / (d + 2).
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  const EstimatedValue moment = ball_average(
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
      },
      {origin, r_ceiling}, case_spec(spec, options.seed, cases.size()));
  const double r2 = r_ceiling * r_ceiling;
  cases.push_back(make_case(fmt("remainder constant d=%d", d),
                            std::abs(remainder_const - 3.0 * moment.value / r2), 0.0,
                            3.0 * moment.std_error / r2, remainder_const, 3.0,
                            spec.target_rel_error));

  VerificationReport report = collect("local_expansion[" + f.id() + "]", std::move(cases));
  report.observe("slope_constant", slope_const);
  report.observe("remainder_constant", remainder_const);
  report.observe("gradient_lipschitz", lip);
  return report;
}

// ---- mollification ---------------------------------------------------------

VerificationReport check_mollification(const TestFunction& f, const Mollifier& phi,
                                       int n_samples, const QuadratureSpec& spec,
                                       SuiteOptions options) {
  if (f.dim() != 1) throw UnsupportedFunction("mollification check: d = 1 only");
  if (spec.method != QuadratureMethod::gauss_1d)
    throw std::invalid_argument("mollification check: needs the split Gauss rule");
  if (n_samples < 1) throw std::invalid_argument("mollification check: n_samples >= 1");
  phi.validate();
  const TestFunction smooth = mollified(f, phi);
  const double t = phi.scale;
  const double length = f.support_radius().value_or(1.0);
  const double half = f.support_radius() ? *f.support_radius() + t + 0.5 : 1.0;

  // int phi_t(z) m_f(a - z, r) dz with n Gauss points per smooth piece.
  auto smoothed_oscillation = [&](double a, double r, int n) {
    std::vector<double> cuts;
    for (double b : f.breakpoints()) {
      cuts.push_back(a - b - r);
      cuts.push_back(a - b + r);
    }
    std::sort(cuts.begin(), cuts.end());
    return integrate_piecewise(
        [&](double z) {
          const std::vector<double> c{a - z};
          return phi(std::span<const double>(&z, 1)) * mean_oscillation(f, {c, r}, spec).value;
        },
        -t, t, cuts, n);
  };

  std::vector<CaseResult> cases(static_cast<std::size_t>(n_samples));
  parallel_for(cases.size(), options.threads, [&](std::size_t i) {
    CounterRng rng(derive_seed(derive_seed(options.seed, i), 0));
    const double a = -half + 2.0 * half * rng.uniform();
    const double r = log_uniform(rng, 0.02 * length, length);
    const double lhs = mean_oscillation(smooth, {{a}, r}, spec).value;
    const double coarse = smoothed_oscillation(a, r, 16);
    const double rhs = smoothed_oscillation(a, r, 32);
    cases[i] = make_case(f.id() + fmt(" t=%g a=%.6g r=%.6g", t, a, r), lhs - rhs, 0.0,
                         std::abs(rhs - coarse), lhs + rhs, 3.0, 1e-6);
  });
  VerificationReport report =
      collect("mollification[" + f.id() + fmt(",t=%g]", t), std::move(cases));
  report.observe("mollifier_mass", phi.mass());
  return report;
}

// ---- maximal domination ----------------------------------------------------

constexpr int kMinStabilitySamples = 100;

VerificationReport check_maximal_domination(const TestFunction& f, int n_samples,
                                            const QuadratureSpec& spec, SuiteOptions options) {
  if (!f.differentiable())
    throw UnsupportedFunction("maximal domination: '" + f.id() + "' has no gradient");
  if (n_samples < 1) throw std::invalid_argument("maximal domination: n_samples >= 1");
  const int d = f.dim();
  spec.validate(d);
  const double length = f.support_radius().value_or(1.0);
  const double half = sampling_half_width(f, 1.5);
  const RadiusGrid grid = RadiusGrid::default_for(f);
  // Convex sets satisfy avg |f - f_B| <= (diam / 2) avg |grad f|, so the
  // ratio m_f / (r M|grad f|) is at most 1.
  constexpr double kPoincare = 1.0;

  const std::size_t total = 2 * static_cast<std::size_t>(n_samples);
  std::vector<CaseResult> cases(total);
  std::vector<double> ratios(total, 0.0);
  const double k_sigma = batch_k(3.0, total, options.family_alpha);
  parallel_for(total, options.threads, [&](std::size_t i) {
    CounterRng rng(derive_seed(derive_seed(options.seed, i), 0));
    const std::vector<double> a = random_point(rng, d, half);
    const double r = log_uniform(rng, 1e-2 * length, 10.0 * length);
    const QuadratureSpec s = case_spec(spec, options.seed, i);
    const OscillationProfile profile(f, a, s);
    const EstimatedValue m = profile.mean_oscillation(r);
    const EstimatedValue local = profile.gradient_average(r);
    const double maximal = std::max(maximal_gradient(f, a, grid, s), local.value);
    const std::string inputs = f.id() + " a=" + point_str(a) + fmt(" r=%.6g", r);
    if (maximal == 0.0) {
      cases[i] = make_case(inputs + " (zero gradient)", m.value, 0.0, m.std_error, m.value,
                           k_sigma, 1.0);
      return;
    }
    ratios[i] = m.value / (r * maximal);
    cases[i] = make_case(inputs, m.value - kPoincare * r * maximal, 0.0,
                         m.std_error + r * local.std_error, m.value + r * maximal, k_sigma, 1.0);
  });

  const double max_half = *std::max_element(ratios.begin(), ratios.begin() + n_samples);
  const double max_all = *std::max_element(ratios.begin(), ratios.end());
  // A sample maximum over a handful of points is not expected to be stable.
  if (max_half > 0.0 && n_samples >= kMinStabilitySamples) {
    cases.push_back(make_case(fmt("max ratio stability n=%d vs %d", n_samples, 2 * n_samples),
                              std::abs(max_all - max_half), 0.1 * max_half, 0.0, max_half));
  }
  VerificationReport report = collect("maximal_domination[" + f.id() + "]", std::move(cases));
  report.observe("max_ratio", max_half);
  report.observe("max_ratio_doubled", max_all);
  report.observe("regression_bound", kPoincare);
  return report;
}

// ---- p = 1 divergence for an interval indicator ----------------------------

namespace {

// Overlap fraction of (a - r, a + r) with [-R, R].
double overlap_fraction(double a, double r, double R) {
  const double lo = std::max(a - r, -R);
  const double hi = std::min(a + r, R);
  return std::max(0.0, hi - lo) / (2.0 * r);
}

double indicator_oscillation(double a, double r, double R) {
  const double lambda = overlap_fraction(a, r, R);
  return 2.0 * lambda * (1.0 - lambda);
}

// r -> m is unimodal with its peak at r = max(2R, |a| + R).
double indicator_weight(double a, double kappa, double R, double r_min, double r_max,
                        double p) {
  const double peak = std::max(2.0 * R, std::abs(a) + R);
  if (!(indicator_oscillation(a, peak, R) > kappa)) return 0.0;
  auto solve = [&](double below, double above, bool rising) {
    // m crosses kappa between `below` and `above`.
    for (int it = 0; it < 200 && above - below > 1e-15 * above; ++it) {
      const double mid = 0.5 * (below + above);
      const bool over = indicator_oscillation(a, mid, R) > kappa;
      if (over == rising)
        above = mid;
      else
        below = mid;
    }
    return 0.5 * (below + above);
  };
  double far = 2.0 * peak;
  while (indicator_oscillation(a, far, R) > kappa) far *= 2.0;
  const double lo = solve(0.0, peak, true);
  const double hi = solve(peak, far, false);
  const double from = std::max(lo, r_min);
  const double to = std::min(hi, r_max);
  return to > from ? radial_weight(from, to, p) : 0.0;
}

// nu_p({m > kappa}) over omega x [r_min, r_max]: composite Gauss in a,
// graded geometrically towards the jump points +-R.
double indicator_measure(double kappa, double R, const Domain& domain, double r_min,
                         double p) {
  const double lo = domain.omega.lo[0];
  const double hi = domain.omega.hi[0];
  std::vector<double> cuts;
  for (double edge : {-R, R}) {
    cuts.push_back(edge);
    for (double step = 0.1 * r_min; step < hi - lo; step *= 1.5) {
      cuts.push_back(edge - step);
      cuts.push_back(edge + step);
    }
  }
  for (int k = 1; k < 64; ++k) cuts.push_back(lo + (hi - lo) * k / 64.0);
  std::sort(cuts.begin(), cuts.end());
  return integrate_piecewise(
      [&](double a) { return indicator_weight(a, kappa, R, r_min, domain.r_max, p); }, lo, hi,
      cuts, 8);
}

}  // namespace

VerificationReport check_bv_divergence(double radius, const std::vector<double>& kappa_grid,
                                       const Domain& domain, double p) {
  if (p != 1.0)
    throw std::invalid_argument("bv divergence: defined for p = 1 only (the indicator is not in W^{1,p})");
  if (!(radius > 0.0)) throw std::invalid_argument("bv divergence: radius must be positive");
  domain.validate();
  if (domain.omega.dim() != 1) throw UnsupportedFunction("bv divergence: d = 1 only");
  if (kappa_grid.size() < 2) throw std::invalid_argument("bv divergence: need >= 2 kappa values");
  for (double k : kappa_grid)
    if (!(k > 0.0 && k < 0.5)) throw std::invalid_argument("bv divergence: kappa in (0, 1/2)");

  VerificationReport report;
  report.suite_name = fmt("bv_divergence[indicator:d=1:r=%g]", radius);
  const auto [kmin_it, kmax_it] = std::minmax_element(kappa_grid.begin(), kappa_grid.end());
  const double kmin = *kmin_it;
  const double kmax = *kmax_it;

  std::vector<double> scaled(kappa_grid.size());
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    scaled[i] = kappa_grid[i] * indicator_measure(kappa_grid[i], radius, domain, domain.r_min, p);
    report.observe(fmt("kappa_nu1(kappa=%.4g)", kappa_grid[i]), scaled[i]);
  }
  const double s_small = scaled[kmin_it - kappa_grid.begin()];
  const double s_large = scaled[kmax_it - kappa_grid.begin()];

  // Growth of kappa nu_1 towards small kappa by at least a factor 2.
  CaseResult growth = make_case(fmt("kappa nu_1 at %.3g >= 2 x value at %.3g", kmin, kmax),
                                2.0 * s_large - s_small, 0.0, 0.0, s_large);
  growth.note = fmt("ratio %.6g", s_large > 0.0 ? s_small / s_large : 0.0);
  if (kmax / kmin < 100.0) {
    growth.verdict = Verdict::inconclusive;
    growth.note += "; kappa grid spans less than two decades";
  }
  report.add(growth);

  // At fixed kappa, every jump point strictly inside omega adds about
  // 2 sqrt(1 - 2 kappa) ln(10) to nu_1 per decade of r_min, so nu_1 of the
  // untruncated half-space is infinite. Assert at least half that growth.
  int edges = 0;
  for (double e : {-radius, radius})
    if (e > domain.omega.lo[0] && e < domain.omega.hi[0]) ++edges;
  const double per_decade = 2.0 * edges * std::sqrt(1.0 - 2.0 * kmax) * std::log(10.0);
  double previous = indicator_measure(kmax, radius, domain, domain.r_min, p);
  for (int decade = 1; decade <= 2; ++decade) {
    const double r_min = domain.r_min * std::pow(10.0, -decade);
    const double nu = indicator_measure(kmax, radius, domain, r_min, p);
    report.add(make_case(fmt("nu_1 growth kappa=%.3g r_min=%.3g", kmax, r_min),
                         0.5 * per_decade - (nu - previous), 0.0, 0.0, nu));
    report.observe(fmt("nu1(kappa=%.3g,r_min=%.3g)", kmax, r_min), nu);
    previous = nu;
  }
  report.observe("predicted_growth_per_decade", per_decade);
  return report;
}

// ---- tail bounds -----------------------------------------------------------

VerificationReport check_tail_bounds(const TestFunction& f, int n_samples,
                                     const QuadratureSpec& spec, SuiteOptions options) {
  if (!f.support_radius() || !f.metadata().far_field_l1)
    throw UnsupportedFunction("tail bounds: '" + f.id() + "' has no support radius");
  if (n_samples < 1) throw std::invalid_argument("tail bounds: n_samples >= 1");
  const int d = f.dim();
  spec.validate(d);
  const double R0 = *f.support_radius();
  const double gamma = 2.0 * *f.metadata().far_field_l1 / unit_ball_volume(d);

  struct Query {
    std::vector<double> a;
    double r;
    bool outside;
  };
  std::vector<Query> queries;
  if (d == 1) {
    queries.push_back({{5.0 * R0}, R0, true});
    queries.push_back({{0.0}, 100.0 * R0, false});
  }
  for (int i = 0; i < n_samples; ++i) {
    CounterRng rng(derive_seed(derive_seed(options.seed, static_cast<std::size_t>(i)), 0));
    if (i % 2 == 0) {
      // Ball disjoint from the support: |a| - r >= R_0.
      const double r = log_uniform(rng, 1e-2 * R0, 10.0 * R0);
      std::vector<double> a(static_cast<std::size_t>(d));
      double norm = 0.0;
      for (double& x : a) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      const double dist = R0 + r + rng.uniform() * R0;
      for (double& x : a) x *= dist / norm;
      queries.push_back({a, r, true});
    } else {
      queries.push_back({random_point(rng, d, 2.0 * R0), log_uniform(rng, 1e-2 * R0, 1e2 * R0),
                         false});
    }
  }

  std::vector<CaseResult> cases(queries.size());
  const double k_sigma = batch_k(3.0, cases.size(), options.family_alpha);
  parallel_for(queries.size(), options.threads, [&](std::size_t i) {
    const Query& q = queries[i];
    const EstimatedValue m = mean_oscillation(f, {q.a, q.r}, case_spec(spec, options.seed, i));
    const double tail = gamma * std::pow(q.r, -d);
    const std::string inputs = f.id() + " a=" + point_str(q.a) + fmt(" r=%.6g", q.r);
    if (q.outside)
      cases[i] = make_case(inputs + " (disjoint)", m.value, 0.0, m.std_error, tail, k_sigma, 1.0);
    else
      cases[i] = make_case(inputs + " (tail)", m.value - tail, 0.0, m.std_error, tail, k_sigma, 1.0);
  });
  VerificationReport report = collect("tail_bounds[" + f.id() + "]", std::move(cases));
  report.observe("gamma", gamma);
  return report;
}

// ---- linear distribution ---------------------------------------------------

VerificationReport check_linear_distribution(const TestFunction& f, double p,
                                             const QuadratureSpec& spec,
                                             const CurveOptions& curve_options) {
  if (f.smoothness() != SmoothnessTag::linear || !f.metadata().grad_sup)
    throw UnsupportedFunction("linear distribution: '" + f.id() + "' is not linear");
  const int d = f.dim();
  Domain domain;
  domain.omega = Box::cube(d, 0.0, 1.0);
  domain.r_max = 10.0 * domain.omega.diameter();
  domain.r_min = 1e-5 * domain.omega.diameter();
  const std::vector<double> grid = default_kappa_grid(f, domain);
  const DistributionCurve curve = distribution_curve(f, p, grid, domain, spec, curve_options);
  const double slope = *f.metadata().grad_sup;
  const double expected = c_dp(d, p) * domain.omega.volume() * std::pow(slope, p);

  VerificationReport report;
  report.suite_name = "linear_distribution[" + f.id() + fmt(",p=%g]", p);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.kappa.size(); ++i) {
    const double v = curve.scaled[i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    report.add(make_case(fmt("kappa=%.6g", curve.kappa[i]), std::abs(v - expected),
                         0.01 * expected + curve.tail_bound[i], curve.scaled_std_error[i],
                         std::max(expected, v), 3.0, 1e-2));
  }
  const double mean = sum / static_cast<double>(curve.kappa.size());
  const double spread = mean > 0.0 ? (hi - lo) / mean : 0.0;
  report.add(make_case("relative spread across kappa", spread, 0.01, 0.0, 1.0));
  report.observe("expected", expected);
  report.observe("mean_scaled", mean);
  report.observe("relative_spread", spread);
  return report;
}

// ---- extrapolated limit ----------------------------------------------------

VerificationReport check_limit(const TestFunction& f, double p, double rel_tol,
                               const QuadratureSpec& spec, const CurveOptions& curve_options) {
  const Domain domain = Domain::default_for(f);
  const std::optional<double> reference = reference_limit(f, p, domain);
  if (!reference) throw UnsupportedFunction("limit: no reference value for '" + f.id() + "'");
  const std::vector<double> grid = default_kappa_grid(f, domain);
  const DistributionCurve curve = distribution_curve(f, p, grid, domain, spec, curve_options);
  const LimitEstimate limit = limit_extrapolate(curve);
  const SupEstimate sup = weak_sup(curve);

  VerificationReport report;
  report.suite_name = "limit[" + f.id() + fmt(",p=%g]", p);
  CaseResult c = make_case(fmt("extrapolated limit vs c_dp |grad f|_p^p = %.6g", *reference),
                           std::abs(limit.value - *reference), rel_tol * *reference, 0.0,
                           *reference);
  if (!limit.converged) {
    c.passed = false;
    c.verdict = Verdict::fail;
    c.note = limit.diagnostic;
  }
  report.add(c);
  report.add(make_case("sup >= extrapolated limit", limit.value - sup.value, 0.0,
                       limit.uncertainty, *reference));
  report.observe("reference", *reference);
  report.observe("limit", limit.value);
  report.observe("limit_uncertainty", limit.uncertainty);
  report.observe("alpha", limit.alpha);
  report.observe("sup", sup.value);
  return report;
}

// ---- q-monotonicity and the pair sandwich ----------------------------------

VerificationReport check_q_sandwich(const std::vector<TestFunction>& functions, int n_queries,
                                    SuiteOptions options) {
  if (n_queries < 0) throw std::invalid_argument("q sandwich: n_queries >= 0");
  VerificationReport report;
  report.suite_name = "q_sandwich";
  if (functions.empty() || n_queries == 0) return report;
  static constexpr double kExponents[] = {1.0, 1.5, 2.0, 3.0};
  constexpr std::size_t kChecks = 3 + 2 * std::size(kExponents);

  std::vector<CaseResult> cases(static_cast<std::size_t>(n_queries) * kChecks);
  const double k_sigma = batch_k(2.0, cases.size(), options.family_alpha);
  parallel_for(static_cast<std::size_t>(n_queries), options.threads, [&](std::size_t i) {
    const TestFunction& f = functions[i % functions.size()];
    const int d = f.dim();
    CounterRng rng(derive_seed(derive_seed(options.seed, i), 0));
    const double length = f.support_radius().value_or(1.0);
    const std::vector<double> a = random_point(rng, d, sampling_half_width(f, 1.2));
    const double r = log_uniform(rng, 0.05 * length, 2.0 * length);
    const QuadratureSpec spec =
        default_spec_for(d, 8192, derive_seed(derive_seed(options.seed, i), 1));
    const OscillationProfile profile(f, a, spec);
    const std::string where = f.id() + " a=" + point_str(a) + fmt(" r=%.6g", r);
    constexpr double kNoise = 0.05;

    EstimatedValue m[std::size(kExponents)];
    for (std::size_t k = 0; k < std::size(kExponents); ++k)
      m[k] = profile.q_oscillation(r, kExponents[k]);
    std::size_t slot = i * kChecks;
    for (std::size_t k = 0; k + 1 < std::size(kExponents); ++k)
      cases[slot++] = make_case(where + fmt(" q=%g<=%g", kExponents[k], kExponents[k + 1]),
                                m[k].value - m[k + 1].value, 0.0,
                                m[k].std_error + m[k + 1].std_error, m[k + 1].value, k_sigma, kNoise);
    for (std::size_t k = 0; k < std::size(kExponents); ++k) {
      const EstimatedValue pair = profile.pair_oscillation(r, kExponents[k]);
      const double sigma = m[k].std_error + pair.std_error;
      cases[slot++] = make_case(where + fmt(" q=%g m<=pair", kExponents[k]),
                                m[k].value - pair.value, 0.0, sigma, pair.value, k_sigma, kNoise);
      cases[slot++] = make_case(where + fmt(" q=%g pair<=2m", kExponents[k]),
                                pair.value - 2.0 * m[k].value, 0.0, pair.std_error + 2.0 * m[k].std_error,
                                pair.value, k_sigma, kNoise);
    }
  });
  report.cases = std::move(cases);
  return report;
}

// ---- batch -----------------------------------------------------------------

namespace {

int scaled_count(int base, double effort) {
  return std::max(1, static_cast<int>(std::lround(base * effort)));
}

template <typename Fn>
void run_suite(AggregateReport& out, const std::string& name, Fn&& fn) {
  try {
    out.suites.push_back(fn());
  } catch (const std::exception& e) {
    VerificationReport failed;
    failed.suite_name = name;
    failed.error = e.what();
    out.suites.push_back(std::move(failed));
  }
}

}  // namespace

AggregateReport run_all(const RunConfig& config) {
  AggregateReport out;
  const SuiteOptions options{config.seed, config.threads};
  std::vector<TestFunction> functions;
  for (const std::string& id : config.function_ids) {
    try {
      functions.push_back(parse_function_id(id));
    } catch (const std::exception& e) {
      VerificationReport failed;
      failed.suite_name = "catalog[" + id + "]";
      failed.error = e.what();
      out.suites.push_back(std::move(failed));
    }
  }

  for (const TestFunction& f : functions) {
    const int d = f.dim();
    if (f.differentiable() && f.grad_lipschitz()) {
      run_suite(out, "local_expansion[" + f.id() + "]", [&] {
        return check_local_expansion(f, scaled_count(200, config.effort), 0.05,
                                     default_spec_for(d, 1 << 16, config.seed), options);
      });
    }
    if (d == 1) {
      for (double t : {0.05, 0.2}) {
        run_suite(out, "mollification[" + f.id() + "]", [&] {
          return check_mollification(f, Mollifier{1, t}, scaled_count(20, config.effort),
                                     QuadratureSpec::gauss(8), options);
        });
      }
    }
    if (f.differentiable()) {
      run_suite(out, "maximal_domination[" + f.id() + "]", [&] {
        return check_maximal_domination(f, scaled_count(50, config.effort),
                                        default_spec_for(d, 2048, config.seed), options);
      });
    }
    if (f.support_radius()) {
      run_suite(out, "tail_bounds[" + f.id() + "]", [&] {
        return check_tail_bounds(f, scaled_count(50, config.effort),
                                 default_spec_for(d, 4096, config.seed), options);
      });
    }
    if (f.smoothness() == SmoothnessTag::linear && f.metadata().grad_sup.value_or(0.0) > 0.0) {
      for (double p : {1.5, 2.0, 3.0}) {
        run_suite(out, "linear_distribution[" + f.id() + "]", [&] {
          CurveOptions curve;
          curve.threads = config.threads;
          curve.a_samples = d == 1 ? 16 : (d == 2 ? 64 : 27);
          return check_linear_distribution(f, p, default_spec_for(d, 2048, config.seed), curve);
        });
      }
    }
    if (f.smoothness() == SmoothnessTag::smooth_compact_gradient && d == 1) {
      for (double p : {1.0, 2.0}) {
        run_suite(out, "limit[" + f.id() + "]", [&] {
          CurveOptions curve;
          curve.threads = config.threads;
          curve.a_samples = 1024;
          return check_limit(f, p, 0.05, QuadratureSpec::gauss(8), curve);
        });
      }
    }
    if (f.smoothness() == SmoothnessTag::indicator && d == 1) {
      run_suite(out, "bv_divergence[" + f.id() + "]", [&] {
        const double R = *f.support_radius();
        Domain domain;
        domain.omega = Box::cube(1, -2.0 * R, 2.0 * R);
        domain.r_min = 1e-4 * R;
        domain.r_max = 10.0 * (domain.omega.diameter() + R);
        return check_bv_divergence(R, geometric_kappa_grid(0.1, 1e-4, std::pow(10.0, 0.25)),
                                   domain);
      });
    }
  }
  if (!functions.empty()) {
    run_suite(out, "q_sandwich", [&] {
      return check_q_sandwich(functions, scaled_count(100, config.effort), options);
    });
  }
  return out;
}

}  // namespace osclab
