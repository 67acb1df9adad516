#include "osclab/weak_norm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "osclab/errors.hpp"
#include "osclab/fault.hpp"
#include "osclab/parallel.hpp"
#include "osclab/rng.hpp"

namespace osclab {

double c_d_prime(int d) {
  if (d < 1) throw std::invalid_argument("c_d_prime: d must be >= 1");
  const double value = std::exp(std::lgamma(0.5 * (d + 2)) - std::lgamma(0.5 * (d + 3))) /
                       std::sqrt(std::numbers::pi);
  return active_fault() == Fault::c_d_prime ? value * kFaultFactor : value;
}

double c_dp(int d, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("c_dp: p must be >= 1");
  return std::pow(c_d_prime(d), p) / p;
}

double local_expansion_constant(int d) {
  if (d < 1) throw std::invalid_argument("local_expansion_constant: d must be >= 1");
  const double value = 3.0 * d / (d + 2.0);
  return active_fault() == Fault::local_constant ? value / kFaultFactor : value;
}

double radial_weight(double r_lo, double r_hi, double p) {
  if (!(r_hi > r_lo)) return 0.0;
  double exponent = p + 1.0;
  if (active_fault() == Fault::weight_exponent) exponent *= kFaultFactor;
  const double s = exponent - 1.0;  // integral of r^{-(s+1)}
  if (s == 0.0) return std::log(r_hi / r_lo);
  const double upper = std::isinf(r_hi) ? 0.0 : std::pow(r_hi, -s);
  return (std::pow(r_lo, -s) - upper) / s;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

double Box::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("box: bounds must be nonempty and of equal length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(hi[i] > lo[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw std::invalid_argument("box: need finite lo < hi on every axis");
}

Box Box::cube(int d, double lo, double hi) {
  return {std::vector<double>(static_cast<std::size_t>(d), lo),
          std::vector<double>(static_cast<std::size_t>(d), hi)};
}

void Domain::validate() const {
  omega.validate();
  if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max))
    throw std::invalid_argument("domain: need 0 < r_min < r_max < inf");
}

namespace {

double typical_radius(const TestFunction& f, const Box& omega) {
  if (auto s = f.metadata().feature_scale) return *s;
  return 0.1 * omega.diameter();
}

}  // namespace

Domain Domain::default_for(const TestFunction& f) {
  Domain dom;
  const int d = f.dim();
  const auto support = f.support_radius();
  dom.omega = support ? Box::cube(d, -*support, *support) : Box::cube(d, 0.0, 1.0);
  dom.r_max = 10.0 * (dom.omega.diameter() + support.value_or(0.0));
  dom.r_min = 1e-4 * typical_radius(f, dom.omega);
  return dom;
}

SuperlevelScanner::SuperlevelScanner(const TestFunction& f, std::vector<double> a,
                                     const Domain& domain, const QuadratureSpec& spec,
                                     ScanOptions options)
    : profile_(f, std::move(a), spec), domain_(domain), options_(options) {
  domain_.validate();
  if (domain_.omega.dim() != f.dim())
    throw std::invalid_argument("superlevel scan: domain dimension does not match function");
  if (!(options_.scan_ratio > 1.0) || !(options_.bisect_rel_tol > 0.0))
    throw std::invalid_argument("superlevel scan: need scan_ratio > 1 and bisect_rel_tol > 0");
  radii_ = RadiusGrid{domain_.r_min, domain_.r_max, options_.scan_ratio}.radii();
  values_.reserve(radii_.size());
  errors_.reserve(radii_.size());
  for (double r : radii_) {
    const EstimatedValue m = profile_.mean_oscillation(r);
    values_.push_back(m.value);
    errors_.push_back(m.std_error);
  }
  smooth_ = f.differentiable() && f.grad_lipschitz().has_value();
  if (smooth_) {
    grad_norm_ = f.grad_norm(profile_.center());
    lipschitz_ = *f.grad_lipschitz();
  }
}

double SuperlevelScanner::bisect(double lo, double hi, double kappa, bool lo_above) const {
  while (hi - lo > options_.bisect_rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const bool above = profile_.mean_oscillation(mid).value > kappa;
    if (above == lo_above)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Lowest crossing when m_f(a, r_min) > kappa. For smooth f the certified
// expansion c' g r -/+ C A r^2 brackets it: R_U (upper bound hits kappa)
// <= crossing <= R_L (lower bound hits kappa).
double SuperlevelScanner::floor_crossing(double kappa, bool& ambiguous, bool& truncated) const {
  const double r_min = domain_.r_min;
  if (!smooth_) {
    truncated = true;
    return r_min;
  }
  const int d = profile_.function().dim();
  const double slope = c_d_prime(d) * grad_norm_;
  const double curv = local_expansion_constant(d) * lipschitz_;
  if (slope <= 0.0) {
    // m_f <= C A r^2 here; the crossing is at or above sqrt(kappa / (C A)).
    ambiguous = true;
    return curv > 0.0 ? std::min(r_min, std::sqrt(kappa / curv)) : r_min;
  }
  const double r_upper_hits = 2.0 * kappa / (slope + std::sqrt(slope * slope + 4.0 * curv * kappa));
  const double disc = slope * slope - 4.0 * curv * kappa;
  const double r_lower_hits =
      disc >= 0.0 ? 2.0 * kappa / (slope + std::sqrt(disc)) : std::numeric_limits<double>::infinity();
  // Affine f: m is exactly proportional to r, for the rule as well.
  if (curv == 0.0) return r_min * kappa / profile_.mean_oscillation(r_min).value;
  // Quadrature noise can put the measured crossing outside the certified
  // bracket. m is then continued linearly from the measured value, which is
  // how a pinned node layout scales for nearly linear f.
  if (r_upper_hits >= r_min) {
    ambiguous = true;
    return r_min * kappa / profile_.mean_oscillation(r_min).value;
  }
  const double m_upper = profile_.mean_oscillation(r_upper_hits).value;
  if (m_upper > kappa) {
    ambiguous = true;
    return r_upper_hits * kappa / m_upper;
  }
  double hi = r_min;
  if (r_lower_hits < r_min && profile_.mean_oscillation(r_lower_hits).value > kappa)
    hi = r_lower_hits;
  return bisect(r_upper_hits, hi, kappa, false);
}

std::vector<RadiusInterval> SuperlevelScanner::intervals(double kappa, double p) const {
  if (!(kappa > 0.0)) throw std::invalid_argument("superlevel set: kappa must be positive");
  std::vector<RadiusInterval> out;
  const std::size_t n = radii_.size();
  // Noise exceeds the change of m across the cell [j-1, j].
  auto noisy_cell = [&](std::size_t j) {
    return std::max(errors_[j - 1], errors_[j]) > std::abs(values_[j] - values_[j - 1]);
  };
  std::size_t j = 0;
  while (j < n) {
    if (!(values_[j] > kappa)) {
      ++j;
      continue;
    }
    const std::size_t start = j;
    while (j + 1 < n && values_[j + 1] > kappa) ++j;
    const std::size_t end = j;
    RadiusInterval iv;
    if (start == 0) {
      iv.lo = floor_crossing(kappa, iv.ambiguous, iv.floor_truncated);
    } else {
      iv.lo = bisect(radii_[start - 1], radii_[start], kappa, false);
      if (noisy_cell(start)) {
        iv.ambiguous = true;
        iv.weight_uncertainty += radial_weight(radii_[start - 1], radii_[start], p);
      }
    }
    if (end + 1 == n) {
      iv.hi = radii_[n - 1];
    } else {
      iv.hi = bisect(radii_[end], radii_[end + 1], kappa, true);
      if (noisy_cell(end + 1)) {
        iv.ambiguous = true;
        iv.weight_uncertainty += radial_weight(radii_[end], radii_[end + 1], p);
      }
    }
    if (iv.hi > iv.lo) out.push_back(iv);
    ++j;
  }
  return out;
}

std::vector<RadiusInterval> superlevel_radius_set(const TestFunction& f,
                                                  std::span<const double> a, double kappa,
                                                  const Domain& domain,
                                                  const QuadratureSpec& spec,
                                                  ScanOptions options) {
  return SuperlevelScanner(f, std::vector<double>(a.begin(), a.end()), domain, spec, options)
      .intervals(kappa);
}

namespace {

int stratification_side(int n, int d) {
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / d) + 1e-9));
  k = std::max(k, 1);
  while (std::pow(static_cast<double>(k), d) < n) ++k;
  return k;
}

int effective_samples(const CurveOptions& options, int d) {
  if (options.a_samples < 2) throw std::invalid_argument("curve: need at least 2 centers");
  if (!options.stratified) return options.a_samples;
  const int k = stratification_side(options.a_samples, d);
  return static_cast<int>(std::lround(std::pow(static_cast<double>(k), d)));
}

std::uint64_t center_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, i); }

struct PerCenter {
  std::vector<double> weight;       // [center][kappa]
  std::vector<double> uncertainty;  // [center][kappa]
};

PerCenter evaluate_centers(const TestFunction& f, double p, std::span<const double> kappas,
                           const Domain& domain, const QuadratureSpec& spec,
                           const CurveOptions& options,
                           const std::vector<std::vector<double>>& centers) {
  const std::size_t n = centers.size();
  const std::size_t k = kappas.size();
  PerCenter out;
  out.weight.assign(n * k, 0.0);
  out.uncertainty.assign(n * k, 0.0);
  parallel_for(n, options.threads, [&](std::size_t i) {
    QuadratureSpec local = spec;
    local.seed = derive_seed(center_seed(spec.seed, i), 1);
    const SuperlevelScanner scan(f, centers[i], domain, local, options.scan);
    for (std::size_t j = 0; j < k; ++j) {
      double w = 0.0;
      double u = 0.0;
      for (const RadiusInterval& iv : scan.intervals(kappas[j], p)) {
        w += radial_weight(iv.lo, iv.hi, p);
        u += iv.weight_uncertainty;
      }
      out.weight[i * k + j] = w;
      out.uncertainty[i * k + j] = u;
    }
  });
  return out;
}

// Mean over centers and its standard error. Stratified samples use the
// collapsed-strata estimator on consecutive pairs (a triple at an odd end).
EstimatedValue center_mean(const std::vector<double>& column, bool stratified) {
  const std::size_t n = column.size();
  const double mean = pairwise_sum(column) / static_cast<double>(n);
  double var_of_mean = 0.0;
  if (stratified) {
    std::vector<double> terms;
    std::size_t i = 0;
    while (i < n) {
      const std::size_t g = (n - i == 3) ? 3 : std::min<std::size_t>(2, n - i);
      if (g == 1) break;
      double gm = 0.0;
      for (std::size_t t = 0; t < g; ++t) gm += column[i + t];
      gm /= static_cast<double>(g);
      double ss = 0.0;
      for (std::size_t t = 0; t < g; ++t) ss += (column[i + t] - gm) * (column[i + t] - gm);
      terms.push_back(ss * static_cast<double>(g) / static_cast<double>(g - 1));
      i += g;
    }
    var_of_mean = pairwise_sum(terms) / (static_cast<double>(n) * static_cast<double>(n));
  } else {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (column[i] - mean) * (column[i] - mean);
    var_of_mean = pairwise_sum(sq) / static_cast<double>(n - 1) / static_cast<double>(n);
  }
  return {mean, std::sqrt(var_of_mean)};
}

struct Measures {
  std::vector<EstimatedValue> nu;
  std::vector<double> ambiguity;
  int samples = 0;
};

Measures measures(const TestFunction& f, double p, std::span<const double> kappas,
                  const Domain& domain, const QuadratureSpec& spec, const CurveOptions& options) {
  domain.validate();
  if (domain.omega.dim() != f.dim())
    throw std::invalid_argument("curve: domain dimension does not match function");
  if (!(p >= 1.0)) throw std::invalid_argument("curve: p must be >= 1");
  for (double k : kappas)
    if (!(k > 0.0)) throw std::invalid_argument("curve: kappa must be positive");
  const auto centers = sample_centers(domain.omega, options, spec.seed);
  const PerCenter per = evaluate_centers(f, p, kappas, domain, spec, options, centers);
  const std::size_t n = centers.size();
  const std::size_t k = kappas.size();
  const double volume = domain.omega.volume();
  Measures out;
  out.samples = static_cast<int>(n);
  out.nu.resize(k);
  out.ambiguity.resize(k);
  std::vector<double> column(n);
  std::vector<double> amb(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = per.weight[i * k + j];
      amb[i] = per.uncertainty[i * k + j];
    }
    const EstimatedValue m = center_mean(column, options.stratified);
    out.nu[j] = {volume * m.value, volume * m.std_error};
    out.ambiguity[j] = volume * pairwise_sum(amb) / static_cast<double>(n);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> sample_centers(const Box& omega, const CurveOptions& options,
                                                std::uint64_t seed) {
  omega.validate();
  const int d = omega.dim();
  const int n = effective_samples(options, d);
  const int side = options.stratified ? stratification_side(options.a_samples, d) : 1;
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(d)));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(center_seed(seed, static_cast<std::size_t>(i)), 0));
    int rest = i;
    for (int axis = d - 1; axis >= 0; --axis) {
      const int cell = options.stratified ? rest % side : 0;
      rest = options.stratified ? rest / side : rest;
      const double width = (omega.hi[axis] - omega.lo[axis]) / side;
      centers[i][axis] = omega.lo[axis] + (cell + rng.uniform_open()) * width;
    }
  }
  return centers;
}

EstimatedValue superlevel_measure(const TestFunction& f, double p, double kappa,
                                  const Domain& domain, const QuadratureSpec& spec,
                                  const CurveOptions& options) {
  const double k[1] = {kappa};
  return measures(f, p, k, domain, spec, options).nu.front();
}

std::vector<double> geometric_kappa_grid(double kappa_max, double kappa_min, double ratio) {
  if (!(kappa_max > kappa_min) || !(kappa_min > 0.0) || !(ratio > 1.0))
    throw std::invalid_argument("kappa grid: need kappa_max > kappa_min > 0 and ratio > 1");
  std::vector<double> grid;
  const double steps = std::log(kappa_max / kappa_min) / std::log(ratio);
  const auto n = static_cast<std::size_t>(std::ceil(steps - 1e-9));
  for (std::size_t i = 0; i < n; ++i) grid.push_back(kappa_max / std::pow(ratio, static_cast<double>(i)));
  grid.push_back(kappa_min);
  return grid;
}

std::vector<double> default_kappa_grid(const TestFunction& f, const Domain& domain) {
  double sup = f.metadata().grad_sup.value_or(1.0);
  if (!(sup > 0.0)) sup = 1.0;
  const double top = c_d_prime(f.dim()) * typical_radius(f, domain.omega) * sup;
  return geometric_kappa_grid(top, 1e-4 * top, std::pow(10.0, 0.25));
}

double tail_bound(const TestFunction& f, double p, double kappa, const Domain& domain) {
  const double volume = domain.omega.volume();
  double r_cut = std::numeric_limits<double>::infinity();
  if (f.support_radius() && f.metadata().far_field_l1) {
    // m_f(a, r) <= gamma r^{-d}, gamma = 2 |g|_1 / |B_1|, so m_f <= kappa
    // once r >= (gamma / kappa)^{1/d}.
    const double gamma = 2.0 * *f.metadata().far_field_l1 / unit_ball_volume(f.dim());
    r_cut = std::pow(gamma / kappa, 1.0 / f.dim());
  }
  if (r_cut <= domain.r_max) return 0.0;
  return std::pow(kappa, p) * volume * radial_weight(domain.r_max, r_cut, p);
}

DistributionCurve distribution_curve(const TestFunction& f, double p,
                                     std::span<const double> kappa_grid, const Domain& domain,
                                     const QuadratureSpec& spec, const CurveOptions& options) {
  if (kappa_grid.size() < 8)
    throw std::invalid_argument("distribution curve: need at least 8 kappa values");
  for (std::size_t i = 1; i < kappa_grid.size(); ++i)
    if (!(kappa_grid[i] < kappa_grid[i - 1]))
      throw std::invalid_argument("distribution curve: kappa grid must be strictly decreasing");
  if (kappa_grid.front() / kappa_grid.back() < 1e3 * (1.0 - 1e-9))
    throw std::invalid_argument("distribution curve: kappa grid must span >= 3 decades");

  DistributionCurve curve;
  curve.function_id = f.id();
  curve.dim = f.dim();
  curve.p = p;
  curve.domain = domain;
  curve.seed = spec.seed;
  curve.kappa.assign(kappa_grid.begin(), kappa_grid.end());
  Measures m = measures(f, p, kappa_grid, domain, spec, options);
  curve.nu = std::move(m.nu);
  curve.a_samples = m.samples;
  for (std::size_t i = 0; i < curve.kappa.size(); ++i) {
    const double kp = std::pow(curve.kappa[i], p);
    curve.scaled.push_back(kp * curve.nu[i].value);
    curve.scaled_std_error.push_back(kp * curve.nu[i].std_error);
    curve.tail_bound.push_back(tail_bound(f, p, curve.kappa[i], domain));
    curve.ambiguity.push_back(kp * m.ambiguity[i]);
  }
  return curve;
}

SupEstimate weak_sup(const DistributionCurve& curve) {
  if (curve.scaled.empty()) throw std::invalid_argument("weak_sup: empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.scaled.size(); ++i)
    if (curve.scaled[i] > curve.scaled[best]) best = i;
  return {curve.scaled[best] + curve.scaled_std_error[best], curve.scaled[best], curve.kappa[best]};
}

LimitEstimate limit_extrapolate(const DistributionCurve& curve) {
  LimitEstimate est;
  if (curve.kappa.empty()) {
    est.diagnostic = "empty curve";
    return est;
  }
  const double kmin = *std::min_element(curve.kappa.begin(), curve.kappa.end());
  std::vector<double> x0;
  std::vector<double> y;
  double se_at_min = 0.0;
  for (std::size_t i = 0; i < curve.kappa.size(); ++i) {
    if (curve.kappa[i] > 10.0 * kmin * (1.0 + 1e-9)) continue;
    const double se = curve.scaled_std_error[i];
    const double v = curve.scaled[i];
    if (se > 0.02 * std::abs(v)) {
      est.diagnostic = "relative standard error >= 2% at kappa = " + std::to_string(curve.kappa[i]);
      return est;
    }
    if (curve.kappa[i] == kmin) se_at_min = se;
    x0.push_back(curve.kappa[i]);
    y.push_back(v);
  }
  est.points_used = static_cast<int>(x0.size());
  if (x0.size() < 5) {
    est.diagnostic = "fewer than 5 points in the smallest kappa decade";
    return est;
  }

  const std::size_t n = x0.size();
  double best_rms = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= 200; ++step) {
    const double alpha = 0.5 + step * 0.005;
    // Least squares for y = L + c t with t = kappa^alpha / kappa_min^alpha.
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::pow(x0[i] / kmin, alpha);
      st += t;
      sy += y[i];
      stt += t * t;
      sty += t * y[i];
    }
    const double det = n * stt - st * st;
    if (!(det > 0.0)) continue;
    const double c = (n * sty - st * sy) / det;
    const double intercept = (sy - c * st) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - intercept - c * std::pow(x0[i] / kmin, alpha);
      ss += r * r;
    }
    const double rms = std::sqrt(ss / n);
    if (rms < best_rms) {
      best_rms = rms;
      est.value = intercept;
      est.alpha = alpha;
    }
  }
  est.fit_residual = best_rms;
  est.uncertainty = std::hypot(best_rms, se_at_min);
  if (!std::isfinite(est.value)) {
    est.diagnostic = "fit failed";
    return est;
  }
  if (best_rms > 0.05 * std::abs(est.value)) {
    est.diagnostic = "fit residual exceeds 5% of the extrapolated limit";
    est.value = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.converged = true;
  return est;
}

std::optional<double> reference_limit(const TestFunction& f, double p, const Domain& domain) {
  const auto& meta = f.metadata();
  const double constant = c_dp(f.dim(), p);
  if (meta.grad_lipschitz && *meta.grad_lipschitz == 0.0 && meta.grad_sup)
    return constant * domain.omega.volume() * std::pow(*meta.grad_sup, p);
  if (meta.gradient_lp_pp && meta.support_radius) {
    const double r0 = *meta.support_radius;
    for (int i = 0; i < domain.omega.dim(); ++i)
      if (domain.omega.lo[i] > -r0 || domain.omega.hi[i] < r0) return std::nullopt;
    return constant * meta.gradient_lp_pp(p);
  }
  return std::nullopt;
}

void write_curve_csv(std::ostream& os, const DistributionCurve& curve) {
  char buf[512];
  os << "# schema=" << kCurveCsvSchema << '\n';
  os << "kappa,nu,nu_stderr,kappa_p_nu,tail_bound\n";
  for (std::size_t i = 0; i < curve.kappa.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", curve.kappa[i],
                  curve.nu[i].value, curve.nu[i].std_error, curve.scaled[i], curve.tail_bound[i]);
    os << buf;
  }
}

}  // namespace osclab
