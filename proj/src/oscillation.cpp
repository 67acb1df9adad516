#include "osclab/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "osclab/errors.hpp"
#include "osclab/line_rules.hpp"
#include "osclab/rng.hpp"

namespace osclab {
namespace {

// Sub-intervals per smooth piece probed for sign changes of f - level.
constexpr int kRootScan = 8;

double eval1(const TestFunction& f, double x) {
  const double v = f.eval(std::span<const double>(&x, 1));
  if (!std::isfinite(v)) throw NumericalError("non-finite function value at x = " + std::to_string(x));
  return v;
}

double refine_root(const TestFunction& f, double level, double lo, double hi, double hlo,
                   double hhi) {
  auto h = [&](double x) { return eval1(f, x) - level; };
  auto tol = [](double a, double b) {
    return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max({std::abs(a), std::abs(b), 1e-300});
  };
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(h, lo, hi, hlo, hhi, tol, iters);
  return 0.5 * (bracket.first + bracket.second);
}

// Cut points of [lo, hi] such that f - level keeps one sign between
// consecutive cuts and f is smooth there.
std::vector<double> level_cuts(const TestFunction& f, double lo, double hi, double level) {
  const std::vector<double> base = split_points(lo, hi, f.breakpoints());
  std::vector<double> cuts;
  cuts.reserve(base.size() + 8);
  for (std::size_t k = 0; k + 1 < base.size(); ++k) {
    const double a = base[k];
    const double b = base[k + 1];
    cuts.push_back(a);
    if (!(b > a)) continue;
    // Probe slightly inside the piece so that jump values at the
    // breakpoints do not masquerade as sign changes.
    const double inset = (b - a) * 1e-12;
    double x_prev = a + inset;
    double h_prev = eval1(f, x_prev) - level;
    for (int j = 1; j <= kRootScan; ++j) {
      const double x = (j == kRootScan) ? b - inset : a + (b - a) * j / kRootScan;
      const double h = eval1(f, x) - level;
      if (h == 0.0) {
        cuts.push_back(x);
      } else if (h_prev != 0.0 && (h_prev < 0.0) != (h < 0.0)) {
        cuts.push_back(refine_root(f, level, x_prev, x, h_prev, h));
      }
      x_prev = x;
      h_prev = h;
    }
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

int nodes_for_power(int n, double q) {
  return (q == 1.0 || q == 2.0) ? n : std::max(n, 24);
}

double powq(double x, double q) {
  if (q == 1.0) return x;
  if (q == 2.0) return x * x;
  return std::pow(x, q);
}

double rootq(double x, double q) {
  if (q == 1.0) return x;
  if (q == 2.0) return std::sqrt(x);
  return std::pow(x, 1.0 / q);
}

// avg over [lo, hi] of |f - level|^q, split at breakpoints and level crossings.
double centered_power_mean_1d(const TestFunction& f, double lo, double hi, double level,
                              double q, int n) {
  const std::vector<double> cuts = level_cuts(f, lo, hi, level);
  const double total = integrate_piecewise(
      [&](double x) { return powq(std::abs(eval1(f, x) - level), q); }, lo, hi,
      std::span<const double>(cuts).subspan(1, cuts.size() - 2), nodes_for_power(n, q));
  return total / (hi - lo);
}

double mean_1d(const TestFunction& f, double lo, double hi, int n) {
  return integrate_piecewise([&](double x) { return eval1(f, x); }, lo, hi, f.breakpoints(), n) /
         (hi - lo);
}

// Error of (W + dW)^{1/q} - W^{1/q}; the q-th root is concave so this
// bounds the first-order error and stays finite at W = 0.
double root_error(double w, double dw, double q) {
  if (dw <= 0.0) return 0.0;
  return rootq(w + dw, q) - rootq(w, q);
}

void check_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q))
    throw std::invalid_argument("oscillation: q must be finite and >= 1");
}

}  // namespace

OscillationProfile::OscillationProfile(TestFunction f, std::vector<double> center,
                                       const QuadratureSpec& spec)
    : f_(std::move(f)), center_(std::move(center)), spec_(spec) {
  if (static_cast<int>(center_.size()) != f_.dim())
    throw std::invalid_argument("oscillation: center dimension does not match function");
  spec_.validate(f_.dim());
  if (spec_.method == QuadratureMethod::monte_carlo) {
    const int d = f_.dim();
    inner_ = std::make_shared<UnitBallNodes>(d, spec_.node_count, derive_seed(spec_.seed, 1));
    outer_ = std::make_shared<UnitBallNodes>(d, spec_.node_count, derive_seed(spec_.seed, 2));
    partner_ = std::make_shared<UnitBallNodes>(d, spec_.node_count, derive_seed(spec_.seed, 3));
  }
}

BallSample OscillationProfile::ball(double r) const {
  BallSample b{center_, r};
  b.validate();
  return b;
}

EstimatedValue OscillationProfile::mean(double r) const {
  const BallSample b = ball(r);
  if (spec_.method == QuadratureMethod::gauss_1d)
    return {mean_1d(f_, b.center[0] - r, b.center[0] + r, spec_.node_count), 0.0};
  return average_over_nodes([&](std::span<const double> x) { return f_.eval(x); }, b, *inner_);
}

EstimatedValue OscillationProfile::mean_oscillation(double r) const {
  return q_oscillation(r, 1.0);
}

EstimatedValue OscillationProfile::q_oscillation(double r, double q) const {
  check_q(q);
  const BallSample b = ball(r);
  const EstimatedValue mu = mean(r);
  if (spec_.method == QuadratureMethod::gauss_1d) {
    const double w = centered_power_mean_1d(f_, b.center[0] - r, b.center[0] + r, mu.value, q,
                                            spec_.node_count);
    return {rootq(w, q), 0.0};
  }
  // Alongside W = avg |f - mu|^q, accumulate avg sign(f - mu) |f - mu|^{q-1},
  // which gives the derivative of W^{1/q} in the centering constant.
  double tilt = 0.0;
  const EstimatedValue w = average_over_nodes(
      [&](std::span<const double> x) {
        const double dev = f_.eval(x) - mu.value;
        const double a = std::abs(dev);
        const double lower = q == 1.0 ? 1.0 : (q == 2.0 ? a : std::pow(a, q - 1.0));
        tilt += dev > 0.0 ? lower : (dev < 0.0 ? -lower : 0.0);
        return powq(a, q);
      },
      b, *outer_);
  tilt /= outer_->size();
  const double wv = std::max(w.value, 0.0);
  const double value = rootq(wv, q);
  // Inner and outer layouts are independent, so their errors add in
  // quadrature; the centering error enters through the slope, which is at
  // most 1 because the L^q deviation is 1-Lipschitz in the centering constant.
  const double slope = wv > 0.0 ? std::min(1.0, std::abs(tilt) * std::pow(wv, 1.0 / q - 1.0)) : 1.0;
  return {value, std::hypot(root_error(wv, w.std_error, q), slope * mu.std_error)};
}

EstimatedValue OscillationProfile::pair_oscillation(double r, double q) const {
  check_q(q);
  const BallSample b = ball(r);
  if (spec_.method == QuadratureMethod::gauss_1d) {
    const double lo = b.center[0] - r;
    const double hi = b.center[0] + r;
    const int n = spec_.node_count;
    const double w = integrate_piecewise(
                         [&](double x) {
                           return centered_power_mean_1d(f_, lo, hi, eval1(f_, x), q, n);
                         },
                         lo, hi, f_.breakpoints(), std::max(2 * n, 32)) /
                     (hi - lo);
    return {rootq(w, q), 0.0};
  }
  const int d = f_.dim();
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> y(static_cast<std::size_t>(d));
  double mean = 0.0;
  double m2 = 0.0;
  const int count = outer_->size();
  for (int i = 0; i < count; ++i) {
    const auto u = outer_->point(i);
    const auto v = partner_->point(i);
    for (int k = 0; k < d; ++k) {
      x[k] = b.center[k] + r * u[k];
      y[k] = b.center[k] + r * v[k];
    }
    const double fx = f_.eval(x);
    const double fy = f_.eval(y);
    if (!std::isfinite(fx) || !std::isfinite(fy))
      throw NumericalError("non-finite integrand value at a quadrature node");
    const double s = powq(std::abs(fx - fy), q);
    const double delta = s - mean;
    mean += delta / (i + 1);
    m2 += delta * (s - mean);
  }
  const double se = count > 1 ? std::sqrt(m2 / (count - 1) / count) : 0.0;
  return {rootq(std::max(mean, 0.0), q), root_error(std::max(mean, 0.0), se, q)};
}

EstimatedValue OscillationProfile::gradient_average(double r) const {
  if (!f_.differentiable())
    throw UnsupportedFunction("function '" + f_.id() + "' has no gradient");
  const BallSample b = ball(r);
  if (spec_.method == QuadratureMethod::gauss_1d) {
    const double lo = b.center[0] - r;
    const double hi = b.center[0] + r;
    const double total = integrate_piecewise(
        [&](double x) { return f_.grad_norm(std::span<const double>(&x, 1)); }, lo, hi,
        f_.breakpoints(), spec_.node_count);
    return {total / (hi - lo), 0.0};
  }
  return average_over_nodes([&](std::span<const double> x) { return f_.grad_norm(x); }, b,
                            *outer_);
}

EstimatedValue mean_oscillation(const TestFunction& f, const BallSample& ball,
                                const QuadratureSpec& spec) {
  ball.validate();
  return OscillationProfile(f, ball.center, spec).mean_oscillation(ball.radius);
}

EstimatedValue q_oscillation(const TestFunction& f, const BallSample& ball, double q,
                             const QuadratureSpec& spec) {
  ball.validate();
  return OscillationProfile(f, ball.center, spec).q_oscillation(ball.radius, q);
}

EstimatedValue pair_oscillation(const TestFunction& f, const BallSample& ball, double q,
                                const QuadratureSpec& spec) {
  ball.validate();
  return OscillationProfile(f, ball.center, spec).pair_oscillation(ball.radius, q);
}

std::vector<double> RadiusGrid::radii() const {
  if (!(lo > 0.0) || !(hi > lo) || !(ratio > 1.0))
    throw std::invalid_argument("RadiusGrid: need 0 < lo < hi and ratio > 1");
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::ceil(std::log(hi / lo) / std::log(ratio)));
  out.reserve(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) out.push_back(lo * std::pow(ratio, static_cast<double>(i)));
  out.push_back(hi);
  return out;
}

RadiusGrid RadiusGrid::default_for(const TestFunction& f) {
  const double s = f.support_radius().value_or(1.0);
  return {1e-3 * s, 1e2 * s, 1.05};
}

double maximal_gradient(const TestFunction& f, std::span<const double> a, const RadiusGrid& grid,
                        const QuadratureSpec& spec) {
  if (!f.differentiable())
    throw UnsupportedFunction("maximal_gradient: function '" + f.id() + "' has no gradient");
  const double s = f.support_radius().value_or(1.0);
  if (grid.lo > 1e-3 * s * (1.0 + 1e-12) || grid.hi < 1e2 * s * (1.0 - 1e-12))
    throw std::invalid_argument("maximal_gradient: radius grid must cover [1e-3, 1e2] * " +
                                std::to_string(s));
  const OscillationProfile profile(f, std::vector<double>(a.begin(), a.end()), spec);
  double best = 0.0;
  for (double r : grid.radii()) best = std::max(best, profile.gradient_average(r).value);
  return best;
}

}  // namespace osclab
