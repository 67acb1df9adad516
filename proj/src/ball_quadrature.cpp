#include "osclab/ball_quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "osclab/errors.hpp"
#include "osclab/line_rules.hpp"
#include "osclab/rng.hpp"

namespace osclab {

void BallSample::validate() const {
  if (center.empty()) throw std::invalid_argument("ball: dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball: radius must be positive and finite");
  for (double c : center)
    if (!std::isfinite(c)) throw std::invalid_argument("ball: non-finite center");
}

void QuadratureSpec::validate(int dim) const {
  if (node_count < 2) throw std::invalid_argument("quadrature: node_count must be >= 2");
  if (method == QuadratureMethod::gauss_1d && dim != 1)
    throw std::invalid_argument("quadrature: gauss_1d requires d = 1");
  if (!(target_rel_error > 0.0))
    throw std::invalid_argument("quadrature: target_rel_error must be positive");
}

UnitBallNodes::UnitBallNodes(int dim, int count, std::uint64_t seed)
    : dim_(dim), count_(count) {
  if (dim < 1) throw std::invalid_argument("UnitBallNodes: dimension must be >= 1");
  if (count < 1) throw std::invalid_argument("UnitBallNodes: count must be >= 1");
  coords_.resize(static_cast<std::size_t>(dim) * count);
  CounterRng rng(seed);
  if (dim == 1) {
    for (int i = 0; i < count; ++i) coords_[i] = 2.0 * rng.uniform_open() - 1.0;
    return;
  }
  // Gaussian direction times radius U^{1/d}: exact and rejection-free.
  const double inv_d = 1.0 / dim;
  for (int i = 0; i < count; ++i) {
    double* x = coords_.data() + static_cast<std::size_t>(i) * dim;
    double s = 0.0;
    do {
      s = 0.0;
      for (int k = 0; k < dim; ++k) {
        x[k] = rng.normal();
        s += x[k] * x[k];
      }
    } while (s == 0.0);
    const double rho = std::pow(rng.uniform_open(), inv_d) / std::sqrt(s);
    for (int k = 0; k < dim; ++k) x[k] *= rho;
  }
}

EstimatedValue average_over_nodes(const Integrand& g, const BallSample& ball,
                                  const UnitBallNodes& nodes) {
  const int d = ball.dim();
  if (nodes.dim() != d) throw std::invalid_argument("average_over_nodes: dimension mismatch");
  std::vector<double> x(static_cast<std::size_t>(d));
  // Welford accumulation keeps the variance accurate for large n.
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < nodes.size(); ++i) {
    const auto u = nodes.point(i);
    for (int k = 0; k < d; ++k) x[k] = ball.center[k] + ball.radius * u[k];
    const double v = g(x);
    if (!std::isfinite(v))
      throw NumericalError("non-finite integrand value at a quadrature node");
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const int n = nodes.size();
  const double var = n > 1 ? m2 / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::vector<std::vector<double>> sample_ball_uniform(const BallSample& ball, int n,
                                                     std::uint64_t seed) {
  ball.validate();
  if (n < 1) throw std::invalid_argument("sample_ball_uniform: n must be >= 1");
  const UnitBallNodes nodes(ball.dim(), n, seed);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto u = nodes.point(i);
    out[i].resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[i][k] = ball.center[k] + ball.radius * u[k];
  }
  return out;
}

EstimatedValue ball_average(const Integrand& g, const BallSample& ball,
                            const QuadratureSpec& spec, std::span<const double> breakpoints) {
  ball.validate();
  spec.validate(ball.dim());
  if (spec.method == QuadratureMethod::monte_carlo)
    return average_over_nodes(g, ball, UnitBallNodes(ball.dim(), spec.node_count, spec.seed));

  const double a = ball.center[0];
  const double r = ball.radius;
  double x = 0.0;
  const double integral = integrate_piecewise(
      [&](double t) {
        x = t;
        const double v = g(std::span<const double>(&x, 1));
        if (!std::isfinite(v))
          throw NumericalError("non-finite integrand value at a quadrature node");
        return v;
      },
      a - r, a + r, breakpoints, spec.node_count);
  return {integral / (2.0 * r), 0.0};
}

}  // namespace osclab
