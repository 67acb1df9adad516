#pragma once

#include <memory>
#include <span>
#include <vector>

#include "osclab/ball_quadrature.hpp"
#include "osclab/function_catalog.hpp"

namespace osclab {

/// Oscillation of f on the balls B_r(a) for one fixed center and any r.
///
/// With monte_carlo the node layouts are drawn once from spec.seed and then
/// scaled with r (pinned to the ball's local frame), so r -> m_f(a, r) is a
/// deterministic, piecewise smooth function. Inner mean and outer average
/// use independent layouts. With gauss_1d (d = 1 only) averages are computed
/// piecewise between the function's breakpoints and the roots of f - mean,
/// which is exact for the piecewise polynomial catalog entries.
class OscillationProfile {
 public:
  OscillationProfile(TestFunction f, std::vector<double> center, const QuadratureSpec& spec);

  /// Inner mean of f on B_r(a).
  EstimatedValue mean(double r) const;
  /// m_f(a, r). The error combines the outer-average error with the inner-mean
  /// error scaled by the sensitivity of m_f to the centering constant.
  EstimatedValue mean_oscillation(double r) const;
  /// m_f^{(q)}(a, r) = (avg |f - avg f|^q)^{1/q}; q = 1 is bit-identical
  /// to mean_oscillation.
  EstimatedValue q_oscillation(double r, double q) const;
  /// (avg avg |f(x) - f(y)|^q)^{1/q} over independent x, y in B_r(a).
  EstimatedValue pair_oscillation(double r, double q) const;
  /// avg |grad f| over B_r(a).
  EstimatedValue gradient_average(double r) const;

  const TestFunction& function() const noexcept { return f_; }
  std::span<const double> center() const noexcept { return center_; }
  const QuadratureSpec& spec() const noexcept { return spec_; }

 private:
  BallSample ball(double r) const;

  TestFunction f_;
  std::vector<double> center_;
  QuadratureSpec spec_;
  // monte_carlo only
  std::shared_ptr<const UnitBallNodes> inner_;
  std::shared_ptr<const UnitBallNodes> outer_;
  std::shared_ptr<const UnitBallNodes> partner_;
};

EstimatedValue mean_oscillation(const TestFunction& f, const BallSample& ball,
                                const QuadratureSpec& spec);

EstimatedValue q_oscillation(const TestFunction& f, const BallSample& ball, double q,
                             const QuadratureSpec& spec);

EstimatedValue pair_oscillation(const TestFunction& f, const BallSample& ball, double q,
                                const QuadratureSpec& spec);

/// Geometric grid of radii lo, lo*ratio, ..., ending exactly at hi.
struct RadiusGrid {
  double lo = 1e-3;
  double hi = 1e2;
  double ratio = 1.05;

  std::vector<double> radii() const;
  /// [1e-3, 1e2] * (support radius or 1), ratio 1.05.
  static RadiusGrid default_for(const TestFunction& f);
};

/// max over the grid of avg_{B_r(a)} |grad f|: a lower bound for the
/// centered maximal function M|grad f|(a). Throws UnsupportedFunction when
/// f has no gradient; std::invalid_argument when the grid does not cover
/// [1e-3, 1e2] * (support radius or 1).
double maximal_gradient(const TestFunction& f, std::span<const double> a,
                        const RadiusGrid& grid, const QuadratureSpec& spec);

}  // namespace osclab
