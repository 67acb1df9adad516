#pragma once

#include <span>
#include <vector>

namespace osclab {

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// The n-point rule, computed once per thread and cached.
const GaussRule& gauss_legendre(int n);

/// Sorted cut points of [lo, hi]: lo, the breakpoints strictly inside, hi.
std::vector<double> split_points(double lo, double hi, std::span<const double> breakpoints);

/// Integral over [lo, hi] with an n-point Gauss rule on every piece between
/// consecutive breakpoints.
template <typename Fn>
double integrate_piecewise(Fn&& g, double lo, double hi,
                           std::span<const double> breakpoints, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const std::vector<double> cuts = split_points(lo, hi, breakpoints);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double half = 0.5 * (cuts[k + 1] - cuts[k]);
    const double mid = 0.5 * (cuts[k + 1] + cuts[k]);
    if (half <= 0.0) continue;
    double piece = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      piece += rule.weights[i] * g(mid + half * rule.nodes[i]);
    total += half * piece;
  }
  return total;
}

}  // namespace osclab
