#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace osclab {

/// The ball B_r(a) = {x : |x - a| < r}.
struct BallSample {
  std::vector<double> center;
  double radius = 1.0;

  int dim() const noexcept { return static_cast<int>(center.size()); }
  /// Throws std::invalid_argument unless r > 0 (finite) and d >= 1.
  void validate() const;
};

enum class QuadratureMethod { gauss_1d, monte_carlo };

struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::monte_carlo;
  /// Gauss points per smooth piece (gauss_1d) or sample count (monte_carlo).
  int node_count = 4096;
  std::uint64_t seed = 0x5eed;
  /// Estimates whose relative error exceeds this are treated as unreliable
  /// by the verification suites.
  double target_rel_error = 1e-3;

  static QuadratureSpec gauss(int nodes = 8) {
    return {QuadratureMethod::gauss_1d, nodes, 0, 1e-9};
  }
  static QuadratureSpec monte_carlo(int nodes, std::uint64_t seed) {
    return {QuadratureMethod::monte_carlo, nodes, seed, 1e-2};
  }

  void validate(int dim) const;
};

struct EstimatedValue {
  double value = 0.0;
  /// One standard error (statistical); 0 for deterministic rules.
  double std_error = 0.0;
};

using Integrand = std::function<double(std::span<const double>)>;

/// n points i.i.d. uniform in the unit ball of R^d, row-major (n x d),
/// determined by (d, n, seed). A ball's nodes are center + r * these, so a
/// layout is pinned to the ball's local frame.
class UnitBallNodes {
 public:
  UnitBallNodes(int dim, int count, std::uint64_t seed);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return count_; }
  std::span<const double> point(int i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  int dim_;
  int count_;
  std::vector<double> coords_;
};

/// Mean and standard error of g over the layout mapped onto `ball`.
/// Throws NumericalError on a non-finite integrand value.
EstimatedValue average_over_nodes(const Integrand& g, const BallSample& ball,
                                  const UnitBallNodes& nodes);

/// n points uniform in the ball; deterministic per (seed, ball, n).
std::vector<std::vector<double>> sample_ball_uniform(const BallSample& ball, int n,
                                                     std::uint64_t seed);

/// Normalized average of g over the ball. gauss_1d integrates each smooth
/// piece between the supplied breakpoints exactly up to degree 2n-1.
EstimatedValue ball_average(const Integrand& g, const BallSample& ball,
                            const QuadratureSpec& spec,
                            std::span<const double> breakpoints = {});

}  // namespace osclab
