#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osclab {

enum class SmoothnessTag { smooth_compact_gradient, linear, indicator, custom };

std::string to_string(SmoothnessTag tag);

/// Evaluation kernel behind a TestFunction. Implementations are immutable
/// after construction and safe to call from any number of threads.
class FunctionModel {
 public:
  virtual ~FunctionModel() = default;
  virtual double value(std::span<const double> x) const = 0;
  virtual bool has_gradient() const { return true; }
  /// Writes the exact gradient at x into out. Only called if has_gradient().
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
};

/// Everything the verification suites need to know about a function besides
/// how to evaluate it.
struct FunctionMetadata {
  int dim = 1;
  std::string id;
  SmoothnessTag tag = SmoothnessTag::custom;
  /// Valid global Lipschitz constant of the gradient (upper bound).
  std::optional<double> grad_lipschitz;
  /// R_0: f is constant on |x| >= R_0.
  std::optional<double> support_radius;
  /// The constant value of f on |x| >= R_0.
  double far_field = 0.0;
  /// Integral of |f - far_field| over R^d.
  std::optional<double> far_field_l1;
  /// sup |grad f|.
  std::optional<double> grad_sup;
  /// Length scale over which f changes (taper width, radius, ...).
  std::optional<double> feature_scale;
  /// For d == 1: points where f or f' may have a kink or jump, sorted.
  std::vector<double> breakpoints;
  /// p -> integral of |grad f|^p over R^d, when finite and known.
  std::function<double(double)> gradient_lp_pp;
};

class TestFunction {
 public:
  TestFunction(std::shared_ptr<const FunctionModel> model, FunctionMetadata meta);

  int dim() const noexcept { return meta_.dim; }
  const std::string& id() const noexcept { return meta_.id; }
  SmoothnessTag smoothness() const noexcept { return meta_.tag; }
  const FunctionMetadata& metadata() const noexcept { return meta_; }

  double operator()(std::span<const double> x) const { return model_->value(x); }
  double eval(std::span<const double> x) const { return model_->value(x); }

  bool differentiable() const { return model_->has_gradient(); }
  /// Throws UnsupportedFunction for non-differentiable entries.
  std::vector<double> grad(std::span<const double> x) const;
  void grad_into(std::span<const double> x, std::span<double> out) const;
  double grad_norm(std::span<const double> x) const;

  std::optional<double> grad_lipschitz() const noexcept { return meta_.grad_lipschitz; }
  std::optional<double> support_radius() const noexcept { return meta_.support_radius; }
  std::span<const double> breakpoints() const noexcept { return meta_.breakpoints; }

  /// Integral of |grad f|^p over R^d, if known.
  std::optional<double> gradient_lp_pp(double p) const;

  const std::shared_ptr<const FunctionModel>& model() const noexcept { return model_; }

 private:
  std::shared_ptr<const FunctionModel> model_;
  FunctionMetadata meta_;
};

/// f(x) = v . x
TestFunction make_linear(int d, std::vector<double> v);
/// f(x) = c
TestFunction make_constant(int d, double c);
/// Radial bump: amplitude on |x| <= inner, 0 on |x| >= outer, quintic
/// smoothstep taper in between (C^2).
TestFunction make_plateau_bump(int d, double amplitude, double inner_radius,
                               double outer_radius);
/// 1 on the closed ball |x| <= radius, 0 outside.
TestFunction make_ball_indicator(int d, double radius);

/// x -> f(x - h)
TestFunction translated(const TestFunction& f, std::vector<double> h);
/// x -> lambda f(x)
TestFunction scaled(const TestFunction& f, double lambda);
/// x -> f(x / s)
TestFunction dilated(const TestFunction& f, double s);

/// Parses identifiers such as "linear:d=2:v=1,0",
/// "plateau:d=1:a=1:ri=0.5:ro=1", "indicator:d=1:r=0.5", "constant:d=2:c=3".
TestFunction parse_function_id(std::string_view id);

/// Identifiers of the built-in catalog.
std::vector<std::string> default_catalog_ids();

/// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 and its derivatives.
namespace taper {
double value(double t);
double first(double t);
double second(double t);
/// max |S''| on [0,1] = 10/sqrt(3)
inline constexpr double kMaxSecond = 5.773502691896257645;
/// max S' on [0,1] = 15/8
inline constexpr double kMaxFirst = 1.875;
}  // namespace taper

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace osclab
