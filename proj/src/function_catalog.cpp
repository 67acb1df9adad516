#include "osclab/function_catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "osclab/errors.hpp"
#include "osclab/line_rules.hpp"

namespace osclab {

std::string to_string(SmoothnessTag tag) {
  switch (tag) {
    case SmoothnessTag::smooth_compact_gradient: return "smooth_compact_gradient";
    case SmoothnessTag::linear: return "linear";
    case SmoothnessTag::indicator: return "indicator";
    case SmoothnessTag::custom: return "custom";
  }
  return "custom";
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

namespace taper {
double value(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double first(double t) {
  const double s = t * (1.0 - t);
  return 30.0 * s * s;
}
double second(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }
}  // namespace taper

TestFunction::TestFunction(std::shared_ptr<const FunctionModel> model, FunctionMetadata meta)
    : model_(std::move(model)), meta_(std::move(meta)) {
  if (!model_) throw std::invalid_argument("TestFunction: null model");
  if (meta_.dim < 1) throw std::invalid_argument("TestFunction: dimension must be >= 1");
  std::sort(meta_.breakpoints.begin(), meta_.breakpoints.end());
}

std::vector<double> TestFunction::grad(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  grad_into(x, out);
  return out;
}

void TestFunction::grad_into(std::span<const double> x, std::span<double> out) const {
  if (!model_->has_gradient())
    throw UnsupportedFunction("function '" + id() + "' has no gradient");
  model_->gradient(x, out);
}

double TestFunction::grad_norm(std::span<const double> x) const {
  double buf[8];
  std::vector<double> heap;
  std::span<double> out;
  if (dim() <= 8) {
    out = std::span<double>(buf, static_cast<std::size_t>(dim()));
  } else {
    heap.resize(static_cast<std::size_t>(dim()));
    out = heap;
  }
  grad_into(x, out);
  double s = 0.0;
  for (double g : out) s += g * g;
  return std::sqrt(s);
}

std::optional<double> TestFunction::gradient_lp_pp(double p) const {
  if (!meta_.gradient_lp_pp) return std::nullopt;
  return meta_.gradient_lp_pp(p);
}

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

class AffineModel final : public FunctionModel {
 public:
  AffineModel(std::vector<double> v, double c) : v_(std::move(v)), c_(c) {}
  double value(std::span<const double> x) const override {
    double s = c_;
    for (std::size_t i = 0; i < v_.size(); ++i) s += v_[i] * x[i];
    return s;
  }
  void gradient(std::span<const double>, std::span<double> out) const override {
    std::copy(v_.begin(), v_.end(), out.begin());
  }

 private:
  std::vector<double> v_;
  double c_;
};

class PlateauModel final : public FunctionModel {
 public:
  PlateauModel(double amplitude, double inner, double outer)
      : amp_(amplitude), inner_(inner), outer_(outer), width_(outer - inner) {}

  double value(std::span<const double> x) const override {
    const double rho = norm(x);
    if (rho <= inner_) return amp_;
    if (rho >= outer_) return 0.0;
    return amp_ * (1.0 - taper::value((rho - inner_) / width_));
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double rho = norm(x);
    if (rho <= inner_ || rho >= outer_) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double radial = -amp_ * taper::first((rho - inner_) / width_) / width_;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = radial * x[i] / rho;
  }

 private:
  double amp_, inner_, outer_, width_;
};

class IndicatorModel final : public FunctionModel {
 public:
  explicit IndicatorModel(double radius) : radius_(radius) {}
  double value(std::span<const double> x) const override {
    // Closed ball: the boundary belongs to the set.
    return norm(x) <= radius_ ? 1.0 : 0.0;
  }
  bool has_gradient() const override { return false; }
  void gradient(std::span<const double>, std::span<double>) const override {
    throw UnsupportedFunction("indicator function has no gradient");
  }

 private:
  double radius_;
};

class TranslatedModel final : public FunctionModel {
 public:
  TranslatedModel(std::shared_ptr<const FunctionModel> base, std::vector<double> h)
      : base_(std::move(base)), h_(std::move(h)) {}
  double value(std::span<const double> x) const override {
    double buf[8];
    std::vector<double> heap;
    return base_->value(shift(x, buf, heap));
  }
  bool has_gradient() const override { return base_->has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    double buf[8];
    std::vector<double> heap;
    base_->gradient(shift(x, buf, heap), out);
  }

 private:
  std::span<const double> shift(std::span<const double> x, double* buf,
                                std::vector<double>& heap) const {
    double* y = buf;
    if (x.size() > 8) {
      heap.resize(x.size());
      y = heap.data();
    }
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - h_[i];
    return {y, x.size()};
  }
  std::shared_ptr<const FunctionModel> base_;
  std::vector<double> h_;
};

class ScaledModel final : public FunctionModel {
 public:
  ScaledModel(std::shared_ptr<const FunctionModel> base, double lambda)
      : base_(std::move(base)), lambda_(lambda) {}
  double value(std::span<const double> x) const override {
    return lambda_ * base_->value(x);
  }
  bool has_gradient() const override { return base_->has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    base_->gradient(x, out);
    for (double& g : out) g *= lambda_;
  }

 private:
  std::shared_ptr<const FunctionModel> base_;
  double lambda_;
};

class DilatedModel final : public FunctionModel {
 public:
  DilatedModel(std::shared_ptr<const FunctionModel> base, double s)
      : base_(std::move(base)), s_(s) {}
  double value(std::span<const double> x) const override {
    double buf[8];
    std::vector<double> heap;
    return base_->value(shrink(x, buf, heap));
  }
  bool has_gradient() const override { return base_->has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    double buf[8];
    std::vector<double> heap;
    base_->gradient(shrink(x, buf, heap), out);
    for (double& g : out) g /= s_;
  }

 private:
  std::span<const double> shrink(std::span<const double> x, double* buf,
                                 std::vector<double>& heap) const {
    double* y = buf;
    if (x.size() > 8) {
      heap.resize(x.size());
      y = heap.data();
    }
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / s_;
    return {y, x.size()};
  }
  std::shared_ptr<const FunctionModel> base_;
  double s_;
};

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  std::string s = os.str();
  return s;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_number(v[i]);
  }
  return out;
}

void require_dim(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
}

}  // namespace

TestFunction make_linear(int d, std::vector<double> v) {
  require_dim(d);
  if (v.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("make_linear: vector length must equal d");
  for (double c : v)
    if (!std::isfinite(c)) throw std::invalid_argument("make_linear: non-finite coefficient");
  const double vnorm = norm(v);
  FunctionMetadata meta;
  meta.dim = d;
  meta.id = "linear:d=" + std::to_string(d) + ":v=" + join_numbers(v);
  meta.tag = SmoothnessTag::linear;
  meta.grad_lipschitz = 0.0;
  meta.grad_sup = vnorm;
  if (vnorm == 0.0) meta.gradient_lp_pp = [](double) { return 0.0; };
  return TestFunction(std::make_shared<AffineModel>(std::move(v), 0.0), std::move(meta));
}

TestFunction make_constant(int d, double c) {
  require_dim(d);
  if (!std::isfinite(c)) throw std::invalid_argument("make_constant: non-finite value");
  FunctionMetadata meta;
  meta.dim = d;
  meta.id = "constant:d=" + std::to_string(d) + ":c=" + format_number(c);
  meta.tag = SmoothnessTag::linear;
  meta.grad_lipschitz = 0.0;
  meta.grad_sup = 0.0;
  meta.far_field = c;
  meta.gradient_lp_pp = [](double) { return 0.0; };
  return TestFunction(
      std::make_shared<AffineModel>(std::vector<double>(static_cast<std::size_t>(d), 0.0), c),
      std::move(meta));
}

TestFunction make_plateau_bump(int d, double amplitude, double inner_radius,
                               double outer_radius) {
  require_dim(d);
  if (!(inner_radius > 0.0) || !(outer_radius > 0.0))
    throw std::invalid_argument("make_plateau_bump: radii must be positive");
  if (!(inner_radius < outer_radius))
    throw std::invalid_argument("make_plateau_bump: inner radius must be < outer radius");
  if (!std::isfinite(amplitude))
    throw std::invalid_argument("make_plateau_bump: non-finite amplitude");

  const double w = outer_radius - inner_radius;
  const double a = std::abs(amplitude);
  FunctionMetadata meta;
  meta.dim = d;
  meta.id = "plateau:d=" + std::to_string(d) + ":a=" + format_number(amplitude) +
            ":ri=" + format_number(inner_radius) + ":ro=" + format_number(outer_radius);
  meta.tag = SmoothnessTag::smooth_compact_gradient;
  // Hessian eigenvalues: radial -a S''/w^2, tangential -a S'/(w rho), rho >= ri.
  double lip = a * taper::kMaxSecond / (w * w);
  if (d >= 2) lip = std::max(lip, a * taper::kMaxFirst / (w * inner_radius));
  meta.grad_lipschitz = lip;
  meta.support_radius = outer_radius;
  meta.far_field = 0.0;
  meta.grad_sup = a * taper::kMaxFirst / w;
  meta.feature_scale = w;
  if (d == 1) meta.breakpoints = {-outer_radius, -inner_radius, inner_radius, outer_radius};

  const double sphere = d * unit_ball_volume(d);
  {
    // Radial profile is a polynomial of degree 5 + (d-1) in rho on the taper.
    const double taper_part = integrate_piecewise(
        [&](double rho) {
          return a * (1.0 - taper::value((rho - inner_radius) / w)) * std::pow(rho, d - 1);
        },
        inner_radius, outer_radius, {}, 16);
    meta.far_field_l1 = a * unit_ball_volume(d) * std::pow(inner_radius, d) + sphere * taper_part;
  }
  meta.gradient_lp_pp = [=](double p) {
    if (a == 0.0) return 0.0;
    return sphere * integrate_piecewise(
                        [&](double rho) {
                          const double g = a * taper::first((rho - inner_radius) / w) / w;
                          return std::pow(g, p) * std::pow(rho, d - 1);
                        },
                        inner_radius, outer_radius, {}, 96);
  };
  return TestFunction(std::make_shared<PlateauModel>(amplitude, inner_radius, outer_radius),
                      std::move(meta));
}

TestFunction make_ball_indicator(int d, double radius) {
  require_dim(d);
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("make_ball_indicator: radius must be positive");
  FunctionMetadata meta;
  meta.dim = d;
  meta.id = "indicator:d=" + std::to_string(d) + ":r=" + format_number(radius);
  meta.tag = SmoothnessTag::indicator;
  meta.support_radius = radius;
  meta.far_field = 0.0;
  meta.far_field_l1 = unit_ball_volume(d) * std::pow(radius, d);
  meta.feature_scale = radius;
  if (d == 1) meta.breakpoints = {-radius, radius};
  return TestFunction(std::make_shared<IndicatorModel>(radius), std::move(meta));
}

TestFunction translated(const TestFunction& f, std::vector<double> h) {
  if (h.size() != static_cast<std::size_t>(f.dim()))
    throw std::invalid_argument("translated: shift length must equal d");
  FunctionMetadata meta = f.metadata();
  meta.id = f.id() + "|shift=" + join_numbers(h);
  meta.tag = SmoothnessTag::custom;
  if (meta.support_radius) *meta.support_radius += norm(h);
  for (double& b : meta.breakpoints) b += h[0];
  return TestFunction(std::make_shared<TranslatedModel>(f.model(), std::move(h)),
                      std::move(meta));
}

TestFunction scaled(const TestFunction& f, double lambda) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("scaled: non-finite factor");
  FunctionMetadata meta = f.metadata();
  const double m = std::abs(lambda);
  meta.id = f.id() + "|scale=" + format_number(lambda);
  meta.tag = SmoothnessTag::custom;
  if (meta.grad_lipschitz) *meta.grad_lipschitz *= m;
  if (meta.grad_sup) *meta.grad_sup *= m;
  if (meta.far_field_l1) *meta.far_field_l1 *= m;
  meta.far_field *= lambda;
  if (f.metadata().gradient_lp_pp) {
    auto base = f.metadata().gradient_lp_pp;
    meta.gradient_lp_pp = [base, m](double p) { return std::pow(m, p) * base(p); };
  }
  return TestFunction(std::make_shared<ScaledModel>(f.model(), lambda), std::move(meta));
}

TestFunction dilated(const TestFunction& f, double s) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("dilated: factor must be positive");
  FunctionMetadata meta = f.metadata();
  const int d = f.dim();
  meta.id = f.id() + "|dilate=" + format_number(s);
  meta.tag = SmoothnessTag::custom;
  if (meta.grad_lipschitz) *meta.grad_lipschitz /= s * s;
  if (meta.grad_sup) *meta.grad_sup /= s;
  if (meta.support_radius) *meta.support_radius *= s;
  if (meta.feature_scale) *meta.feature_scale *= s;
  if (meta.far_field_l1) *meta.far_field_l1 *= std::pow(s, d);
  for (double& b : meta.breakpoints) b *= s;
  if (f.metadata().gradient_lp_pp) {
    auto base = f.metadata().gradient_lp_pp;
    meta.gradient_lp_pp = [base, s, d](double p) { return std::pow(s, d - p) * base(p); };
  }
  return TestFunction(std::make_shared<DilatedModel>(f.model(), s), std::move(meta));
}

namespace {

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw std::invalid_argument("bad number for '" + std::string(key) + "': '" +
                                std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

TestFunction parse_function_id(std::string_view id) {
  const auto parts = split(id, ':');
  const std::string_view kind = parts.front();
  std::map<std::string, std::string, std::less<>> kv;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("function id field '" + std::string(parts[i]) +
                                  "' is not key=value");
    kv.emplace(std::string(parts[i].substr(0, eq)), std::string(parts[i].substr(eq + 1)));
  }
  auto take = [&](std::string_view key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument("function id '" + std::string(id) + "' lacks '" +
                                  std::string(key) + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto finish = [&](TestFunction f) {
    if (!kv.empty())
      throw std::invalid_argument("function id '" + std::string(id) +
                                  "' has unknown field '" + kv.begin()->first + "'");
    return f;
  };

  if (kind == "linear" || kind == "plateau" || kind == "indicator" || kind == "constant") {
    const double dd = parse_double("d", take("d"));
    if (dd < 1 || dd != std::floor(dd) || dd > 64)
      throw std::invalid_argument("function id: d must be an integer in [1, 64]");
    const int d = static_cast<int>(dd);
    if (kind == "linear") {
      std::vector<double> v;
      for (auto c : split(take("v"), ',')) v.push_back(parse_double("v", c));
      return finish(make_linear(d, std::move(v)));
    }
    if (kind == "constant") return finish(make_constant(d, parse_double("c", take("c"))));
    if (kind == "plateau") {
      const double a = parse_double("a", take("a"));
      const double ri = parse_double("ri", take("ri"));
      const double ro = parse_double("ro", take("ro"));
      return finish(make_plateau_bump(d, a, ri, ro));
    }
    return finish(make_ball_indicator(d, parse_double("r", take("r"))));
  }
  throw std::invalid_argument("unknown function kind '" + std::string(kind) + "'");
}

std::vector<std::string> default_catalog_ids() {
  return {
      "constant:d=1:c=1",
      "constant:d=2:c=1",
      "linear:d=1:v=1",
      "linear:d=2:v=1,0",
      "linear:d=3:v=1,2,2",
      "plateau:d=1:a=1:ri=0.5:ro=1",
      "plateau:d=2:a=1:ri=0.5:ro=1",
      "plateau:d=3:a=1:ri=0.5:ro=1",
      "indicator:d=1:r=0.5",
      "indicator:d=2:r=1",
  };
}

}  // namespace osclab
