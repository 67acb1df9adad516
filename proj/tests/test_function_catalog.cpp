#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "osclab/errors.hpp"
#include "osclab/function_catalog.hpp"
#include "osclab/rng.hpp"

using namespace osclab;

namespace {

double at(const TestFunction& f, std::vector<double> x) { return f(x); }

std::vector<double> random_point(CounterRng& rng, int d, double half) {
  std::vector<double> x(static_cast<std::size_t>(d));
  for (double& v : x) v = -half + 2.0 * half * rng.uniform();
  return x;
}

std::vector<TestFunction> differentiable_entries() {
  std::vector<TestFunction> out;
  for (const auto& id : default_catalog_ids()) {
    TestFunction f = parse_function_id(id);
    if (f.differentiable()) out.push_back(f);
  }
  out.push_back(translated(make_plateau_bump(2, 1.5, 0.3, 0.9), {0.2, -0.1}));
  out.push_back(dilated(make_plateau_bump(1, 1.0, 0.5, 1.0), 2.0));
  out.push_back(scaled(make_plateau_bump(3, 1.0, 0.5, 1.0), -0.7));
  return out;
}

}  // namespace

TEST(Linear, Examples) {
  const TestFunction f = make_linear(1, {1.0});
  EXPECT_DOUBLE_EQ(at(f, {0.5}), 0.5);
  EXPECT_EQ(f.grad(std::vector<double>{0.3}), std::vector<double>{1.0});
  EXPECT_EQ(f.grad_lipschitz(), 0.0);
  EXPECT_FALSE(f.support_radius().has_value());

  const TestFunction zero = make_linear(2, {0.0, 0.0});
  EXPECT_EQ(at(zero, {3.0, -2.0}), 0.0);
  EXPECT_EQ(zero.grad_norm(std::vector<double>{1.0, 1.0}), 0.0);

  const TestFunction g = make_linear(3, {1.0, 2.0, 2.0});
  EXPECT_DOUBLE_EQ(g.grad_norm(std::vector<double>{5.0, -1.0, 0.25}), 3.0);
}

TEST(Linear, RejectsBadInput) {
  EXPECT_THROW(make_linear(0, {}), std::invalid_argument);
  EXPECT_THROW(make_linear(2, {1.0}), std::invalid_argument);
}

TEST(Plateau, Examples) {
  const TestFunction f = make_plateau_bump(2, 1.5, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(at(f, {0.0, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(at(f, {0.3, 0.1}), 1.5);
  EXPECT_EQ(at(f, {1.2, 0.0}), 0.0);
  const auto g = f.grad(std::vector<double>{2.0, 0.0});
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(f.support_radius(), 1.0);
  EXPECT_EQ(f.smoothness(), SmoothnessTag::smooth_compact_gradient);
}

TEST(Plateau, RejectsBadRadii) {
  EXPECT_THROW(make_plateau_bump(1, 1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_plateau_bump(1, 1.0, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_plateau_bump(1, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_plateau_bump(1, 1.0, 1.5, 1.0), std::invalid_argument);
}

TEST(Plateau, GradientL2NormMatchesAdaptiveQuadrature) {
  const TestFunction f = make_plateau_bump(1, 1.0, 0.5, 1.0);
  auto integrand = [&](double x) {
    const double g = f.grad(std::vector<double>{x})[0];
    return g * g;
  };
  double err = 0.0;
  const double oracle =
      2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.5, 1.0, 15,
                                                                         1e-14, &err);
  ASSERT_LT(err, 1e-10);
  EXPECT_NEAR(*f.gradient_lp_pp(2.0), oracle, 1e-10);
  // 4 * 900 * B(5,5) = 40/7
  EXPECT_NEAR(oracle, 40.0 / 7.0, 1e-10);
}

TEST(Plateau, RadialGradientNormsInHigherDimensions) {
  const TestFunction f = make_plateau_bump(2, 1.0, 0.5, 1.0);
  auto integrand = [&](double rho) {
    const double g = f.grad_norm(std::vector<double>{rho, 0.0});
    return 2.0 * M_PI * rho * g * g;
  };
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.5, 1.0, 15, 1e-14);
  EXPECT_NEAR(*f.gradient_lp_pp(2.0), oracle, 1e-9 * oracle);
}

TEST(Plateau, FarFieldL1MatchesQuadrature) {
  const TestFunction f = make_plateau_bump(1, 2.0, 0.5, 1.0);
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return std::abs(f(std::vector<double>{x})); }, -1.0, 1.0, 15, 1e-14);
  EXPECT_NEAR(*f.metadata().far_field_l1, oracle, 1e-10);
}

TEST(Indicator, ValuesAndBoundaryConvention) {
  const TestFunction f = make_ball_indicator(1, 0.5);
  EXPECT_EQ(at(f, {0.0}), 1.0);
  EXPECT_EQ(at(f, {1.0}), 0.0);
  EXPECT_EQ(at(f, {0.5}), 1.0);
  const TestFunction g = make_ball_indicator(2, 1.0);
  EXPECT_EQ(at(g, {1.0, 0.0}), 1.0);
  EXPECT_EQ(at(g, {1.0 + 1e-12, 0.0}), 0.0);
  EXPECT_FALSE(g.differentiable());
  EXPECT_THROW(g.grad(std::vector<double>{0.0, 0.0}), UnsupportedFunction);
  EXPECT_EQ(g.smoothness(), SmoothnessTag::indicator);
  EXPECT_EQ(g.support_radius(), 1.0);
  EXPECT_THROW(make_ball_indicator(1, 0.0), std::invalid_argument);
}

TEST(Catalog, ParsesIdentifiersAndRejectsGarbage) {
  EXPECT_GE(default_catalog_ids().size(), 6u);
  for (const auto& id : default_catalog_ids()) EXPECT_EQ(parse_function_id(id).id(), id);
  EXPECT_EQ(parse_function_id("linear:d=2:v=1,0").dim(), 2);
  EXPECT_THROW(parse_function_id("wave:d=1"), std::invalid_argument);
  EXPECT_THROW(parse_function_id("linear:d=2"), std::invalid_argument);
  EXPECT_THROW(parse_function_id("linear:d=2:v=1"), std::invalid_argument);
  EXPECT_THROW(parse_function_id("plateau:d=1:a=1:ri=0.5:ro=1:x=3"), std::invalid_argument);
  EXPECT_THROW(parse_function_id("indicator:d=1:r=abc"), std::invalid_argument);
  EXPECT_THROW(parse_function_id("indicator:d=0:r=1"), std::invalid_argument);
}

TEST(CatalogProperty, FiniteDifferencesMatchGradient) {
  for (const TestFunction& f : differentiable_entries()) {
    SCOPED_TRACE(f.id());
    CounterRng rng(derive_seed(11, f.dim()));
    const int d = f.dim();
    const double h = 1e-4;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x = random_point(rng, d, 1.5 * f.support_radius().value_or(1.0));
      const auto g = f.grad(x);
      double gnorm = 0.0;
      for (double v : g) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      for (int k = 0; k < d; ++k) {
        auto xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const double fd = (f(xp) - f(xm)) / (2.0 * h);
        ASSERT_LE(std::abs(fd - g[k]), 1e-5 * (1.0 + gnorm)) << "component " << k;
      }
    }
  }
}

TEST(CatalogProperty, FiniteDifferenceErrorIsSecondOrder) {
  const TestFunction f = make_plateau_bump(1, 1.0, 0.5, 1.0);
  const std::vector<double> x{0.71};
  const double g = f.grad(x)[0];
  auto err = [&](double h) {
    return std::abs((at(f, {x[0] + h}) - at(f, {x[0] - h})) / (2.0 * h) - g);
  };
  const double ratio = err(1e-2) / err(5e-3);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(CatalogProperty, LipschitzCertificateHolds) {
  for (const TestFunction& f : differentiable_entries()) {
    if (!f.grad_lipschitz()) continue;
    SCOPED_TRACE(f.id());
    const int d = f.dim();
    const double A = *f.grad_lipschitz();
    CounterRng rng(derive_seed(12, d));
    const double half = 1.2 * f.support_radius().value_or(1.0);
    for (int i = 0; i < 10000; ++i) {
      const auto x = random_point(rng, d, half);
      auto y = x;
      const double step = (i % 2 == 0) ? 1e-2 : 0.5;
      for (double& v : y) v += step * (2.0 * rng.uniform() - 1.0);
      const auto gx = f.grad(x);
      const auto gy = f.grad(y);
      double dg = 0.0, dx = 0.0;
      for (int k = 0; k < d; ++k) {
        dg += (gx[k] - gy[k]) * (gx[k] - gy[k]);
        dx += (x[k] - y[k]) * (x[k] - y[k]);
      }
      ASSERT_LE(std::sqrt(dg), A * std::sqrt(dx) * (1.0 + 1e-12) + 1e-14);
    }
  }
}

TEST(CatalogProperty, GradientVanishesOutsideSupport) {
  for (const TestFunction& f : differentiable_entries()) {
    if (!f.support_radius()) continue;
    SCOPED_TRACE(f.id());
    const int d = f.dim();
    const double R0 = *f.support_radius();
    CounterRng rng(derive_seed(13, d));
    for (int i = 0; i < 5000; ++i) {
      std::vector<double> x(static_cast<std::size_t>(d));
      double n = 0.0;
      for (double& v : x) {
        v = rng.normal();
        n += v * v;
      }
      const double radius = R0 * (1.0 + 3.0 * rng.uniform());
      for (double& v : x) v *= radius / std::sqrt(n);
      for (double g : f.grad(x)) ASSERT_EQ(g, 0.0);
      ASSERT_EQ(f(x), f.metadata().far_field);
    }
  }
}

TEST(Transforms, MetadataFollowsTheMaps) {
  const TestFunction f = make_plateau_bump(2, 1.0, 0.5, 1.0);
  const TestFunction g = dilated(f, 3.0);
  EXPECT_DOUBLE_EQ(*g.support_radius(), 3.0);
  EXPECT_DOUBLE_EQ(at(g, {1.5, 0.0}), at(f, {0.5, 0.0}));
  EXPECT_NEAR(*g.gradient_lp_pp(2.0), *f.gradient_lp_pp(2.0), 1e-12);  // s^{d-p} = 1
  const TestFunction h = scaled(f, 2.0);
  EXPECT_NEAR(*h.gradient_lp_pp(3.0), 8.0 * *f.gradient_lp_pp(3.0), 1e-12);
  const TestFunction t = translated(f, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(at(t, {1.0, 1.0}), 1.0);
  EXPECT_NEAR(*t.support_radius(), 1.0 + std::sqrt(2.0), 1e-15);
}

TEST(Taper, ClosedFormBounds) {
  double max_first = 0.0, max_second = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = i / 100000.0;
    max_first = std::max(max_first, taper::first(t));
    max_second = std::max(max_second, std::abs(taper::second(t)));
  }
  EXPECT_NEAR(max_first, taper::kMaxFirst, 1e-9);
  EXPECT_NEAR(max_second, taper::kMaxSecond, 1e-8);
  EXPECT_LE(max_second, taper::kMaxSecond);
  EXPECT_EQ(taper::value(0.0), 0.0);
  EXPECT_EQ(taper::value(1.0), 1.0);
}
