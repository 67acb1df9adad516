#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "osclab/ball_quadrature.hpp"
#include "osclab/errors.hpp"
#include "osclab/line_rules.hpp"
#include "osclab/rng.hpp"

using namespace osclab;

namespace {

double dot_offset(std::span<const double> x, std::span<const double> a,
                  std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += v[k] * (x[k] - a[k]);
  return s;
}

}  // namespace

TEST(BallAverage, ConstantIsExact) {
  const auto five = [](std::span<const double>) { return 5.0; };
  const auto g = ball_average(five, {{0.3}, 2.0}, QuadratureSpec::gauss(4));
  EXPECT_DOUBLE_EQ(g.value, 5.0);
  EXPECT_EQ(g.std_error, 0.0);
  const auto m = ball_average(five, {{0.3, 1.0, -2.0}, 0.7}, QuadratureSpec::monte_carlo(1000, 3));
  EXPECT_DOUBLE_EQ(m.value, 5.0);
  EXPECT_EQ(m.std_error, 0.0);
}

TEST(BallAverage, OddIntegrandAveragesToZero) {
  const std::vector<double> a{0.4, -1.0};
  const std::vector<double> v{1.0, 2.0};
  const auto est = ball_average([&](std::span<const double> x) { return dot_offset(x, a, v); },
                                {a, 1.5}, QuadratureSpec::monte_carlo(20000, 9));
  EXPECT_LE(std::abs(est.value), 4.0 * est.std_error);
  const auto exact =
      ball_average([&](std::span<const double> x) { return x[0] - 0.4; }, {{0.4}, 1.5},
                   QuadratureSpec::gauss(3));
  EXPECT_NEAR(exact.value, 0.0, 1e-15);
}

TEST(BallAverage, AbsoluteOffsetInOneDimension) {
  // avg of |x - a| over (a - 2, a + 2) = c'_1 * 2 = 1.
  const auto est = ball_average([](std::span<const double> x) { return std::abs(x[0] - 0.25); },
                                {{0.25}, 2.0}, QuadratureSpec::gauss(4), std::vector<double>{0.25});
  EXPECT_NEAR(est.value, 1.0, 1e-14);
}

TEST(BallAverage, GaussIsExactForPolynomialsUpToDegree2nMinus1) {
  for (int n : {2, 4, 8, 16}) {
    const int degree = 2 * n - 1;
    // avg of x^k over (0, 2): 2^k / (k + 1)
    const auto est = ball_average(
        [&](std::span<const double> x) { return std::pow(x[0], degree); }, {{1.0}, 1.0},
        QuadratureSpec::gauss(n));
    const double exact = std::pow(2.0, degree) / (degree + 1);
    EXPECT_LE(std::abs(est.value - exact) / exact, 1e-12) << "n=" << n;
  }
}

TEST(BallAverage, ErrorHonestyOnLinearOracle) {
  // |x - a| in d = 1 against the exact value r / 2 over 500 seeds.
  int covered = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto est = ball_average([](std::span<const double> x) { return std::abs(x[0]); },
                                  {{0.0}, 2.0}, QuadratureSpec::monte_carlo(256, s));
    if (std::abs(est.value - 1.0) <= 4.0 * est.std_error) ++covered;
  }
  EXPECT_GE(covered, 475);
}

TEST(BallAverage, NonFiniteIntegrandIsAnError) {
  const auto bad = [](std::span<const double> x) { return x[0] > 0.0 ? NAN : 1.0; };
  EXPECT_THROW(ball_average(bad, {{0.0}, 1.0}, QuadratureSpec::gauss(4)), NumericalError);
  EXPECT_THROW(ball_average(bad, {{0.0, 0.0}, 1.0}, QuadratureSpec::monte_carlo(64, 1)),
               NumericalError);
}

TEST(BallAverage, SpecValidation) {
  const auto one = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(ball_average(one, {{0.0, 0.0}, 1.0}, QuadratureSpec::gauss(4)),
               std::invalid_argument);
  EXPECT_THROW(ball_average(one, {{0.0}, 1.0}, QuadratureSpec::monte_carlo(1, 1)),
               std::invalid_argument);
  EXPECT_THROW(ball_average(one, {{0.0}, 0.0}, QuadratureSpec::gauss(4)), std::invalid_argument);
  EXPECT_THROW(ball_average(one, {{0.0}, -1.0}, QuadratureSpec::gauss(4)), std::invalid_argument);
}

TEST(BallAverage, DeterministicPerSeed) {
  const auto g = [](std::span<const double> x) { return std::sin(x[0]) * std::cos(x[1]); };
  const BallSample ball{{0.2, 0.3}, 0.9};
  const auto a = ball_average(g, ball, QuadratureSpec::monte_carlo(5000, 77));
  const auto b = ball_average(g, ball, QuadratureSpec::monte_carlo(5000, 77));
  const auto c = ball_average(g, ball, QuadratureSpec::monte_carlo(5000, 78));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(a.value, c.value);
}

TEST(SampleBall, PointsLieInsideTheBall) {
  for (int d : {1, 2, 3, 5}) {
    const BallSample ball{std::vector<double>(static_cast<std::size_t>(d), 0.5), 0.3};
    for (const auto& x : sample_ball_uniform(ball, 2000, 4)) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += (x[k] - 0.5) * (x[k] - 0.5);
      ASSERT_LT(std::sqrt(s), 0.3);
    }
  }
}

TEST(SampleBall, RadialLawMatchesUniformVolume) {
  // P(|x - a| < s r) = s^d
  const int d = 3;
  const auto pts = sample_ball_uniform({{0.0, 0.0, 0.0}, 1.0}, 100000, 21);
  int inside = 0;
  for (const auto& x : pts)
    if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 0.25) ++inside;
  EXPECT_NEAR(inside / 100000.0, std::pow(0.5, d), 4e-3);
}

TEST(SampleBall, OneDimensionalIsUniformOnTheInterval) {
  const auto pts = sample_ball_uniform({{1.0}, 2.0}, 100000, 8);
  std::vector<int> bins(10, 0);
  for (const auto& x : pts) ++bins[static_cast<std::size_t>((x[0] + 1.0) / 4.0 * 10.0)];
  for (int b : bins) EXPECT_NEAR(b / 100000.0, 0.1, 5e-3);
}

TEST(SampleBall, EmpiricalMeanConcentrates) {
  // |mean - a| <= 5 r / sqrt(n) in at least 99% of 1000 seeds.
  const int n = 400;
  const std::vector<double> a{1.0, -2.0};
  int ok = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto pts = sample_ball_uniform({a, 1.0}, n, s);
    double m0 = 0.0, m1 = 0.0;
    for (const auto& x : pts) {
      m0 += x[0];
      m1 += x[1];
    }
    m0 = m0 / n - a[0];
    m1 = m1 / n - a[1];
    if (std::sqrt(m0 * m0 + m1 * m1) <= 5.0 / std::sqrt(n)) ++ok;
  }
  EXPECT_GE(ok, 990);
}

TEST(LineRules, SplitPointsKeepsInteriorBreaksOnly) {
  const std::vector<double> breaks{-5.0, 0.0, 0.5, 2.0};
  const auto cuts = split_points(-1.0, 1.0, breaks);
  EXPECT_EQ(cuts, (std::vector<double>{-1.0, 0.0, 0.5, 1.0}));
}

TEST(LineRules, WeightsSumToTwo) {
  for (int n = 1; n <= 64; n *= 2) {
    double s = 0.0;
    for (double w : gauss_legendre(n).weights) s += w;
    EXPECT_NEAR(s, 2.0, 1e-14) << n;
  }
}
