#include <cmath>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <gtest/gtest.h>

#include "ngsvj/volatility_filter.hpp"
#include "test_support.hpp"

using namespace ngsvj;
using testing_support::ks_pvalue;
using testing_support::ks_statistic;
using testing_support::moments;

namespace {

FilterState constant_state(std::size_t n, double a, double b) {
  FilterState fs;
  fs.a.assign(n + 1, a);
  fs.b.assign(n + 1, b);
  return fs;
}

}  // namespace

TEST(ForwardFilter, SingleStep) {
  const ReturnsSeries y(std::vector<double>{2.0});
  const auto fs = forward_filter(y, 0.0, std::vector{0.0}, std::vector{1.0}, default_config());
  ASSERT_EQ(fs.steps(), 1u);
  EXPECT_DOUBLE_EQ(fs.a[0], 0.1);
  EXPECT_DOUBLE_EQ(fs.b[0], 0.1);
  EXPECT_NEAR(fs.a[1], 0.59, 1e-15);
  EXPECT_NEAR(fs.b[1], 2.09, 1e-15);
}

TEST(ForwardFilter, ZeroResidualsFollowGeometricRecursion) {
  const std::size_t n = 40;
  const std::vector<double> y(n, 0.7), jumps(n, 0.0), gamma(n, 1.0);
  auto cfg = default_config();
  const auto fs = forward_filter(ReturnsSeries(y), 0.7, jumps, gamma, cfg);
  for (std::size_t t = 0; t <= n; ++t) {
    const double wt = std::pow(cfg.omega, static_cast<double>(t));
    EXPECT_NEAR(fs.b[t], wt * cfg.b0, 1e-15);
    EXPECT_NEAR(fs.a[t], wt * cfg.a0 + 0.5 * (1.0 - wt) / (1.0 - cfg.omega), 1e-12);
  }
}

TEST(ForwardFilter, ThreeStepHandRecursion) {
  // residuals (1, -1, 2) around mu = 0.5
  const ReturnsSeries y(std::vector<double>{1.5, -0.5, 2.5});
  const auto fs = forward_filter(y, 0.5, std::vector{0.0, 0.0, 0.0}, std::vector{1.0, 2.0, 0.5}, default_config());
  const std::vector<double> a{0.1, 0.59, 1.031, 1.4279}, b{0.1, 0.59, 1.531, 2.3779};
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_NEAR(fs.a[t], a[t], 1e-12);
    EXPECT_NEAR(fs.b[t], b[t], 1e-12);
  }
}

TEST(ForwardFilter, JumpsShiftTheResidual) {
  const ReturnsSeries y(std::vector<double>{5.0});
  const auto fs = forward_filter(y, 0.0, std::vector{3.0}, std::vector{1.0}, default_config());
  EXPECT_NEAR(fs.b[1], 0.09 + 2.0, 1e-15);
}

TEST(ForwardFilter, LengthMismatchIsSizeError) {
  const ReturnsSeries y(std::vector<double>{1.0, 2.0});
  EXPECT_THROW(forward_filter(y, 0, std::vector{0.0}, std::vector{1.0, 1.0}, default_config()), SizeError);
  EXPECT_THROW(forward_filter(y, 0, std::vector{0.0, 0.0}, std::vector{1.0}, default_config()), SizeError);
}

TEST(ForwardFilter, RateIsFlooredAndStaysPositive) {
  const std::size_t n = 10000;
  const std::vector<double> y(n, 0.0), zeros(n, 0.0), ones(n, 1.0);
  const auto fs = forward_filter(ReturnsSeries(y), 0.0, zeros, ones, default_config());
  for (std::size_t t = 0; t <= n; ++t) {
    ASSERT_GT(fs.a[t], 0.0);
    ASSERT_GE(fs.b[t], kFilterRateFloor);
  }
  EXPECT_EQ(fs.b[n], kFilterRateFloor);
}

TEST(ForwardFilter, Deterministic) {
  RngStream rng(1, 0);
  std::vector<double> y(300), j(300, 0.0), g(300);
  for (std::size_t t = 0; t < y.size(); ++t) {
    y[t] = rng.standard_normal();
    g[t] = sample_gamma(15, 15, rng);
  }
  const auto a = forward_filter(ReturnsSeries(y), 0.1, j, g, default_config());
  const auto b = forward_filter(ReturnsSeries(y), 0.1, j, g, default_config());
  EXPECT_EQ(a, b);
}

TEST(BackwardSample, ConditionalMeanOfIncrement) {
  const auto fs = constant_state(2, 1.0, 1.0);
  RngStream rng(2, 0);
  std::vector<double> diff;
  for (int i = 0; i < 200000; ++i) {
    const auto lam = backward_sample(fs, default_config(), rng);
    diff.push_back(lam[0] - 0.9 * lam[1]);
  }
  const auto m = moments(diff);
  // eta ~ Gamma(0.1, 1): mean 0.1, variance 0.1
  EXPECT_NEAR(m.mean, 0.1, 4.0 * std::sqrt(0.1 / diff.size()));
}

TEST(BackwardSample, UnitDiscountHoldsPathConstant) {
  auto cfg = default_config();
  cfg.omega = 1.0;
  const std::size_t n = 50;
  RngStream rng(3, 0);
  std::vector<double> y(n), z(n, 0.0), g(n, 1.0);
  for (auto& v : y) v = rng.standard_normal();
  const auto fs = forward_filter(ReturnsSeries(y), 0.0, z, g, cfg);
  const auto lam = backward_sample(fs, cfg, rng);
  for (std::size_t t = 0; t < n; ++t) EXPECT_EQ(lam[t], lam[n - 1]);
}

TEST(BackwardSample, SingleStepMarginalMoments) {
  FilterState fs;
  fs.a = {0.1, 0.59};
  fs.b = {0.1, 2.09};
  RngStream rng(4, 0);
  std::vector<double> x;
  for (int i = 0; i < 100000; ++i) x.push_back(backward_sample(fs, default_config(), rng)[0]);
  const double a = 0.59, b = 2.09, n = static_cast<double>(x.size());
  const auto m = moments(x);
  EXPECT_NEAR(m.mean, a / b, 4.0 * std::sqrt(a / (b * b) / n));
  EXPECT_NEAR(m.variance, a / (b * b), 4.0 * std::sqrt((3.0 * a * (a + 2.0) / std::pow(b, 4) - a * a / std::pow(b, 4)) / n));
}

TEST(BackwardSample, TwoStepJointConsistency) {
  const ReturnsSeries y(std::vector<double>{1.2, -0.4});
  const auto cfg = default_config();
  const auto fs = forward_filter(y, 0.0, std::vector{0.0, 0.0}, std::vector{1.0, 1.0}, cfg);
  RngStream rng(5, 0);
  std::vector<double> last, incr;
  for (int i = 0; i < 200000; ++i) {
    const auto lam = backward_sample(fs, cfg, rng);
    last.push_back(lam[1]);
    incr.push_back(lam[0] - cfg.omega * lam[1]);
    ASSERT_GT(lam[0], 0.0);
  }
  boost::math::gamma_distribution<double> d(fs.a[2], 1.0 / fs.b[2]);
  EXPECT_GT(ks_pvalue(ks_statistic(last, [&](double v) { return boost::math::cdf(d, v); }), last.size()), 1e-3);
  const double shape = (1.0 - cfg.omega) * fs.a[1], rate = fs.b[1];
  EXPECT_NEAR(moments(incr).mean, shape / rate, 4.0 * std::sqrt(shape / (rate * rate) / incr.size()));
}

TEST(BackwardSample, ReproducibleAndPositive) {
  RngStream data(6, 0);
  const std::size_t n = 1000;
  std::vector<double> y(n), z(n, 0.0), g(n, 1.0);
  for (auto& v : y) v = 2.0 * data.standard_normal();
  const auto fs = forward_filter(ReturnsSeries(y), 0.0, z, g, default_config());
  RngStream r1(7, 3), r2(7, 3);
  const auto a = backward_sample(fs, default_config(), r1);
  const auto b = backward_sample(fs, default_config(), r2);
  EXPECT_EQ(a, b);
  for (double v : a) EXPECT_GT(v, 0.0);
}

TEST(BackwardSample, OutputLengthMustMatch) {
  const auto fs = constant_state(3, 1.0, 1.0);
  RngStream rng(8, 0);
  std::vector<double> out(2);
  EXPECT_THROW(backward_sample_into(fs, 0.9, rng, out), SizeError);
}
