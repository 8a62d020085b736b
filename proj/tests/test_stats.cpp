#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alab/rng.hpp"
#include "alab/stats.hpp"

namespace alab {
namespace {

// Oracle: the Wilson bounds are the roots p of (p_hat - p)^2 = z^2 p (1 - p) / n,
// located by bisection on either side of p_hat.
double wilson_root(double p_hat, double n, double z, bool upper) {
  auto f = [&](double p) { return (p_hat - p) * (p_hat - p) - z * z * p * (1.0 - p) / n; };
  double a = upper ? p_hat : 0.0, b = upper ? 1.0 : p_hat;
  if (!upper && f(0.0) <= 0.0) return 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    const bool outside = f(mid) > 0.0;
    if (upper == outside) b = mid; else a = mid;
  }
  return 0.5 * (a + b);
}

TEST(Wilson, MatchesTheQuadraticRoots) {
  Engine engine = make_engine(3);
  std::uniform_int_distribution<std::uint64_t> n_dist(10, 100000);
  for (int c = 0; c < 200; ++c) {
    const std::uint64_t n = n_dist(engine);
    const std::uint64_t k = std::uniform_int_distribution<std::uint64_t>(1, n)(engine);
    const WilsonInterval w = wilson_interval(k, n);
    const double p = static_cast<double>(k) / static_cast<double>(n);
    EXPECT_NEAR(w.lo, wilson_root(p, static_cast<double>(n), kZ95, false), 1e-12);
    EXPECT_NEAR(w.hi, wilson_root(p, static_cast<double>(n), kZ95, true), 1e-12);
    EXPECT_FALSE(w.one_sided);
  }
}

TEST(Wilson, ZeroHitsUseTheOneSidedQuantile) {
  const WilsonInterval w = wilson_interval(0, 1000);
  EXPECT_EQ(w.lo, 0.0);
  EXPECT_TRUE(w.one_sided);
  const double z2 = kZ95OneSided * kZ95OneSided;
  EXPECT_NEAR(w.hi, z2 / (1000.0 + z2), 1e-15);
}

TEST(FitLine, ExactLineAndResiduals) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {1, 3, 5, 7};
  const LinearFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_NEAR(f.rms_residual, 0.0, 1e-14);
  EXPECT_EQ(f.points, 4u);
}

TEST(FitLine, NoisyLineHasPartialFit) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {0, 2, 1, 3};
  const LinearFit f = fit_line(x, y);
  // Oracle by hand: slope = 0.8, intercept = 0.3, R^2 = 0.64.
  EXPECT_NEAR(f.slope, 0.8, 1e-14);
  EXPECT_NEAR(f.intercept, 0.3, 1e-14);
  EXPECT_NEAR(f.r_squared, 0.64, 1e-14);
}

}  // namespace
}  // namespace alab
