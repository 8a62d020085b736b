#pragma once

#include <cstdint>
#include <span>

namespace alab {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;
/// One-sided 95% normal quantile.
inline constexpr double kZ95OneSided = 1.6448536269514722;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool one_sided = false;
};

/// Wilson score interval for a binomial proportion. With zero hits the
/// lower end is pinned at 0 and the upper end uses the one-sided quantile.
WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials,
                               double z = kZ95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace alab
