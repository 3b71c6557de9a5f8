#pragma once

#include <optional>
#include <span>

namespace mfc {

struct MeanSe {
  double mean = 0.0;
  /// Standard error of the mean (sample standard deviation / sqrt(count)).
  double se = 0.0;
};

/// Mean and standard error with pairwise summation (order-stable).
MeanSe mean_se(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double residual_ss = 0.0;
};

/// Least-squares line y = intercept + slope x. With weights, weighted least
/// squares; the slope standard error uses the residual-based scale estimate
/// (zero for an exact fit).
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::optional<std::span<const double>> weights = std::nullopt);

struct ProportionInterval {
  double proportion = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval at normal quantile z.
ProportionInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

}  // namespace mfc
