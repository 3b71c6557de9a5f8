#include "mfc/stats.hpp"

#include <cmath>
#include <vector>

#include "mfc/errors.hpp"
#include "mfc/measure.hpp"

namespace mfc {

MeanSe mean_se(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("mean_se: no values");
  const auto count = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / count;
  if (values.size() < 2) return {mean, 0.0};
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(dev) / (count - 1.0);
  return {mean, std::sqrt(var / count)};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::optional<std::span<const double>> weights) {
  const std::size_t k = x.size();
  if (k < 2 || y.size() != k || (weights && weights->size() != k)) {
    throw EstimationError("fit_line: need at least two matching points");
  }
  auto w = [&](std::size_t i) { return weights ? (*weights)[i] : 1.0; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w(i) * (x[i] - xbar) * (x[i] - xbar);
    sxy += w(i) * (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw EstimationError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.residual_ss += w(i) * r * r;
  }
  if (k > 2) fit.slope_se = std::sqrt(fit.residual_ss / static_cast<double>(k - 2) / sxx);
  return fit;
}

ProportionInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw ArgumentError("wilson_interval: no trials");
  const auto nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  return {p, centre - half, centre + half};
}

}  // namespace mfc
