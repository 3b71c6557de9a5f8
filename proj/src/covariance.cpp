#include "mfc/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/expint.hpp>

#include "mfc/errors.hpp"

namespace mfc {

std::string_view to_string(CovarianceFamily family) {
  switch (family) {
    case CovarianceFamily::exponential:
      return "exponential";
    case CovarianceFamily::powered_exponential:
      return "powered_exponential";
    case CovarianceFamily::generalized_cauchy:
      return "generalized_cauchy";
  }
  return "unknown";
}

CovarianceFamily covariance_family_from_string(std::string_view name) {
  if (name == "exponential") return CovarianceFamily::exponential;
  if (name == "powered_exponential") return CovarianceFamily::powered_exponential;
  if (name == "generalized_cauchy") return CovarianceFamily::generalized_cauchy;
  throw ParameterError("unknown covariance family '" + std::string(name) + "'");
}

CovarianceModel CovarianceModel::exponential(double sigma2, double ell) {
  CovarianceModel m{CovarianceFamily::exponential, sigma2, ell};
  m.validate();
  return m;
}

CovarianceModel CovarianceModel::powered_exponential(double sigma2, double ell, double kappa) {
  CovarianceModel m{CovarianceFamily::powered_exponential, sigma2, ell, kappa};
  m.validate();
  return m;
}

CovarianceModel CovarianceModel::generalized_cauchy(double sigma2, double ell, double alpha) {
  CovarianceModel m{CovarianceFamily::generalized_cauchy, sigma2, ell, 1.0, alpha};
  m.validate();
  return m;
}

void CovarianceModel::validate() const {
  if (!std::isfinite(sigma2) || sigma2 < 0.0) {
    throw ParameterError("covariance: sigma2 must be finite and >= 0");
  }
  if (!std::isfinite(ell) || ell <= 0.0) {
    throw ParameterError("covariance: ell must be finite and > 0");
  }
  if (family == CovarianceFamily::powered_exponential && !(kappa > 0.0 && kappa <= 2.0)) {
    throw ParameterError("covariance: kappa must lie in (0, 2]");
  }
  if (family == CovarianceFamily::generalized_cauchy && !(alpha > 0.0 && std::isfinite(alpha))) {
    throw ParameterError("covariance: alpha must be finite and > 0");
  }
}

double CovarianceModel::operator()(double h) const {
  if (!(h >= 0.0)) throw ArgumentError("covariance: distance must be >= 0");
  if (h == 0.0) return sigma2;
  const double x = h / ell;
  switch (family) {
    case CovarianceFamily::exponential:
      return sigma2 * std::exp(-x);
    case CovarianceFamily::powered_exponential:
      return sigma2 * std::exp(-std::pow(x, kappa));
    case CovarianceFamily::generalized_cauchy:
      return sigma2 / (1.0 + std::pow(x, alpha));
  }
  return 0.0;
}

double evaluate(const CovarianceModel& model, double h) {
  model.validate();
  return model(h);
}

MonotoneReport check_monotone_nonnegative(const std::function<double(double)>& r,
                                          std::span<const double> h_grid) {
  if (h_grid.empty()) throw ArgumentError("check_monotone_nonnegative: empty grid");
  MonotoneReport report;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    if (k > 0 && h_grid[k] < h_grid[k - 1]) {
      throw ArgumentError("check_monotone_nonnegative: grid must be sorted ascending");
    }
    const double v = r(h_grid[k]);
    if (v < 0.0) {
      report = {false, k, "negative value"};
      return report;
    }
    if (v > prev) {
      report = {false, k, "increase"};
      return report;
    }
    prev = v;
  }
  return report;
}

MonotoneReport check_monotone_nonnegative(const CovarianceModel& model,
                                          std::span<const double> h_grid) {
  model.validate();
  return check_monotone_nonnegative([&model](double h) { return model(h); }, h_grid);
}

std::optional<double> decay_exponent(const CovarianceModel& model) {
  switch (model.family) {
    case CovarianceFamily::generalized_cauchy:
      return model.alpha;
    case CovarianceFamily::exponential:
    case CovarianceFamily::powered_exponential:
      return std::numeric_limits<double>::infinity();
  }
  return std::nullopt;
}

namespace {

// Integral of r(c b^x) over x in [start, inf), which dominates the sum over
// integers i > start because the integrand is nonincreasing in x.
double tail_integral(const CovarianceModel& model, double c, double b, double start) {
  if (model.sigma2 == 0.0) return 0.0;
  const double lnb = std::log(b);
  const double u0 = c * std::pow(b, start) / model.ell;
  switch (model.family) {
    case CovarianceFamily::exponential:
      return model.sigma2 * boost::math::expint(1, u0) / lnb;
    case CovarianceFamily::powered_exponential:
      return model.sigma2 * boost::math::expint(1, std::pow(u0, model.kappa)) /
             (model.kappa * lnb);
    case CovarianceFamily::generalized_cauchy:
      return model.sigma2 * std::log1p(1.0 / std::pow(u0, model.alpha)) / (model.alpha * lnb);
  }
  return std::numeric_limits<double>::infinity();
}

void check_mixing_args(const CovarianceModel& model, double b, int n, int i_max) {
  model.validate();
  if (!(b > 1.0) || !std::isfinite(b)) throw ParameterError("mixing_sum: b must be > 1");
  if (n < 1 || n > 3) throw ParameterError("mixing_sum: n must be 1, 2 or 3");
  if (i_max < 1) throw ArgumentError("mixing_sum: i_max must be >= 1");
}

}  // namespace

MixingSumReport mixing_sum(const CovarianceModel& model, double b, int n, int i_max) {
  check_mixing_args(model, b, n, i_max);
  const double c = std::sqrt(static_cast<double>(n));
  MixingSumReport report;
  report.partial_sums.reserve(static_cast<std::size_t>(i_max) + 1);
  double s = 0.0;
  for (int i = 0; i <= i_max; ++i) {
    s += model(c * std::pow(b, i));
    report.partial_sums.push_back(s);
  }
  report.tail_bound = tail_integral(model, c, b, static_cast<double>(i_max));
  report.summable = std::isfinite(report.tail_bound);
  return report;
}

namespace {

// sigma2 - r(h) without cancellation at small h.
double deficit(const CovarianceModel& model, double h) {
  const double x = h / model.ell;
  switch (model.family) {
    case CovarianceFamily::exponential: return -model.sigma2 * std::expm1(-x);
    case CovarianceFamily::powered_exponential: return -model.sigma2 * std::expm1(-std::pow(x, model.kappa));
    case CovarianceFamily::generalized_cauchy: {
      const double xa = std::pow(x, model.alpha);
      return model.sigma2 * xa / (1.0 + xa);
    }
  }
  return 0.0;
}

}  // namespace

MixingSumReport modulus_sum(const CovarianceModel& model, double b, int n, int i_max) {
  check_mixing_args(model, b, n, i_max);
  const double c = std::sqrt(static_cast<double>(n));
  MixingSumReport report;
  report.partial_sums.reserve(static_cast<std::size_t>(i_max) + 1);
  // partial_sums[0] is the empty sum; the series starts at i = 1.
  double s = 0.0;
  report.partial_sums.push_back(s);
  for (int i = 1; i <= i_max; ++i) {
    s += deficit(model, c * std::pow(b, -i));
    report.partial_sums.push_back(s);
  }
  // sigma2 - r(h) <= sigma2 (h/ell)^e with e = 1, kappa, alpha.
  double e = 1.0;
  if (model.family == CovarianceFamily::powered_exponential) e = model.kappa;
  if (model.family == CovarianceFamily::generalized_cauchy) e = model.alpha;
  const double ratio = std::pow(b, -e);
  report.tail_bound = model.sigma2 * std::pow(c / model.ell, e) *
                      std::pow(b, -e * (i_max + 1)) / (1.0 - ratio);
  report.summable = std::isfinite(report.tail_bound);
  return report;
}

TabulatedCovariance::TabulatedCovariance(std::vector<double> h, std::vector<double> r)
    : h_(std::move(h)), r_(std::move(r)) {
  if (h_.empty() || h_.size() != r_.size()) {
    throw ArgumentError("TabulatedCovariance: tables must be nonempty and of equal length");
  }
  if (h_.front() != 0.0) throw ArgumentError("TabulatedCovariance: table must start at h = 0");
  if (!std::is_sorted(h_.begin(), h_.end())) {
    throw ArgumentError("TabulatedCovariance: distances must be ascending");
  }
}

double TabulatedCovariance::operator()(double h) const {
  if (h >= h_.back()) return r_.back();
  const auto it = std::upper_bound(h_.begin(), h_.end(), h);
  const auto k = static_cast<std::size_t>(it - h_.begin());
  const double w = (h - h_[k - 1]) / (h_[k] - h_[k - 1]);
  return (1.0 - w) * r_[k - 1] + w * r_[k];
}

}  // namespace mfc
