#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfc {

enum class CovarianceFamily { exponential, powered_exponential, generalized_cauchy };

std::string_view to_string(CovarianceFamily family);
CovarianceFamily covariance_family_from_string(std::string_view name);

/// Isotropic covariance r(h) of the latent field X.
///
/// All offered families are nonnegative and nonincreasing in h:
///   exponential          sigma2 * exp(-h/ell)
///   powered_exponential  sigma2 * exp(-(h/ell)^kappa),   kappa in (0, 2]
///   generalized_cauchy   sigma2 / (1 + (h/ell)^alpha),   alpha > 0
///
/// sigma2 = 0 is accepted as the degenerate (deterministic) field.
struct CovarianceModel {
  CovarianceFamily family = CovarianceFamily::exponential;
  double sigma2 = 0.0;
  double ell = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;

  static CovarianceModel exponential(double sigma2, double ell);
  static CovarianceModel powered_exponential(double sigma2, double ell, double kappa);
  static CovarianceModel generalized_cauchy(double sigma2, double ell, double alpha);

  /// Throws ParameterError when a field is outside its domain.
  void validate() const;

  double operator()(double h) const;
};

double evaluate(const CovarianceModel& model, double h);

/// Result of scanning r over a sorted grid of distances.
struct MonotoneReport {
  bool ok = true;
  /// Index into the grid of the first offending point.
  std::optional<std::size_t> violation_index;
  std::string reason;
};

MonotoneReport check_monotone_nonnegative(const std::function<double(double)>& r,
                                          std::span<const double> h_grid);
MonotoneReport check_monotone_nonnegative(const CovarianceModel& model,
                                          std::span<const double> h_grid);

/// Polynomial tail exponent alpha with r(h) <= C h^-alpha; +infinity for the
/// super-polynomially decaying families.
std::optional<double> decay_exponent(const CovarianceModel& model);

struct MixingSumReport {
  /// partial_sums[I] = sum_{i=0}^{I} r(sqrt(n) b^i).
  std::vector<double> partial_sums;
  /// Bound on the remainder sum_{i > i_max} r(sqrt(n) b^i).
  double tail_bound = 0.0;
  bool summable = false;

  double total_upper_bound() const { return partial_sums.back() + tail_bound; }
};

MixingSumReport mixing_sum(const CovarianceModel& model, double b, int n, int i_max);

/// Partial sums of sigma2 - r(sqrt(n) b^-i), i = 1..i_max, with a
/// continuity-modulus bound on the remainder.
MixingSumReport modulus_sum(const CovarianceModel& model, double b, int n, int i_max);

/// Piecewise-linear covariance given on a table of distances; used for
/// hand-built counterexamples. Not accepted by the samplers.
class TabulatedCovariance {
 public:
  TabulatedCovariance(std::vector<double> h, std::vector<double> r);

  double operator()(double h) const;
  double sigma2() const { return r_.front(); }

 private:
  std::vector<double> h_;
  std::vector<double> r_;
};

}  // namespace mfc
