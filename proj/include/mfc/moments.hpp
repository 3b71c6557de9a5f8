#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfc/cascade.hpp"
#include "mfc/covariance.hpp"

namespace mfc {

using Point = std::array<double, 3>;

/// rho(u_1..u_k, p) = E prod_j Lambda^{p_j}(u_j) for the log-normal scenario:
///   exp(-p sigma2 / 2) exp(1/2 (sum_j p_j^2 sigma2 + sum_{i != j} p_i p_j r(|u_i - u_j|)))
/// with p = sum_j p_j.
double lognormal_kpoint_moment(double sigma2, const std::function<double(double)>& r,
                               std::span<const Point> points, std::span<const double> p_vec);
double lognormal_kpoint_moment(const CovarianceModel& model, std::span<const Point> points,
                               std::span<const double> p_vec);

/// True iff rho >= 1 on the configuration and rho does not decrease when
/// points are appended one at a time.
bool weak_association_check(double sigma2, const std::function<double(double)>& r,
                            std::span<const Point> points, std::span<const double> p_vec);
bool weak_association_check(const CovarianceModel& model, std::span<const Point> points,
                            std::span<const double> p_vec);

struct ScenarioMoments {
  double q = 0.0;
  /// E Lambda^q(0).
  double value = 1.0;
  /// ln E Lambda^q(0), computed without cancellation for the Gaussian case.
  double log_value = 0.0;
};

ScenarioMoments lambda_q_moment(const Scenario& scenario, double q);

/// T(q) = q - 1 - log_b(E Lambda^q(0)) / n.
double renyi_theoretical(const Scenario& scenario, double q, int n, double b);

/// Which family of sufficient conditions a report checks.
enum class ConditionTarget {
  lp_convergence,
  lp_convergence_lognormal,
  rate_gamma,
  rate_geometric,
  subgaussian_series,
  lognormal_cascade
};
std::string_view to_string(ConditionTarget target);

/// Open interval (lo, hi); empty unless lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

struct NamedScalar {
  std::string name;
  double value = 0.0;
};

struct ConditionReport {
  ConditionTarget target = ConditionTarget::lognormal_cascade;
  double p = 2.0;
  double b = 2.0;
  int n = 1;
  double b_threshold = 1.0;
  bool b_ok = false;
  bool mixing_checkable = true;
  bool mixing_ok = false;
  /// Admissible gamma interval (max(1, n/alpha), n ln b / ln E Lambda^p);
  /// set only when nonempty.
  std::optional<Interval> gamma_window;
  std::optional<double> alpha_required;
  std::vector<NamedScalar> details;
  std::vector<std::string> notes;

  std::optional<double> detail(std::string_view name) const;
};

/// Existence and rate conditions at order p >= 2 for the configured scenario.
/// Summability is certified with 64 partial-sum terms plus a closed-form
/// tail bound; anything that cannot be certified is reported false with a note.
ConditionReport check_conditions(const CascadeConfig& config, double p);

struct RateForecast {
  double p = 2.0;
  /// ln E Lambda^p(0).
  double log_moment = 0.0;
  /// Per-level factor E Lambda^p / b^n of the geometric bound.
  double geo_factor = 0.0;
  /// Admissible gamma interval (max(1, n/alpha), n ln b / ln E Lambda^p).
  Interval gamma_window;
  /// gamma* = n / (n - log_b E Lambda^p), where both bounds coincide.
  double gamma_star = 0.0;
  std::optional<double> gamma;
  /// b^(-n/gamma) when gamma was given.
  std::optional<double> gamma_factor;
  bool gamma_admissible = false;
  /// b > (E Lambda^p)^(gamma / ((gamma - 1) n)); equivalent to gamma > gamma*.
  bool gamma_b_condition = false;
  /// Smallest per-level factor among the bounds whose hypotheses hold.
  double tightest_valid_factor = 0.0;
};

/// Requires p an even integer >= 2.
RateForecast rate_exponents(const CascadeConfig& config, double p,
                            std::optional<double> gamma = std::nullopt);

}  // namespace mfc
