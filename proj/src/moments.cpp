#include "mfc/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfc/errors.hpp"

namespace mfc {

namespace {

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < 3; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

double log_kpoint_moment(double sigma2, const std::function<double(double)>& r,
                         std::span<const Point> points, std::span<const double> p_vec) {
  double p = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    p += p_vec[i];
    quad += p_vec[i] * p_vec[i] * sigma2;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i != j) quad += p_vec[i] * p_vec[j] * r(distance(points[i], points[j]));
    }
  }
  return 0.5 * quad - 0.5 * p * sigma2;
}

void check_kpoint_args(std::span<const Point> points, std::span<const double> p_vec) {
  if (points.empty()) throw ArgumentError("k-point moment: need at least one point");
  if (points.size() != p_vec.size()) {
    throw ArgumentError("k-point moment: points and exponents differ in length");
  }
  for (double v : p_vec) {
    if (!std::isfinite(v)) throw ArgumentError("k-point moment: exponents must be finite");
  }
}

}  // namespace

double lognormal_kpoint_moment(double sigma2, const std::function<double(double)>& r,
                               std::span<const Point> points, std::span<const double> p_vec) {
  check_kpoint_args(points, p_vec);
  return std::exp(log_kpoint_moment(sigma2, r, points, p_vec));
}

double lognormal_kpoint_moment(const CovarianceModel& model, std::span<const Point> points,
                               std::span<const double> p_vec) {
  model.validate();
  return lognormal_kpoint_moment(model.sigma2, [&model](double h) { return model(h); }, points,
                                 p_vec);
}

bool weak_association_check(double sigma2, const std::function<double(double)>& r,
                            std::span<const Point> points, std::span<const double> p_vec) {
  check_kpoint_args(points, p_vec);
  constexpr double kSlack = 1e-14;
  double previous = 0.0;  // log of the empty product
  for (std::size_t l = 1; l <= points.size(); ++l) {
    const double current = log_kpoint_moment(sigma2, r, points.first(l), p_vec.first(l));
    if (current < previous - kSlack) return false;
    previous = current;
  }
  return previous >= -kSlack;
}

bool weak_association_check(const CovarianceModel& model, std::span<const Point> points,
                            std::span<const double> p_vec) {
  model.validate();
  return weak_association_check(model.sigma2, [&model](double h) { return model(h); }, points,
                                p_vec);
}

ScenarioMoments lambda_q_moment(const Scenario& scenario, double q) {
  if (!std::isfinite(q)) throw MomentError("lambda_q_moment: q must be finite");
  ScenarioMoments out{q, 1.0, 0.0};
  if (const auto* g = std::get_if<GeometricGaussian>(&scenario)) {
    g->covariance.validate();
    out.log_value = 0.5 * q * (q - 1.0) * g->covariance.sigma2;
  } else {
    const auto& s = std::get<SubGaussianSeries>(scenario).series;
    s.validate();
    if (q == 0.0 || q == 1.0) return out;
    double log_value = 0.0;
    try {
      for (double a : s.amplitudes) {
        log_value += std::log(s.innovation.mgf(q * a)) - q * std::log(s.innovation.mgf(a));
      }
    } catch (const NormalizerError& e) {
      throw MomentError(std::string("lambda_q_moment: ") + e.what());
    }
    out.log_value = log_value;
  }
  out.value = std::exp(out.log_value);
  if (!std::isfinite(out.value)) throw MomentError("lambda_q_moment: moment overflows");
  return out;
}

double renyi_theoretical(const Scenario& scenario, double q, int n, double b) {
  if (n < 1) throw ParameterError("renyi_theoretical: n must be >= 1");
  if (!(b > 1.0)) throw ParameterError("renyi_theoretical: b must be > 1");
  return q - 1.0 - lambda_q_moment(scenario, q).log_value / (n * std::log(b));
}

std::string_view to_string(ConditionTarget target) {
  switch (target) {
    case ConditionTarget::lp_convergence:
      return "lp_convergence";
    case ConditionTarget::lp_convergence_lognormal:
      return "lp_convergence_lognormal";
    case ConditionTarget::rate_gamma:
      return "rate_gamma";
    case ConditionTarget::rate_geometric:
      return "rate_geometric";
    case ConditionTarget::subgaussian_series:
      return "subgaussian_series";
    case ConditionTarget::lognormal_cascade:
      return "lognormal_cascade";
  }
  return "unknown";
}

std::optional<double> ConditionReport::detail(std::string_view name) const {
  for (const auto& d : details) {
    if (d.name == name) return d.value;
  }
  return std::nullopt;
}

namespace {

constexpr int kMixingTerms = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();

Interval gamma_interval(int n, double b, double log_moment, double alpha) {
  const double lo = std::max(1.0, alpha == kInf ? 0.0 : n / alpha);
  const double hi = log_moment > 0.0 ? n * std::log(b) / log_moment : kInf;
  return {lo, hi};
}

ConditionReport gaussian_conditions(const CascadeConfig& config, const CovarianceModel& model,
                                    double p) {
  const int n = config.grid.n;
  const double b = config.b;
  ConditionReport report;
  report.target = ConditionTarget::lognormal_cascade;
  report.p = p;
  report.b = b;
  report.n = n;

  const double log_moment = 0.5 * p * (p - 1.0) * model.sigma2;
  report.b_threshold = std::exp(log_moment / n);
  report.b_ok = b > report.b_threshold;

  // For the log-normal scenario the k-point mixing series reduces to
  // summability of r(sqrt(n) b^i).
  const MixingSumReport mixing = mixing_sum(model, b, n, kMixingTerms);
  report.mixing_ok = mixing.summable;
  report.details.push_back({"ln_E_Lambda_p", log_moment});
  report.details.push_back({"mixing_partial_sum", mixing.partial_sums.back()});
  report.details.push_back({"mixing_tail_bound", mixing.tail_bound});

  const MixingSumReport modulus = modulus_sum(model, b, n, kMixingTerms);
  report.details.push_back({"renyi_modulus_partial_sum", modulus.partial_sums.back()});
  report.details.push_back({"renyi_modulus_tail_bound", modulus.tail_bound});
  report.details.push_back({"renyi_conditions_ok", modulus.summable ? 1.0 : 0.0});

  const double alpha = *decay_exponent(model);
  report.details.push_back({"decay_alpha", alpha});
  report.alpha_required = log_moment / std::log(b);
  report.details.push_back({"alpha_required_geometric_rate", static_cast<double>(n)});
  const bool alpha_ok = alpha > *report.alpha_required;
  report.details.push_back({"alpha_ok", alpha_ok ? 1.0 : 0.0});

  const Interval window = gamma_interval(n, b, log_moment, alpha);
  if (!window.empty()) report.gamma_window = window;
  if (report.b_ok) {
    report.details.push_back({"gamma_star", n / (n - log_moment / std::log(b))});
  }
  report.details.push_back({"geo_rate_factor", std::exp(log_moment) / std::pow(b, n)});

  const double pi = std::round(p);
  if (pi != p || static_cast<long>(pi) % 2 != 0) {
    report.notes.push_back("rate bounds require an even integer p; rate details are informative only");
  }
  return report;
}

ConditionReport series_conditions(const CascadeConfig& config, const SeriesModel& series,
                                  double p) {
  const int n = config.grid.n;
  const double b = config.b;
  ConditionReport report;
  report.target = ConditionTarget::subgaussian_series;
  report.p = p;
  report.b = b;
  report.n = n;

  const double sigma2 = series.variance();
  const double log_norm = std::log(normalizer(Scenario{SubGaussianSeries{series}}));
  const double D2 = series.D * series.D;
  const OrliczFunction& phi = series.phi;

  report.b_threshold = std::exp((phi.phi_tilde(p * p * D2 * sigma2) - p * log_norm) / n);
  report.b_ok = b > report.b_threshold;
  report.details.push_back({"latent_variance", sigma2});
  report.details.push_back({"ln_E_exp_X0", log_norm});
  report.details.push_back({"defining_constant", series.D});

  const DefiningConstantReport cert =
      certify_defining_constant(series.innovation, phi, series.D);
  report.details.push_back({"defining_constant_ratio", cert.worst_ratio});
  if (!cert.ok) {
    report.notes.push_back("defining constant D is not certified for the innovation law");
  }

  // Equal exponents p_l = p/k with k = floor(p) components, each >= 1.
  const int k = std::max(2, static_cast<int>(std::floor(p)));
  const double pl = p / k;
  const double shift = phi.phi_tilde_inverse(p * log_norm);
  std::array<double, 3> lag{};
  double partial = 0.0;
  for (int i = 0; i <= kMixingTerms; ++i) {
    double quad = 0.0;
    for (int l = 0; l < k; ++l) {
      for (int h = 0; h < k; ++h) {
        lag.fill(0.0);
        for (int d = 0; d < n; ++d) lag[static_cast<std::size_t>(d)] = std::pow(b, i) * (l - h);
        quad += pl * pl * series.covariance(lag);
      }
    }
    partial += D2 * quad - shift;
  }
  // Each term is at most D^2 (sum_l p_l)^2 sigma2 - shift; a nonpositive
  // bound certifies that the series cannot diverge to +infinity.
  const double term_upper = D2 * p * p * sigma2 - shift;
  report.details.push_back({"cond2_partial_sum", partial});
  report.details.push_back({"cond2_term_upper_bound", term_upper});

  if (phi.beta != 2.0) {
    report.mixing_checkable = false;
    report.mixing_ok = false;
    report.notes.push_back("mixing condition is only checkable for beta = 2");
  } else {
    report.mixing_ok = term_upper <= 0.0;
    if (!report.mixing_ok) {
      report.notes.push_back(
          "mixing series not certified: finite cosine series have non-decaying covariance");
    }
  }
  if (!cert.ok) report.mixing_ok = false;
  return report;
}

}  // namespace

ConditionReport check_conditions(const CascadeConfig& config, double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw ArgumentError("check_conditions: p must be >= 2");
  config.validate();
  if (const auto* g = std::get_if<GeometricGaussian>(&config.scenario)) {
    return gaussian_conditions(config, g->covariance, p);
  }
  return series_conditions(config, std::get<SubGaussianSeries>(config.scenario).series, p);
}

RateForecast rate_exponents(const CascadeConfig& config, double p, std::optional<double> gamma) {
  if (!(p >= 2.0) || std::round(p) != p || static_cast<long>(p) % 2 != 0) {
    throw ArgumentError("rate_exponents: p must be an even integer >= 2");
  }
  config.validate();
  const int n = config.grid.n;
  const double b = config.b;
  RateForecast out;
  out.p = p;
  out.log_moment = lambda_q_moment(config.scenario, p).log_value;
  out.geo_factor = std::exp(out.log_moment - n * std::log(b));

  double alpha = 0.0;  // unknown decay: no admissible gamma
  if (const auto* g = std::get_if<GeometricGaussian>(&config.scenario)) {
    alpha = *decay_exponent(g->covariance);
  }
  out.gamma_window = alpha > 0.0 ? gamma_interval(n, b, out.log_moment, alpha) : Interval{1.0, 1.0};
  const double log_b_moment = out.log_moment / std::log(b);
  out.gamma_star = log_b_moment < n ? n / (n - log_b_moment) : kInf;

  out.tightest_valid_factor = out.geo_factor;
  if (gamma) {
    out.gamma = gamma;
    out.gamma_factor = std::pow(b, -n / *gamma);
    out.gamma_admissible = out.gamma_window.contains(*gamma);
    out.gamma_b_condition =
        *gamma > 1.0 && std::log(b) > *gamma * out.log_moment / ((*gamma - 1.0) * n);
    if (out.gamma_admissible && out.gamma_b_condition) {
      out.tightest_valid_factor = std::min(out.tightest_valid_factor, *out.gamma_factor);
    }
  }
  return out;
}

}  // namespace mfc
