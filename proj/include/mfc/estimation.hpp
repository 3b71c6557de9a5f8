#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfc/cascade.hpp"

namespace mfc {

/// Common Monte Carlo controls. Replicate r of level i uses stream
/// (seed, i, r); `workers` only affects scheduling.
struct MonteCarlo {
  int replicates = 200;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct LevelValue {
  int j = 0;
  /// log2 of the replicate mean of sum_l mu(B_l)^q.
  double log2_mean_sum = 0.0;
};

struct RenyiEstimate {
  double q = 0.0;
  double T_hat = 0.0;
  double std_error = 0.0;
  int j_min = 0;
  int j_max = 0;
  int R = 0;
  int M = 0;
  double T_theory = 0.0;
  std::vector<LevelValue> per_level;
  std::vector<std::string> warnings;
};

/// Empirical Renyi function: per replicate partition sums at each j of the
/// window on the depth-M cascade, replicate means, then a weighted
/// least-squares slope of log2(mean) against -n j.
std::vector<RenyiEstimate> renyi_empirical(const CascadeConfig& config,
                                           std::span<const double> q_list,
                                           std::pair<int, int> j_window, int M,
                                           const MonteCarlo& mc);

struct ScalingPoint {
  double t = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

struct ScalingFit {
  double q = 0.0;
  std::vector<ScalingPoint> per_t;
  double slope = 0.0;
  double slope_se = 0.0;
  /// n q - log_b E Lambda^q.
  double theory_slope = 0.0;
};

/// Estimates E A^q(t 1) at dyadic t and fits the log-log slope. A is
/// surrogated by the depth-M cascade; by stationarity every dyadic box of
/// side t has the law of [0, t]^n, so each replicate averages over all of them.
ScalingFit scaling_fit(const CascadeConfig& config, double q, std::span<const double> t_list,
                       int M, const MonteCarlo& mc);

struct RatePoint {
  int m = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct RateFit {
  double q = 2.0;
  double p = 2.0;
  int M = 0;
  std::vector<RatePoint> per_m;
  /// Slope of ln(mean |A_M - A_m|^q) against m, and its standard error.
  double slope = 0.0;
  double slope_se = 0.0;
  double fitted_factor = 0.0;
  double theory_factor_geo = 0.0;
  std::optional<double> theory_factor_gamma;
  /// Tightest bound whose hypotheses hold.
  double theory_factor = 0.0;
  /// slope <= ln(theory_factor) + 3 slope_se.
  bool bound_ok = false;
  /// All differences vanish (degenerate field).
  bool degenerate = false;
  std::vector<std::string> warnings;
};

/// Nested-stream estimate of E|A_M(1) - A_m(1)|^q: A_m and A_M share their
/// first m levels. Requires q in [2, p] with p even.
RateFit rate_fit(const CascadeConfig& config, double q, std::span<const int> m_list, int M,
                 const MonteCarlo& mc, double p = 2.0, std::optional<double> gamma = std::nullopt);

struct MartingaleRow {
  int m = 0;
  double mean = 0.0;
  double se = 0.0;
  bool pass = false;
};

/// Mean and standard error of A_m(1) per m; pass iff |mean - 1| <= 3 se.
std::vector<MartingaleRow> martingale_check(const CascadeConfig& config,
                                            std::span<const int> m_list, const MonteCarlo& mc);

struct NondegeneracyReport {
  std::size_t positive = 0;
  std::size_t replicates = 0;
  double proportion = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

/// Fraction of replicates with A_M(1) > 0 (any positive double).
NondegeneracyReport nondegeneracy_check(const CascadeConfig& config, int M, const MonteCarlo& mc);

}  // namespace mfc
