#include "mfc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfc/errors.hpp"
#include "mfc/measure.hpp"
#include "mfc/moments.hpp"
#include "mfc/parallel.hpp"
#include "mfc/stats.hpp"

namespace mfc {

namespace {

void check_mc(const MonteCarlo& mc, int min_replicates) {
  if (mc.replicates < min_replicates) {
    throw ArgumentError("at least " + std::to_string(min_replicates) + " replicates are required");
  }
}

StreamKey replicate_key(const MonteCarlo& mc, std::size_t r) {
  return {mc.seed, 0, static_cast<std::uint64_t>(r)};
}

// Replicate-major table of per-replicate statistics.
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Table(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
    return out;
  }
};

// Delta-method weight for the log of a positive mean; unit weights when
// any level is exact, in which case the fit is exact anyway.
std::vector<double> log_weights(std::span<const MeanSe> stats) {
  std::vector<double> w(stats.size(), 1.0);
  for (const auto& s : stats) {
    if (!(s.se > 0.0) || !(s.mean > 0.0)) return w;
  }
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double rel = stats[i].se / stats[i].mean;
    w[i] = 1.0 / (rel * rel);
  }
  return w;
}

double total_mass(std::span<const double> log_density, double cell_volume,
                  std::vector<double>& scratch) {
  scratch.resize(log_density.size());
  for (std::size_t k = 0; k < log_density.size(); ++k) scratch[k] = std::exp(log_density[k]);
  return pairwise_sum(scratch) * cell_volume;
}

}  // namespace

std::vector<RenyiEstimate> renyi_empirical(const CascadeConfig& config,
                                           std::span<const double> q_list,
                                           std::pair<int, int> j_window, int M,
                                           const MonteCarlo& mc) {
  config.validate();
  check_mc(mc, 2);
  const auto [j_min, j_max] = j_window;
  if (j_min < 0 || j_max <= j_min) {
    throw EstimationError("renyi: degenerate j-window [" + std::to_string(j_min) + ", " +
                          std::to_string(j_max) + "]");
  }
  if ((std::size_t{1} << j_max) > config.grid.N) {
    throw ResolutionError("renyi: j_max = " + std::to_string(j_max) + " is finer than the grid");
  }
  if (M < config.m) throw ArgumentError("renyi: surrogate depth M must be >= m");
  if (q_list.empty()) throw ArgumentError("renyi: empty q list");
  for (double q : q_list) {
    if (!(q >= 0.0)) throw ArgumentError("renyi: q must be >= 0");
  }

  const CascadeSampler sampler(config, M);
  const int n = config.grid.n;
  const auto levels = static_cast<std::size_t>(j_max - j_min + 1);
  const std::size_t nq = q_list.size();
  Table table(static_cast<std::size_t>(mc.replicates), levels * nq);

  parallel_for(table.rows, mc.workers, [&](std::size_t r) {
    const DensityGrid density = sampler.build(replicate_key(mc, r), M);
    auto row = table.row(r);
    for (std::size_t jj = 0; jj < levels; ++jj) {
      const MeasureVector mv = dyadic_measures(density, j_min + static_cast<int>(jj));
      for (std::size_t k = 0; k < nq; ++k) row[jj * nq + k] = partition_sum_q(mv, q_list[k]);
    }
  });

  std::vector<RenyiEstimate> out;
  for (std::size_t k = 0; k < nq; ++k) {
    RenyiEstimate est;
    est.q = q_list[k];
    est.j_min = j_min;
    est.j_max = j_max;
    est.R = mc.replicates;
    est.M = M;
    est.T_theory = renyi_theoretical(config.scenario, est.q, n, config.b);

    std::vector<MeanSe> stats;
    std::vector<double> x, y;
    for (std::size_t jj = 0; jj < levels; ++jj) {
      const int j = j_min + static_cast<int>(jj);
      const auto column = table.column(jj * nq + k);
      stats.push_back(mean_se(column));
      const double value = std::log2(stats.back().mean);
      est.per_level.push_back({j, value});
      x.push_back(-static_cast<double>(n * j));
      y.push_back(value);
      if ((config.grid.N >> j) < 8) {
        est.warnings.push_back("level j = " + std::to_string(j) + " has boxes under 8 cells wide");
      }
    }
    if (j_min < 2) est.warnings.push_back("window starts below j = 2");
    const auto w = log_weights(stats);
    const LineFit fit = fit_line(x, y, std::span<const double>(w));
    est.T_hat = fit.slope;
    est.std_error = fit.slope_se;
    out.push_back(std::move(est));
  }
  return out;
}

ScalingFit scaling_fit(const CascadeConfig& config, double q, std::span<const double> t_list,
                       int M, const MonteCarlo& mc) {
  config.validate();
  check_mc(mc, 2);
  if (!(q >= 0.0)) throw ArgumentError("scaling: q must be >= 0");
  if (M < config.m) throw ArgumentError("scaling: surrogate depth M must be >= m");
  if (t_list.size() < 2) throw ArgumentError("scaling: need at least two t values");
  std::vector<int> js;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const double t = t_list[i];
    if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("scaling: t must lie in (0, 1]");
    if (i > 0 && !(t > t_list[i - 1])) throw ArgumentError("scaling: t list must increase");
    int exponent = 0;
    if (std::frexp(t, &exponent) != 0.5) throw ArgumentError("scaling: t must be dyadic");
    const int j = 1 - exponent;
    if (t < 4.0 * config.grid.delta()) {
      throw ResolutionError("scaling: t = " + std::to_string(t) + " is below 4 grid cells");
    }
    js.push_back(j);
  }

  const CascadeSampler sampler(config, M);
  const int n = config.grid.n;
  Table table(static_cast<std::size_t>(mc.replicates), js.size());
  parallel_for(table.rows, mc.workers, [&](std::size_t r) {
    const DensityGrid density = sampler.build(replicate_key(mc, r), M);
    auto row = table.row(r);
    for (std::size_t i = 0; i < js.size(); ++i) {
      const MeasureVector mv = dyadic_measures(density, js[i]);
      row[i] = partition_sum_q(mv, q) / static_cast<double>(mv.partition.boxes());
    }
  });

  ScalingFit fit;
  fit.q = q;
  fit.theory_slope =
      n * q - lambda_q_moment(config.scenario, q).log_value / std::log(config.b);
  std::vector<MeanSe> stats;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < js.size(); ++i) {
    stats.push_back(mean_se(table.column(i)));
    fit.per_t.push_back({t_list[i], stats.back().mean, stats.back().se});
    x.push_back(std::log(t_list[i]));
    y.push_back(std::log(stats.back().mean));
  }
  const auto w = log_weights(stats);
  const LineFit line = fit_line(x, y, std::span<const double>(w));
  fit.slope = line.slope;
  fit.slope_se = line.slope_se;
  return fit;
}

RateFit rate_fit(const CascadeConfig& config, double q, std::span<const int> m_list, int M,
                 const MonteCarlo& mc, double p, std::optional<double> gamma) {
  config.validate();
  check_mc(mc, 2);
  if (!(q >= 2.0 && q <= p)) throw ArgumentError("rates: q must lie in [2, p]");
  if (m_list.size() < 2) throw ArgumentError("rates: need at least two m values");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1) throw ArgumentError("rates: m values must be >= 1");
    if (i > 0 && m_list[i] <= m_list[i - 1]) throw ArgumentError("rates: m list must increase");
  }
  if (m_list.back() >= M) throw EstimationError("rates: surrogate depth M must exceed every m");

  const RateForecast forecast = rate_exponents(config, p, gamma);
  RateFit fit;
  fit.q = q;
  fit.p = p;
  fit.M = M;
  fit.theory_factor_geo = forecast.geo_factor;
  if (forecast.gamma_factor) fit.theory_factor_gamma = forecast.gamma_factor;
  fit.theory_factor = forecast.tightest_valid_factor;
  if (m_list.back() + 2 > M) {
    fit.warnings.push_back("M - max(m) < 2: surrogate bias of order geo_factor^(M - m) is not small");
  }

  const CascadeSampler sampler(config, M);
  const double cell_volume = std::pow(config.grid.delta(), config.grid.n);
  Table table(static_cast<std::size_t>(mc.replicates), m_list.size());
  parallel_for(table.rows, mc.workers, [&](std::size_t r) {
    std::vector<double> masses(static_cast<std::size_t>(M) + 1);
    std::vector<double> scratch;
    sampler.for_each_depth(replicate_key(mc, r), M, [&](int k, std::span<const double> logd) {
      const bool needed = k == M || std::find(m_list.begin(), m_list.end(), k) != m_list.end();
      if (needed) masses[static_cast<std::size_t>(k)] = total_mass(logd, cell_volume, scratch);
    });
    auto row = table.row(r);
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      const double diff = masses[static_cast<std::size_t>(M)] -
                          masses[static_cast<std::size_t>(m_list[i])];
      row[i] = std::pow(std::abs(diff), q);
    }
  });

  std::vector<MeanSe> stats;
  std::vector<double> x, y;
  fit.degenerate = true;
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    stats.push_back(mean_se(table.column(i)));
    fit.per_m.push_back({m_list[i], stats.back().mean, stats.back().se});
    if (stats.back().mean > 0.0) fit.degenerate = false;
  }
  if (fit.degenerate) {
    fit.slope = -std::numeric_limits<double>::infinity();
    fit.fitted_factor = 0.0;
    fit.bound_ok = true;
    return fit;
  }
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (!(stats[i].mean > 0.0)) {
      throw EstimationError("rates: some but not all differences vanish; cannot fit a log slope");
    }
    x.push_back(m_list[i]);
    y.push_back(std::log(stats[i].mean));
  }
  const auto w = log_weights(stats);
  const LineFit line = fit_line(x, y, std::span<const double>(w));
  fit.slope = line.slope;
  fit.slope_se = line.slope_se;
  fit.fitted_factor = std::exp(line.slope);
  fit.bound_ok = fit.slope <= std::log(fit.theory_factor) + 3.0 * fit.slope_se;
  return fit;
}

std::vector<MartingaleRow> martingale_check(const CascadeConfig& config,
                                            std::span<const int> m_list, const MonteCarlo& mc) {
  config.validate();
  check_mc(mc, 30);
  if (m_list.empty()) throw ArgumentError("martingale: empty m list");
  const int depth = *std::max_element(m_list.begin(), m_list.end());
  if (*std::min_element(m_list.begin(), m_list.end()) < 1) {
    throw ArgumentError("martingale: m values must be >= 1");
  }
  const CascadeSampler sampler(config, depth);
  const double cell_volume = std::pow(config.grid.delta(), config.grid.n);
  Table table(static_cast<std::size_t>(mc.replicates), static_cast<std::size_t>(depth));
  parallel_for(table.rows, mc.workers, [&](std::size_t r) {
    std::vector<double> scratch;
    auto row = table.row(r);
    sampler.for_each_depth(replicate_key(mc, r), depth, [&](int k, std::span<const double> logd) {
      row[static_cast<std::size_t>(k - 1)] = total_mass(logd, cell_volume, scratch);
    });
  });

  std::vector<MartingaleRow> rows;
  for (int m : m_list) {
    const MeanSe s = mean_se(table.column(static_cast<std::size_t>(m - 1)));
    rows.push_back({m, s.mean, s.se, std::abs(s.mean - 1.0) <= 3.0 * s.se});
  }
  return rows;
}

NondegeneracyReport nondegeneracy_check(const CascadeConfig& config, int M, const MonteCarlo& mc) {
  config.validate();
  check_mc(mc, 30);
  if (M < config.m) throw ArgumentError("nondegeneracy: surrogate depth M must be >= m");
  const CascadeSampler sampler(config, M);
  const double cell_volume = std::pow(config.grid.delta(), config.grid.n);
  std::vector<double> totals(static_cast<std::size_t>(mc.replicates));
  parallel_for(totals.size(), mc.workers, [&](std::size_t r) {
    std::vector<double> scratch;
    sampler.for_each_depth(replicate_key(mc, r), M, [&](int k, std::span<const double> logd) {
      if (k == M) totals[r] = total_mass(logd, cell_volume, scratch);
    });
  });
  NondegeneracyReport report;
  report.replicates = totals.size();
  report.positive = static_cast<std::size_t>(
      std::count_if(totals.begin(), totals.end(), [](double a) { return a > 0.0; }));
  const ProportionInterval ci = wilson_interval(report.positive, report.replicates);
  report.proportion = ci.proportion;
  report.wilson_lo = ci.lo;
  report.wilson_hi = ci.hi;
  return report;
}

}  // namespace mfc
