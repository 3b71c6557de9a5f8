#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mfc/covariance.hpp"
#include "mfc/field_gen.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// Lambda = exp(X) / E exp(X(0)) with X a stationary Gaussian field.
struct GeometricGaussian {
  CovarianceModel covariance;
};

/// Lambda = exp(X) / E exp(X(0)) with X a strictly phi-sub-Gaussian series.
struct SubGaussianSeries {
  SeriesModel series;
};

using Scenario = std::variant<GeometricGaussian, SubGaussianSeries>;

/// EX^2(0) of the latent field.
double latent_variance(const Scenario& scenario);

struct NormalizerMode {
  enum class Kind { closed_form, monte_carlo };
  Kind kind = Kind::closed_form;
  /// Target relative standard error for the Monte Carlo estimate.
  double tolerance = 1e-3;
};

struct CascadeConfig {
  Scenario scenario;
  double b = 2.0;
  int m = 1;
  GridSpec grid;
  NormalizerMode normalizer;
  /// Replaces E exp(X(0)) by a fixed value. Fault-injection hook for tests.
  std::optional<double> normalizer_override;

  /// Checks parameters and the resolution guard N >= 4 b^(m-1).
  void validate() const;
  /// Resolution guard for an arbitrary depth.
  void check_depth(int depth) const;
};

/// E exp(X(0)): exp(sigma2/2) for the Gaussian scenario, product of per-term
/// uniform MGFs (by quadrature) for the series scenario.
double normalizer(const Scenario& scenario);
double normalizer(const Scenario& scenario, const NormalizerMode& mode);

/// Cascade density on the lattice (cell centers), Lambda_m = prod_i Lambda^(i)(b^i s).
struct DensityGrid {
  GridSpec grid;
  std::vector<double> values;
  CascadeConfig config;
  StreamKey seed;
  int levels = 0;
};

/// Per-level field synthesis for one cascade configuration. Circulant
/// spectra are computed once per level; all sampling methods are const and
/// thread-safe. Level i of replicate r draws from stream (master, i, r).
class CascadeSampler {
 public:
  /// Prepares levels 0..depth-1. depth defaults to config.m.
  explicit CascadeSampler(CascadeConfig config, std::optional<int> depth = std::nullopt);

  const CascadeConfig& config() const { return config_; }
  int depth() const { return depth_; }
  double log_normalizer() const { return log_normalizer_; }

  /// ln Lambda^(i)(b^i s) on the lattice.
  void level_log_factor(int i, const StreamKey& seed, std::span<double> out) const;

  /// Accumulates ln Lambda_k level by level and calls
  /// on_depth(k, log_density) after each k = 1..levels. Shared levels use the
  /// same streams for every k, so the sequence is one nested cascade.
  template <class F>
  void for_each_depth(const StreamKey& seed, int levels, F&& on_depth) const {
    check_levels(levels);
    std::vector<double> log_density(config_.grid.size(), 0.0);
    std::vector<double> factor(config_.grid.size());
    for (int i = 0; i < levels; ++i) {
      level_log_factor(i, seed, factor);
      for (std::size_t k = 0; k < log_density.size(); ++k) log_density[k] += factor[k];
      on_depth(i + 1, std::span<const double>(log_density));
    }
  }

  DensityGrid build(const StreamKey& seed, std::optional<int> levels = std::nullopt) const;
  DensityGrid lambda_level(int i, const StreamKey& seed) const;

 private:
  void check_levels(int levels) const;

  CascadeConfig config_;
  int depth_ = 0;
  double log_normalizer_ = 0.0;
  std::vector<CirculantEmbedding> embeddings_;
};

/// Lambda_m at cell centers; levels drawn from streams (seed.master, i, seed.replicate).
DensityGrid build_density(const CascadeConfig& config, const StreamKey& seed);

/// The single normalized factor Lambda^(i)(b^i s).
DensityGrid lambda_level(const CascadeConfig& config, int i, const StreamKey& seed);

/// Flat binary dump: 16-byte header (n: u16, N: u32, m: u16, b: f64, all
/// little-endian) followed by N^n little-endian f64 values, row-major.
void write_density_binary(std::ostream& os, const DensityGrid& density);

}  // namespace mfc
