#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfc/covariance.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// Regular lattice of N^n cells on [0,1)^n; values live at cell centers
/// (k + 1/2) / N.
struct GridSpec {
  int n = 1;
  std::size_t N = 2;

  double delta() const { return 1.0 / static_cast<double>(N); }
  std::size_t size() const;
  /// Throws ParameterError unless n in {1,2,3} and N >= 2 is a power of two.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

bool is_power_of_two(std::size_t v);

/// One realization of a latent field on a lattice (row-major, last axis fastest).
struct FieldSample {
  GridSpec grid;
  std::vector<double> values;
  /// Dilation x: the sample has covariance r(x * h).
  double scale = 1.0;
  StreamKey seed;
};

/// phi(x) = |x|^beta / beta, beta > 1.
struct OrliczFunction {
  double beta = 2.0;

  void validate() const;
  double operator()(double x) const;
  /// p_phi(t) = t^(beta - 1).
  double density(double t) const;
  /// beta' with 1/beta + 1/beta' = 1.
  double conjugate_exponent() const { return beta / (beta - 1.0); }
  /// phi(sqrt(x)) for x >= 0.
  double phi_tilde(double x) const;
  double phi_tilde_inverse(double y) const;
};

/// Young-Fenchel transform psi(x) = sup_y (xy - phi(y)) = |x|^beta'/beta'.
double young_fenchel(const OrliczFunction& phi, double x);

/// Zero-mean innovation uniform on [-bound, bound].
struct UniformInnovation {
  double bound = 1.7320508075688772;

  void validate() const;
  double variance() const { return bound * bound / 3.0; }
  double sample(Rng& rng) const { return rng.uniform(-bound, bound); }
  /// E exp(t xi) by adaptive Gauss-Kronrod quadrature (relative tol 1e-10).
  double mgf(double t) const;
};

/// Finite random series
///   X(s) = sum_j a_j (xi_j cos<2 pi w_j, s> + xi'_j sin<2 pi w_j, s>)
/// with i.i.d. innovations. Covariance: sum_j a_j^2 E xi^2 cos<2 pi w_j, h>.
struct SeriesModel {
  int n = 1;
  std::vector<double> amplitudes;
  std::vector<std::array<int, 3>> frequencies;
  UniformInnovation innovation;
  OrliczFunction phi;
  /// Defining constant: tau_phi(sum l_i xi_i) <= D (E(sum l_i xi_i)^2)^(1/2).
  double D = 1.0;

  void validate() const;
  std::size_t terms() const { return amplitudes.size(); }
  /// EX^2(0) = sum_j a_j^2 E xi^2.
  double variance() const;
  /// Closed-form covariance at lag h (already dilated).
  double covariance(std::span<const double> h) const;
};

/// Expands each wave-vector over axis permutations and sign flips; each
/// original amplitude is split evenly in variance over its distinct images.
SeriesModel symmetrized(const SeriesModel& series);

/// Circulant embedding diagnostics.
struct EmbeddingInfo {
  std::size_t torus_points_per_axis = 0;
  double min_eigenvalue = 0.0;
  double clipped_fraction = 0.0;
  std::vector<std::string> warnings;
};

struct EmbeddingOptions {
  /// Clipping of negative eigenvalues is accepted up to this fraction of the
  /// spectral total; beyond it the torus is enlarged, then the call fails.
  double clip_tolerance = 1e-8;
  int max_padding_doublings = 3;
  std::size_t max_torus_points = std::size_t{1} << 24;
};

/// Exact stationary Gaussian synthesis on a lattice by circulant embedding.
/// The square-root spectrum is computed once; sample() is thread-safe.
class CirculantEmbedding {
 public:
  CirculantEmbedding(const CovarianceModel& model, const GridSpec& grid, double scale,
                     const EmbeddingOptions& options = {});
  ~CirculantEmbedding();
  CirculantEmbedding(CirculantEmbedding&&) noexcept;
  CirculantEmbedding& operator=(CirculantEmbedding&&) noexcept;

  FieldSample sample(const StreamKey& key) const;
  /// Writes a sample into `out` (grid.size() entries).
  void sample_into(const StreamKey& key, std::span<double> out) const;

  const EmbeddingInfo& info() const { return info_; }
  const GridSpec& grid() const { return grid_; }
  double scale() const { return scale_; }

 private:
  struct Plan;
  GridSpec grid_;
  double scale_ = 1.0;
  std::size_t torus_ = 0;
  std::vector<double> sqrt_eigen_;
  std::unique_ptr<Plan> plan_;
  EmbeddingInfo info_;
};

FieldSample sample_gaussian_field(const CovarianceModel& model, const GridSpec& grid,
                                  double scale, const StreamKey& seed);

FieldSample sample_series_field(const SeriesModel& series, const GridSpec& grid, double scale,
                                const StreamKey& seed);
void sample_series_into(const SeriesModel& series, const GridSpec& grid, double scale,
                        const StreamKey& seed, std::span<double> out);

/// Innovation draws for one stream, ordered (xi_1, xi'_1, xi_2, xi'_2, ...).
std::vector<double> draw_innovations(const SeriesModel& series, const StreamKey& seed);

/// Coefficients of X(s) in the innovation order used by draw_innovations.
std::vector<double> point_weights(const SeriesModel& series, std::span<const double> s,
                                  double scale = 1.0);

/// D * (E(sum l_i xi_i)^2)^(1/2) for i.i.d. innovations of the series.
double tau_norm_bound(const SeriesModel& series, std::span<const double> weights);

/// exp(-psi(x / tau)): bound on P(X >= x) whenever tau_phi(X) <= tau.
double tail_bound(const OrliczFunction& phi, double tau, double x);

struct DefiningConstantReport {
  bool ok = false;
  /// max over the t-grid of ln E exp(t xi) / phi(D sigma t); ok iff <= 1.
  double worst_ratio = 0.0;
};

/// Checks E exp(t xi) <= exp(phi(D sigma t)) on a symmetric log-spaced t-grid,
/// i.e. that D certifies tau_phi(xi) <= D (E xi^2)^(1/2).
DefiningConstantReport certify_defining_constant(const UniformInnovation& innovation,
                                                 const OrliczFunction& phi, double D);

}  // namespace mfc
