#include "mfc/field_gen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <set>

#include <fftw3.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mfc/errors.hpp"

namespace mfc {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

}  // namespace

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t GridSpec::size() const { return ipow(N, n); }

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw ParameterError("grid: n must be 1, 2 or 3");
  if (N < 2 || !is_power_of_two(N)) throw ParameterError("grid: N must be a power of two >= 2");
}

// ---------------------------------------------------------------- Orlicz ---

void OrliczFunction::validate() const {
  if (!(beta > 1.0) || !std::isfinite(beta)) throw ParameterError("orlicz: beta must be > 1");
}

double OrliczFunction::operator()(double x) const { return std::pow(std::abs(x), beta) / beta; }

double OrliczFunction::density(double t) const { return std::pow(std::abs(t), beta - 1.0); }

double OrliczFunction::phi_tilde(double x) const { return std::pow(x, 0.5 * beta) / beta; }

double OrliczFunction::phi_tilde_inverse(double y) const {
  return std::pow(beta * y, 2.0 / beta);
}

double young_fenchel(const OrliczFunction& phi, double x) {
  phi.validate();
  const double r = phi.conjugate_exponent();
  return std::pow(std::abs(x), r) / r;
}

// ------------------------------------------------------------ innovations ---

void UniformInnovation::validate() const {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw ParameterError("innovation: uniform bound must be finite and > 0");
  }
}

double UniformInnovation::mgf(double t) const {
  if (t == 0.0) return 1.0;
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double c = bound;
  const double value = gauss_kronrod<double, 31>::integrate(
      [t](double x) { return std::exp(t * x); }, -c, c, 15, 1e-12, &error);
  const double result = value / (2.0 * c);
  if (!std::isfinite(result) || error > 1e-10 * value) {
    throw NormalizerError("uniform innovation: MGF quadrature did not converge");
  }
  return result;
}

// ----------------------------------------------------------------- series ---

void SeriesModel::validate() const {
  if (n < 1 || n > 3) throw ParameterError("series: n must be 1, 2 or 3");
  if (amplitudes.empty()) throw ArgumentError("series: amplitude list is empty");
  if (amplitudes.size() != frequencies.size()) {
    throw ArgumentError("series: amplitudes and frequencies differ in length");
  }
  for (double a : amplitudes) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("series: amplitudes must be > 0");
  }
  for (const auto& w : frequencies) {
    for (int d = n; d < 3; ++d) {
      if (w[static_cast<std::size_t>(d)] != 0) {
        throw ParameterError("series: frequency has nonzero component beyond dimension n");
      }
    }
  }
  innovation.validate();
  phi.validate();
  if (!(D > 0.0) || !std::isfinite(D)) throw ParameterError("series: D must be > 0");
}

double SeriesModel::variance() const {
  double s = 0.0;
  for (double a : amplitudes) s += a * a;
  return s * innovation.variance();
}

double SeriesModel::covariance(std::span<const double> h) const {
  double s = 0.0;
  for (std::size_t j = 0; j < terms(); ++j) {
    double phase = 0.0;
    for (int d = 0; d < n; ++d) {
      phase += frequencies[j][static_cast<std::size_t>(d)] * h[static_cast<std::size_t>(d)];
    }
    s += amplitudes[j] * amplitudes[j] * std::cos(2.0 * std::numbers::pi * phase);
  }
  return s * innovation.variance();
}

SeriesModel symmetrized(const SeriesModel& series) {
  series.validate();
  SeriesModel out = series;
  out.amplitudes.clear();
  out.frequencies.clear();
  for (std::size_t j = 0; j < series.terms(); ++j) {
    std::array<int, 3> base = series.frequencies[j];
    std::set<std::array<int, 3>> images;
    std::array<int, 3> perm{0, 1, 2};
    const auto nn = static_cast<std::size_t>(series.n);
    std::sort(perm.begin(), perm.begin() + series.n);
    do {
      for (unsigned signs = 0; signs < (1U << nn); ++signs) {
        std::array<int, 3> w{0, 0, 0};
        for (std::size_t d = 0; d < nn; ++d) {
          const int v = base[static_cast<std::size_t>(perm[d])];
          w[d] = (signs >> d & 1U) ? -v : v;
        }
        // w and -w give the same covariance term; keep one representative.
        std::array<int, 3> neg{-w[0], -w[1], -w[2]};
        images.insert(std::max(w, neg));
      }
    } while (std::next_permutation(perm.begin(), perm.begin() + series.n));
    const double a = series.amplitudes[j] / std::sqrt(static_cast<double>(images.size()));
    for (const auto& w : images) {
      out.amplitudes.push_back(a);
      out.frequencies.push_back(w);
    }
  }
  return out;
}

std::vector<double> draw_innovations(const SeriesModel& series, const StreamKey& seed) {
  Rng rng(seed);
  std::vector<double> xi(2 * series.terms());
  for (double& v : xi) v = series.innovation.sample(rng);
  return xi;
}

std::vector<double> point_weights(const SeriesModel& series, std::span<const double> s,
                                  double scale) {
  std::vector<double> w(2 * series.terms());
  for (std::size_t j = 0; j < series.terms(); ++j) {
    double phase = 0.0;
    for (int d = 0; d < series.n; ++d) {
      phase += series.frequencies[j][static_cast<std::size_t>(d)] * scale *
               s[static_cast<std::size_t>(d)];
    }
    const double theta = 2.0 * std::numbers::pi * phase;
    w[2 * j] = series.amplitudes[j] * std::cos(theta);
    w[2 * j + 1] = series.amplitudes[j] * std::sin(theta);
  }
  return w;
}

void sample_series_into(const SeriesModel& series, const GridSpec& grid, double scale,
                        const StreamKey& seed, std::span<double> out) {
  series.validate();
  grid.validate();
  if (series.n != grid.n) throw ArgumentError("series: dimension differs from grid");
  if (!(scale >= 1.0)) throw ArgumentError("series: scale must be >= 1");
  if (out.size() != grid.size()) throw ArgumentError("series: output size mismatch");

  const std::vector<double> xi = draw_innovations(series, seed);
  const std::size_t N = grid.N;
  const double h = grid.delta();
  std::fill(out.begin(), out.end(), 0.0);

  // Separable phases: theta = sum_d 2 pi w_d scale (k_d + 1/2) h.
  std::array<std::vector<std::complex<double>>, 3> axis_phase;
  for (std::size_t j = 0; j < series.terms(); ++j) {
    for (int d = 0; d < grid.n; ++d) {
      auto& ph = axis_phase[static_cast<std::size_t>(d)];
      ph.resize(N);
      const double w = series.frequencies[j][static_cast<std::size_t>(d)];
      for (std::size_t k = 0; k < N; ++k) {
        const double arg = 2.0 * std::numbers::pi * w * scale * (static_cast<double>(k) + 0.5) * h;
        ph[k] = std::polar(1.0, arg);
      }
    }
    const double a = series.amplitudes[j];
    const double c = a * xi[2 * j];
    const double s = a * xi[2 * j + 1];
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
      std::size_t rest = idx;
      std::complex<double> z(1.0, 0.0);
      for (int d = grid.n - 1; d >= 0; --d) {
        z *= axis_phase[static_cast<std::size_t>(d)][rest % N];
        rest /= N;
      }
      out[idx] += c * z.real() + s * z.imag();
    }
  }
}

FieldSample sample_series_field(const SeriesModel& series, const GridSpec& grid, double scale,
                                const StreamKey& seed) {
  FieldSample sample{grid, std::vector<double>(grid.size()), scale, seed};
  sample_series_into(series, grid, scale, seed, sample.values);
  return sample;
}

double tau_norm_bound(const SeriesModel& series, std::span<const double> weights) {
  series.validate();
  if (weights.empty() || weights.size() > 2 * series.terms()) {
    throw ArgumentError("tau_norm_bound: weights must address at most 2J innovations");
  }
  double s = 0.0;
  for (double l : weights) s += l * l;
  return series.D * std::sqrt(s * series.innovation.variance());
}

double tail_bound(const OrliczFunction& phi, double tau, double x) {
  if (!(tau > 0.0)) throw ParameterError("tail_bound: tau must be > 0");
  if (!(x > 0.0)) throw ArgumentError("tail_bound: x must be > 0");
  return std::exp(-young_fenchel(phi, x / tau));
}

DefiningConstantReport certify_defining_constant(const UniformInnovation& innovation,
                                                 const OrliczFunction& phi, double D) {
  innovation.validate();
  phi.validate();
  const double sigma = std::sqrt(innovation.variance());
  DefiningConstantReport report;
  report.worst_ratio = 0.0;
  // The MGF is even, so t > 0 suffices. Below t ~ 0.1 both sides are O(t^2)
  // and quadrature noise dominates the comparison.
  for (int k = 0; k <= 120; ++k) {
    const double t = 0.1 * std::pow(10.0, k / 40.0);
    const double lhs = std::log(innovation.mgf(t));
    const double rhs = phi(D * sigma * t);
    report.worst_ratio = std::max(report.worst_ratio, lhs / rhs);
  }
  report.ok = report.worst_ratio <= 1.0;
  return report;
}

// ------------------------------------------------------ circulant embedding ---

struct CirculantEmbedding::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

namespace {

fftw_plan make_plan(int n, std::size_t torus, std::vector<std::complex<double>>& buffer) {
  std::array<int, 3> dims{};
  for (int d = 0; d < n; ++d) dims[static_cast<std::size_t>(d)] = static_cast<int>(torus);
  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  std::lock_guard lock(fftw_planner_mutex());
  return fftw_plan_dft(n, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

}  // namespace

CirculantEmbedding::CirculantEmbedding(const CovarianceModel& model, const GridSpec& grid,
                                       double scale, const EmbeddingOptions& options)
    : grid_(grid), scale_(scale) {
  model.validate();
  grid.validate();
  if (!(scale >= 1.0) || !std::isfinite(scale)) {
    throw ArgumentError("gaussian field: scale must be finite and >= 1");
  }

  std::string last_failure;
  for (int doubling = 0; doubling <= options.max_padding_doublings; ++doubling) {
    const std::size_t torus = 2 * grid.N << doubling;
    const std::size_t total = ipow(torus, grid.n);
    if (total > options.max_torus_points) {
      if (doubling == 0) {
        throw EmbeddingError("circulant embedding: torus of " + std::to_string(total) +
                             " points exceeds the memory cap");
      }
      break;
    }

    // First row of the block-circulant matrix: r(scale * h * |wrapped k|).
    std::vector<std::complex<double>> buffer(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      double dist2 = 0.0;
      for (int d = 0; d < grid.n; ++d) {
        const std::size_t k = rest % torus;
        rest /= torus;
        const double wrapped = static_cast<double>(std::min(k, torus - k));
        dist2 += wrapped * wrapped;
      }
      buffer[idx] = model(scale * grid.delta() * std::sqrt(dist2));
    }
    fftw_plan plan = make_plan(grid.n, torus, buffer);
    fftw_execute(plan);
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }

    double positive = 0.0;
    double negative = 0.0;
    double min_eigen = 0.0;
    for (const auto& z : buffer) {
      const double v = z.real();
      if (v >= 0.0) {
        positive += v;
      } else {
        negative -= v;
      }
      min_eigen = std::min(min_eigen, v);
    }
    const double total_mass = positive + negative;
    const double fraction = total_mass > 0.0 ? negative / total_mass : 0.0;
    if (fraction > options.clip_tolerance) {
      last_failure = "negative spectral mass fraction " + std::to_string(fraction) +
                     " on a torus of " + std::to_string(torus) + " points per axis";
      continue;
    }

    torus_ = torus;
    info_.torus_points_per_axis = torus;
    info_.min_eigenvalue = min_eigen;
    info_.clipped_fraction = fraction;
    // Round-off negatives (~1e-16 relative) are clipped silently.
    if (fraction > 1e-14) {
      info_.warnings.push_back("clipped negative eigenvalues, mass fraction " +
                               std::to_string(fraction));
    }
    sqrt_eigen_.resize(total);
    const double norm = 1.0 / static_cast<double>(total);
    for (std::size_t k = 0; k < total; ++k) {
      sqrt_eigen_[k] = std::sqrt(std::max(buffer[k].real(), 0.0) * norm);
    }
    plan_ = std::make_unique<Plan>();
    plan_->plan = make_plan(grid.n, torus, buffer);
    return;
  }
  throw EmbeddingError("circulant embedding is not nonnegative-definite: " + last_failure);
}

CirculantEmbedding::~CirculantEmbedding() = default;
CirculantEmbedding::CirculantEmbedding(CirculantEmbedding&&) noexcept = default;
CirculantEmbedding& CirculantEmbedding::operator=(CirculantEmbedding&&) noexcept = default;

void CirculantEmbedding::sample_into(const StreamKey& key, std::span<double> out) const {
  if (out.size() != grid_.size()) throw ArgumentError("gaussian field: output size mismatch");
  Rng rng(key);
  std::vector<std::complex<double>> work(sqrt_eigen_.size());
  for (std::size_t k = 0; k < work.size(); ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    work[k] = {sqrt_eigen_[k] * re, sqrt_eigen_[k] * im};
  }
  auto* data = reinterpret_cast<fftw_complex*>(work.data());
  fftw_execute_dft(plan_->plan, data, data);

  // The real part restricted to the leading N^n block has covariance r(scale h).
  const std::size_t N = grid_.N;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::size_t rest = idx;
    std::size_t torus_index = 0;
    std::size_t stride = 1;
    for (int d = 0; d < grid_.n; ++d) {
      torus_index += (rest % N) * stride;
      rest /= N;
      stride *= torus_;
    }
    out[idx] = work[torus_index].real();
  }
}

FieldSample CirculantEmbedding::sample(const StreamKey& key) const {
  FieldSample s{grid_, std::vector<double>(grid_.size()), scale_, key};
  sample_into(key, s.values);
  return s;
}

FieldSample sample_gaussian_field(const CovarianceModel& model, const GridSpec& grid,
                                  double scale, const StreamKey& seed) {
  return CirculantEmbedding(model, grid, scale).sample(seed);
}

}  // namespace mfc
