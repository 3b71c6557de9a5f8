#include "mfc/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <ostream>
#include <string>

#include "mfc/errors.hpp"

namespace mfc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int scenario_dimension(const Scenario& scenario) {
  if (const auto* s = std::get_if<SubGaussianSeries>(&scenario)) return s->series.n;
  return 0;
}

// Stream reserved for the Monte Carlo normalizer.
constexpr StreamKey kNormalizerStream{0x6e6f726d616c697aULL, ~std::uint64_t{0}, 0};

}  // namespace

double latent_variance(const Scenario& scenario) {
  return std::visit(overloaded{[](const GeometricGaussian& g) { return g.covariance.sigma2; },
                               [](const SubGaussianSeries& s) { return s.series.variance(); }},
                    scenario);
}

void CascadeConfig::validate() const {
  std::visit(overloaded{[](const GeometricGaussian& g) { g.covariance.validate(); },
                        [](const SubGaussianSeries& s) { s.series.validate(); }},
             scenario);
  grid.validate();
  if (const int dim = scenario_dimension(scenario); dim != 0 && dim != grid.n) {
    throw ParameterError("cascade: series dimension differs from grid dimension");
  }
  if (!(b > 1.0) || !std::isfinite(b)) throw ParameterError("cascade: b must be > 1");
  if (m < 1) throw ParameterError("cascade: m must be >= 1");
  if (normalizer_override && !(*normalizer_override > 0.0)) {
    throw ParameterError("cascade: normalizer override must be > 0");
  }
  if (normalizer.kind == NormalizerMode::Kind::monte_carlo && !(normalizer.tolerance > 0.0)) {
    throw ParameterError("cascade: Monte Carlo normalizer tolerance must be > 0");
  }
  check_depth(m);
}

void CascadeConfig::check_depth(int depth) const {
  const double needed = 4.0 * std::pow(b, depth - 1);
  if (static_cast<double>(grid.N) < needed) {
    throw ResolutionError("resolution guard N >= 4 b^(m-1) violated: N = " +
                          std::to_string(grid.N) + ", depth = " + std::to_string(depth) +
                          ", needs N >= " + std::to_string(needed));
  }
}

double normalizer(const Scenario& scenario) {
  return std::visit(overloaded{[](const GeometricGaussian& g) {
                                 g.covariance.validate();
                                 return std::exp(0.5 * g.covariance.sigma2);
                               },
                               [](const SubGaussianSeries& s) {
                                 s.series.validate();
                                 // X(0) = sum_j a_j xi_j; the sine terms vanish at the origin.
                                 double prod = 1.0;
                                 for (double a : s.series.amplitudes) {
                                   prod *= s.series.innovation.mgf(a);
                                 }
                                 if (!std::isfinite(prod) || !(prod > 0.0)) {
                                   throw NormalizerError("series normalizer is not finite");
                                 }
                                 return prod;
                               }},
                    scenario);
}

double normalizer(const Scenario& scenario, const NormalizerMode& mode) {
  if (mode.kind == NormalizerMode::Kind::closed_form) return normalizer(scenario);

  Rng rng(kNormalizerStream);
  auto draw = [&]() {
    return std::visit(overloaded{[&](const GeometricGaussian& g) {
                                   return std::sqrt(g.covariance.sigma2) * rng.normal();
                                 },
                                 [&](const SubGaussianSeries& s) {
                                   double x = 0.0;
                                   for (double a : s.series.amplitudes) {
                                     x += a * s.series.innovation.sample(rng);
                                   }
                                   return x;
                                 }},
                      scenario);
  };
  constexpr std::size_t kBatch = 1 << 14;
  constexpr std::size_t kMaxDraws = std::size_t{1} << 26;
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;
  while (count < kMaxDraws) {
    for (std::size_t k = 0; k < kBatch; ++k) {
      const double v = std::exp(draw());
      sum += v;
      sum2 += v * v;
    }
    count += kBatch;
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(sum2 / static_cast<double>(count) - mean * mean, 0.0);
    const double se = std::sqrt(var / static_cast<double>(count));
    if (se <= mode.tolerance * mean) return mean;
  }
  throw NormalizerError("Monte Carlo normalizer did not reach the requested tolerance");
}

CascadeSampler::CascadeSampler(CascadeConfig config, std::optional<int> depth)
    : config_(std::move(config)), depth_(depth.value_or(config_.m)) {
  config_.validate();
  if (depth_ < 1) throw ParameterError("cascade: depth must be >= 1");
  config_.check_depth(depth_);
  log_normalizer_ = std::log(config_.normalizer_override
                                 ? *config_.normalizer_override
                                 : normalizer(config_.scenario, config_.normalizer));
  if (const auto* g = std::get_if<GeometricGaussian>(&config_.scenario)) {
    embeddings_.reserve(static_cast<std::size_t>(depth_));
    for (int i = 0; i < depth_; ++i) {
      embeddings_.emplace_back(g->covariance, config_.grid, std::pow(config_.b, i));
    }
  }
}

void CascadeSampler::check_levels(int levels) const {
  if (levels < 1 || levels > depth_) {
    throw ArgumentError("cascade: level count " + std::to_string(levels) +
                        " outside the prepared depth " + std::to_string(depth_));
  }
}

void CascadeSampler::level_log_factor(int i, const StreamKey& seed, std::span<double> out) const {
  if (i < 0 || i >= depth_) throw ArgumentError("cascade: level index out of range");
  const StreamKey key = seed.with_level(static_cast<std::uint64_t>(i));
  if (std::holds_alternative<GeometricGaussian>(config_.scenario)) {
    embeddings_[static_cast<std::size_t>(i)].sample_into(key, out);
  } else {
    const auto& s = std::get<SubGaussianSeries>(config_.scenario);
    sample_series_into(s.series, config_.grid, std::pow(config_.b, i), key, out);
  }
  for (double& v : out) v -= log_normalizer_;
}

DensityGrid CascadeSampler::build(const StreamKey& seed, std::optional<int> levels) const {
  const int depth = levels.value_or(config_.m);
  check_levels(depth);
  DensityGrid density{config_.grid, {}, config_, seed, depth};
  for_each_depth(seed, depth, [&](int k, std::span<const double> log_density) {
    if (k != depth) return;
    density.values.assign(log_density.begin(), log_density.end());
  });
  for (double& v : density.values) v = std::exp(v);
  return density;
}

DensityGrid CascadeSampler::lambda_level(int i, const StreamKey& seed) const {
  DensityGrid density{config_.grid, std::vector<double>(config_.grid.size()), config_, seed, 1};
  level_log_factor(i, seed, density.values);
  for (double& v : density.values) v = std::exp(v);
  return density;
}

DensityGrid build_density(const CascadeConfig& config, const StreamKey& seed) {
  return CascadeSampler(config).build(seed);
}

DensityGrid lambda_level(const CascadeConfig& config, int i, const StreamKey& seed) {
  if (i < 0 || i >= config.m) throw ArgumentError("lambda_level: index out of range");
  return CascadeSampler(config).lambda_level(i, seed);
}

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

}  // namespace

void write_density_binary(std::ostream& os, const DensityGrid& density) {
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(density.grid.n));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(density.grid.N));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(density.levels));
  put_le<double>(os, density.config.b);
  for (double v : density.values) put_le<double>(os, v);
}

}  // namespace mfc
