#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mfc/cascade.hpp"
#include "mfc/rng.hpp"

namespace mfc::testing {

inline CascadeConfig gaussian_config(double sigma2, int n, std::size_t N, int m, double b = 2.0) {
  CascadeConfig c;
  c.scenario = GeometricGaussian{CovarianceModel::exponential(sigma2, 1.0)};
  c.b = b;
  c.m = m;
  c.grid = GridSpec{n, N};
  return c;
}

inline SeriesModel unit_uniform_series(std::vector<double> amplitudes,
                                       std::vector<std::array<int, 3>> freqs, int n = 1) {
  SeriesModel s;
  s.n = n;
  s.amplitudes = std::move(amplitudes);
  s.frequencies = std::move(freqs);
  s.innovation.bound = std::sqrt(3.0);
  s.phi.beta = 2.0;
  s.D = 1.0;
  return s;
}

// Source of random test cases for property checks.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(StreamKey{seed, 0xfeed, 0}) {}
  double real(double lo, double hi) { return rng_.uniform(lo, hi); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.uniform() * (hi - lo + 1)); }
  double normal() { return rng_.normal(); }

  CovarianceModel covariance() {
    const double sigma2 = real(0.0, 1.0);
    const double ell = real(0.05, 3.0);
    switch (integer(0, 2)) {
      case 0: return CovarianceModel::exponential(sigma2, ell);
      case 1: return CovarianceModel::powered_exponential(sigma2, ell, real(0.1, 2.0));
      default: return CovarianceModel::generalized_cauchy(sigma2, ell, real(0.2, 5.0));
    }
  }

 private:
  Rng rng_;
};

}  // namespace mfc::testing
