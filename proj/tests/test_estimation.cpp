#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfc/errors.hpp"
#include "mfc/estimation.hpp"
#include "mfc/moments.hpp"
#include "mfc/stats.hpp"
#include "support.hpp"

using namespace mfc;
using mfc::testing::gaussian_config;
using mfc::testing::unit_uniform_series;

TEST_CASE("stats helpers") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanSe e = mean_se(v);
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));

  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit exact = fit_line(x, y);
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(1.0));
  CHECK(exact.slope_se == doctest::Approx(0.0));

  // OLS on noisy data against the textbook formulas.
  const std::vector<double> yn{1.1, 2.9, 5.2, 6.8};
  const LineFit f = fit_line(x, yn);
  const double sxx = 5.0, slope = (-1.5 * 1.1 - 0.5 * 2.9 + 0.5 * 5.2 + 1.5 * 6.8) / sxx;
  CHECK(f.slope == doctest::Approx(slope));
  const double icpt = 4.0 - slope * 1.5;
  double rss = 0.0;
  for (int i = 0; i < 4; ++i) rss += std::pow(yn[i] - icpt - slope * x[i], 2);
  CHECK(f.slope_se == doctest::Approx(std::sqrt(rss / 2.0 / sxx)));

  // Weighted fit with equal weights equals OLS.
  const std::vector<double> w(4, 3.0);
  CHECK(fit_line(x, yn, std::span<const double>(w)).slope == doctest::Approx(f.slope));

  const auto ci = wilson_interval(50, 50);
  CHECK(ci.proportion == 1.0);
  CHECK(ci.hi == doctest::Approx(1.0));
  CHECK(ci.lo == doctest::Approx(50.0 / (50.0 + 1.96 * 1.96)));
}

TEST_CASE("renyi: degenerate field is exact") {
  const auto c = gaussian_config(0.0, 1, 1024, 3);
  const std::vector<double> q{0.0, 0.5, 1.0, 2.0, 3.0};
  const auto est = renyi_empirical(c, q, {2, 6}, 4, MonteCarlo{4, 1, 1});
  REQUIRE(est.size() == q.size());
  for (const auto& e : est) {
    CHECK(e.T_hat == doctest::Approx(e.q - 1.0).epsilon(1e-13));
    CHECK(e.std_error <= 1e-13);
    CHECK(e.per_level.size() == 5);
    CHECK(e.T_theory == e.q - 1.0);
  }
}

TEST_CASE("renyi: q = 1 gives zero, errors on bad windows") {
  const auto c = gaussian_config(0.3, 1, 1024, 4);
  const std::vector<double> q{1.0};
  const auto est = renyi_empirical(c, q, {2, 6}, 6, MonteCarlo{20, 3, 2});
  CHECK(std::abs(est[0].T_hat) <= 2.0 * est[0].std_error + 1e-12);
  CHECK_THROWS_AS(renyi_empirical(c, q, {3, 3}, 6, MonteCarlo{20, 3, 1}), EstimationError);
  CHECK_THROWS_AS(renyi_empirical(c, q, {2, 11}, 6, MonteCarlo{20, 3, 1}), ResolutionError);
  CHECK_THROWS_AS(renyi_empirical(c, q, {2, 6}, 3, MonteCarlo{20, 3, 1}), ArgumentError);
  CHECK_THROWS_AS(renyi_empirical(c, q, {2, 6}, 6, MonteCarlo{1, 3, 1}), ArgumentError);
  const auto warn = renyi_empirical(c, q, {1, 8}, 6, MonteCarlo{4, 3, 1});
  CHECK(warn[0].warnings.size() == 2);
}

TEST_CASE("renyi: Gaussian estimate is concave in q within noise") {
  const auto c = gaussian_config(0.2, 1, 2048, 6);
  const std::vector<double> q{0.5, 1.0, 1.5, 2.0};
  const auto est = renyi_empirical(c, q, {2, 6}, 8, MonteCarlo{60, 4, 1});
  for (std::size_t i = 1; i + 1 < est.size(); ++i) {
    const double d2 = est[i + 1].T_hat - 2 * est[i].T_hat + est[i - 1].T_hat;
    const double se = std::sqrt(std::pow(est[i + 1].std_error, 2) + 4 * std::pow(est[i].std_error, 2) +
                                std::pow(est[i - 1].std_error, 2));
    CHECK(d2 <= 3.0 * se);
  }
}

TEST_CASE("scaling: exact for the degenerate field, slope n at q = 1") {
  const std::vector<double> t{1.0 / 64, 1.0 / 16, 1.0 / 4, 1.0 / 2};
  for (int n : {1, 2}) {
    const auto c0 = gaussian_config(0.0, n, n == 1 ? 1024 : 256, 3);
    for (double q : {0.5, 1.0, 2.0}) {
      const auto fit = scaling_fit(c0, q, t, 3, MonteCarlo{3, 1, 1});
      CHECK(fit.slope == doctest::Approx(n * q).epsilon(1e-12));
      for (const auto& pt : fit.per_t) CHECK(pt.mean == doctest::Approx(std::pow(pt.t, n * q)).epsilon(1e-12));
    }
  }
  const auto c = gaussian_config(0.3, 1, 1024, 4);
  const auto fit = scaling_fit(c, 1.0, t, 6, MonteCarlo{40, 2, 2});
  CHECK(std::abs(fit.slope - 1.0) <= 2.0 * fit.slope_se + 1e-12);
  CHECK(fit.theory_slope == 1.0);
  const std::vector<double> not_dyadic{0.1, 0.5};
  CHECK_THROWS_AS(scaling_fit(c, 1.0, not_dyadic, 6, MonteCarlo{4, 1, 1}), ArgumentError);
  const std::vector<double> too_fine{1.0 / 512, 0.5};
  CHECK_THROWS_AS(scaling_fit(c, 1.0, too_fine, 6, MonteCarlo{4, 1, 1}), ResolutionError);
}

TEST_CASE("rates: degenerate field, preconditions and warnings") {
  const std::vector<int> m{1, 2, 3};
  const auto c0 = gaussian_config(0.0, 1, 256, 2);
  const auto fit0 = rate_fit(c0, 2.0, m, 6, MonteCarlo{4, 1, 1});
  CHECK(fit0.degenerate);
  CHECK(fit0.bound_ok);
  for (const auto& pt : fit0.per_m) CHECK(pt.mean == 0.0);

  const auto c = gaussian_config(0.2, 1, 256, 2);
  CHECK_THROWS_AS(rate_fit(c, 1.5, m, 6, MonteCarlo{4, 1, 1}), ArgumentError);
  CHECK_THROWS_AS(rate_fit(c, 3.0, m, 6, MonteCarlo{4, 1, 1}, 2.0), ArgumentError);
  CHECK_THROWS_AS(rate_fit(c, 2.0, m, 3, MonteCarlo{4, 1, 1}), EstimationError);
  const std::vector<int> unsorted{2, 1};
  CHECK_THROWS_AS(rate_fit(c, 2.0, unsorted, 6, MonteCarlo{4, 1, 1}), ArgumentError);
  const auto close = rate_fit(c, 2.0, m, 4, MonteCarlo{4, 1, 1});
  CHECK(close.warnings.size() == 1);
}

TEST_CASE("rates: nested means decrease in m within 3 SE") {
  const auto c = gaussian_config(0.2, 1, 1024, 2);
  const std::vector<int> m{1, 2, 3, 4, 5};
  const auto fit = rate_fit(c, 2.0, m, 8, MonteCarlo{100, 5, 1});
  for (std::size_t i = 1; i < fit.per_m.size(); ++i) {
    const auto& a = fit.per_m[i - 1];
    const auto& b = fit.per_m[i];
    CHECK(b.mean <= a.mean + 3.0 * std::hypot(a.se, b.se));
  }
  CHECK(fit.theory_factor == doctest::Approx(std::exp(0.2) / 2));
}

TEST_CASE("martingale: exact for the degenerate field, fails with a broken normalizer") {
  const std::vector<int> m{1, 2, 3, 4};
  const auto rows0 = martingale_check(gaussian_config(0.0, 1, 256, 1), m, MonteCarlo{30, 1, 1});
  for (const auto& r : rows0) {
    CHECK(r.mean == 1.0);
    CHECK(r.pass);
  }
  auto broken = gaussian_config(0.2, 1, 256, 1);
  broken.normalizer_override = 1.1 * std::exp(0.1);
  const auto rows = martingale_check(broken, m, MonteCarlo{200, 2, 1});
  for (const auto& r : rows) CHECK_FALSE(r.pass);
  CHECK_THROWS_AS(martingale_check(broken, m, MonteCarlo{29, 2, 1}), ArgumentError);
}

TEST_CASE("nondegeneracy") {
  const auto rep = nondegeneracy_check(gaussian_config(0.5, 1, 512, 4), 6, MonteCarlo{40, 1, 2});
  CHECK(rep.proportion == 1.0);
  CHECK(rep.positive == 40);
  CHECK(rep.wilson_lo < 1.0);
  const auto rep0 = nondegeneracy_check(gaussian_config(0.0, 1, 64, 1), 2, MonteCarlo{30, 1, 1});
  CHECK(rep0.proportion == 1.0);
}

TEST_CASE("results do not depend on the worker count") {
  const auto c = gaussian_config(0.2, 1, 512, 4);
  const std::vector<double> q{0.5, 2.0};
  const auto a = renyi_empirical(c, q, {2, 5}, 5, MonteCarlo{16, 9, 1});
  const auto b = renyi_empirical(c, q, {2, 5}, 5, MonteCarlo{16, 9, 5});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].T_hat == b[i].T_hat);
    CHECK(a[i].std_error == b[i].std_error);
  }
  const std::vector<int> m{1, 2, 3};
  const auto ra = rate_fit(c, 2.0, m, 5, MonteCarlo{16, 9, 1});
  const auto rb = rate_fit(c, 2.0, m, 5, MonteCarlo{16, 9, 3});
  CHECK(ra.slope == rb.slope);
}

TEST_CASE("series scenario runs through the estimators") {
  CascadeConfig c;
  c.scenario = SubGaussianSeries{unit_uniform_series({0.3, 0.2}, {{1, 0, 0}, {2, 0, 0}})};
  c.b = 2.0;
  c.m = 3;
  c.grid = GridSpec{1, 256};
  const std::vector<double> q{0.0, 1.0};
  const auto est = renyi_empirical(c, q, {2, 5}, 4, MonteCarlo{10, 1, 1});
  CHECK(est[0].T_hat == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(est[1].T_hat == doctest::Approx(0.0));
}
