#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mfc/covariance.hpp"
#include "mfc/errors.hpp"
#include "support.hpp"

using namespace mfc;
using mfc::testing::Gen;

TEST_CASE("evaluate: closed forms") {
  const auto e = CovarianceModel::exponential(0.2, 1.0);
  CHECK(evaluate(e, 0.0) == 0.2);
  CHECK(evaluate(e, 1.0) == doctest::Approx(0.2 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(evaluate(e, 1e4) == doctest::Approx(0.0));
  CHECK(evaluate(CovarianceModel::generalized_cauchy(0.2, 1.0, 3.0), 1.0) ==
        doctest::Approx(0.1).epsilon(1e-15));
  CHECK(evaluate(CovarianceModel::powered_exponential(0.5, 2.0, 1.5), 2.0) ==
        doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("validate rejects out-of-domain parameters") {
  CHECK_THROWS_AS(CovarianceModel::exponential(-0.1, 1.0).validate(), ParameterError);
  CHECK_THROWS_AS(CovarianceModel::exponential(0.2, 0.0).validate(), ParameterError);
  CHECK_THROWS_AS(CovarianceModel::powered_exponential(0.2, 1.0, 2.5).validate(), ParameterError);
  CHECK_THROWS_AS(CovarianceModel::powered_exponential(0.2, 1.0, 0.0).validate(), ParameterError);
  CHECK_THROWS_AS(CovarianceModel::generalized_cauchy(0.2, 1.0, 0.0).validate(), ParameterError);
  CHECK_NOTHROW(CovarianceModel::exponential(0.0, 1.0).validate());
}

TEST_CASE("monotone check: families pass, counterexample fails") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
  CHECK(check_monotone_nonnegative(CovarianceModel::exponential(0.2, 1.0), grid).ok);

  std::vector<double> fine(1000);
  const double top = std::sqrt(1.0) * std::pow(2.0, 8);
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = top * i / (fine.size() - 1.0);
  CHECK(check_monotone_nonnegative(CovarianceModel::generalized_cauchy(0.2, 1.0, 3.0), fine).ok);

  const TabulatedCovariance inverted({0.0, 1.0, 2.0, 3.0}, {1.0, 0.5, 0.7, 0.1});
  const auto report = check_monotone_nonnegative(inverted, grid);
  CHECK_FALSE(report.ok);
  REQUIRE(report.violation_index.has_value());
  CHECK(*report.violation_index == 3);

  const TabulatedCovariance negative({0.0, 1.0}, {1.0, -0.5});
  CHECK_FALSE(check_monotone_nonnegative(negative, std::vector<double>{0.0, 0.5, 1.0}).ok);

  CHECK_THROWS_AS(check_monotone_nonnegative(CovarianceModel::exponential(0.2, 1.0), std::vector<double>{}),
                  ArgumentError);
  CHECK_THROWS(check_monotone_nonnegative(CovarianceModel::exponential(0.2, 1.0),
                                          std::vector<double>{1.0, 0.5}));
}

TEST_CASE("property: random models are nonnegative, nonincreasing, r(0) = sigma2") {
  Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto model = gen.covariance();
    CHECK(evaluate(model, 0.0) == model.sigma2);
    double h1 = gen.real(0.0, 5.0);
    double h2 = h1 + gen.real(0.0, 5.0);
    CHECK(evaluate(model, h2) <= evaluate(model, h1));
    CHECK(evaluate(model, h2) >= 0.0);
  }
}

TEST_CASE("decay exponent") {
  CHECK(*decay_exponent(CovarianceModel::generalized_cauchy(0.2, 1.0, 3.0)) == 3.0);
  CHECK(std::isinf(*decay_exponent(CovarianceModel::exponential(0.2, 1.0))));
  CHECK(std::isinf(*decay_exponent(CovarianceModel::powered_exponential(0.2, 1.0, 1.5))));
}

TEST_CASE("generalized Cauchy: r(h) h^alpha stays bounded by sigma2 ell^alpha") {
  const auto model = CovarianceModel::generalized_cauchy(0.3, 1.7, 2.5);
  const double C = 0.3 * std::pow(1.7, 2.5);
  for (double lh = 0.0; lh <= 12.0; lh += 0.25) {
    const double h = std::pow(10.0, lh);
    CHECK(evaluate(model, h) * std::pow(h, 2.5) <= C * (1 + 1e-12));
  }
}

// Direct summation far beyond i_max, used as the oracle for tail bounds.
static double direct_mixing(const CovarianceModel& m, double b, int n, int from, int to) {
  double s = 0.0;
  for (int i = to; i >= from; --i) s += evaluate(m, std::sqrt(double(n)) * std::pow(b, i));
  return s;
}

TEST_CASE("mixing_sum: exponential example") {
  const auto model = CovarianceModel::exponential(0.2, 1.0);
  const auto rep = mixing_sum(model, 2.0, 1, 64);
  CHECK(rep.summable);
  double oracle = 0.0;
  for (int i = 0; i < 1100; ++i) oracle += 0.2 * std::exp(-std::ldexp(1.0, i));
  CHECK(rep.total_upper_bound() >= oracle * (1 - 1e-15));
  CHECK(rep.total_upper_bound() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(mixing_sum(model, 1.0, 1, 64), ParameterError);
}

TEST_CASE("mixing_sum: tail bound dominates the remainder") {
  Gen gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto model = gen.covariance();
    const double b = gen.real(1.2, 4.0);
    const int n = gen.integer(1, 3);
    const int i_max = gen.integer(1, 10);
    const auto rep = mixing_sum(model, b, n, i_max);
    REQUIRE(rep.summable);
    REQUIRE(rep.partial_sums.size() == static_cast<std::size_t>(i_max) + 1);
    for (std::size_t i = 1; i < rep.partial_sums.size(); ++i) {
      CHECK(rep.partial_sums[i] >= rep.partial_sums[i - 1]);
    }
    const double remainder = direct_mixing(model, b, n, i_max + 1, i_max + 3000);
    CHECK(rep.tail_bound >= remainder * (1 - 1e-12));
  }
  const auto cauchy = mixing_sum(CovarianceModel::generalized_cauchy(0.2, 1.0, 3.0), 2.0, 1, 64);
  CHECK(cauchy.summable);
  CHECK(cauchy.partial_sums[0] == doctest::Approx(0.1));
}

TEST_CASE("modulus_sum: tail bound dominates the remainder") {
  Gen gen(9);
  for (int trial = 0; trial < 60; ++trial) {
    const auto model = gen.covariance();
    const double b = gen.real(1.5, 4.0);
    const int n = gen.integer(1, 3);
    const int i_max = gen.integer(2, 12);
    const auto rep = modulus_sum(model, b, n, i_max);
    REQUIRE(rep.summable);
    // Extended-precision oracle; the subtraction sigma2 - r(h) cancels badly
    // in double at small h.
    long double remainder = 0.0L;
    for (int i = i_max + 400; i > i_max; --i) {
      const long double h = std::sqrt((long double)n) * std::pow((long double)b, (long double)-i);
      const long double x = h / model.ell;
      long double d = 0.0L;
      if (model.family == CovarianceFamily::exponential) d = -std::expm1(-x);
      if (model.family == CovarianceFamily::powered_exponential) d = -std::expm1(-std::pow(x, (long double)model.kappa));
      if (model.family == CovarianceFamily::generalized_cauchy) {
        const long double xa = std::pow(x, (long double)model.alpha);
        d = xa / (1.0L + xa);
      }
      remainder += model.sigma2 * d;
    }
    CHECK(rep.tail_bound >= static_cast<double>(remainder) * (1 - 1e-12));
  }
}
