#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergo/dynamics.hpp"
#include "ergo/errors.hpp"
#include "ergo/experiments.hpp"

using namespace ergo;

TEST_CASE("lsv_map values") {
  CHECK(lsv_map(0.5, 0.0) == 0.0);
  CHECK(lsv_map(0.5, 0.75) == 0.5);
  CHECK(lsv_map(0.5, 0.5) == 0.0);
  CHECK(lsv_map(0.5, 0.25) == doctest::Approx(0.4267766953).epsilon(1e-10));
  CHECK_THROWS_AS(lsv_map(0.5, 1.5), DomainError);
  CHECK_THROWS_AS(lsv_map(0.5, -0.1), DomainError);
  CHECK_THROWS(LsvMap(0.0));
  CHECK_THROWS(LsvMap(1.0));
}

TEST_CASE("iterate") {
  const LsvMap map(0.5);
  const auto t = iterate(map, 1, 0, 0.75);
  REQUIRE(t.points.size() == 1);
  CHECK(t.points[0] == 0.5);
  const auto longer = iterate(map, 150, 0, 0.3141);
  const auto burned = iterate(map, 100, 50, 0.3141);
  for (std::size_t i = 0; i < 100; ++i) CHECK(burned.points[i] == longer.points[i + 50]);
  const auto a = iterate(map, 20, 10, std::nullopt, 42);
  const auto b = iterate(map, 20, 10, std::nullopt, 42);
  CHECK(a.x0 == b.x0);
  CHECK(a.points == b.points);
}

TEST_CASE("preimage_left") {
  for (double gamma : {0.25, 0.5, 0.75}) {
    CHECK(preimage_left(gamma, 0.0) == 0.0);
    for (int i = 1; i < 100; ++i) {
      const double y = i / 100.0;
      CHECK(std::abs(lsv_map(gamma, preimage_left(gamma, y)) - y) <= 1e-12);
    }
    // Tiny arguments keep full relative accuracy.
    const double y = 1e-14;
    CHECK(std::abs(lsv_map(gamma, preimage_left(gamma, y)) - y) <= 1e-12 * y);
  }
  CHECK(preimage_left(0.999, 1.0) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("tower partition") {
  for (double gamma : {0.25, 0.5, 0.75}) {
    const auto t = build_tower(gamma, 10000);
    for (std::size_t k = 0; k <= t.K; ++k) CHECK(std::abs(t.tail[k] - t.x[k] / 2) <= 1e-15);
    for (std::size_t k = 1; k <= t.K; ++k) {
      CHECK(t.x[k] < t.x[k - 1]);
      CHECK(t.mass[k] > 0);
    }
    const double asym = 0.5 * std::pow(gamma * 10000, -1 / gamma);
    CHECK(t.x[10000] / asym == doctest::Approx(1.0).epsilon(0.05));
    std::vector<double> lk, lt;
    for (int i = 0; i <= 40; ++i) {
      const auto k = static_cast<std::size_t>(std::lround(100 * std::pow(100.0, i / 40.0)));
      lk.push_back(static_cast<double>(k));
      lt.push_back(t.tail[k]);
    }
    CHECK(fit_loglog(lk, lt).line.slope == doctest::Approx(-1 / gamma).epsilon(0.05 * gamma));
  }
  SUBCASE("mass sums to the remaining tail") {
    const auto t = build_tower(0.5, 1000);
    double sum = 0;
    for (std::size_t k = 1; k <= t.K; ++k) sum += t.mass[k];
    CHECK(sum + t.tail[t.K] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("series sum k lambda(Y_k) converges") {
    const auto t = build_tower(0.5, 10000);
    double last = 0, prev = 0;
    for (std::size_t k = 1001; k <= 10000; ++k) last += k * t.mass[k];
    for (std::size_t k = 101; k <= 1000; ++k) prev += k * t.mass[k];
    CHECK(last <= 2.5e-3);
    CHECK(last / prev == doctest::Approx(0.1).epsilon(0.3));
  }
}

TEST_CASE("ulam model") {
  const auto model = build_ulam(0.25, 4096);
  SUBCASE("stochastic rows and a proper cdf") {
    for (Eigen::Index r = 0; r < model.P.rows(); ++r) CHECK(model.P.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(invariant_cdf(model, 0.0) == 0.0);
    CHECK(invariant_cdf(model, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    double prev = 0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = invariant_cdf(model, i / 1000.0);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(model.residual <= 1e-12);
    CHECK(model.stationary.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("grid refinement") {
    const auto fine = build_ulam(0.25, 8192);
    double sup = 0;
    for (int i = 0; i <= 20000; ++i) {
      const double t = i / 20000.0;
      sup = std::max(sup, std::abs(invariant_cdf(model, t) - invariant_cdf(fine, t)));
    }
    CHECK(sup <= 5e-3);
  }
  SUBCASE("long trajectory matches the invariant law") {
    const auto ref = build_ulam(0.25, 16384);
    const auto t = iterate(LsvMap(0.25), 10000000, 10000, std::nullopt, 2024);
    std::size_t right = 0;
    for (double x : t.points) right += x > 0.5;
    const double occupation = static_cast<double>(right) / static_cast<double>(t.points.size());
    CHECK(std::abs(occupation - (1 - invariant_cdf(ref, 0.5))) <= 2e-3);
    auto sorted = t.points;
    std::sort(sorted.begin(), sorted.end());
    double sup = 0;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); i += 997) {
      const double F = invariant_cdf(ref, sorted[i]);
      sup = std::max({sup, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    CHECK(sup <= 3e-3);
  }
  SUBCASE("invariant expectation") {
    CHECK(invariant_expectation(model, [](double) { return 2.5; }) == doctest::Approx(2.5).epsilon(1e-12));
    // For an indicator of [0, t] the expectation is F(t) up to cell quadrature.
    CHECK(invariant_expectation(model, [](double x) { return x <= 0.5 ? 1.0 : 0.0; }) ==
          doctest::Approx(invariant_cdf(model, 0.5)).epsilon(1e-3));
  }
  CHECK_THROWS_AS(build_ulam(0.25, 12), ContractViolation);
}

TEST_CASE("correlation decay") {
  const std::vector<std::size_t> lags{4, 8, 16, 32, 64};
  SUBCASE("constant observables") {
    auto c = [](double) { return 1.5; };
    CHECK_THROWS_AS(correlation_decay(0.5, c, c, lags, 10, 2000, 3), FitError);
  }
  SUBCASE("summable regime decays fast") {
    auto f = [](double x) { return x < 0.25 ? 1.0 : 0.0; };
    const std::vector<std::size_t> short_lags{1, 2, 3, 4, 6, 8};
    const auto d = correlation_decay(0.25, f, f, short_lags, 64, 20000, 5, 1000, 1);
    CHECK(d.slope <= -1.0);
  }
}
