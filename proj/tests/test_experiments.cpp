#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <json.hpp>

#include "ergo/config.hpp"
#include "ergo/dynamics.hpp"
#include "ergo/errors.hpp"
#include "ergo/experiments.hpp"
#include "ergo/io.hpp"

using namespace ergo;
using nlohmann::json;

TEST_CASE("fit_loglog") {
  std::vector<double> x, y, c;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(double(i) * i);
    c.push_back(3.5);
  }
  auto f = fit_loglog(x, y);
  CHECK(f.line.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.line.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(fit_loglog(x, c).line.slope) <= 1e-12);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0, 0.01);
  std::vector<double> xs, ys;
  for (int i = 0; i < 200; ++i) {
    const double t = std::pow(10.0, 3.0 * i / 199);
    xs.push_back(t);
    ys.push_back(std::pow(t, 1.5) * (1 + noise(rng)));
  }
  f = fit_loglog(xs, ys);
  CHECK(f.line.slope == doctest::Approx(1.5).epsilon(0.02 / 1.5));
  CHECK(f.ci_low <= 1.5);
  CHECK(f.ci_high >= 1.5);

  const std::vector<double> two{1, 2}, bad{1, -2, 3};
  CHECK_THROWS_AS(fit_loglog(two, two), FitError);
  CHECK_THROWS_AS(fit_loglog(bad, bad), FitError);
}

TEST_CASE("hill_estimator") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  SUBCASE("Pareto index recovered") {
    for (double alpha : {4.0 / 3, 2.0}) {
      std::vector<double> v(100000);
      for (auto& x : v) x = std::pow(1 - u(rng), -1 / alpha);
      CHECK(hill_estimator(v, 0.1) == doctest::Approx(alpha).epsilon(0.05));
    }
  }
  SUBCASE("exponential data rejects the heavy tail") {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(1000000);
    for (auto& x : v) x = e(rng);
    CHECK(hill_estimator(v, 0.1) > 4.0 / 3 + 0.3);
    CHECK(hill_estimator(v, 0.001) > 5);
  }
  SUBCASE("degenerate sample") {
    const std::vector<double> same(100, 2.0);
    CHECK_THROWS(hill_estimator(same, 0.1));
  }
}

TEST_CASE("scaling targets") {
  CHECK(p_gamma(0.25) == doctest::Approx(6.0));
  auto t = scaling_target(0.25, 6);
  CHECK(t.slope == 0.5);
  CHECK_FALSE(t.log_n_log_n);
  t = scaling_target(0.75, 4.0 / 3);
  CHECK(t.slope == doctest::Approx(0.75));
  CHECK(t.log_n_log_n);
  t = scaling_target(0.75, 4);
  CHECK(t.slope == doctest::Approx(11.0 / 12));
}

TEST_CASE("tail_table on a synthetic Pareto sample") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(20000);
  for (auto& x : v) x = std::pow(1 - u(rng), -0.75);
  const auto grid = quantile_grid(v, 0.01, 0.1, 12);
  REQUIRE(grid.size() == 12);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  const auto r = tail_table(v, grid, -4.0 / 3, 0.15);
  CHECK(r.pass);
  CHECK(r.fit.slope == doctest::Approx(-4.0 / 3).epsilon(0.1));
  // Small x: tail is one.
  const std::vector<double> tiny{1e-9};
  CHECK(tail_table(v, tiny, -1, 1).rows[0].tail == 1.0);
}

TEST_CASE("sorted_quantile") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  CHECK(sorted_quantile(s, 0) == 1);
  CHECK(sorted_quantile(s, 1) == 5);
  CHECK(sorted_quantile(s, 0.5) == 3);
  CHECK(sorted_quantile(s, 0.125) == doctest::Approx(1.5));
}

TEST_CASE("simulate_statistics") {
  const auto model = build_ulam(0.25, 2048);
  ExperimentConfig c;
  c.gamma = 0.25;
  c.n_grid = {64, 128, 256, 512};
  c.replicas = 50;
  c.burn_in = 1000;
  c.ulam_m = 2048;
  SUBCASE("bit-identical across thread counts") {
    c.threads = 1;
    const auto a = simulate_statistics(c, model.cdf);
    c.threads = 4;
    const auto b = simulate_statistics(c, model.cdf);
    CHECK(a.max_d_kq == b.max_d_kq);
    CHECK(a.d_nq == b.d_nq);
    CHECK(a.w1 == b.w1);
    CHECK(raw_csv(a).str() == raw_csv(b).str());
  }
  SUBCASE("prefix invariants") {
    c.threads = 1;
    const auto t = simulate_statistics(c, model.cdf);
    for (std::size_t r = 0; r < t.replicas; ++r)
      for (std::size_t j = 0; j < t.n_grid.size(); ++j) {
        CHECK(t.at(t.max_d_kq, r, j) >= t.at(t.d_nq, r, j) * (1 - 1e-12));
        if (j > 0) CHECK(t.at(t.max_d_kq, r, j) >= t.at(t.max_d_kq, r, j - 1));
        CHECK(t.at(t.w1, r, j) <= t.at(t.d_nq, r, j) / double(t.n_grid[j]) + 1e-3);
      }
  }
  SUBCASE("q != 2 goes through the quadrature path") {
    c.threads = 1;
    c.q = 3;
    c.replicas = 50;
    const auto t = simulate_statistics(c, model.cdf);
    for (std::size_t r = 0; r < t.replicas; ++r)
      for (std::size_t j = 1; j < t.n_grid.size(); ++j)
        CHECK(t.at(t.max_d_kq, r, j) >= t.at(t.max_d_kq, r, j - 1));
  }
  SUBCASE("validation") {
    c.replicas = 10;
    CHECK_THROWS_AS(validate(c), ContractViolation);
    c.replicas = 50;
    c.gamma = 1.2;
    CHECK_THROWS_AS(validate(c), ContractViolation);
  }
}

TEST_CASE("scaling run at reduced size") {
  const auto model = build_ulam(0.25, 4096);
  ExperimentConfig c;
  c.gamma = 0.25;
  c.p = 2;
  c.n_grid = {256, 512, 1024, 2048, 4096};
  c.replicas = 100;
  c.burn_in = 1000;
  c.ulam_m = 4096;
  c.threads = 1;
  const auto r = run_scaling(c, model.cdf, 0.1);
  CHECK(r.fit.slope == doctest::Approx(0.5).epsilon(0.2));
  CHECK(r.ci_low <= r.fit.slope);
  CHECK(r.ci_high >= r.fit.slope);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].mean >= r.rows[i - 1].mean);
}

TEST_CASE("config canonicalization") {
  const auto a = canonicalize_config(json::parse(R"({"gamma":0.25,"kind":"scaling","q":2})"));
  const auto b = canonicalize_config(json::parse(R"({"q":2,"kind":"scaling","gamma":0.25})"));
  CHECK(a.hash == b.hash);
  CHECK(a.hash.size() == 16);
  CHECK(a.config["replicas"] == 200);
  CHECK(std::find(a.defaulted.begin(), a.defaulted.end(), "replicas") != a.defaulted.end());
  CHECK(a.config["p"].get<double>() == doctest::Approx(6.0));
  const auto c = canonicalize_config(json::parse(R"({"gamma":0.25,"replicas":201})"));
  CHECK(c.hash != a.hash);
  try {
    canonicalize_config(json::parse(R"({"gamma":1.5})"));
    FAIL("gamma 1.5 accepted");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  CHECK_THROWS_AS(canonicalize_config(json::parse(R"({"gamma":0.25,"color":1})")), ContractViolation);
  CHECK_THROWS_AS(canonicalize_config(json::parse(R"({"gamma":0.25,"kind":"deviation"})")), ContractViolation);
  const auto spec = experiment_spec_from_json(a.config);
  CHECK(spec.kind == ExperimentKind::scaling);
  CHECK(spec.config.replicas == 200);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("csv output") {
  CsvTable t({"a", "b"});
  t.row({"1", "x,y"}).row({format_double(0.1), "q\""});
  CHECK(t.str() == "a,b\r\n1,\"x,y\"\r\n0.10000000000000001,\"q\"\"\"\r\n");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}
