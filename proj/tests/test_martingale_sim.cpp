#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ergo/martingale_sim.hpp"

using namespace ergo;

TEST_CASE("wilson_upper") {
  CHECK(wilson_upper(0, 1000000) == doctest::Approx(6.63e-6).epsilon(0.01));
  CHECK(wilson_upper(500, 1000) > 0.5);
  CHECK(wilson_upper(1000, 1000) == doctest::Approx(1.0));
}

TEST_CASE("simulate_martingale") {
  SUBCASE("rademacher increments have norm b") {
    MartingaleConfig c{3, 3.0, 1, 2.0, IncrementLaw::rademacher_coords};
    const auto p = simulate_martingale(c, 1000, 1, 1);
    for (double t : p.terminal) CHECK(t == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("simple random walk maxima match path enumeration") {
    const std::size_t n = 16;
    std::vector<double> exact(n + 1, 0.0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      int s = 0, m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        s += (mask >> i & 1u) ? 1 : -1;
        m = std::max(m, std::abs(s));
      }
      exact[m] += 1.0 / (1u << n);
    }
    MartingaleConfig c{1, 2.0, n, 1.0, IncrementLaw::rademacher_coords};
    const std::size_t R = 200000;
    const auto p = simulate_martingale(c, R, 3, 1);
    std::vector<double> freq(n + 1, 0.0);
    for (double m : p.path_max) freq[static_cast<std::size_t>(std::lround(m))] += 1.0 / R;
    for (std::size_t m = 0; m <= n; ++m)
      CHECK(std::abs(freq[m] - exact[m]) <= 5 * std::sqrt(exact[m] * (1 - exact[m]) / R) + 1e-9);
  }
  SUBCASE("thread count does not change output") {
    MartingaleConfig c{4, 4.0, 32, 1.0, IncrementLaw::scaled_uniform};
    const auto a = simulate_martingale(c, 500, 9, 1);
    const auto b = simulate_martingale(c, 500, 9, 3);
    CHECK(a.path_max == b.path_max);
    CHECK(a.terminal == b.terminal);
  }
  CHECK_THROWS(validate(MartingaleConfig{0, 2.0, 1, 1.0}));
  CHECK_THROWS(validate(MartingaleConfig{1, 1.0, 1, 1.0}));
}

TEST_CASE("martingale MZ checks") {
  SUBCASE("Hilbert equality case") {
    MartingaleConfig c{1, 2.0, 10, 1.0, IncrementLaw::rademacher_coords};
    const auto p = simulate_martingale(c, 1000, 2, 1);
    const auto m = terminal_moment(p, 2);
    CHECK(m.mean == doctest::Approx(10.0).epsilon(0.15));
  }
  SUBCASE("q=3, p=3") {
    const auto r = verify_martingale_mz(MartingaleConfig{4, 3.0, 8, 1.0}, 3, 100000, 4, 1);
    CHECK(r.pass());
    CHECK(r.rhs == doctest::Approx(std::pow(2.0, 1.5) * std::pow(8.0, 1.5)));
  }
  SUBCASE("p=2, q=4") {
    const auto r = verify_martingale_mz(MartingaleConfig{1, 4.0, 16, 1.0}, 2, 50000, 5, 1);
    CHECK(r.pass());
    CHECK(r.rhs == doctest::Approx(3 * 16.0));
    CHECK(r.lhs == doctest::Approx(16.0).epsilon(0.05));
    CHECK(verify_martingale_mz(MartingaleConfig{8, 4.0, 16, 1.0}, 2, 50000, 5, 1).pass());
  }
}

TEST_CASE("verify_hoeffding") {
  const MartingaleConfig c{8, 4.0, 64, 1.0};
  const std::vector<double> grid{1.0, 8.0, 16.0, 24.0, 32.0};
  const auto r = verify_hoeffding(c, 50000, grid, 6, 1);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == grid.size());
  CHECK(r.rows[0].bound.regime == TailRegime::trivial);
  for (const auto& row : r.rows) CHECK(row.bound.value <= row.pinelis94 * (1 + 1e-12));
}

TEST_CASE("markov instrument") {
  SUBCASE("sticky chain theta") {
    const auto inst = sticky_chain(0.9, 2);
    const auto e = exact_conditionals(inst, 2, 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(e.theta[k] == doctest::Approx(std::pow(0.8, k)).epsilon(1e-12));
    CHECK(inst.stationary[0] == doctest::Approx(0.5));
  }
  SUBCASE("iid chain has theta(k) = 0 for k >= 1") {
    Eigen::VectorXd probs(3);
    probs << 0.2, 0.5, 0.3;
    Eigen::MatrixXd emb(3, 2);
    emb << 1, 0, -1, 2, 0.5, -3;
    const auto inst = iid_chain(probs, emb, 3);
    const auto e = exact_conditionals(inst, 3, 6);
    for (std::size_t k = 1; k < 6; ++k) CHECK(std::abs(e.theta[k]) <= 1e-14);
    // b_{i,n} = (E|X_i|^p)^{2/p}
    double m = 0;
    for (int s = 0; s < 3; ++s) m += probs[s] * std::pow(norm_q(inst.space, inst.embedding.row(s).transpose()), 3.0);
    for (double b : e.b_stationary) CHECK(b == doctest::Approx(std::pow(m, 2.0 / 3)).epsilon(1e-12));
  }
  SUBCASE("symmetric flip chain behaves as i.i.d.") {
    const auto inst = sticky_chain(0.5, 2);
    const auto e = exact_conditionals(inst, 2, 5);
    for (std::size_t k = 1; k < 5; ++k) CHECK(std::abs(e.theta[k]) <= 1e-14);
  }
  SUBCASE("enumeration and MZ check") {
    const auto iid = sticky_chain(0.5, 2);
    const auto m = enumerate_moments(iid, 2, 10, std::nullopt);
    CHECK(m.sn_moment == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(m.max_moment >= m.sn_moment);
    for (const auto& r : verify_mz_markov(iid, 2, 10, 0, 1)) {
      CHECK(r.pass());
      CHECK(r.method == "exact");
    }
    const auto sticky = sticky_chain(0.9, 3);
    const auto checks = verify_mz_markov(sticky, 3, 16, 0, 1);
    CHECK(checks.size() == 2);
    for (const auto& r : checks) CHECK(r.pass());
  }
  SUBCASE("contracts") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS(make_instrument(bad, Eigen::MatrixXd::Ones(2, 1), 2));
  }
}
