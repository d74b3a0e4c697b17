#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qbc/protocol.hpp"
#include "qbc/stats.hpp"

using namespace qbc;
using namespace qbc::stats;

TEST_CASE("closed forms") {
  CHECK(expected_raw_correlation(0.0) == 0.75);
  CHECK(expected_raw_correlation(0.5) == 0.625);
  CHECK(expected_raw_correlation(1.0) == 0.5);
  CHECK(expected_sifted_correlation(0.0) == 1.0);
  CHECK(expected_sifted_correlation(0.5) == 0.75);
  CHECK(expected_sifted_correlation(1.0) == 0.5);
  CHECK_THROWS_AS(expected_raw_correlation(-0.01), std::domain_error);
  CHECK_THROWS_AS(expected_sifted_correlation(1.01), std::domain_error);
}

TEST_CASE("closed forms are affine, decreasing and meet at e = 1") {
  double prev_raw = 2.0, prev_sift = 2.0;
  for (int k = 0; k <= 20; ++k) {
    const double e = k / 20.0;
    const double raw = expected_raw_correlation(e), sifted = expected_sifted_correlation(e);
    CHECK(raw < prev_raw);
    CHECK(sifted < prev_sift);
    CHECK(raw == doctest::Approx(0.75 + (0.5 - 0.75) * e));
    CHECK(sifted == doctest::Approx(1.0 + (0.5 - 1.0) * e));
    prev_raw = raw;
    prev_sift = sifted;
  }
  CHECK(expected_raw_correlation(1.0) == expected_sifted_correlation(1.0));
}

TEST_CASE("closed forms agree with the honest simulator at n=100000") {
  const double tol = 3.0 * std::sqrt(0.25 / 100000) + 0.002;
  std::uint64_t seed = 100;
  for (double e : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    SessionConfig c;
    c.n = 100000;
    c.error_fraction = e;
    c.seed = RngSeed{seed++};
    const auto r = run_honest_session(c);
    CHECK(std::abs(r.raw.direct - expected_raw_correlation(e)) <= tol);
    const double s = static_cast<double>(r.alignment.sift_size);
    CHECK(std::abs(r.alignment.direct_rate() - expected_sifted_correlation(e)) <= 3.0 * std::sqrt(0.25 / s) + 0.002);
  }
}

TEST_CASE("correlation") {
  const std::vector<BitValue> a{BitValue::One, BitValue::Zero, BitValue::Zero, BitValue::One, BitValue::One};
  std::vector<BitValue> flipped;
  for (auto b : a) flipped.push_back(flip(b));
  CHECK(correlation(a, a) == 1.0);
  CHECK(correlation(a, flipped) == 0.0);
  CHECK_THROWS_AS(correlation(std::vector<BitValue>{}, std::vector<BitValue>{}), std::domain_error);
  CHECK_THROWS_AS(correlation(a, std::vector<BitValue>{BitValue::One}), std::domain_error);

  RandomStream r(3);
  std::vector<BitValue> x, y;
  for (int i = 0; i < 100000; ++i) {
    x.push_back(bit_from(r.coin()));
    y.push_back(bit_from(r.coin()));
  }
  CHECK(std::abs(correlation(x, y) - 0.5) <= 0.01);
}

TEST_CASE("Wilson interval against the exact-enumeration oracle") {
  SUBCASE("50/100") {
    const auto ci = binomial_ci(50, 100, 0.95);
    const auto [lo, hi] = oracle::exact_interval(50, 100, 0.95);
    CHECK(ci.contains(0.5));
    CHECK(std::abs(ci.width() - 0.19) <= 0.02);
    CHECK(std::abs(ci.width() - (hi - lo)) <= 0.02);
    CHECK(ci.low == doctest::Approx(0.403831).epsilon(1e-5));
    CHECK(ci.high == doctest::Approx(0.596169).epsilon(1e-5));
  }
  SUBCASE("100/100") {
    const auto ci = binomial_ci(100, 100, 0.95);
    const auto [lo, hi] = oracle::exact_interval(100, 100, 0.95);
    CHECK(ci.high == 1.0);
    CHECK(hi == 1.0);
    CHECK(ci.low > 0.95);
    CHECK(std::abs(ci.low - lo) <= 0.01);
  }
  SUBCASE("0/1") {
    const auto ci = binomial_ci(0, 1, 0.95);
    CHECK(ci.low == 0.0);
    CHECK(ci.high > 0.0);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(binomial_ci(2, 1, 0.95), std::domain_error);
    CHECK_THROWS_AS(binomial_ci(0, 0, 0.95), std::domain_error);
    CHECK_THROWS_AS(binomial_ci(1, 2, 1.0), std::domain_error);
    CHECK_THROWS_AS(binomial_ci(1, 2, 0.0), std::domain_error);
  }
}

TEST_CASE("Wilson interval always contains the point estimate") {
  for (std::size_t n : {1U, 2U, 7U, 30U, 128U}) {
    for (std::size_t k = 0; k <= n; ++k) {
      const auto ci = binomial_ci(k, n, 0.95);
      const double p = static_cast<double>(k) / n;
      REQUIRE(ci.low <= p);
      REQUIRE(p <= ci.high);
      REQUIRE(0.0 <= ci.low);
      REQUIRE(ci.high <= 1.0);
    }
  }
}

TEST_CASE("Wilson 95% coverage at p = 0.75") {
  std::mt19937 gen(12345);
  std::binomial_distribution<std::size_t> draw(100, 0.75);
  int covered = 0;
  for (int i = 0; i < 1000; ++i) covered += binomial_ci(draw(gen), 100, 0.95).contains(0.75);
  CHECK(std::abs(covered - 950) <= 25);
}

TEST_CASE("decode_error_bound") {
  SUBCASE("formula value at s=128, e=0.5, delta=0.10") {
    // t = (0.75 - 0.5 - 0.10) / 2 = 0.075
    CHECK(decode_error_bound(128, 0.5, 0.10) == doctest::Approx(2.0 * std::exp(-2.0 * 128 * 0.075 * 0.075)));
  }
  SUBCASE("no decodable gap") {
    CHECK(decode_error_bound(1000, 1.0, 0.10) == 1.0);
    CHECK(decode_error_bound(1000, 0.5, 0.25) == 1.0);
  }
  SUBCASE("nonincreasing in sift size") {
    double prev = 1.0;
    for (std::size_t s = 1; s < 5000; s += 7) {
      const double b = decode_error_bound(s, 0.3, 0.1);
      CHECK(b <= prev);
      prev = b;
    }
  }
  SUBCASE("conservative against the honest simulator at n=256, e=0.5") {
    const DecisionPolicy policy;
    int failures = 0;
    double bound_sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      SessionConfig c;
      c.n = 256;
      c.error_fraction = 0.5;
      c.committed_bit = bit_from(t & 1);
      c.seed = RngSeed{derive_seed(77, t)};
      const auto r = run_honest_session(c);
      failures += r.decision != decision_for(c.committed_bit);
      bound_sum += decode_error_bound(r.alignment.sift_size, 0.5, policy.separation_delta);
    }
    CHECK(static_cast<double>(failures) / trials <= bound_sum / trials);
  }
}
