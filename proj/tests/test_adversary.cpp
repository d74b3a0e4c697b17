#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "qbc/adversary.hpp"
#include "qbc/errors.hpp"
#include "qbc/stats.hpp"

using namespace qbc;

namespace {

double sigma(double p, std::size_t trials) { return std::sqrt(p * (1.0 - p) / static_cast<double>(trials)); }

}  // namespace

TEST_CASE("bob_preunveil_guess on large honest sessions") {
  SUBCASE("bit 0, no errors") {
    const auto phase = run_commit_phase(100000, BitValue::Zero, 0.0, 0.0, RngSeed{1});
    RandomStream adv(1);
    const auto g = bob_preunveil_guess(phase.prepared.bits(), phase.commitment, adv);
    CHECK(g.guessed_bit == BitValue::Zero);
    CHECK(std::abs(g.direct_raw - 0.75) <= 0.005);
    CHECK(std::abs(g.reverse_raw - 0.5) <= 0.005);
    CHECK(g.margin == doctest::Approx(g.direct_raw - g.reverse_raw));
  }
  SUBCASE("bit 1, half randomized") {
    const auto phase = run_commit_phase(100000, BitValue::One, 0.5, 0.0, RngSeed{2});
    RandomStream adv(2);
    const auto g = bob_preunveil_guess(phase.prepared.bits(), phase.commitment, adv);
    CHECK(g.guessed_bit == BitValue::One);
    CHECK(std::abs(g.reverse_raw - 0.625) <= 0.005);
    CHECK(g.margin < 0.0);
  }
  SUBCASE("empty session falls back to the coin") {
    int ones = 0;
    const int trials = 4000;
    for (int s = 0; s < trials; ++s) {
      RandomStream adv(static_cast<std::uint64_t>(s));
      ones += to_int(bob_preunveil_guess(std::vector<BitValue>{}, Commitment{}, adv).guessed_bit);
    }
    CHECK(std::abs(ones / static_cast<double>(trials) - 0.5) <= 3.0 * sigma(0.5, trials));
  }
  SUBCASE("length mismatch") {
    RandomStream adv(3);
    CHECK_THROWS_AS(bob_preunveil_guess(std::vector<BitValue>{BitValue::One}, Commitment{}, adv), SizeMismatch);
  }
}

TEST_CASE("estimate_preunveil_success") {
  SUBCASE("n = 0 is pure guessing") {
    const double p = estimate_preunveil_success(0, 0.3, 10000, RngSeed{5});
    CHECK(std::abs(p - 0.5) <= 3.0 * sigma(0.5, 10000));
  }
  SUBCASE("n = 256, e = 0 agrees with the independent oracle") {
    const double p = estimate_preunveil_success(256, 0.0, 10000, RngSeed{6});
    const double q = oracle::preunveil_success(256, 0.0, 10000, 606);
    CHECK(p > 0.99);
    CHECK(std::abs(p - q) <= 3.0 * std::sqrt(2.0) * std::max(sigma(p, 10000), sigma(0.999, 10000)));
  }
  SUBCASE("n = 16, e = 0.5 agrees with the independent oracle") {
    const double p = estimate_preunveil_success(16, 0.5, 10000, RngSeed{7});
    const double q = oracle::preunveil_success(16, 0.5, 10000, 707);
    CHECK(std::abs(p - q) <= 3.0 * std::sqrt(2.0) * sigma(0.5 * (p + q), 10000));
  }
  SUBCASE("grows with n at e = 0.5") {
    const double s16 = estimate_preunveil_success(16, 0.5, 10000, RngSeed{8});
    const double s64 = estimate_preunveil_success(64, 0.5, 10000, RngSeed{9});
    const double s256 = estimate_preunveil_success(256, 0.5, 10000, RngSeed{10});
    CHECK(s16 <= s64 + 2.0 * sigma(s64, 10000));
    CHECK(s64 <= s256 + 2.0 * sigma(s256, 10000));
  }
  SUBCASE("zero trials") { CHECK_THROWS_AS(estimate_preunveil_success(16, 0.0, 0, RngSeed{1}), std::domain_error); }
}

TEST_CASE("error injection lowers Bob's raw agreement") {
  const std::size_t trials = 10000, n = 64;
  double sum0 = 0.0, sum5 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    sum0 += run_preunveil_trial(n, 0.0, 0.0, RngSeed{derive_seed(20, t)}).raw_correct;
    sum5 += run_preunveil_trial(n, 0.5, 0.0, RngSeed{derive_seed(21, t)}).raw_correct;
  }
  const double m0 = sum0 / trials, m5 = sum5 / trials;
  CHECK(std::abs(m0 - 0.75) <= 3.0 * std::sqrt(0.25 / (trials * n)));
  CHECK(std::abs(m5 - 0.625) <= 3.0 * std::sqrt(0.25 / (trials * n)));
  CHECK(m0 - m5 > 3.0 * std::sqrt(2.0 * 0.25 / (trials * n)));
}

TEST_CASE("alice_rebind_attack") {
  const MeasurementRecord rec{{Basis::Rectilinear, Basis::Diagonal}, {BitValue::Zero, BitValue::One}};
  const ErrorMask mask;
  const Commitment c{{BitValue::Zero, BitValue::One}};
  RandomStream rng(1);
  CHECK(alice_rebind_attack(rec, mask, c, BitValue::Zero, HonestBases{}, rng).bases == rec.bases);
  CHECK(alice_rebind_attack(rec, mask, c, BitValue::Zero, FlipAllBases{}, rng).bases ==
        std::vector<Basis>{Basis::Diagonal, Basis::Rectilinear});

  SUBCASE("RandomLies(0.5) lies on about half the bases") {
    RandomStream b(2), lies(3);
    MeasurementRecord big;
    big.bases = choose_random_bases(100000, b);
    big.outcomes.assign(100000, BitValue::Zero);
    const auto out = alice_rebind_attack(big, mask, Commitment{big.outcomes}, BitValue::Zero, RandomLies{0.5}, lies);
    std::size_t hamming = 0;
    for (std::size_t i = 0; i < big.bases.size(); ++i) hamming += out.bases[i] != big.bases[i];
    CHECK(std::abs(static_cast<double>(hamming) - 50000.0) <= 500.0);
  }
  SUBCASE("RandomLies extremes") {
    RandomStream r(4);
    CHECK(alice_rebind_attack(rec, mask, c, BitValue::One, RandomLies{0.0}, r).bases == rec.bases);
    CHECK(alice_rebind_attack(rec, mask, c, BitValue::One, RandomLies{1.0}, r).bases ==
          alice_rebind_attack(rec, mask, c, BitValue::One, FlipAllBases{}, r).bases);
  }
}

TEST_CASE("strategy names round trip") {
  for (const RebindStrategy s : {RebindStrategy{HonestBases{}}, RebindStrategy{FlipAllBases{}},
                                 RebindStrategy{RandomLies{0.25}}}) {
    CHECK(to_string(strategy_from_string(to_string(s))) == to_string(s));
  }
  CHECK_THROWS(strategy_from_string("random_lies:2"));
  CHECK_THROWS(strategy_from_string("nope"));
}

TEST_CASE("evaluate_binding") {
  SUBCASE("tallies partition the trials") {
    const auto r = evaluate_binding(64, 0.25, RandomLies{0.3}, 500, RngSeed{1});
    CHECK(r.success_count + r.detection_count + r.ambiguous_count + r.original_count == r.trials);
    CHECK(r.tally.total() == r.trials);
  }
  SUBCASE("honest unveil almost never flips") {
    const auto r = evaluate_binding(256, 0.0, HonestBases{}, 10000, RngSeed{2});
    CHECK(r.success_rate() < 0.001);
  }
  SUBCASE("flipping every basis is detected, not rewarded") {
    const auto r = evaluate_binding(256, 0.0, FlipAllBases{}, 10000, RngSeed{3});
    CHECK(r.success_rate() < 0.01);
    CHECK(r.detection_rate() > 0.5);
  }
  SUBCASE("empty sessions are always ambiguous") {
    for (const RebindStrategy s : {RebindStrategy{HonestBases{}}, RebindStrategy{FlipAllBases{}},
                                   RebindStrategy{RandomLies{0.5}}}) {
      const auto r = evaluate_binding(0, 0.0, s, 200, RngSeed{4});
      CHECK(r.ambiguous_count == r.trials);
    }
  }
  SUBCASE("zero trials") { CHECK_THROWS_AS(evaluate_binding(16, 0.0, HonestBases{}, 0, RngSeed{1}), std::domain_error); }
}

TEST_CASE("binding trials replay under a fixed seed") {
  const auto a = run_binding_trial(128, 0.5, 0.0, RandomLies{0.5}, DecisionPolicy{}, RngSeed{9});
  const auto b = run_binding_trial(128, 0.5, 0.0, RandomLies{0.5}, DecisionPolicy{}, RngSeed{9});
  CHECK(a.alignment == b.alignment);
  CHECK(a.decision == b.decision);
}
