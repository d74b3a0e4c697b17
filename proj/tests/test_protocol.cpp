#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracle.hpp"
#include "qbc/errors.hpp"
#include "qbc/protocol.hpp"
#include "qbc/stats.hpp"

using namespace qbc;

namespace {

constexpr auto R = Basis::Rectilinear;
constexpr auto D = Basis::Diagonal;
constexpr auto O = BitValue::Zero;
constexpr auto I = BitValue::One;

std::vector<BitValue> random_bits(std::size_t n, std::uint64_t seed) {
  RandomStream r(seed);
  std::vector<BitValue> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(bit_from(r.coin()));
  return v;
}

SessionConfig config(std::size_t n, BitValue bit, double e, std::uint64_t seed) {
  SessionConfig c;
  c.n = n;
  c.committed_bit = bit;
  c.error_fraction = e;
  c.seed = RngSeed{seed};
  return c;
}

double correct_sifted_rate(const TrialReport& r) {
  return static_cast<double>(correct_matches(r.alignment, r.config.committed_bit)) /
         static_cast<double>(r.alignment.sift_size);
}

}  // namespace

TEST_CASE("choose_random_bases") {
  RandomStream r(1);
  CHECK(choose_random_bases(0, r).empty());

  RandomStream big(2);
  const auto bases = choose_random_bases(100000, big);
  const auto rect = std::count(bases.begin(), bases.end(), R);
  CHECK(std::abs(rect / 100000.0 - 0.5) <= 0.01);

  RandomStream a(3), b(3);
  CHECK(choose_random_bases(50, a) == choose_random_bases(50, b));
}

TEST_CASE("inject_errors") {
  SUBCASE("zero fraction leaves outcomes alone") {
    RandomStream r(1);
    const auto x = random_bits(100, 5);
    const auto res = inject_errors(x, 0.0, r);
    CHECK(res.outcomes == x);
    CHECK(res.mask.positions.empty());
  }
  SUBCASE("exactly round(e*n) distinct positions") {
    RandomStream r(2);
    const auto x = random_bits(101, 6);
    const auto res = inject_errors(x, 0.5, r);
    CHECK(res.mask.positions.size() == 51);  // llround(50.5)
    CHECK(res.mask.values.size() == 51);
    const std::set<std::size_t> uniq(res.mask.positions.begin(), res.mask.positions.end());
    CHECK(uniq.size() == 51);
    CHECK(*uniq.rbegin() < 101);
    for (std::size_t k = 0; k < res.mask.positions.size(); ++k) {
      CHECK(res.outcomes[res.mask.positions[k]] == res.mask.values[k]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!uniq.count(i)) CHECK(res.outcomes[i] == x[i]);
    }
  }
  SUBCASE("half randomized keeps 75% agreement with the reference") {
    RandomStream r(3);
    const auto x = random_bits(100000, 7);
    const auto res = inject_errors(x, 0.5, r);
    CHECK(std::abs(stats::correlation(res.outcomes, x) - 0.75) <= 0.01);
  }
  SUBCASE("fully randomized keeps 50% agreement") {
    RandomStream r(4);
    const auto x = random_bits(100000, 8);
    const auto res = inject_errors(x, 1.0, r);
    CHECK(res.mask.positions.size() == 100000);
    CHECK(std::abs(stats::correlation(res.outcomes, x) - 0.5) <= 0.01);
  }
  SUBCASE("flip mode inverts every selected position") {
    RandomStream r(5);
    const auto x = random_bits(1000, 9);
    const auto res = inject_errors(x, 0.5, r, ErrorMode::Flip);
    CHECK(stats::correlation(res.outcomes, x) == doctest::Approx(0.5));
  }
  SUBCASE("fraction out of range") {
    RandomStream r(6);
    CHECK_THROWS_AS(inject_errors(random_bits(4, 1), -0.1, r), std::domain_error);
    CHECK_THROWS_AS(inject_errors(random_bits(4, 1), 1.1, r), std::domain_error);
  }
}

TEST_CASE("commit orders results by the committed bit") {
  const std::vector<BitValue> x{I, O, O};
  CHECK(commit(x, O).revealed == std::vector<BitValue>{I, O, O});
  CHECK(commit(x, I).revealed == std::vector<BitValue>{O, O, I});
  CHECK(commit(std::vector<BitValue>{}, O).revealed.empty());
  CHECK(commit(std::vector<BitValue>{}, I).revealed.empty());
}

TEST_CASE("commit with bit 1 is an involution") {
  for (std::size_t n : {0U, 1U, 2U, 7U, 64U}) {
    const auto x = random_bits(n, n + 100);
    CHECK(commit(commit(x, I).revealed, I).revealed == x);
  }
}

TEST_CASE("unveil returns bases in direct order regardless of the bit") {
  MeasurementRecord rec{{R, D}, {O, O}};
  CHECK(unveil(rec).bases == std::vector<Basis>{R, D});
  CHECK(unveil(MeasurementRecord{}).bases.empty());
  MeasurementRecord rec1{{D, D, R}, {I, O, I}};
  // The committed bit never reaches unveil; bases stay in transmission order.
  CHECK(unveil(rec1).bases == std::vector<Basis>{D, D, R});
}

TEST_CASE("sift") {
  CHECK(sift(std::vector<Basis>{R, D, R}, std::vector<Basis>{R, R, R}) == std::vector<std::size_t>{0, 2});
  const std::vector<Basis> same{R, D, D, R, D};
  CHECK(sift(same, same) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(sift(std::vector<Basis>{R}, std::vector<Basis>{}), SizeMismatch);

  RandomStream a(1), b(2);
  const auto kept = sift(choose_random_bases(100000, a), choose_random_bases(100000, b));
  CHECK(std::abs(static_cast<double>(kept.size()) - 50000.0) <= 500.0);
}

TEST_CASE("alignment_scores on honest sessions") {
  SUBCASE("bit 0, no errors: direct alignment is perfect") {
    const auto r = run_honest_session(config(500, O, 0.0, 1));
    CHECK(r.alignment.direct_matches == r.alignment.sift_size);
  }
  SUBCASE("bit 1, no errors: reverse alignment is perfect") {
    const auto r = run_honest_session(config(500, I, 0.0, 2));
    CHECK(r.alignment.reverse_matches == r.alignment.sift_size);
  }
  SUBCASE("wrong alignment pairs independent photons") {
    const auto r = run_honest_session(config(100000, O, 0.0, 3));
    CHECK(std::abs(r.alignment.reverse_rate() - 0.5) <= 0.01);
  }
  SUBCASE("index out of range") {
    const std::vector<BitValue> sent{O, I};
    const std::vector<std::size_t> bad{2};
    CHECK_THROWS_AS(alignment_scores(sent, Commitment{{O, I}}, bad), SizeMismatch);
    CHECK_THROWS_AS(alignment_scores(sent, Commitment{{O}}, std::vector<std::size_t>{}), SizeMismatch);
  }
}

TEST_CASE("reversing Alice's results or Bob's gives the same counts (exhaustive, n <= 6)") {
  for (std::size_t n = 1; n <= 6; ++n) {
    const std::size_t limit = std::size_t{1} << n;
    for (std::size_t rv = 0; rv < limit; ++rv) {
      for (std::size_t sb = 0; sb < limit; ++sb) {
        for (std::size_t mask = 0; mask < limit; ++mask) {
          std::vector<BitValue> revealed, sent;
          std::vector<std::size_t> kept;
          for (std::size_t i = 0; i < n; ++i) {
            revealed.push_back(bit_from((rv >> i) & 1U));
            sent.push_back(bit_from((sb >> i) & 1U));
            if ((mask >> i) & 1U) kept.push_back(i);
          }
          const auto score = alignment_scores(sent, Commitment{revealed}, kept);
          std::vector<bool> in_sift(n, false);
          for (std::size_t i : kept) in_sift[i] = true;

          // Reverse Alice's results.
          const std::vector<BitValue> alice_rev(revealed.rbegin(), revealed.rend());
          std::size_t alice_reversed = 0;
          for (std::size_t i = 0; i < n; ++i) alice_reversed += in_sift[i] && alice_rev[i] == sent[i];

          // Reverse Bob's results together with his sift marks.
          const std::vector<BitValue> bob_rev(sent.rbegin(), sent.rend());
          const std::vector<bool> sift_rev(in_sift.rbegin(), in_sift.rend());
          std::size_t bob_reversed = 0;
          for (std::size_t k = 0; k < n; ++k) bob_reversed += sift_rev[k] && revealed[k] == bob_rev[k];

          REQUIRE(score.reverse_matches == alice_reversed);
          REQUIRE(score.reverse_matches == bob_reversed);
        }
      }
    }
  }
}

TEST_CASE("decode") {
  const DecisionPolicy defaults;
  CHECK(decode({100, 100, 50}, defaults) == Decision::Bit0);
  CHECK(decode({100, 50, 100}, defaults) == Decision::Bit1);
  // max(0.52, 0.55) is under the floor: the floor is checked before separation.
  CHECK(decode({100, 52, 55}, defaults) == Decision::CheatSuspected);
  for (std::size_t d = 0; d <= 4; ++d) {
    for (std::size_t r = 0; r <= 4; ++r) CHECK(decode({4, d, r}, defaults) == Decision::Ambiguous);
  }
  CHECK(decode({0, 0, 0}, DecisionPolicy{0.0, 0.0, 0}) == Decision::Ambiguous);
  // Inside the separation band, above the floor.
  CHECK(decode({100, 80, 79}, defaults) == Decision::Ambiguous);
  // Separation exactly at delta counts.
  CHECK(decode({100, 80, 70}, DecisionPolicy{0.10, 0.6, 8}) == Decision::Bit0);
  CHECK_THROWS_AS((DecisionPolicy{1.5, 0.6, 8}.validate()), std::domain_error);
}

TEST_CASE("raw_correlations") {
  SUBCASE("honest, no errors") {
    const auto r = run_honest_session(config(100000, O, 0.0, 11));
    CHECK(std::abs(r.raw.direct - 0.75) <= 0.005);
    CHECK(std::abs(r.raw.reverse - 0.5) <= 0.005);
  }
  SUBCASE("honest, half the results randomized") {
    const auto r = run_honest_session(config(100000, O, 0.5, 12));
    CHECK(std::abs(r.raw.direct - 0.625) <= 0.005);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(raw_correlations(std::vector<BitValue>{O}, Commitment{}), SizeMismatch);
  }
  SUBCASE("empty") {
    CHECK(raw_correlations(std::vector<BitValue>{}, Commitment{}) == RawCorrelation{0.0, 0.0});
  }
}

TEST_CASE("run_honest_session edge sizes") {
  CHECK(run_honest_session(config(0, O, 0.0, 1)).decision == Decision::Ambiguous);
  CHECK(run_honest_session(config(1, I, 0.0, 1)).decision == Decision::Ambiguous);
  const auto r = run_honest_session(config(0, O, 0.0, 1));
  CHECK_FALSE(r.decoded_correctly.has_value());
}

TEST_CASE("run_honest_session replays under a fixed seed") {
  const auto a = run_honest_session(config(300, I, 0.3, 99));
  const auto b = run_honest_session(config(300, I, 0.3, 99));
  CHECK(a.raw == b.raw);
  CHECK(a.alignment == b.alignment);
  CHECK(a.decision == b.decision);
}

TEST_CASE("noise does not disturb the other substreams") {
  auto a = config(400, O, 0.0, 5);
  auto b = a;
  b.noise_rate = 0.2;
  const auto pa = run_commit_phase(a.n, a.committed_bit, 0.0, 0.0, a.seed);
  const auto pb = run_commit_phase(b.n, b.committed_bit, 0.0, 0.2, b.seed);
  CHECK(pa.prepared == pb.prepared);
  CHECK(pa.record.bases == pb.record.bases);
}

TEST_CASE("sifted correct alignment is exact without errors or noise") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t n = 1 + seed % 97;
    const auto r = run_honest_session(config(n, bit_from(seed & 1U), 0.0, seed));
    REQUIRE(correct_matches(r.alignment, r.config.committed_bit) == r.alignment.sift_size);
  }
}

TEST_CASE("honest decode accuracy is symmetric in the committed bit") {
  const int trials = 10000;
  int ok0 = 0, ok1 = 0;
  for (int t = 0; t < trials; ++t) {
    ok0 += run_honest_session(config(64, O, 0.5, derive_seed(1, t))).decision == Decision::Bit0;
    ok1 += run_honest_session(config(64, I, 0.5, derive_seed(1, t))).decision == Decision::Bit1;
  }
  const double p0 = ok0 / static_cast<double>(trials), p1 = ok1 / static_cast<double>(trials);
  const double p = 0.5 * (p0 + p1);
  CHECK(std::abs(p0 - p1) <= 3.0 * std::sqrt(2.0 * p * (1 - p) / trials));
}

TEST_CASE("empirical raw correlation matches 0.75 - 0.25 e (and the oracle)") {
  const std::size_t n = 2000, trials = 50;
  for (double e : {0.0, 0.25, 0.5, 1.0}) {
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto r = run_honest_session(config(n, bit_from(t & 1U), e, derive_seed(42, t)));
      sum += t & 1U ? r.raw.reverse : r.raw.direct;
    }
    const double mean = sum / trials;
    CHECK(std::abs(mean - stats::expected_raw_correlation(e)) <= 3.0 * std::sqrt(0.25 / (trials * n)));

    std::mt19937 gen(static_cast<unsigned>(e * 1000) + 1);
    double osum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto s = oracle::simulate(n, e, gen);
      osum += static_cast<double>(oracle::count(s, oracle::revealed(s, 0)).raw_direct) / n;
    }
    CHECK(std::abs(osum / trials - stats::expected_raw_correlation(e)) <= 3.0 * std::sqrt(0.25 / (trials * n)));
  }
}

TEST_CASE("honest decode error rate at n=256, e<=0.5 stays under 0.1%") {
  for (double e : {0.0, 0.5}) {
    int bad = 0;
    for (int t = 0; t < 10000; ++t) {
      const BitValue bit = bit_from(t & 1);
      bad += run_honest_session(config(256, bit, e, derive_seed(2024, t))).decision != decision_for(bit);
    }
    CHECK(bad <= 10);
  }
}

TEST_CASE("sifted correct correlation at e=0.5 is 0.75 (oracle cross-check)") {
  const auto r = run_honest_session(config(100000, O, 0.5, 31));
  CHECK(std::abs(correct_sifted_rate(r) - 0.75) <= 0.01);
  std::mt19937 gen(5);
  const auto s = oracle::simulate(100000, 0.5, gen);
  const auto c = oracle::count(s, oracle::revealed(s, 0));
  CHECK(std::abs(static_cast<double>(c.sift_direct) / c.sift - 0.75) <= 0.01);
}
