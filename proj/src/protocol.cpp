#include "qbc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qbc/errors.hpp"

namespace qbc {

namespace {

void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error(std::string(what) + " must lie in [0, 1]");
}

double rate(std::size_t matches, std::size_t size) noexcept {
  return size == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(size);
}

}  // namespace

double AlignmentScore::direct_rate() const noexcept { return rate(direct_matches, sift_size); }
double AlignmentScore::reverse_rate() const noexcept { return rate(reverse_matches, sift_size); }

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Bit0: return "bit0";
    case Decision::Bit1: return "bit1";
    case Decision::Ambiguous: return "ambiguous";
    case Decision::CheatSuspected: return "cheat_suspected";
  }
  return "ambiguous";
}

Decision decision_from_string(std::string_view s) {
  if (s == "bit0") return Decision::Bit0;
  if (s == "bit1") return Decision::Bit1;
  if (s == "ambiguous") return Decision::Ambiguous;
  if (s == "cheat_suspected") return Decision::CheatSuspected;
  throw std::invalid_argument("unknown decision: " + std::string(s));
}

void DecisionPolicy::validate() const {
  require_fraction(separation_delta, "separation_delta");
  require_fraction(plausibility_floor, "plausibility_floor");
}

void SessionConfig::validate() const {
  require_fraction(error_fraction, "error_fraction");
  require_fraction(noise_rate, "noise_rate");
  policy.validate();
}

std::vector<Basis> choose_random_bases(std::size_t n, RandomStream& rng) {
  std::vector<Basis> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.coin() ? Basis::Diagonal : Basis::Rectilinear);
  return out;
}

InjectedResults inject_errors(std::span<const BitValue> outcomes, double error_fraction, RandomStream& rng,
                              ErrorMode mode) {
  require_fraction(error_fraction, "error_fraction");
  const std::size_t n = outcomes.size();
  const auto count = static_cast<std::size_t>(std::llround(error_fraction * static_cast<double>(n)));

  InjectedResults result{{outcomes.begin(), outcomes.end()}, {}};
  result.mask.positions.reserve(count);
  result.mask.values.reserve(count);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(order[k], order[j]);
    const std::size_t pos = order[k];
    const BitValue value = mode == ErrorMode::Randomize ? bit_from(rng.coin()) : flip(outcomes[pos]);
    result.outcomes[pos] = value;
    result.mask.positions.push_back(pos);
    result.mask.values.push_back(value);
  }
  return result;
}

Commitment commit(std::span<const BitValue> outcomes, BitValue bit) {
  Commitment c{{outcomes.begin(), outcomes.end()}};
  if (bit == BitValue::One) std::reverse(c.revealed.begin(), c.revealed.end());
  return c;
}

Unveil unveil(const MeasurementRecord& record) { return Unveil{record.bases}; }

std::vector<std::size_t> sift(std::span<const Basis> bob_bases, std::span<const Basis> alice_bases) {
  if (bob_bases.size() != alice_bases.size()) {
    throw SizeMismatch("sift: " + std::to_string(bob_bases.size()) + " vs " + std::to_string(alice_bases.size()) +
                       " bases");
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < bob_bases.size(); ++i) {
    if (bob_bases[i] == alice_bases[i]) kept.push_back(i);
  }
  return kept;
}

AlignmentScore alignment_scores(std::span<const BitValue> sent_bits, const Commitment& commitment,
                                std::span<const std::size_t> sift_set) {
  const std::size_t n = sent_bits.size();
  if (commitment.revealed.size() != n) {
    throw SizeMismatch("alignment_scores: " + std::to_string(commitment.revealed.size()) + " revealed vs " +
                       std::to_string(n) + " sent");
  }
  AlignmentScore score;
  score.sift_size = sift_set.size();
  for (const std::size_t i : sift_set) {
    if (i >= n) throw SizeMismatch("alignment_scores: sift index " + std::to_string(i) + " out of range");
    if (commitment.revealed[i] == sent_bits[i]) ++score.direct_matches;
    if (commitment.revealed[n - 1 - i] == sent_bits[i]) ++score.reverse_matches;
  }
  return score;
}

Decision decode(const AlignmentScore& score, const DecisionPolicy& policy) {
  const std::size_t s = score.sift_size;
  if (s == 0 || s < policy.min_sift) return Decision::Ambiguous;
  const double d = score.direct_rate();
  const double r = score.reverse_rate();
  if (std::max(d, r) < policy.plausibility_floor) return Decision::CheatSuspected;
  // Separation from the integer difference so exact ties with delta are not
  // lost to rounding in d - r.
  const auto diff = static_cast<double>(static_cast<long long>(score.direct_matches) -
                                        static_cast<long long>(score.reverse_matches)) /
                    static_cast<double>(s);
  if (diff >= policy.separation_delta) return Decision::Bit0;
  if (-diff >= policy.separation_delta) return Decision::Bit1;
  return Decision::Ambiguous;
}

RawCorrelation raw_correlations(std::span<const BitValue> sent_bits, const Commitment& commitment) {
  const std::size_t n = sent_bits.size();
  if (commitment.revealed.size() != n) {
    throw SizeMismatch("raw_correlations: " + std::to_string(commitment.revealed.size()) + " revealed vs " +
                       std::to_string(n) + " sent");
  }
  std::size_t direct = 0;
  std::size_t reverse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (commitment.revealed[i] == sent_bits[i]) ++direct;
    if (commitment.revealed[n - 1 - i] == sent_bits[i]) ++reverse;
  }
  return {rate(direct, n), rate(reverse, n)};
}

CommitPhase run_commit_phase(std::size_t n, BitValue bit, double error_fraction, double noise_rate, RngSeed seed,
                             ErrorMode mode) {
  auto bob_rng = RandomStream::substream(seed, Substream::BobPrepare);
  auto bases_rng = RandomStream::substream(seed, Substream::AliceBases);
  auto channel_rng = RandomStream::substream(seed, Substream::Channel);
  auto error_rng = RandomStream::substream(seed, Substream::AliceErrors);

  CommitPhase phase;
  phase.prepared = prepare_random_sequence(n, bob_rng);
  phase.record.bases = choose_random_bases(n, bases_rng);
  phase.record.outcomes = transmit_and_measure(phase.prepared, phase.record.bases, noise_rate, channel_rng);
  auto injected = inject_errors(phase.record.outcomes, error_fraction, error_rng, mode);
  phase.mask = std::move(injected.mask);
  phase.commitment = commit(injected.outcomes, bit);
  return phase;
}

TrialReport run_honest_session(const SessionConfig& config) {
  config.validate();
  const CommitPhase phase = run_commit_phase(config.n, config.committed_bit, config.error_fraction, config.noise_rate,
                                             config.seed, config.error_mode);
  const Unveil opened = unveil(phase.record);
  const auto sent = phase.prepared.bits();
  const auto kept = sift(phase.prepared.bases(), opened.bases);

  TrialReport report;
  report.config = config;
  report.raw = raw_correlations(sent, phase.commitment);
  report.alignment = alignment_scores(sent, phase.commitment, kept);
  report.decision = decode(report.alignment, config.policy);
  if (report.decision == Decision::Bit0 || report.decision == Decision::Bit1) {
    report.decoded_correctly = report.decision == decision_for(config.committed_bit);
  }
  return report;
}

std::size_t correct_matches(const AlignmentScore& score, BitValue bit) noexcept {
  return bit == BitValue::Zero ? score.direct_matches : score.reverse_matches;
}

std::size_t wrong_matches(const AlignmentScore& score, BitValue bit) noexcept {
  return bit == BitValue::Zero ? score.reverse_matches : score.direct_matches;
}

}  // namespace qbc
