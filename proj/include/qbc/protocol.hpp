#pragma once

// Honest run of the order-encoded bit commitment:
//
//   1. Bob sends random BB84 photons; Alice measures each in a random basis,
//      optionally randomizes a fraction of her results, and reveals them in
//      direct order to commit 0 or reversed order to commit 1.
//   2. Alice unveils her bases, always in direct (transmission) order.
//   3. Bob keeps the positions where her basis matches his preparation basis
//      and compares his bits with the revealed results in both alignments.
//      The alignment that agrees is the committed bit.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbc/channel.hpp"
#include "qbc/rng.hpp"

namespace qbc {

/// Alice's basis choices and outcomes, both in transmission order.
struct MeasurementRecord {
  std::vector<Basis> bases;
  std::vector<BitValue> outcomes;
};

/// How a selected result is corrupted before it is revealed.
enum class ErrorMode {
  Randomize,  // replace with a fresh uniform bit (may equal the original)
  Flip,       // invert
};

/// Positions whose outcomes were replaced and the values written there, in
/// direct (pre-ordering) index space. positions[k] received values[k].
struct ErrorMask {
  std::vector<std::size_t> positions;
  std::vector<BitValue> values;
};

struct InjectedResults {
  std::vector<BitValue> outcomes;
  ErrorMask mask;
};

/// The publicly revealed result sequence.
struct Commitment {
  std::vector<BitValue> revealed;

  friend bool operator==(const Commitment&, const Commitment&) = default;
};

/// Alice's announced bases, always in direct order.
struct Unveil {
  std::vector<Basis> bases;

  friend bool operator==(const Unveil&, const Unveil&) = default;
};

struct AlignmentScore {
  std::size_t sift_size = 0;
  std::size_t direct_matches = 0;
  std::size_t reverse_matches = 0;

  double direct_rate() const noexcept;
  double reverse_rate() const noexcept;

  friend bool operator==(const AlignmentScore&, const AlignmentScore&) = default;
};

enum class Decision { Bit0, Bit1, Ambiguous, CheatSuspected };

std::string_view to_string(Decision d) noexcept;  // "bit0", "bit1", "ambiguous", "cheat_suspected"
Decision decision_from_string(std::string_view s);

/// Bob's decode thresholds. See decode().
struct DecisionPolicy {
  double separation_delta = 0.02;
  double plausibility_floor = 0.61;
  std::size_t min_sift = 8;

  /// Throws std::domain_error if a fraction lies outside [0, 1].
  void validate() const;

  friend bool operator==(const DecisionPolicy&, const DecisionPolicy&) = default;
};

struct SessionConfig {
  std::size_t n = 0;
  BitValue committed_bit = BitValue::Zero;
  double error_fraction = 0.0;
  double noise_rate = 0.0;
  RngSeed seed{};
  DecisionPolicy policy{};
  ErrorMode error_mode = ErrorMode::Randomize;

  void validate() const;
};

/// Match fractions over all positions, before any sifting.
struct RawCorrelation {
  double direct = 0.0;
  double reverse = 0.0;

  friend bool operator==(const RawCorrelation&, const RawCorrelation&) = default;
};

struct TrialReport {
  SessionConfig config;
  RawCorrelation raw;
  AlignmentScore alignment;
  Decision decision = Decision::Ambiguous;
  /// Set only when decision is Bit0 or Bit1.
  std::optional<bool> decoded_correctly;

  double raw_direct_correlation() const noexcept { return raw.direct; }
  double raw_reverse_correlation() const noexcept { return raw.reverse; }
};

/// n independent uniform bases (one coin per basis).
std::vector<Basis> choose_random_bases(std::size_t n, RandomStream& rng);

/// Corrupts exactly llround(error_fraction * n) distinct positions chosen
/// uniformly (partial Fisher-Yates). Under Randomize each chosen position
/// takes an independent fair coin; under Flip it is inverted.
/// Throws std::domain_error if error_fraction is outside [0, 1].
InjectedResults inject_errors(std::span<const BitValue> outcomes, double error_fraction, RandomStream& rng,
                              ErrorMode mode = ErrorMode::Randomize);

/// bit 0 reveals outcomes as is, bit 1 reveals them reversed.
Commitment commit(std::span<const BitValue> outcomes, BitValue bit);

Unveil unveil(const MeasurementRecord& record);

/// Ascending indices where the two basis lists agree.
std::vector<std::size_t> sift(std::span<const Basis> bob_bases, std::span<const Basis> alice_bases);

/// direct_matches counts i in sift with revealed[i] == sent[i];
/// reverse_matches counts i in sift with revealed[n-1-i] == sent[i].
AlignmentScore alignment_scores(std::span<const BitValue> sent_bits, const Commitment& commitment,
                                std::span<const std::size_t> sift_set);

/// With s = sift_size, d = direct/s, r = reverse/s:
///   s < min_sift                 -> Ambiguous
///   max(d, r) < floor            -> CheatSuspected
///   d - r >= delta               -> Bit0
///   r - d >= delta               -> Bit1
///   otherwise                    -> Ambiguous
Decision decode(const AlignmentScore& score, const DecisionPolicy& policy);

/// Unsifted direct and reverse match fractions. An empty session yields (0, 0).
RawCorrelation raw_correlations(std::span<const BitValue> sent_bits, const Commitment& commitment);

/// Everything produced up to and including the commitment.
struct CommitPhase {
  PreparedSequence prepared;
  MeasurementRecord record;
  ErrorMask mask;
  Commitment commitment;
};

/// Bob prepares, Alice measures (with channel noise), injects errors and
/// commits to `bit`. Each step draws from its own substream of `seed`.
CommitPhase run_commit_phase(std::size_t n, BitValue bit, double error_fraction, double noise_rate, RngSeed seed,
                             ErrorMode mode = ErrorMode::Randomize);

TrialReport run_honest_session(const SessionConfig& config);

/// Matches in the alignment that corresponds to `bit` (direct for 0).
std::size_t correct_matches(const AlignmentScore& score, BitValue bit) noexcept;
std::size_t wrong_matches(const AlignmentScore& score, BitValue bit) noexcept;

/// Decision::Bit0/Bit1 for the given bit.
constexpr Decision decision_for(BitValue b) noexcept {
  return b == BitValue::Zero ? Decision::Bit0 : Decision::Bit1;
}

}  // namespace qbc
