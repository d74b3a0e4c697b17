#pragma once

// Both cheating directions.
//
// Bob (concealment): before bases are unveiled he compares his sent bits
// with the revealed results in both orders and picks the better-matching one.
//
// Alice (binding): after committing she tries to make Bob decode the other
// bit. She never learns Bob's bases or bits, so her only lever is a lying
// basis announcement; the commitment itself is fixed.

#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "qbc/channel.hpp"
#include "qbc/protocol.hpp"
#include "qbc/rng.hpp"

namespace qbc {

struct PreUnveilGuess {
  BitValue guessed_bit = BitValue::Zero;
  double direct_raw = 0.0;
  double reverse_raw = 0.0;
  double margin = 0.0;  // direct_raw - reverse_raw
};

/// Guesses 0 when direct agreement is higher, 1 when reverse is higher, and
/// the adversary coin on an exact tie. One coin is drawn on every call.
PreUnveilGuess bob_preunveil_guess(std::span<const BitValue> sent_bits, const Commitment& commitment,
                                   RandomStream& rng);

struct PreUnveilTrial {
  BitValue committed_bit = BitValue::Zero;
  PreUnveilGuess guess;
  /// Correct-alignment correlations, for reporting.
  double raw_correct = 0.0;
  double sifted_correct = 0.0;
};

/// One trial: uniform committed bit from the TrialSetup substream, honest
/// commit phase, then Bob's guess from the Adversary substream.
PreUnveilTrial run_preunveil_trial(std::size_t n, double error_fraction, double noise_rate, RngSeed trial_seed);

/// Fraction of `trials` trials (seed derive_seed(seed, t)) in which Bob's
/// pre-unveil guess hits the committed bit. Throws std::domain_error if
/// trials == 0.
double estimate_preunveil_success(std::size_t n, double error_fraction, std::size_t trials, RngSeed seed);

struct HonestBases {};
struct FlipAllBases {};
struct RandomLies {
  double p = 0.5;
};
using RebindStrategy = std::variant<HonestBases, FlipAllBases, RandomLies>;

/// "honest_bases", "flip_all_bases", "random_lies:0.500000".
std::string to_string(const RebindStrategy& s);
/// Accepts the to_string forms plus "random_lies:<p>" for any p in [0, 1].
RebindStrategy strategy_from_string(std::string_view s);

/// Alice's (possibly dishonest) basis announcement in direct order.
/// The commitment, mask and original bit are taken read-only: only the unveil
/// can lie. RandomLies draws one Bernoulli per basis from `rng`.
Unveil alice_rebind_attack(const MeasurementRecord& record, const ErrorMask& mask, const Commitment& commitment,
                           BitValue original_bit, const RebindStrategy& strategy, RandomStream& rng);

struct DecisionTally {
  std::size_t bit0 = 0;
  std::size_t bit1 = 0;
  std::size_t ambiguous = 0;
  std::size_t cheat_suspected = 0;

  void add(Decision d) noexcept;
  std::size_t total() const noexcept { return bit0 + bit1 + ambiguous + cheat_suspected; }
  DecisionTally& operator+=(const DecisionTally& o) noexcept;

  friend bool operator==(const DecisionTally&, const DecisionTally&) = default;
};

struct BindingTrial {
  BitValue original_bit = BitValue::Zero;
  Decision decision = Decision::Ambiguous;
  AlignmentScore alignment;
  double raw_correct = 0.0;
  /// Bob decoded flip(original_bit).
  bool flipped() const noexcept { return decision == decision_for(flip(original_bit)); }
};

/// One trial: uniform original bit, honest commit phase, lying unveil per
/// `strategy`, Bob sifts against the announced bases and decodes.
BindingTrial run_binding_trial(std::size_t n, double error_fraction, double noise_rate,
                               const RebindStrategy& strategy, const DecisionPolicy& policy, RngSeed trial_seed);

struct AttackReport {
  std::size_t trials = 0;
  std::size_t success_count = 0;    // Bob decoded the flipped bit
  std::size_t detection_count = 0;  // CheatSuspected
  std::size_t ambiguous_count = 0;
  /// Remaining trials: Bob decoded the original bit.
  std::size_t original_count = 0;
  DecisionTally tally;

  std::size_t n = 0;
  double error_fraction = 0.0;
  RebindStrategy strategy;
  RngSeed seed{};
  DecisionPolicy policy{};

  double success_rate() const noexcept;
  double detection_rate() const noexcept;
};

/// Runs `trials` binding trials (seed derive_seed(seed, t)) and tallies them.
/// Throws std::domain_error if trials == 0.
AttackReport evaluate_binding(std::size_t n, double error_fraction, const RebindStrategy& strategy,
                              std::size_t trials, RngSeed seed, const DecisionPolicy& policy = {});

}  // namespace qbc
