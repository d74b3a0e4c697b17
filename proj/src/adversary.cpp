#include "qbc/adversary.hpp"

#include <cstdio>
#include <stdexcept>

#include "qbc/errors.hpp"

namespace qbc {

PreUnveilGuess bob_preunveil_guess(std::span<const BitValue> sent_bits, const Commitment& commitment,
                                   RandomStream& rng) {
  const RawCorrelation raw = raw_correlations(sent_bits, commitment);
  const bool tie_coin = rng.coin();
  PreUnveilGuess g;
  g.direct_raw = raw.direct;
  g.reverse_raw = raw.reverse;
  g.margin = raw.direct - raw.reverse;
  // Both fractions share the denominator n, so equality here is an exact count tie.
  if (raw.direct > raw.reverse) {
    g.guessed_bit = BitValue::Zero;
  } else if (raw.reverse > raw.direct) {
    g.guessed_bit = BitValue::One;
  } else {
    g.guessed_bit = bit_from(tie_coin);
  }
  return g;
}

PreUnveilTrial run_preunveil_trial(std::size_t n, double error_fraction, double noise_rate, RngSeed trial_seed) {
  auto setup = RandomStream::substream(trial_seed, Substream::TrialSetup);
  auto adversary = RandomStream::substream(trial_seed, Substream::Adversary);

  PreUnveilTrial t;
  t.committed_bit = bit_from(setup.coin());
  const CommitPhase phase = run_commit_phase(n, t.committed_bit, error_fraction, noise_rate, trial_seed);
  const auto sent = phase.prepared.bits();
  t.guess = bob_preunveil_guess(sent, phase.commitment, adversary);
  t.raw_correct = t.committed_bit == BitValue::Zero ? t.guess.direct_raw : t.guess.reverse_raw;
  const auto kept = sift(phase.prepared.bases(), phase.record.bases);
  const auto score = alignment_scores(sent, phase.commitment, kept);
  t.sifted_correct = score.sift_size == 0 ? 0.0
                                          : static_cast<double>(correct_matches(score, t.committed_bit)) /
                                                static_cast<double>(score.sift_size);
  return t;
}

double estimate_preunveil_success(std::size_t n, double error_fraction, std::size_t trials, RngSeed seed) {
  if (trials == 0) throw std::domain_error("estimate_preunveil_success: trials must be >= 1");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto trial = run_preunveil_trial(n, error_fraction, 0.0, RngSeed{derive_seed(seed.master, t)});
    if (trial.guess.guessed_bit == trial.committed_bit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

std::string to_string(const RebindStrategy& s) {
  struct Visitor {
    std::string operator()(HonestBases) const { return "honest_bases"; }
    std::string operator()(FlipAllBases) const { return "flip_all_bases"; }
    std::string operator()(RandomLies r) const {
      char buf[48];
      std::snprintf(buf, sizeof buf, "random_lies:%.6f", r.p);
      return buf;
    }
  };
  return std::visit(Visitor{}, s);
}

RebindStrategy strategy_from_string(std::string_view s) {
  if (s == "honest_bases") return HonestBases{};
  if (s == "flip_all_bases") return FlipAllBases{};
  constexpr std::string_view prefix = "random_lies:";
  if (s.starts_with(prefix)) {
    const std::string tail(s.substr(prefix.size()));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == tail.size() && !tail.empty() && p >= 0.0 && p <= 1.0) return RandomLies{p};
  }
  throw std::invalid_argument("unknown rebind strategy: " + std::string(s));
}

Unveil alice_rebind_attack(const MeasurementRecord& record, [[maybe_unused]] const ErrorMask& mask,
                           [[maybe_unused]] const Commitment& commitment, [[maybe_unused]] BitValue original_bit,
                           const RebindStrategy& strategy, RandomStream& rng) {
  Unveil out{record.bases};
  if (std::holds_alternative<FlipAllBases>(strategy)) {
    for (auto& b : out.bases) b = other(b);
  } else if (const auto* lies = std::get_if<RandomLies>(&strategy)) {
    if (!(lies->p >= 0.0 && lies->p <= 1.0)) throw std::domain_error("RandomLies: p must lie in [0, 1]");
    for (auto& b : out.bases) {
      if (rng.bernoulli(lies->p)) b = other(b);
    }
  }
  return out;
}

void DecisionTally::add(Decision d) noexcept {
  switch (d) {
    case Decision::Bit0: ++bit0; break;
    case Decision::Bit1: ++bit1; break;
    case Decision::Ambiguous: ++ambiguous; break;
    case Decision::CheatSuspected: ++cheat_suspected; break;
  }
}

DecisionTally& DecisionTally::operator+=(const DecisionTally& o) noexcept {
  bit0 += o.bit0;
  bit1 += o.bit1;
  ambiguous += o.ambiguous;
  cheat_suspected += o.cheat_suspected;
  return *this;
}

BindingTrial run_binding_trial(std::size_t n, double error_fraction, double noise_rate,
                               const RebindStrategy& strategy, const DecisionPolicy& policy, RngSeed trial_seed) {
  auto setup = RandomStream::substream(trial_seed, Substream::TrialSetup);
  auto adversary = RandomStream::substream(trial_seed, Substream::Adversary);

  BindingTrial t;
  t.original_bit = bit_from(setup.coin());
  const CommitPhase phase = run_commit_phase(n, t.original_bit, error_fraction, noise_rate, trial_seed);
  const Unveil lie =
      alice_rebind_attack(phase.record, phase.mask, phase.commitment, t.original_bit, strategy, adversary);

  const auto sent = phase.prepared.bits();
  const auto kept = sift(phase.prepared.bases(), lie.bases);
  t.alignment = alignment_scores(sent, phase.commitment, kept);
  t.decision = decode(t.alignment, policy);
  const RawCorrelation raw = raw_correlations(sent, phase.commitment);
  t.raw_correct = t.original_bit == BitValue::Zero ? raw.direct : raw.reverse;
  return t;
}

AttackReport evaluate_binding(std::size_t n, double error_fraction, const RebindStrategy& strategy,
                              std::size_t trials, RngSeed seed, const DecisionPolicy& policy) {
  if (trials == 0) throw std::domain_error("evaluate_binding: trials must be >= 1");
  policy.validate();
  AttackReport r;
  r.trials = trials;
  r.n = n;
  r.error_fraction = error_fraction;
  r.strategy = strategy;
  r.seed = seed;
  r.policy = policy;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto trial = run_binding_trial(n, error_fraction, 0.0, strategy, policy, RngSeed{derive_seed(seed.master, t)});
    r.tally.add(trial.decision);
    if (trial.flipped()) {
      ++r.success_count;
    } else if (trial.decision == Decision::CheatSuspected) {
      ++r.detection_count;
    } else if (trial.decision == Decision::Ambiguous) {
      ++r.ambiguous_count;
    } else {
      ++r.original_count;
    }
  }
  return r;
}

double AttackReport::success_rate() const noexcept {
  return trials == 0 ? 0.0 : static_cast<double>(success_count) / static_cast<double>(trials);
}

double AttackReport::detection_rate() const noexcept {
  return trials == 0 ? 0.0 : static_cast<double>(detection_count) / static_cast<double>(trials);
}

}  // namespace qbc
