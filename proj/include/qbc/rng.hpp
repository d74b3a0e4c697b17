#pragma once

#include <compare>
#include <cstdint>
#include <random>

namespace qbc {

/// Master seed for a session or an experiment.
struct RngSeed {
  std::uint64_t master = 0;

  friend auto operator<=>(const RngSeed&, const RngSeed&) = default;
};

/// Independent random substreams. Each party draws only from its own
/// substream so that changing one party's behavior never shifts another
/// party's draws.
enum class Substream : std::uint64_t {
  BobPrepare = 1,   // Bob's photon preparation
  AliceBases = 2,   // Alice's measurement basis choices
  Channel = 3,      // conjugate-basis outcomes and channel noise
  AliceErrors = 4,  // Alice's error injection
  Adversary = 5,    // attack coins (lies, tie breaks)
  TrialSetup = 6,   // per-trial choices such as the committed bit
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a key:
///   child = mix64(mix64(parent) ^ (key * golden_gamma))
/// Distinct keys give statistically independent children.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) noexcept {
  return mix64(mix64(parent) ^ (key * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Seed for trial `trial` of sweep cell `cell`: hash(master, cell, trial).
constexpr RngSeed trial_seed(RngSeed master, std::uint64_t cell, std::uint64_t trial) noexcept {
  return RngSeed{derive_seed(derive_seed(master.master, cell), trial)};
}

/// A deterministic stream of 64-bit words (mt19937_64) with
/// platform-independent derived draws. std:: distributions are avoided
/// because their output is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Substream `id` of `seed`.
  static RandomStream substream(RngSeed seed, Substream id) {
    return RandomStream(derive_seed(seed.master, static_cast<std::uint64_t>(id)));
  }

  std::uint64_t next() { return engine_(); }

  /// One fair coin from the top bit of one draw.
  bool coin() { return (next() >> 63) != 0; }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// True with probability p; p <= 0 never, p >= 1 always. Consumes one draw.
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace qbc
