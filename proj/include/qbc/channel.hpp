#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qbc/rng.hpp"

namespace qbc {

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// The conjugate basis.
constexpr Basis other(Basis b) noexcept {
  return b == Basis::Rectilinear ? Basis::Diagonal : Basis::Rectilinear;
}

enum class BitValue : std::uint8_t { Zero = 0, One = 1 };

constexpr BitValue flip(BitValue b) noexcept {
  return b == BitValue::Zero ? BitValue::One : BitValue::Zero;
}
constexpr int to_int(BitValue b) noexcept { return static_cast<int>(b); }
constexpr BitValue bit_from(bool one) noexcept { return one ? BitValue::One : BitValue::Zero; }

/// One of the four BB84 polarizations. Canonical table:
///
///   basis        bit   polarization
///   Rectilinear  0       0 deg
///   Rectilinear  1      90 deg
///   Diagonal     0      45 deg
///   Diagonal     1     135 deg
struct PhotonState {
  Basis basis = Basis::Rectilinear;
  BitValue bit = BitValue::Zero;

  friend bool operator==(const PhotonState&, const PhotonState&) = default;
};

/// Polarization angle in degrees per the canonical table.
int polarization_degrees(PhotonState s) noexcept;

/// Inverse of polarization_degrees; throws std::invalid_argument for any
/// angle other than 0, 45, 90, 135.
PhotonState from_polarization(int degrees);

/// Bob's transmitted photons in transmission order. Length is fixed at creation.
class PreparedSequence {
 public:
  PreparedSequence() = default;
  explicit PreparedSequence(std::vector<PhotonState> states) : states_(std::move(states)) {}

  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  const PhotonState& operator[](std::size_t i) const { return states_[i]; }
  std::span<const PhotonState> states() const noexcept { return states_; }
  auto begin() const noexcept { return states_.begin(); }
  auto end() const noexcept { return states_.end(); }

  std::vector<Basis> bases() const;
  std::vector<BitValue> bits() const;

  friend bool operator==(const PreparedSequence&, const PreparedSequence&) = default;

 private:
  std::vector<PhotonState> states_;
};

/// n photons, each uniform over the four polarizations (one draw per photon).
PreparedSequence prepare_random_sequence(std::size_t n, RandomStream& rng);

/// Outcome of measuring `state` in `basis`, given the channel draw for this
/// photon. Matching basis returns state.bit; conjugate basis returns the top
/// bit of the draw.
constexpr BitValue outcome_from_draw(PhotonState state, Basis basis, std::uint64_t draw) noexcept {
  return basis == state.basis ? state.bit : bit_from((draw >> 63) != 0);
}

/// Measures one photon. Always consumes exactly one draw, so replays stay
/// aligned whether or not the bases match.
BitValue measure_photon(PhotonState state, Basis basis, RandomStream& rng);

/// Measures every photon of `seq` in the matching entry of `bases`, then flips
/// each outcome independently with probability `noise_rate`.
///
/// One draw per photon: the top bit drives the conjugate-basis outcome and the
/// low 53 bits drive the noise flip, so with noise_rate = 0 the result equals
/// calling measure_photon element by element on the same stream.
///
/// Throws SizeMismatch if lengths differ, std::domain_error if noise_rate is
/// outside [0, 1].
std::vector<BitValue> transmit_and_measure(const PreparedSequence& seq, std::span<const Basis> bases,
                                           double noise_rate, RandomStream& rng);

char basis_code(Basis b) noexcept;  // 'R' or 'D'
Basis basis_from_code(std::string_view code);

}  // namespace qbc
