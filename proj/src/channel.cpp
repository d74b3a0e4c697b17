#include "qbc/channel.hpp"

#include <stdexcept>
#include <string>

#include "qbc/errors.hpp"

namespace qbc {

int polarization_degrees(PhotonState s) noexcept {
  const int base = s.basis == Basis::Rectilinear ? 0 : 45;
  return base + (s.bit == BitValue::One ? 90 : 0);
}

PhotonState from_polarization(int degrees) {
  switch (degrees) {
    case 0: return {Basis::Rectilinear, BitValue::Zero};
    case 90: return {Basis::Rectilinear, BitValue::One};
    case 45: return {Basis::Diagonal, BitValue::Zero};
    case 135: return {Basis::Diagonal, BitValue::One};
    default: throw std::invalid_argument("not a BB84 polarization: " + std::to_string(degrees));
  }
}

std::vector<Basis> PreparedSequence::bases() const {
  std::vector<Basis> out;
  out.reserve(states_.size());
  for (const auto& s : states_) out.push_back(s.basis);
  return out;
}

std::vector<BitValue> PreparedSequence::bits() const {
  std::vector<BitValue> out;
  out.reserve(states_.size());
  for (const auto& s : states_) out.push_back(s.bit);
  return out;
}

PreparedSequence prepare_random_sequence(std::size_t n, RandomStream& rng) {
  std::vector<PhotonState> states;
  states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t x = rng.next();
    states.push_back({(x >> 63) ? Basis::Diagonal : Basis::Rectilinear, bit_from(((x >> 62) & 1U) != 0)});
  }
  return PreparedSequence(std::move(states));
}

BitValue measure_photon(PhotonState state, Basis basis, RandomStream& rng) {
  return outcome_from_draw(state, basis, rng.next());
}

std::vector<BitValue> transmit_and_measure(const PreparedSequence& seq, std::span<const Basis> bases,
                                           double noise_rate, RandomStream& rng) {
  if (bases.size() != seq.size()) {
    throw SizeMismatch("transmit_and_measure: " + std::to_string(seq.size()) + " photons but " +
                       std::to_string(bases.size()) + " bases");
  }
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw std::domain_error("transmit_and_measure: noise_rate must lie in [0, 1]");
  }
  constexpr std::uint64_t kLow53 = (std::uint64_t{1} << 53) - 1;
  std::vector<BitValue> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::uint64_t draw = rng.next();
    BitValue b = outcome_from_draw(seq[i], bases[i], draw);
    if (static_cast<double>(draw & kLow53) * 0x1.0p-53 < noise_rate) b = flip(b);
    out.push_back(b);
  }
  return out;
}

char basis_code(Basis b) noexcept { return b == Basis::Rectilinear ? 'R' : 'D'; }

Basis basis_from_code(std::string_view code) {
  if (code == "R") return Basis::Rectilinear;
  if (code == "D") return Basis::Diagonal;
  throw std::invalid_argument("unknown basis code: " + std::string(code));
}

}  // namespace qbc
