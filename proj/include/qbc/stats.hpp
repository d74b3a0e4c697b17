#pragma once

// Expected correlations under error randomization.
//
// Let e be the fraction of results Alice replaces with fresh random bits.
//
// Raw (unsifted) correct alignment: a result agrees with Bob's bit with
// probability 1 when the bases match (prob 1/2) and 1/2 otherwise, so an
// untouched result agrees with prob 3/4. A replaced result agrees with
// prob 1/2. Hence
//     (1 - e) * 3/4 + e * 1/2 = 0.75 - 0.25 e.
//
// Sifted correct alignment: on matching bases an untouched result always
// agrees and a replaced one agrees with prob 1/2, so
//     (1 - e) * 1 + e * 1/2 = 1 - 0.5 e.
//
// The wrong alignment pairs independent photons and agrees with prob 1/2.

#include <cstddef>
#include <span>

#include "qbc/channel.hpp"

namespace qbc::stats {

struct ConfidenceInterval {
  double low = 0.0;
  double high = 1.0;
  double level = 0.95;

  bool contains(double p) const noexcept { return low <= p && p <= high; }
  double width() const noexcept { return high - low; }
};

/// 0.75 - 0.25 e. Throws std::domain_error outside [0, 1].
double expected_raw_correlation(double error_fraction);

/// 1 - 0.5 e. Throws std::domain_error outside [0, 1].
double expected_sifted_correlation(double error_fraction);

/// Fraction of equal positions. Throws std::domain_error when empty or of
/// different lengths.
double correlation(std::span<const BitValue> a, std::span<const BitValue> b);

/// Wilson score interval for successes / trials at the given two-sided level.
double wilson_z(double level);
ConfidenceInterval binomial_ci(std::size_t successes, std::size_t trials, double level = 0.95);

/// Upper bound on the probability an honest decode with `sift_size` sifted
/// positions misses the committed bit:
///     t = (expected_sifted_correlation(e) - 0.5 - delta) / 2
///     bound = min(1, 2 exp(-2 s t^2)),   1 when t <= 0.
/// The correct alignment falling below its mean by t and the wrong one rising
/// above 1/2 by t are each bounded by Hoeffding; outside both events the
/// decode separates by at least delta. Valid while sift_size >= min_sift and
/// the plausibility floor stays below 1 - 0.5 e - t.
double decode_error_bound(std::size_t sift_size, double error_fraction, double separation_delta);

}  // namespace qbc::stats
