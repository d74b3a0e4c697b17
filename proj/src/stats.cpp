#include "qbc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace qbc::stats {

namespace {

void require_fraction(double e) {
  if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("error_fraction must lie in [0, 1]");
}

}  // namespace

double expected_raw_correlation(double error_fraction) {
  require_fraction(error_fraction);
  return 0.75 - 0.25 * error_fraction;
}

double expected_sifted_correlation(double error_fraction) {
  require_fraction(error_fraction);
  return 1.0 - 0.5 * error_fraction;
}

double correlation(std::span<const BitValue> a, std::span<const BitValue> b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::domain_error("correlation: need two nonempty sequences of equal length (got " +
                            std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double wilson_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

ConfidenceInterval binomial_ci(std::size_t successes, std::size_t trials, double level) {
  if (trials == 0) throw std::domain_error("binomial_ci: trials must be positive");
  if (successes > trials) throw std::domain_error("binomial_ci: successes exceed trials");
  const double z = wilson_z(level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Pin the boundaries exactly; the closed form can land an ulp inside.
  const double low = successes == 0 ? 0.0 : std::clamp(centre - half, 0.0, p);
  const double high = successes == trials ? 1.0 : std::clamp(centre + half, p, 1.0);
  return {low, high, level};
}

double decode_error_bound(std::size_t sift_size, double error_fraction, double separation_delta) {
  const double t = (expected_sifted_correlation(error_fraction) - 0.5 - separation_delta) / 2.0;
  if (sift_size == 0 || t <= 0.0) return 1.0;
  return std::min(1.0, 2.0 * std::exp(-2.0 * static_cast<double>(sift_size) * t * t));
}

}  // namespace qbc::stats
