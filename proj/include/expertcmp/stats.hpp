#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace expertcmp {

/// Empirical frequency with a Wilson score interval.
struct Frequency {
  std::size_t count = 0;
  std::size_t total = 0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 1.0;

  /// Binomial standard error at the observed frequency.
  double standard_error() const {
    return total == 0 ? 0.0 : std::sqrt(value * (1.0 - value) / static_cast<double>(total));
  }
};

inline constexpr double z95 = 1.959963984540054;

inline Frequency wilson(std::size_t count, std::size_t total, double z = z95) {
  Frequency f;
  f.count = count;
  f.total = total;
  if (total == 0) return f;
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(count) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  f.value = p;
  f.lower = std::max(0.0, centre - half);
  f.upper = std::min(1.0, centre + half);
  return f;
}

}  // namespace expertcmp
