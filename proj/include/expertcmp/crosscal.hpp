#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expertcmp/core.hpp"
#include "expertcmp/verdict.hpp"

namespace expertcmp {

/// Index j in {1..N} of the closed interval [(j-1)/N, j/N] containing p.
/// Boundary points k/N belong to two intervals; the smaller index wins.
inline int interval_index(double p, int n) {
  if (n <= 4) throw std::invalid_argument("interval_index: N must exceed 4");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("interval_index: p outside [0,1]");
  const double x = p * n;
  const double k = std::round(x);
  // Snap values within rounding of a boundary onto it, so 1 - 1/5 lands on 4/5.
  const int j = std::abs(x - k) <= 1e-9 ? static_cast<int>(k) : static_cast<int>(std::ceil(x));
  return std::clamp(j, 1, n);
}

/// Counts and outcome sums for one forecast profile.
struct ProfileCounts {
  std::size_t nu = 0;
  std::size_t ones_sum = 0;

  double frequency() const { return nu == 0 ? 0.0 : static_cast<double>(ones_sum) / static_cast<double>(nu); }
};

/// Profile key (l0, l1), 1-based interval indices announced by expert 0 and 1.
using ProfileKey = std::pair<int, int>;

/// Cross-calibration bookkeeping for two experts.
class CrossCalibState {
 public:
  explicit CrossCalibState(int n = 5) : n_(n), table_(static_cast<std::size_t>(n) * n) {
    if (n <= 4) throw std::invalid_argument("cross-calibration: N must exceed 4");
  }

  int intervals() const { return n_; }
  std::size_t t() const { return t_; }

  const ProfileCounts& at(ProfileKey l) const { return table_[slot(l)]; }

  /// Profiles with nu > 0 in key order.
  std::vector<std::pair<ProfileKey, ProfileCounts>> active_profiles() const {
    std::vector<std::pair<ProfileKey, ProfileCounts>> out;
    for (int a = 1; a <= n_; ++a) {
      for (int b = 1; b <= n_; ++b) {
        const auto& c = at({a, b});
        if (c.nu > 0) out.push_back({{a, b}, c});
      }
    }
    return out;
  }

  void record(ProfileKey l, Outcome o) {
    auto& c = table_[slot(l)];
    ++c.nu;
    if (o == Outcome::one) ++c.ones_sum;
    ++t_;
  }

 private:
  std::size_t slot(ProfileKey l) const {
    if (l.first < 1 || l.first > n_ || l.second < 1 || l.second > n_) throw std::out_of_range("profile key");
    return static_cast<std::size_t>(l.first - 1) * n_ + static_cast<std::size_t>(l.second - 1);
  }

  int n_;
  std::vector<ProfileCounts> table_;
  std::size_t t_ = 0;
};

/// Finite-sample stand-ins for "occurs infinitely often" and "limsup".
struct CrossCalibParams {
  int intervals = 5;
  std::size_t min_count = 25;
  double slack = 0.02;

  void validate() const {
    if (intervals <= 4) throw std::invalid_argument("cross-calibration: N must exceed 4");
    if (min_count < 1) throw std::invalid_argument("cross-calibration: min_count must be at least 1");
    if (!(slack >= 0.0)) throw std::invalid_argument("cross-calibration: slack must be nonnegative");
  }
};

inline CrossCalibState update_cross_calibration(CrossCalibState s, Forecast forecast0, Forecast forecast1,
                                                Outcome outcome) {
  const int n = s.intervals();
  s.record({interval_index(forecast0.p1(), n), interval_index(forecast1.p1(), n)}, outcome);
  return s;
}

inline CrossCalibState cross_calibration_of(const PlayPath& path, int n) {
  CrossCalibState s(n);
  for (const auto& e : path.entries()) {
    s.record({interval_index(e.forecast0.p1(), n), interval_index(e.forecast1.p1(), n)}, e.outcome);
  }
  return s;
}

/// Midpoint (2l - 1) / 2N of interval l.
inline double interval_midpoint(int l, int n) { return (2.0 * l - 1.0) / (2.0 * n); }

/// True iff every profile seen at least min_count times has a conditional
/// frequency within 1/(2N) + slack of expert i's announced interval midpoint.
inline bool cross_calibration_pass(const CrossCalibState& s, int expert, const CrossCalibParams& params) {
  if (expert != 0 && expert != 1) throw std::invalid_argument("expert index must be 0 or 1");
  const int n = s.intervals();
  const double band = 1.0 / (2.0 * n) + params.slack;
  for (const auto& [key, counts] : s.active_profiles()) {
    if (counts.nu < params.min_count) continue;
    const int l = expert == 0 ? key.first : key.second;
    // Closed band; the 1e-12 absorbs rounding when the frequency sits on its edge.
    if (std::abs(counts.frequency() - interval_midpoint(l, n)) > band + 1e-12) return false;
  }
  return true;
}

/// Comparison induced by the two pass/fail decisions.
constexpr Verdict cross_comparison_verdict(bool pass0, bool pass1) {
  if (pass0 == pass1) return Verdict::inconclusive;
  return pass0 ? Verdict::expert0 : Verdict::expert1;
}

/// CSV with columns l0,l1,nu,ones_sum,freq,midpoint0,midpoint1,band.
inline void write_profiles_csv(std::ostream& os, const CrossCalibState& s) {
  const int n = s.intervals();
  const auto old = os.precision(17);
  os << "l0,l1,nu,ones_sum,freq,midpoint0,midpoint1,band\n";
  for (const auto& [key, c] : s.active_profiles()) {
    os << key.first << ',' << key.second << ',' << c.nu << ',' << c.ones_sum << ',' << c.frequency() << ','
       << interval_midpoint(key.first, n) << ',' << interval_midpoint(key.second, n) << ',' << 1.0 / (2.0 * n)
       << '\n';
  }
  os.precision(old);
}

}  // namespace expertcmp
