#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "expertcmp/core.hpp"
#include "expertcmp/verdict.hpp"

namespace expertcmp {

/// Finite-horizon policy for turning the running likelihood ratio into a verdict.
struct VerdictParams {
  std::size_t horizon = 1;
  double lambda = std::log(100.0);  ///< threshold on |log ratio|
  std::size_t burn_in = 10;         ///< extremes only track t >= burn_in

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("verdict params: horizon must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("verdict params: lambda must be > 0");
    if (burn_in >= horizon) throw std::invalid_argument("verdict params: burn_in must be below horizon");
  }
};

/// Streaming log of D^t = prod f1[w_n] / f0[w_n] along the realized outcomes.
///
/// A zero factor is recorded by a flag rather than +/-inf arithmetic:
/// numerator_zero means some f1 factor was 0 (D^t = 0 from then on),
/// denominator_zero means some f0 factor was 0 (the limits are +inf by
/// definition). `log_ratio` sums only the steps where both factors are
/// positive, so swapping the experts negates it exactly.
struct LikelihoodState {
  std::size_t t = 0;
  double log_ratio = 0.0;
  bool numerator_zero = false;
  bool denominator_zero = false;
  std::size_t burn_in = 0;
  double running_min = std::numeric_limits<double>::infinity();
  double running_max = -std::numeric_limits<double>::infinity();

  LikelihoodState() = default;
  explicit LikelihoodState(std::size_t burn_in_index) : burn_in(burn_in_index) {}

  /// D^t as a plain number (0 or +inf when a flag is set).
  double ratio() const {
    if (denominator_zero) return std::numeric_limits<double>::infinity();
    if (numerator_zero) return 0.0;
    return std::exp(log_ratio);
  }
};

/// Advances the state by one period given each expert's probability of the realized outcome.
inline LikelihoodState update_likelihood(LikelihoodState s, double f0_prob, double f1_prob) {
  if (!(f0_prob >= 0.0 && f0_prob <= 1.0) || !(f1_prob >= 0.0 && f1_prob <= 1.0)) {
    throw std::invalid_argument("update_likelihood: probabilities must lie in [0,1]");
  }
  ++s.t;
  if (f0_prob == 0.0) s.denominator_zero = true;
  if (f1_prob == 0.0) s.numerator_zero = true;
  if (f0_prob > 0.0 && f1_prob > 0.0) s.log_ratio += std::log(f1_prob) - std::log(f0_prob);
  if (s.t >= s.burn_in) {
    s.running_min = std::min(s.running_min, s.log_ratio);
    s.running_max = std::max(s.running_max, s.log_ratio);
  }
  return s;
}

inline LikelihoodState update_likelihood(const LikelihoodState& s, const HistoryEntry& e) {
  return update_likelihood(s, e.forecast0.prob(e.outcome), e.forecast1.prob(e.outcome));
}

/// Folds a whole play path.
inline LikelihoodState likelihood_of(const PlayPath& path, std::size_t burn_in = 0) {
  LikelihoodState s(burn_in);
  for (const auto& e : path.entries()) s = update_likelihood(s, e);
  return s;
}

/// Same fold, also recording one state per period.
inline std::vector<LikelihoodState> likelihood_trajectory(const PlayPath& path, std::size_t burn_in = 0) {
  std::vector<LikelihoodState> out;
  out.reserve(path.size());
  LikelihoodState s(burn_in);
  for (const auto& e : path.entries()) {
    s = update_likelihood(s, e);
    out.push_back(s);
  }
  return out;
}

/// A verdict plus a marker for paths the test cannot rank (impossible under both experts).
struct RatioVerdict {
  Verdict verdict = Verdict::inconclusive;
  bool anomalous = false;
};

namespace detail {
inline void require_horizon(const LikelihoodState& s, const VerdictParams& p) {
  if (s.t != p.horizon) {
    throw std::invalid_argument("verdict requested at t=" + std::to_string(s.t) + " but horizon is " +
                                std::to_string(p.horizon));
  }
}
}  // namespace detail

/// Derivative test at a finite horizon. "The ratio vanishes" is approximated
/// by the log ratio lying beyond the threshold both now and at its extreme
/// since burn-in, so bounded or oscillating ratios stay inconclusive.
inline RatioVerdict derivative_verdict(const LikelihoodState& s, const VerdictParams& p) {
  detail::require_horizon(s, p);
  if (s.numerator_zero && s.denominator_zero) return {Verdict::inconclusive, true};
  if (s.denominator_zero) return {Verdict::expert1, false};
  if (s.numerator_zero) return {Verdict::expert0, false};
  if (s.t < s.burn_in) return {Verdict::inconclusive, false};  // no post-burn-in extremes yet
  if (s.running_min > p.lambda && s.log_ratio > p.lambda) return {Verdict::expert1, false};
  if (s.running_max < -p.lambda && s.log_ratio < -p.lambda) return {Verdict::expert0, false};
  return {Verdict::inconclusive, false};
}

/// Likelihood-ratio test: liminf D > 1 names expert 1, limsup D < 1 names expert 0,
/// with the post-burn-in extremes standing in for the limits.
inline RatioVerdict likelihood_ratio_verdict(const LikelihoodState& s, const VerdictParams& p) {
  detail::require_horizon(s, p);
  if (s.numerator_zero && s.denominator_zero) return {Verdict::inconclusive, true};
  if (s.denominator_zero) return {Verdict::expert1, false};
  if (s.numerator_zero) return {Verdict::expert0, false};
  if (s.t < s.burn_in) return {Verdict::inconclusive, false};
  if (s.running_min > 0.0) return {Verdict::expert1, false};
  if (s.running_max < 0.0) return {Verdict::expert0, false};
  return {Verdict::inconclusive, false};
}

/// CSV with columns t,log_ratio,numerator_zero,denominator_zero.
inline void write_trajectory_csv(std::ostream& os, const std::vector<LikelihoodState>& states) {
  const auto old = os.precision(17);
  os << "t,log_ratio,numerator_zero,denominator_zero\n";
  for (const auto& s : states) {
    os << s.t << ',' << s.log_ratio << ',' << (s.numerator_zero ? 1 : 0) << ',' << (s.denominator_zero ? 1 : 0)
       << '\n';
  }
  os.precision(old);
}

}  // namespace expertcmp
