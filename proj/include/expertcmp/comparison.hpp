#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "expertcmp/core.hpp"
#include "expertcmp/crosscal.hpp"
#include "expertcmp/likelihood.hpp"
#include "expertcmp/verdict.hpp"

namespace expertcmp {

enum class TestKind {
  derivative,
  likelihood_ratio,
  cross_calibration,
  ideal_iid,
  /// The derivative test overridden on the two play paths of the
  /// day-one (1 vs 1/2) Dirac pair along all ones; anonymous and reasonable
  /// but not a tail test.
  nontail_example,
};

constexpr std::string_view name(TestKind k) {
  switch (k) {
    case TestKind::derivative: return "derivative";
    case TestKind::likelihood_ratio: return "likelihood_ratio";
    case TestKind::cross_calibration: return "cross_calibration";
    case TestKind::ideal_iid: return "ideal_iid";
    case TestKind::nontail_example: return "nontail_example";
  }
  return "?";
}

inline TestKind test_kind_from_name(std::string_view s) {
  for (auto k : {TestKind::derivative, TestKind::likelihood_ratio, TestKind::cross_calibration,
                 TestKind::ideal_iid, TestKind::nontail_example}) {
    if (name(k) == s) return k;
  }
  throw std::invalid_argument("unknown test '" + std::string(s) + "'");
}

/// A comparison test with its finite-horizon parameters.
struct TestConfig {
  TestKind kind = TestKind::derivative;
  double lambda = std::log(100.0);
  std::size_t burn_in = 10;
  CrossCalibParams crosscal;
  double iid_tolerance = 0.05;

  VerdictParams verdict_params(std::size_t horizon) const { return {horizon, lambda, burn_in}; }

  void validate(std::size_t horizon) const {
    switch (kind) {
      case TestKind::derivative:
      case TestKind::likelihood_ratio:
      case TestKind::nontail_example: verdict_params(horizon).validate(); break;
      case TestKind::cross_calibration: crosscal.validate(); break;
      case TestKind::ideal_iid:
        if (!(iid_tolerance >= 0.0)) throw std::invalid_argument("ideal_iid: tolerance must be nonnegative");
        break;
    }
  }
};

/// Finite version of the average-realization test: an expert is named when its
/// day-one forecast is within `tol` of the empirical frequency and the rival's is not.
constexpr Verdict ideal_iid_verdict(double f0_first, double f1_first, double a_hat, double tol) {
  const bool match0 = (f0_first - a_hat <= tol) && (a_hat - f0_first <= tol);
  const bool match1 = (f1_first - a_hat <= tol) && (a_hat - f1_first <= tol);
  if (match1 && !match0) return Verdict::expert1;
  if (match0 && !match1) return Verdict::expert0;
  return Verdict::inconclusive;
}

/// If `path` is one of the two special paths of the non-tail example, the
/// expert that forecast 1 on day one; otherwise -1.
inline int nontail_special_expert(const PlayPath& path) {
  if (path.empty()) return -1;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& e = path[k];
    if (e.outcome != Outcome::one) return -1;
    if (k > 0 && (e.forecast0.p1() != 1.0 || e.forecast1.p1() != 1.0)) return -1;
  }
  const double a = path[0].forecast0.p1();
  const double b = path[0].forecast1.p1();
  if (a == 1.0 && b == 0.5) return 0;
  if (a == 0.5 && b == 1.0) return 1;
  return -1;
}

struct TestOutcome {
  Verdict verdict = Verdict::inconclusive;
  bool anomalous = false;
};

/// Applies a test to a complete play path; the horizon is the path length.
inline TestOutcome evaluate_test(const TestConfig& cfg, const PlayPath& path) {
  if (path.empty()) throw std::invalid_argument("evaluate_test: empty play path");
  switch (cfg.kind) {
    case TestKind::derivative:
    case TestKind::likelihood_ratio: {
      const auto params = cfg.verdict_params(path.size());
      const auto state = likelihood_of(path, cfg.burn_in);
      const auto rv = cfg.kind == TestKind::derivative ? derivative_verdict(state, params)
                                                       : likelihood_ratio_verdict(state, params);
      return {rv.verdict, rv.anomalous};
    }
    case TestKind::nontail_example: {
      if (const int e = nontail_special_expert(path); e >= 0) return {naming(e), false};
      const auto rv = derivative_verdict(likelihood_of(path, cfg.burn_in), cfg.verdict_params(path.size()));
      return {rv.verdict, rv.anomalous};
    }
    case TestKind::cross_calibration: {
      const auto state = cross_calibration_of(path, cfg.crosscal.intervals);
      return {cross_comparison_verdict(cross_calibration_pass(state, 0, cfg.crosscal),
                                       cross_calibration_pass(state, 1, cfg.crosscal)),
              false};
    }
    case TestKind::ideal_iid:
      return {ideal_iid_verdict(path[0].forecast0.p1(), path[0].forecast1.p1(), average_realization(path),
                                cfg.iid_tolerance),
              false};
  }
  throw std::logic_error("unhandled test kind");
}

}  // namespace expertcmp
