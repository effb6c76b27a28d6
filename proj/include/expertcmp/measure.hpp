#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "expertcmp/core.hpp"
#include "expertcmp/rng.hpp"
#include "expertcmp/strategy.hpp"

namespace expertcmp {

/// Outcomes are drawn from expert `index`'s own conditionals (P_i).
struct ExpertMeasure {
  int index = 0;
};

/// Outcomes are drawn from a third strategy's conditionals.
struct ExternalNature {
  ForecastingStrategy strategy;
};

using NatureSpec = std::variant<ExpertMeasure, ExternalNature>;

/// New path equal to `h` plus one entry holding f0(h), f1(h) and `outcome`.
inline PlayPath extend_play_path(const PlayPath& h, const ForecastingStrategy& f0, const ForecastingStrategy& f1,
                                 Outcome outcome) {
  PlayPath out = h;
  out.push_back(HistoryEntry{outcome, f0(h), f1(h)});
  return out;
}

/// Builds the play path jointly induced by (outcomes, f0, f1).
inline PlayPath replay(std::span<const Outcome> outcomes, const ForecastingStrategy& f0,
                       const ForecastingStrategy& f1) {
  auto p0 = f0.predictor();
  auto p1 = f1.predictor();
  PlayPath path;
  path.reserve(outcomes.size());
  for (auto o : outcomes) {
    const Forecast a = p0->next(path.view());
    const Forecast b = p1->next(path.view());
    path.push_back(HistoryEntry{o, a, b});
  }
  return path;
}

/// Probability in log space with an exact-zero flag.
struct LogProbability {
  double log_value = 0.0;
  bool zero = false;

  double value() const { return zero ? 0.0 : std::exp(log_value); }
};

/// Product of expert i's one-step forecasts along a play path.
inline LogProbability path_log_probability(const PlayPath& path, int expert) {
  LogProbability lp;
  for (const auto& e : path.entries()) {
    const double q = e.forecast(expert).prob(e.outcome);
    if (q == 0.0) {
      lp.zero = true;
    } else {
      lp.log_value += std::log(q);
    }
  }
  return lp;
}

/// P_i^f of the cylinder set of `outcomes`; 1 for the empty word. Accumulated
/// in log space; a zero factor ends the product early with an exact 0.
inline double induced_prefix_probability(const ForecastingStrategy& f0, const ForecastingStrategy& f1, int expert,
                                         std::span<const Outcome> outcomes) {
  if (expert != 0 && expert != 1) throw std::invalid_argument("expert index must be 0 or 1");
  auto p0 = f0.predictor();
  auto p1 = f1.predictor();
  PlayPath path;
  path.reserve(outcomes.size());
  double log_p = 0.0;
  for (auto o : outcomes) {
    const Forecast a = p0->next(path.view());
    const Forecast b = p1->next(path.view());
    const double q = (expert == 0 ? a : b).prob(o);
    if (q == 0.0) return 0.0;
    log_p += std::log(q);
    path.push_back(HistoryEntry{o, a, b});
  }
  return std::exp(log_p);
}

/// Samples a play path of length `horizon`; each outcome is Bernoulli with the
/// nature source's conditional on the current history.
inline PlayPath sample_path(const ForecastingStrategy& f0, const ForecastingStrategy& f1, const NatureSpec& nature,
                            std::size_t horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("sample_path: horizon must be at least 1");
  Engine rng(seed);
  auto p0 = f0.predictor();
  auto p1 = f1.predictor();
  std::unique_ptr<Predictor> external;
  int expert = -1;
  if (const auto* m = std::get_if<ExpertMeasure>(&nature)) {
    if (m->index != 0 && m->index != 1) throw std::invalid_argument("expert measure index must be 0 or 1");
    expert = m->index;
  } else {
    external = std::get<ExternalNature>(nature).strategy.predictor();
  }

  PlayPath path;
  path.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Forecast a = p0->next(path.view());
    const Forecast b = p1->next(path.view());
    const double p = expert == 0 ? a.p1() : expert == 1 ? b.p1() : external->next(path.view()).p1();
    const Outcome o = bernoulli(rng, p) ? Outcome::one : Outcome::zero;
    path.push_back(HistoryEntry{o, a, b});
  }
  return path;
}

}  // namespace expertcmp
