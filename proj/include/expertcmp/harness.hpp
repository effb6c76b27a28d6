#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "expertcmp/comparison.hpp"
#include "expertcmp/core.hpp"
#include "expertcmp/measure.hpp"
#include "expertcmp/rng.hpp"
#include "expertcmp/stats.hpp"
#include "expertcmp/strategy.hpp"
#include "expertcmp/verdict.hpp"

namespace expertcmp {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = all cores).
/// Work items must write only to their own slot; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Decidable events: a prefix cylinder, or "every realized outcome is 1".
struct EventSpec {
  enum class Kind { prefix_cylinder, all_ones };
  Kind kind = Kind::all_ones;
  std::vector<Outcome> prefix;

  static EventSpec cylinder(std::vector<Outcome> p) { return {Kind::prefix_cylinder, std::move(p)}; }
  static EventSpec all_ones_event() { return {Kind::all_ones, {}}; }

  bool contains(const PlayPath& path) const {
    if (kind == Kind::all_ones) {
      for (const auto& e : path.entries()) {
        if (e.outcome != Outcome::one) return false;
      }
      return true;
    }
    if (prefix.size() > path.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      if (path[k].outcome != prefix[k]) return false;
    }
    return true;
  }

  std::string describe() const {
    return kind == Kind::all_ones ? std::string("all_ones") : "prefix:" + to_string(prefix);
  }
};

inline std::string describe(const NatureSpec& nature) {
  if (const auto* m = std::get_if<ExpertMeasure>(&nature)) return "expert" + std::to_string(m->index);
  return "external:" + std::get<ExternalNature>(nature).strategy.expression();
}

struct Scenario {
  std::string name = "scenario";
  ForecastingStrategy f0;
  ForecastingStrategy f1;
  NatureSpec nature = ExpertMeasure{0};
  std::size_t horizon = 100;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 1;
  std::vector<TestConfig> tests{TestConfig{}};
  std::optional<EventSpec> event;
  unsigned workers = 0;
  bool keep_trials = false;

  void validate() const {
    if (!f0 || !f1) throw std::invalid_argument("scenario: both strategies are required");
    if (horizon < 1) throw std::invalid_argument("scenario: horizon must be at least 1");
    if (trials < 1) throw std::invalid_argument("scenario: trials must be at least 1");
    if (tests.empty()) throw std::invalid_argument("scenario: at least one test is required");
    if (const auto* m = std::get_if<ExpertMeasure>(&nature); m && m->index != 0 && m->index != 1) {
      throw std::invalid_argument("scenario: expert measure index must be 0 or 1");
    }
    if (const auto* x = std::get_if<ExternalNature>(&nature); x && !x->strategy) {
      throw std::invalid_argument("scenario: external nature needs a strategy");
    }
    for (const auto& t : tests) t.validate(horizon);
  }
};

/// Verdict counts for one test; anomalies are trials the test could not rank.
struct VerdictCounts {
  std::array<std::size_t, 3> counts{};
  std::size_t anomalies = 0;

  std::size_t count(Verdict v) const { return counts[index(v)]; }
  std::size_t total() const { return counts[0] + counts[1] + counts[2] + anomalies; }
  Frequency frequency(Verdict v) const { return wilson(count(v), total()); }

  void add(Verdict v, bool anomalous) {
    if (anomalous) {
      ++anomalies;
    } else {
      ++counts[index(v)];
    }
  }
};

struct TestSummary {
  TestConfig config;
  VerdictCounts all;
  VerdictCounts given_event;  ///< restricted to trials whose path lies in the event
};

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::vector<Verdict> verdicts;
  std::vector<bool> anomalous;
  double final_log_ratio = 0.0;
  bool numerator_zero = false;
  bool denominator_zero = false;
  bool in_event = false;
  bool measure_zero = false;  ///< some strategy's conditional was undefined on this path
};

struct Disagreement {
  std::size_t test_a = 0;
  std::size_t test_b = 0;
  Frequency frequency;
};

struct RunReport {
  std::string scenario;
  std::string nature;
  std::size_t horizon = 0;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<TestSummary> tests;
  std::size_t measure_zero_trials = 0;
  std::optional<EventSpec> event;
  Frequency event_frequency;
  std::vector<Disagreement> disagreements;  ///< every unordered pair of tests
  std::vector<TrialRecord> trial_records;   ///< filled when Scenario::keep_trials
  double wall_seconds = 0.0;
};

/// The play path of trial `index`; deterministic in (master_seed, index).
inline PlayPath sample_trial_path(const Scenario& s, std::size_t index) {
  return sample_path(s.f0, s.f1, s.nature, s.horizon, trial_seed(s.master_seed, index));
}

inline TrialRecord evaluate_trial(const Scenario& s, std::size_t index) {
  TrialRecord r;
  r.index = index;
  r.seed = trial_seed(s.master_seed, index);
  r.verdicts.assign(s.tests.size(), Verdict::inconclusive);
  r.anomalous.assign(s.tests.size(), false);
  PlayPath path;
  try {
    path = sample_path(s.f0, s.f1, s.nature, s.horizon, r.seed);
  } catch (const MeasureZeroHistory&) {
    r.measure_zero = true;
    r.anomalous.assign(s.tests.size(), true);
    return r;
  }
  for (std::size_t k = 0; k < s.tests.size(); ++k) {
    const auto out = evaluate_test(s.tests[k], path);
    r.verdicts[k] = out.verdict;
    r.anomalous[k] = out.anomalous;
  }
  const auto lr = likelihood_of(path);
  r.final_log_ratio = lr.log_ratio;
  r.numerator_zero = lr.numerator_zero;
  r.denominator_zero = lr.denominator_zero;
  r.in_event = s.event && s.event->contains(path);
  return r;
}

/// Monte Carlo estimate of P({T(., f) = k}) under the scenario's nature, for each test.
inline RunReport estimate_verdict_distribution(const Scenario& s) {
  s.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<TrialRecord> records(s.trials);
  parallel_for(s.trials, s.workers, [&](std::size_t i) { records[i] = evaluate_trial(s, i); });

  RunReport rep;
  rep.scenario = s.name;
  rep.nature = describe(s.nature);
  rep.horizon = s.horizon;
  rep.trials = s.trials;
  rep.master_seed = s.master_seed;
  rep.event = s.event;
  for (const auto& t : s.tests) rep.tests.push_back(TestSummary{t, {}, {}});

  std::size_t hits = 0;
  std::vector<std::size_t> disagree(s.tests.size() * s.tests.size(), 0);
  for (const auto& r : records) {
    if (r.measure_zero) ++rep.measure_zero_trials;
    if (r.in_event) ++hits;
    for (std::size_t k = 0; k < s.tests.size(); ++k) {
      rep.tests[k].all.add(r.verdicts[k], r.anomalous[k]);
      if (r.in_event) rep.tests[k].given_event.add(r.verdicts[k], r.anomalous[k]);
      for (std::size_t j = k + 1; j < s.tests.size(); ++j) {
        // Anomalous trials count as disagreement only when exactly one test flagged them.
        const bool differ = r.anomalous[k] != r.anomalous[j] ||
                            (!r.anomalous[k] && r.verdicts[k] != r.verdicts[j]);
        if (differ) ++disagree[k * s.tests.size() + j];
      }
    }
  }
  if (s.event) rep.event_frequency = wilson(hits, s.trials);
  for (std::size_t k = 0; k < s.tests.size(); ++k) {
    for (std::size_t j = k + 1; j < s.tests.size(); ++j) {
      rep.disagreements.push_back({k, j, wilson(disagree[k * s.tests.size() + j], s.trials)});
    }
  }
  if (s.keep_trials) rep.trial_records = std::move(records);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Property checks

struct ErrorFreeEntry {
  TestConfig config;
  Frequency wrong;                    ///< frequency of the verdict naming the other expert
  std::optional<double> bound;        ///< analytic e^{-lambda} (ratio-threshold tests only)
  std::optional<double> bound_limit;  ///< bound + 3 sqrt(bound / trials)
  bool within_bound = true;
};

struct ErrorFreeReport {
  int informed_expert = 0;
  std::vector<ErrorFreeEntry> entries;
  RunReport run;
};

/// Under nature = P_i, how often each test names expert 1 - i.
inline ErrorFreeReport check_error_free(const Scenario& s) {
  const auto* m = std::get_if<ExpertMeasure>(&s.nature);
  if (!m) throw std::invalid_argument("check_error_free: nature must be an expert measure");
  ErrorFreeReport rep;
  rep.informed_expert = m->index;
  rep.run = estimate_verdict_distribution(s);
  const Verdict wrong = naming(1 - m->index);
  for (const auto& t : rep.run.tests) {
    ErrorFreeEntry e;
    e.config = t.config;
    e.wrong = t.all.frequency(wrong);
    if (t.config.kind == TestKind::derivative) {
      const double b = std::exp(-t.config.lambda);
      e.bound = b;
      e.bound_limit = b + 3.0 * std::sqrt(b / static_cast<double>(s.trials));
      e.within_bound = e.wrong.value <= *e.bound_limit;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

struct ReasonableReport {
  int expert = 0;
  Frequency event;             ///< P_i(A)
  Frequency event_and_named;   ///< P_i(A and {T = i})
  VerdictCounts given_event;   ///< verdict distribution on trials in A
  bool unobserved = false;     ///< A was never hit
  RunReport run;
};

/// Estimates P_i(A) and P_i(A and {T = i}) with nature = P_i. Whether
/// P_{1-i}(A) = 0 is the caller's (analytic) responsibility.
inline ReasonableReport check_reasonable(const TestConfig& test, const ForecastingStrategy& f0,
                                         const ForecastingStrategy& f1, const EventSpec& a, int expert,
                                         std::size_t trials, std::size_t horizon, std::uint64_t seed,
                                         unsigned workers = 0) {
  Scenario s;
  s.name = "reasonable";
  s.f0 = f0;
  s.f1 = f1;
  s.nature = ExpertMeasure{expert};
  s.horizon = horizon;
  s.trials = trials;
  s.master_seed = seed;
  s.tests = {test};
  s.event = a;
  s.workers = workers;

  ReasonableReport rep;
  rep.expert = expert;
  rep.run = estimate_verdict_distribution(s);
  rep.event = rep.run.event_frequency;
  rep.given_event = rep.run.tests[0].given_event;
  rep.event_and_named = wilson(rep.given_event.count(naming(expert)), trials);
  rep.unobserved = rep.event.count == 0;
  return rep;
}

/// T(w, f0, f1) and T(w, f1, f0) are complements, with the swapped play path
/// rebuilt from the same outcomes.
inline bool check_anonymity(const TestConfig& test, const ForecastingStrategy& f0, const ForecastingStrategy& f1,
                            const PlayPath& path) {
  const PlayPath swapped = replay(path.outcomes(), f1, f0);
  const auto a = evaluate_test(test, path);
  const auto b = evaluate_test(test, swapped);
  if (a.anomalous || b.anomalous) return a.anomalous == b.anomalous;
  return b.verdict == complement(a.verdict);
}

struct TailCheck {
  TestConfig test;
  ForecastingStrategy f0;
  ForecastingStrategy f1;
  std::vector<Outcome> forced;  ///< first n-1 symbols are forced
  std::size_t n = 1;
  int nature_expert = 0;  ///< paths are drawn from the prefix-forced version of this expert
  std::size_t horizon = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

struct TailReport {
  std::size_t trials = 0;
  std::size_t anomalies = 0;
  Frequency disagreement;
  VerdictCounts original;
  VerdictCounts forced;
};

/// Compares T(w, f0, f1) with T(w, f0^, f1^), where f^ forces the prefix and
/// then follows f; both triplets eventually coincide on every sampled path.
inline TailReport check_tail(const TailCheck& c) {
  if (c.n < 1) throw std::invalid_argument("check_tail: n must be positive");
  if (c.forced.size() + 1 < c.n) throw std::invalid_argument("check_tail: forced prefix shorter than n-1");
  if (c.horizon < c.n) throw std::invalid_argument("check_tail: horizon must reach n");
  c.test.validate(c.horizon);
  const std::vector<Outcome> prefix(c.forced.begin(), c.forced.begin() + static_cast<std::ptrdiff_t>(c.n - 1));
  for (int i : {0, 1}) {
    if (!(induced_prefix_probability(c.f0, c.f1, i, prefix) > 0.0)) {
      throw std::invalid_argument("check_tail: forced prefix '" + to_string(prefix) +
                                  "' has zero probability under expert " + std::to_string(i));
    }
  }
  const auto g0 = prefix_forced_strategy(c.f0, prefix, c.n);
  const auto g1 = prefix_forced_strategy(c.f1, prefix, c.n);

  struct Row {
    TestOutcome original, forced;
    bool anomalous = false;
  };
  std::vector<Row> rows(c.trials);
  parallel_for(c.trials, c.workers, [&](std::size_t i) {
    Row r;
    try {
      const PlayPath hat = sample_path(g0, g1, ExpertMeasure{c.nature_expert}, c.horizon, trial_seed(c.seed, i));
      const PlayPath orig = replay(hat.outcomes(), c.f0, c.f1);
      r.forced = evaluate_test(c.test, hat);
      r.original = evaluate_test(c.test, orig);
    } catch (const MeasureZeroHistory&) {
      r.anomalous = true;
    }
    rows[i] = r;
  });

  TailReport rep;
  rep.trials = c.trials;
  std::size_t differ = 0;
  for (const auto& r : rows) {
    if (r.anomalous) {
      ++rep.anomalies;
      rep.original.add(Verdict::inconclusive, true);
      rep.forced.add(Verdict::inconclusive, true);
      continue;
    }
    rep.original.add(r.original.verdict, r.original.anomalous);
    rep.forced.add(r.forced.verdict, r.forced.anomalous);
    if (r.original.verdict != r.forced.verdict || r.original.anomalous != r.forced.anomalous) ++differ;
  }
  rep.disagreement = wilson(differ, c.trials);
  return rep;
}

struct IdealReport {
  std::array<Frequency, 2> identified;  ///< frequency of verdict i under nature P_i
  std::array<bool, 2> ideal_at_horizon{};
  double tolerance = 0.01;
};

/// IID(p0) vs IID(p1): does the test name the expert whose measure generates the data?
inline IdealReport check_ideal_iid(const TestConfig& test, double p0, double p1, std::size_t horizon,
                                   std::size_t trials, std::uint64_t seed, double tolerance = 0.01,
                                   unsigned workers = 0) {
  if (p0 == p1) throw std::invalid_argument("check_ideal_iid: p0 and p1 must differ");
  IdealReport rep;
  rep.tolerance = tolerance;
  for (int i : {0, 1}) {
    Scenario s;
    s.name = "ideal_iid";
    s.f0 = iid_strategy(p0);
    s.f1 = iid_strategy(p1);
    s.nature = ExpertMeasure{i};
    s.horizon = horizon;
    s.trials = trials;
    s.master_seed = seed + static_cast<std::uint64_t>(i);
    s.tests = {test};
    s.workers = workers;
    const auto run = estimate_verdict_distribution(s);
    rep.identified[i] = run.tests[0].all.frequency(naming(i));
    rep.ideal_at_horizon[i] = rep.identified[i].value >= 1.0 - tolerance;
  }
  return rep;
}

struct EquivalenceReport {
  std::vector<std::string> natures;
  std::vector<Frequency> disagreement;  ///< P({T_a != T_b}) per nature
  bool equivalent = true;               ///< no disagreement observed under any nature
};

inline EquivalenceReport check_equivalence(const TestConfig& a, const TestConfig& b, const ForecastingStrategy& f0,
                                           const ForecastingStrategy& f1, const std::vector<NatureSpec>& natures,
                                           std::size_t trials, std::size_t horizon, std::uint64_t seed,
                                           unsigned workers = 0) {
  EquivalenceReport rep;
  for (std::size_t k = 0; k < natures.size(); ++k) {
    Scenario s;
    s.name = "equivalence";
    s.f0 = f0;
    s.f1 = f1;
    s.nature = natures[k];
    s.horizon = horizon;
    s.trials = trials;
    s.master_seed = seed + k;
    s.tests = {a, b};
    s.workers = workers;
    const auto run = estimate_verdict_distribution(s);
    rep.natures.push_back(run.nature);
    rep.disagreement.push_back(run.disagreements.at(0).frequency);
    if (run.disagreements.at(0).frequency.count != 0) rep.equivalent = false;
  }
  return rep;
}

/// f0 = 1/2 IID(0.5) + 1/2 IID(0.3) against f1 = IID(0.5): P_1 is absolutely
/// continuous with respect to P_0, so an error-free test must sometimes be
/// inconclusive under P_0.
inline std::pair<ForecastingStrategy, ForecastingStrategy> absolute_continuity_pair() {
  return {mixture_strategy({{0.5, iid_strategy(0.5)}, {0.5, iid_strategy(0.3)}}), iid_strategy(0.5)};
}

struct AbsoluteContinuityReport {
  RunReport run;
  std::array<double, 3> expected{0.5, 0.5, 0.0};  ///< analytic (expert0, inconclusive, expert1)
};

inline AbsoluteContinuityReport check_inconclusive_under_absolute_continuity(std::size_t horizon, std::size_t trials,
                                                                             std::uint64_t seed,
                                                                             std::optional<TestConfig> test = {},
                                                                             unsigned workers = 0) {
  if (!test) {
    // Late burn-in: the running extreme then reflects the ratio's limit.
    test = TestConfig{};
    test->burn_in = horizon / 2;
  }
  const auto [f0, f1] = absolute_continuity_pair();
  Scenario s;
  s.name = "absolute_continuity";
  s.f0 = f0;
  s.f1 = f1;
  s.nature = ExpertMeasure{0};
  s.horizon = horizon;
  s.trials = trials;
  s.master_seed = seed;
  s.tests = {*test};
  s.workers = workers;
  return {estimate_verdict_distribution(s), {0.5, 0.5, 0.0}};
}

}  // namespace expertcmp
