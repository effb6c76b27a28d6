#pragma once

// Executes a ScenarioFile and serializes the results.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "expertcmp/harness.hpp"
#include "expertcmp/scenario_file.hpp"

namespace expertcmp {

struct NatureRun {
  std::string nature;
  std::optional<RunReport> estimate;  ///< mode: estimate
  std::vector<TailReport> tail;       ///< mode: tail, one per test
};

struct ExpectationResult {
  ExpectationSpec spec;
  double observed = 0.0;
  bool pass = false;
};

struct ScenarioRun {
  ScenarioFile file;
  std::vector<NatureRun> natures;
  std::vector<ExpectationResult> expectations;
};

namespace detail {

inline std::size_t test_slot(const ScenarioFile& f, const std::string& test) {
  for (std::size_t k = 0; k < f.tests.size(); ++k) {
    if (name(f.tests[k].kind) == test) return k;
  }
  throw ScenarioError("expectation names test '" + test + "' which the scenario does not run");
}

inline double observe(const ScenarioFile& f, const NatureRun& run, const ExpectationSpec& x) {
  if (x.quantity == "tail_disagreement") {
    if (run.tail.empty()) throw ScenarioError("tail_disagreement needs run.mode: tail");
    return run.tail.at(test_slot(f, x.test)).disagreement.value;
  }
  if (!run.estimate) throw ScenarioError("quantity '" + x.quantity + "' needs run.mode: estimate");
  const auto& rep = *run.estimate;
  if (x.quantity == "event") {
    if (!rep.event) throw ScenarioError("quantity 'event' needs an event");
    return rep.event_frequency.value;
  }
  if (x.quantity == "disagreement") {
    const auto comma = x.test.find(',');
    if (comma == std::string::npos) throw ScenarioError("disagreement expects test 'a,b'");
    auto a = test_slot(f, x.test.substr(0, comma));
    auto b = test_slot(f, x.test.substr(comma + 1));
    if (a > b) std::swap(a, b);
    for (const auto& d : rep.disagreements) {
      if (d.test_a == a && d.test_b == b) return d.frequency.value;
    }
    throw ScenarioError("disagreement needs two distinct tests");
  }
  const auto& summary = rep.tests.at(test_slot(f, x.test));
  if (x.quantity == "anomalies") {
    return static_cast<double>(summary.all.anomalies) / static_cast<double>(summary.all.total());
  }
  if (x.quantity.rfind("given_event.", 0) == 0) {
    if (!rep.event) throw ScenarioError("given_event quantities need an event");
    const auto v = verdict_from_name(x.quantity.substr(12));
    if (summary.given_event.total() == 0) return std::nan("");
    return summary.given_event.frequency(v).value;
  }
  return summary.all.frequency(verdict_from_name(x.quantity)).value;
}

}  // namespace detail

inline ScenarioRun run_scenario(const ScenarioFile& f, unsigned workers = 0) {
  ScenarioRun out;
  out.file = f;
  const bool keep = f.output.trials_jsonl;
  for (const auto& nature : f.natures) {
    NatureRun nr;
    nr.nature = nature;
    if (f.mode == "estimate") {
      auto s = make_scenario(f, nature, workers);
      s.keep_trials = keep;
      nr.estimate = estimate_verdict_distribution(s);
    } else {
      if (nature != "expert0" && nature != "expert1") {
        throw ScenarioError("tail mode samples from an expert measure; nature '" + nature + "' is not supported");
      }
      for (const auto& t : f.tests) {
        TailCheck c;
        c.test = t;
        c.f0 = parse_strategy(f.f0, f.params);
        c.f1 = parse_strategy(f.f1, f.params);
        c.forced = parse_word(f.surgery_forced);
        c.n = f.surgery_n;
        c.nature_expert = nature == "expert0" ? 0 : 1;
        c.horizon = f.horizon;
        c.trials = f.trials;
        c.seed = f.seed;
        c.workers = workers;
        nr.tail.push_back(check_tail(c));
      }
    }
    out.natures.push_back(std::move(nr));
  }
  for (const auto& x : f.expect) {
    ExpectationResult r;
    r.spec = x;
    for (const auto& nr : out.natures) {
      if (nr.nature == x.nature) r.observed = detail::observe(f, nr, x);
    }
    r.pass = std::abs(r.observed - x.value) <= x.tolerance;
    out.expectations.push_back(r);
  }
  return out;
}

inline bool all_expectations_met(const ScenarioRun& run) {
  for (const auto& e : run.expectations) {
    if (!e.pass) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json to_json(const Frequency& f) {
  return {{"count", f.count}, {"total", f.total}, {"value", f.value}, {"ci95", {f.lower, f.upper}}};
}

inline nlohmann::ordered_json to_json(const VerdictCounts& c) {
  nlohmann::ordered_json j;
  for (auto v : all_verdicts) j[std::string(name(v))] = to_json(c.frequency(v));
  j["anomalies"] = c.anomalies;
  j["total"] = c.total();
  return j;
}

inline nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["nature"] = r.nature;
  j["horizon"] = r.horizon;
  j["trials"] = r.trials;
  j["master_seed"] = r.master_seed;
  j["measure_zero_trials"] = r.measure_zero_trials;
  if (r.event) {
    j["event"] = {{"kind", r.event->describe()}, {"frequency", to_json(r.event_frequency)}};
  }
  j["tests"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tests) {
    nlohmann::ordered_json tj;
    tj["test"] = std::string(name(t.config.kind));
    tj["verdicts"] = to_json(t.all);
    if (r.event) {
      tj["given_event"] = to_json(t.given_event);
      if (t.given_event.total() == 0) tj["given_event_note"] = "event unobserved";
    }
    j["tests"].push_back(tj);
  }
  j["disagreements"] = nlohmann::ordered_json::array();
  for (const auto& d : r.disagreements) {
    j["disagreements"].push_back({{"a", std::string(name(r.tests[d.test_a].config.kind))},
                                  {"b", std::string(name(r.tests[d.test_b].config.kind))},
                                  {"frequency", to_json(d.frequency)}});
  }
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline nlohmann::ordered_json to_json(const TailReport& r) {
  return {{"trials", r.trials},
          {"anomalies", r.anomalies},
          {"disagreement", to_json(r.disagreement)},
          {"original", to_json(r.original)},
          {"forced", to_json(r.forced)}};
}

inline nlohmann::ordered_json to_json(const ScenarioRun& run) {
  nlohmann::ordered_json j;
  j["scenario"] = to_json(run.file);
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& nr : run.natures) {
    nlohmann::ordered_json nj;
    nj["nature"] = nr.nature;
    if (nr.estimate) nj["estimate"] = to_json(*nr.estimate);
    if (!nr.tail.empty()) {
      nj["tail"] = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < nr.tail.size(); ++k) {
        auto tj = to_json(nr.tail[k]);
        tj["test"] = std::string(name(run.file.tests[k].kind));
        nj["tail"].push_back(tj);
      }
    }
    j["runs"].push_back(nj);
  }
  j["expectations"] = nlohmann::ordered_json::array();
  for (const auto& e : run.expectations) {
    j["expectations"].push_back({{"nature", e.spec.nature},
                                 {"test", e.spec.test},
                                 {"quantity", e.spec.quantity},
                                 {"expected", e.spec.value},
                                 {"tolerance", e.spec.tolerance},
                                 {"observed", e.observed},
                                 {"pass", e.pass}});
  }
  return j;
}

/// One JSON object per trial.
inline void write_trials_jsonl(std::ostream& os, const RunReport& r) {
  for (const auto& t : r.trial_records) {
    nlohmann::ordered_json j;
    j["nature"] = r.nature;
    j["trial"] = t.index;
    j["seed"] = t.seed;
    j["verdicts"] = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.tests.size(); ++k) {
      j["verdicts"][std::string(name(r.tests[k].config.kind))] =
          t.anomalous[k] ? std::string("anomalous") : std::string(name(t.verdicts[k]));
    }
    j["final_log_ratio"] = std::isfinite(t.final_log_ratio) ? nlohmann::ordered_json(t.final_log_ratio) : nullptr;
    j["numerator_zero"] = t.numerator_zero;
    j["denominator_zero"] = t.denominator_zero;
    if (r.event) j["in_event"] = t.in_event;
    j["measure_zero"] = t.measure_zero;
    os << j.dump() << '\n';
  }
}

/// Play path of output.trace_trial under the first nature.
inline PlayPath traced_path(const ScenarioFile& f) {
  const auto s = make_scenario(f, f.natures.front());
  return sample_trial_path(s, f.output.trace_trial);
}

/// Writes report.json plus whichever exports the scenario requests; returns the paths written.
inline std::vector<std::string> write_outputs(const ScenarioRun& run, const std::string& dir) {
  std::vector<std::string> written;
  auto open = [&](const std::string& file) {
    const std::string path = dir.empty() ? file : dir + "/" + file;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    written.push_back(path);
    return os;
  };
  {
    auto os = open("report.json");
    os << to_json(run).dump(2) << '\n';
  }
  const auto& f = run.file;
  if (f.output.trials_jsonl) {
    auto os = open("trials.jsonl");
    for (const auto& nr : run.natures) {
      if (nr.estimate) write_trials_jsonl(os, *nr.estimate);
    }
  }
  if (f.output.trajectory_csv || f.output.profiles_csv) {
    const PlayPath path = traced_path(f);
    if (f.output.trajectory_csv) {
      std::size_t burn_in = 0;
      for (const auto& t : f.tests) {
        if (t.kind != TestKind::cross_calibration && t.kind != TestKind::ideal_iid) {
          burn_in = t.burn_in;
          break;
        }
      }
      auto os = open("trajectory.csv");
      write_trajectory_csv(os, likelihood_trajectory(path, burn_in));
    }
    if (f.output.profiles_csv) {
      int n = CrossCalibParams{}.intervals;
      for (const auto& t : f.tests) {
        if (t.kind == TestKind::cross_calibration) {
          n = t.crosscal.intervals;
          break;
        }
      }
      auto os = open("crosscal_profiles.csv");
      write_profiles_csv(os, cross_calibration_of(path, n));
    }
  }
  return written;
}

/// One-screen table: verdict, count, frequency, 95% CI.
inline void print_summary(std::ostream& os, const ScenarioRun& run) {
  char line[160];
  os << "scenario " << run.file.name << "  horizon " << run.file.horizon << "  trials " << run.file.trials
     << "  seed " << run.file.seed << '\n';
  auto rows = [&](const VerdictCounts& c, const char* indent) {
    for (auto v : all_verdicts) {
      const auto fr = c.frequency(v);
      std::snprintf(line, sizeof line, "%s%-13s %9zu  %.6f  [%.6f, %.6f]\n", indent, std::string(name(v)).c_str(),
                    fr.count, fr.value, fr.lower, fr.upper);
      os << line;
    }
    if (c.anomalies) {
      std::snprintf(line, sizeof line, "%s%-13s %9zu\n", indent, "anomalous", c.anomalies);
      os << line;
    }
  };
  for (const auto& nr : run.natures) {
    os << "\nnature " << nr.nature << '\n';
    if (nr.estimate) {
      const auto& r = *nr.estimate;
      if (r.event) {
        std::snprintf(line, sizeof line, "  event %s: %zu hits, frequency %.6f [%.6f, %.6f]\n",
                      r.event->describe().c_str(), r.event_frequency.count, r.event_frequency.value,
                      r.event_frequency.lower, r.event_frequency.upper);
        os << line;
      }
      for (const auto& t : r.tests) {
        os << "  " << name(t.config.kind) << '\n';
        os << "    verdict           count  frequency  95% CI\n";
        rows(t.all, "    ");
        if (r.event) {
          if (t.given_event.total() == 0) {
            os << "    given event: event unobserved\n";
          } else {
            os << "    given event (" << t.given_event.total() << " trials)\n";
            rows(t.given_event, "    ");
          }
        }
      }
      for (const auto& d : r.disagreements) {
        std::snprintf(line, sizeof line, "  disagreement %s vs %s: %.6f [%.6f, %.6f]\n",
                      std::string(name(r.tests[d.test_a].config.kind)).c_str(),
                      std::string(name(r.tests[d.test_b].config.kind)).c_str(), d.frequency.value,
                      d.frequency.lower, d.frequency.upper);
        os << line;
      }
      std::snprintf(line, sizeof line, "  wall time %.3f s\n", r.wall_seconds);
      os << line;
    }
    for (std::size_t k = 0; k < nr.tail.size(); ++k) {
      const auto& t = nr.tail[k];
      std::snprintf(line, sizeof line, "  %s under prefix surgery: %zu of %zu trials disagree (%.6f)\n",
                    std::string(name(run.file.tests[k].kind)).c_str(), t.disagreement.count, t.trials,
                    t.disagreement.value);
      os << line;
    }
  }
  if (!run.expectations.empty()) os << "\nexpectations\n";
  for (const auto& e : run.expectations) {
    std::snprintf(line, sizeof line, "  [%s] %s %s %s = %.6f (expected %.6f +/- %.6f)\n", e.pass ? "ok" : "FAIL",
                  e.spec.nature.c_str(), e.spec.test.c_str(), e.spec.quantity.c_str(), e.observed, e.spec.value,
                  e.spec.tolerance);
    os << line;
  }
}

}  // namespace expertcmp
