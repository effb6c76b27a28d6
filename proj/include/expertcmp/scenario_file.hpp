#pragma once

// Scenario files: YAML documents describing a batch of trials.
//
//   name: claim1
//   description: ...
//   reproduces: Claim 1
//   params: {epsilon: 0.1}
//   experts: {f0: claim1_f0(epsilon), f1: claim1_f1()}
//   nature: [expert0]                 # expert0 | expert1 | "external:<strategy>"
//   run: {mode: estimate, horizon: 100, trials: 10000, seed: 7}
//   tests:
//     - {kind: likelihood_ratio, burn_in: 10}
//     - {kind: derivative, lambda: ln(100), burn_in: 10}
//   event: all_ones                   # or {prefix: "0"}
//   surgery: {forced: "111", n: 4}    # mode: tail only
//   expect:
//     - {nature: expert0, test: likelihood_ratio, quantity: expert1, value: 0.9, tolerance: 0.01}
//   output: {trials_jsonl: false, trajectory_csv: true, profiles_csv: true, trace_trial: 0}
//
// Every key is validated before any sampling; unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "expertcmp/comparison.hpp"
#include "expertcmp/harness.hpp"
#include "expertcmp/strategy_expr.hpp"

namespace expertcmp {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExpectationSpec {
  std::string nature;  ///< e.g. "expert0"
  std::string test;    ///< test name, or "a,b" for disagreement
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
};

struct OutputSpec {
  bool trials_jsonl = false;
  bool trajectory_csv = false;
  bool profiles_csv = false;
  std::size_t trace_trial = 0;
};

struct ScenarioFile {
  std::string name;
  std::string description;
  std::string reproduces;
  std::map<std::string, double> params;
  std::string f0;
  std::string f1;
  std::vector<std::string> natures{"expert0"};
  std::string mode = "estimate";  ///< estimate | tail
  std::size_t horizon = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::vector<TestConfig> tests;
  std::optional<EventSpec> event;
  std::string surgery_forced;
  std::size_t surgery_n = 1;
  std::vector<ExpectationSpec> expect;
  OutputSpec output;
};

namespace detail {

inline std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null() || m.line < 0) return " (set on the command line)";
  return " (line " + std::to_string(m.line + 1) + ")";
}

[[noreturn]] inline void bad(const std::string& key, const YAML::Node& n, const std::string& what) {
  throw ScenarioError("key '" + key + "'" + where(n) + ": " + what);
}

inline void check_keys(const YAML::Node& map, const std::string& ctx, std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) bad(ctx, map, "expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : map) {
    const auto k = kv.first.as<std::string>();
    if (!ok.count(k)) bad(ctx.empty() ? k : ctx + "." + k, kv.first, "unknown key");
  }
}

inline std::string scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) bad(key, n, "expected a scalar value");
  return n.Scalar();
}

/// A real number, or ln(x).
inline double real(const YAML::Node& n, const std::string& key) {
  std::string s = scalar(n, key);
  std::size_t used = 0;
  try {
    if (s.rfind("ln(", 0) == 0 && s.back() == ')') {
      const std::string inner = s.substr(3, s.size() - 4);
      const double x = std::stod(inner, &used);
      if (used != inner.size() || !(x > 0.0)) throw std::invalid_argument(s);
      return std::log(x);
    }
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad(key, n, "expected a number or ln(<number>), got '" + s + "'");
  }
}

inline std::uint64_t uinteger(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    bad(key, n, "expected a nonnegative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    bad(key, n, "integer out of range");
  }
}

inline bool boolean(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  if (s == "true") return true;
  if (s == "false") return false;
  bad(key, n, "expected true or false, got '" + s + "'");
}

inline TestConfig parse_test(const YAML::Node& n, const std::string& key) {
  if (!n.IsMap() || !n["kind"]) bad(key, n, "each test needs a 'kind'");
  TestConfig t;
  try {
    t.kind = test_kind_from_name(scalar(n["kind"], key + ".kind"));
  } catch (const std::invalid_argument& e) {
    bad(key + ".kind", n["kind"], e.what());
  }
  switch (t.kind) {
    case TestKind::derivative:
    case TestKind::likelihood_ratio:
    case TestKind::nontail_example:
      check_keys(n, key, {"kind", "lambda", "burn_in"});
      if (n["lambda"]) t.lambda = real(n["lambda"], key + ".lambda");
      if (n["burn_in"]) t.burn_in = uinteger(n["burn_in"], key + ".burn_in");
      break;
    case TestKind::cross_calibration:
      check_keys(n, key, {"kind", "intervals", "min_count", "slack"});
      if (n["intervals"]) t.crosscal.intervals = static_cast<int>(uinteger(n["intervals"], key + ".intervals"));
      if (n["min_count"]) t.crosscal.min_count = uinteger(n["min_count"], key + ".min_count");
      if (n["slack"]) t.crosscal.slack = real(n["slack"], key + ".slack");
      break;
    case TestKind::ideal_iid:
      check_keys(n, key, {"kind", "tolerance"});
      if (n["tolerance"]) t.iid_tolerance = real(n["tolerance"], key + ".tolerance");
      break;
  }
  return t;
}

inline const std::set<std::string>& expectation_quantities() {
  static const std::set<std::string> q{"expert0",
                                       "inconclusive",
                                       "expert1",
                                       "anomalies",
                                       "given_event.expert0",
                                       "given_event.inconclusive",
                                       "given_event.expert1",
                                       "event",
                                       "disagreement",
                                       "tail_disagreement"};
  return q;
}

// Sections addressable by a bare override key, in lookup order.
inline constexpr const char* override_sections[] = {"params", "run", "experts", "surgery", "output"};

}  // namespace detail

/// Applies `key=value` overrides in place. Dotted keys address nested entries
/// (tests.0.lambda); a bare key resolves to params.<key> if that parameter
/// exists, else to the unique section holding it.
inline void apply_overrides(YAML::Node& root, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError("override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);

    std::vector<std::string> path;
    if (key.find('.') == std::string::npos) {
      std::vector<std::string> hits;
      for (const char* sec : detail::override_sections) {
        if (root[sec] && root[sec].IsMap() && root[sec][key]) hits.emplace_back(sec);
      }
      if (hits.empty()) {
        if (root[key] && root[key].IsScalar()) {
          path = {key};
        } else {
          throw ScenarioError("override key '" + key + "' matches no parameter or setting");
        }
      } else if (hits.size() > 1 && hits.front() != "params") {
        throw ScenarioError("override key '" + key + "' is ambiguous; qualify it (e.g. " + hits[0] + "." + key + ")");
      } else {
        path = {hits.front(), key};
      }
    } else {
      std::size_t start = 0;
      while (true) {
        const auto dot = key.find('.', start);
        path.push_back(key.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
    }

    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      YAML::Node next;
      if (cur.IsSequence()) {
        std::size_t idx = 0;
        try {
          idx = std::stoul(path[i]);
        } catch (const std::exception&) {
          throw ScenarioError("override '" + key + "': '" + path[i] + "' is not a list index");
        }
        if (idx >= cur.size()) throw ScenarioError("override '" + key + "': index out of range");
        next = cur[idx];
      } else {
        next = cur[path[i]];
      }
      cur.reset(next);
    }
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(path.back());
      } catch (const std::exception&) {
        throw ScenarioError("override '" + key + "': '" + path.back() + "' is not a list index");
      }
      if (idx >= cur.size()) throw ScenarioError("override '" + key + "': index out of range");
      cur[idx] = value;
    } else {
      cur[path.back()] = value;
    }
  }
}

/// Validates a parsed document. Strategy expressions are compiled here, so
/// every error surfaces before sampling starts.
inline ScenarioFile parse_scenario(const YAML::Node& root) {
  using namespace detail;
  check_keys(root, "", {"name", "description", "reproduces", "params", "experts", "nature", "run", "tests", "event",
                        "surgery", "expect", "output"});
  ScenarioFile f;
  if (!root["name"]) bad("name", root, "is required");
  f.name = scalar(root["name"], "name");
  if (root["description"]) f.description = scalar(root["description"], "description");
  if (root["reproduces"]) f.reproduces = scalar(root["reproduces"], "reproduces");

  if (const auto p = root["params"]) {
    if (!p.IsMap()) bad("params", p, "expected a mapping");
    for (const auto& kv : p) {
      const auto k = kv.first.as<std::string>();
      f.params[k] = real(kv.second, "params." + k);
    }
  }

  const auto ex = root["experts"];
  if (!ex) bad("experts", root, "is required");
  check_keys(ex, "experts", {"f0", "f1"});
  if (!ex["f0"] || !ex["f1"]) bad("experts", ex, "both f0 and f1 are required");
  f.f0 = scalar(ex["f0"], "experts.f0");
  f.f1 = scalar(ex["f1"], "experts.f1");
  for (const char* k : {"f0", "f1"}) {
    try {
      parse_strategy(scalar(ex[k], std::string("experts.") + k), f.params);
    } catch (const std::invalid_argument& e) {
      bad(std::string("experts.") + k, ex[k], e.what());
    }
  }

  if (const auto n = root["nature"]) {
    f.natures.clear();
    auto add = [&](const YAML::Node& item) {
      const auto s = scalar(item, "nature");
      if (s != "expert0" && s != "expert1") {
        if (s.rfind("external:", 0) != 0) bad("nature", item, "expected expert0, expert1 or external:<strategy>");
        try {
          parse_strategy(s.substr(9), f.params);
        } catch (const std::invalid_argument& e) {
          bad("nature", item, e.what());
        }
      }
      f.natures.push_back(s);
    };
    if (n.IsSequence()) {
      for (const auto& item : n) add(item);
    } else {
      add(n);
    }
    if (f.natures.empty()) bad("nature", n, "at least one nature is required");
  }

  if (const auto r = root["run"]) {
    check_keys(r, "run", {"mode", "horizon", "trials", "seed"});
    if (r["mode"]) {
      f.mode = scalar(r["mode"], "run.mode");
      if (f.mode != "estimate" && f.mode != "tail") bad("run.mode", r["mode"], "expected estimate or tail");
    }
    if (r["horizon"]) f.horizon = uinteger(r["horizon"], "run.horizon");
    if (r["trials"]) f.trials = uinteger(r["trials"], "run.trials");
    if (r["seed"]) f.seed = uinteger(r["seed"], "run.seed");
    if (f.horizon < 1) bad("run.horizon", r["horizon"], "must be at least 1");
    if (f.trials < 1) bad("run.trials", r["trials"], "must be at least 1");
  }

  const auto ts = root["tests"];
  if (!ts || !ts.IsSequence() || ts.size() == 0) bad("tests", ts ? ts : root, "a nonempty list of tests is required");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto key = "tests." + std::to_string(i);
    auto t = parse_test(ts[i], key);
    try {
      t.validate(f.horizon);
    } catch (const std::invalid_argument& e) {
      bad(key, ts[i], e.what());
    }
    f.tests.push_back(t);
  }

  if (const auto e = root["event"]) {
    if (e.IsScalar()) {
      if (e.Scalar() != "all_ones") bad("event", e, "expected all_ones or {prefix: \"...\"}");
      f.event = EventSpec::all_ones_event();
    } else {
      check_keys(e, "event", {"prefix"});
      if (!e["prefix"]) bad("event", e, "expected all_ones or {prefix: \"...\"}");
      try {
        f.event = EventSpec::cylinder(parse_word(scalar(e["prefix"], "event.prefix")));
      } catch (const std::invalid_argument& err) {
        bad("event.prefix", e["prefix"], err.what());
      }
    }
  }

  if (const auto s = root["surgery"]) {
    check_keys(s, "surgery", {"forced", "n"});
    if (s["forced"]) f.surgery_forced = scalar(s["forced"], "surgery.forced");
    if (s["n"]) f.surgery_n = uinteger(s["n"], "surgery.n");
    try {
      parse_word(f.surgery_forced);
    } catch (const std::invalid_argument& err) {
      bad("surgery.forced", s["forced"], err.what());
    }
    if (f.surgery_n < 1) bad("surgery.n", s["n"], "must be positive");
    if (f.surgery_forced.size() + 1 < f.surgery_n) bad("surgery.n", s["n"], "forced prefix shorter than n-1");
    if (f.surgery_n > f.horizon) bad("surgery.n", s["n"], "must not exceed the horizon");
  } else if (f.mode == "tail") {
    bad("surgery", root, "is required when run.mode is tail");
  }

  if (const auto xs = root["expect"]) {
    if (!xs.IsSequence()) bad("expect", xs, "expected a list");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto key = "expect." + std::to_string(i);
      const auto& x = xs[i];
      check_keys(x, key, {"nature", "test", "quantity", "value", "tolerance"});
      ExpectationSpec spec;
      spec.nature = x["nature"] ? scalar(x["nature"], key + ".nature") : f.natures.front();
      if (!x["test"] || !x["quantity"] || !x["value"]) bad(key, x, "test, quantity and value are required");
      spec.test = scalar(x["test"], key + ".test");
      spec.quantity = scalar(x["quantity"], key + ".quantity");
      spec.value = real(x["value"], key + ".value");
      spec.tolerance = x["tolerance"] ? real(x["tolerance"], key + ".tolerance") : 0.0;
      if (!expectation_quantities().count(spec.quantity)) bad(key + ".quantity", x["quantity"], "unknown quantity");
      bool known_nature = false;
      for (const auto& n : f.natures) known_nature |= n == spec.nature;
      if (!known_nature) bad(key + ".nature", x, "nature '" + spec.nature + "' is not run by this scenario");
      f.expect.push_back(spec);
    }
  }

  if (const auto o = root["output"]) {
    check_keys(o, "output", {"trials_jsonl", "trajectory_csv", "profiles_csv", "trace_trial"});
    if (o["trials_jsonl"]) f.output.trials_jsonl = boolean(o["trials_jsonl"], "output.trials_jsonl");
    if (o["trajectory_csv"]) f.output.trajectory_csv = boolean(o["trajectory_csv"], "output.trajectory_csv");
    if (o["profiles_csv"]) f.output.profiles_csv = boolean(o["profiles_csv"], "output.profiles_csv");
    if (o["trace_trial"]) f.output.trace_trial = uinteger(o["trace_trial"], "output.trace_trial");
    if (f.output.trace_trial >= f.trials) bad("output.trace_trial", o["trace_trial"], "must be below run.trials");
  }
  return f;
}

/// Loads YAML text, applies overrides, validates.
inline ScenarioFile load_scenario_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ScenarioError("scenario must be a YAML mapping");
  apply_overrides(root, overrides);
  return parse_scenario(root);
}

/// Canonical JSON form; also valid input for load_scenario_text.
inline nlohmann::ordered_json to_json(const ScenarioFile& f) {
  nlohmann::ordered_json j;
  j["name"] = f.name;
  if (!f.description.empty()) j["description"] = f.description;
  if (!f.reproduces.empty()) j["reproduces"] = f.reproduces;
  if (!f.params.empty()) {
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : f.params) j["params"][k] = v;
  }
  j["experts"] = {{"f0", f.f0}, {"f1", f.f1}};
  j["nature"] = f.natures;
  j["run"] = {{"mode", f.mode}, {"horizon", f.horizon}, {"trials", f.trials}, {"seed", f.seed}};
  j["tests"] = nlohmann::ordered_json::array();
  for (const auto& t : f.tests) {
    nlohmann::ordered_json tj;
    tj["kind"] = std::string(name(t.kind));
    switch (t.kind) {
      case TestKind::derivative:
      case TestKind::likelihood_ratio:
      case TestKind::nontail_example:
        tj["lambda"] = t.lambda;
        tj["burn_in"] = t.burn_in;
        break;
      case TestKind::cross_calibration:
        tj["intervals"] = t.crosscal.intervals;
        tj["min_count"] = t.crosscal.min_count;
        tj["slack"] = t.crosscal.slack;
        break;
      case TestKind::ideal_iid: tj["tolerance"] = t.iid_tolerance; break;
    }
    j["tests"].push_back(tj);
  }
  if (f.event) {
    if (f.event->kind == EventSpec::Kind::all_ones) {
      j["event"] = "all_ones";
    } else {
      j["event"] = {{"prefix", to_string(f.event->prefix)}};
    }
  }
  if (f.mode == "tail") j["surgery"] = {{"forced", f.surgery_forced}, {"n", f.surgery_n}};
  if (!f.expect.empty()) {
    j["expect"] = nlohmann::ordered_json::array();
    for (const auto& x : f.expect) {
      j["expect"].push_back({{"nature", x.nature},
                             {"test", x.test},
                             {"quantity", x.quantity},
                             {"value", x.value},
                             {"tolerance", x.tolerance}});
    }
  }
  j["output"] = {{"trials_jsonl", f.output.trials_jsonl},
                 {"trajectory_csv", f.output.trajectory_csv},
                 {"profiles_csv", f.output.profiles_csv},
                 {"trace_trial", f.output.trace_trial}};
  return j;
}

inline NatureSpec nature_from(const std::string& s, const std::map<std::string, double>& params) {
  if (s == "expert0") return ExpertMeasure{0};
  if (s == "expert1") return ExpertMeasure{1};
  return ExternalNature{parse_strategy(s.substr(9), params)};
}

/// Harness scenario for one of the file's natures.
inline Scenario make_scenario(const ScenarioFile& f, const std::string& nature, unsigned workers = 0) {
  Scenario s;
  s.name = f.name;
  s.f0 = parse_strategy(f.f0, f.params);
  s.f1 = parse_strategy(f.f1, f.params);
  s.nature = nature_from(nature, f.params);
  s.horizon = f.horizon;
  s.trials = f.trials;
  s.master_seed = f.seed;
  s.tests = f.tests;
  s.event = f.event;
  s.workers = workers;
  return s;
}

}  // namespace expertcmp
