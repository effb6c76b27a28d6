// Randomized invariants over generated strategy pairs and paths.
#include <gtest/gtest.h>

#include <random>
#include <string>

#include "expertcmp/harness.hpp"
#include "expertcmp/strategy_expr.hpp"

using namespace expertcmp;

namespace {

// Inside a mixture every leaf keeps both outcomes possible, so the
// conditional forecast stays defined on every path.
std::string random_expr(std::mt19937_64& g, int depth = 0, bool soft = false) {
  std::uniform_int_distribution<int> pick(0, depth < 2 ? 5 : 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto prob = [&] {
    // Occasionally deterministic, to exercise the zero-factor flags.
    const double r = soft ? 1.0 : u(g);
    if (r < 0.1) return std::string("0");
    if (r < 0.2) return std::string("1");
    return std::to_string(0.05 + 0.9 * u(g));
  };
  int kind = pick(g);
  if (soft && (kind == 1 || kind == 4)) kind = 2;
  switch (kind) {
    case 0:
      return "iid(" + prob() + ")";
    case 1:
      return u(g) < 0.5 ? "dirac(\"1*\")" : "dirac(\"01*\")";
    case 2:
      return "recip(1, " + std::to_string(2 + static_cast<int>(u(g) * 3)) + ")";
    case 3:
      return "first(" + prob() + ", " + random_expr(g, depth + 1, soft) + ")";
    case 4:
      return "forced(\"" + std::string(u(g) < 0.5 ? "11" : "01") + "\", 3, " + random_expr(g, depth + 1) + ")";
    default: {
      const double w = 0.1 + 0.8 * u(g);
      return "mix(" + std::to_string(w) + ": " + random_expr(g, depth + 1, true) + ", " + std::to_string(1 - w) +
             ": " + random_expr(g, depth + 1, true) + ")";
    }
  }
}

TestConfig config(TestKind k, std::size_t burn_in) {
  TestConfig t;
  t.kind = k;
  t.burn_in = burn_in;
  t.crosscal = {5, 3, 0.05};
  return t;
}

constexpr TestKind all_kinds[] = {TestKind::derivative, TestKind::likelihood_ratio, TestKind::cross_calibration,
                                  TestKind::ideal_iid, TestKind::nontail_example};

}  // namespace

TEST(Properties, AnonymityOnRandomPairs) {
  std::mt19937_64 g(20261018);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const auto e0 = random_expr(g);
    const auto e1 = random_expr(g);
    const auto f0 = parse_strategy(e0);
    const auto f1 = parse_strategy(e1);
    const std::size_t horizon = 1 + g() % 60;
    const auto nature = ExternalNature{iid_strategy(0.5)};
    const auto path = sample_path(f0, f1, nature, horizon, g());
    for (auto k : all_kinds) {
      const auto t = config(k, std::min<std::size_t>(5, horizon - 1));
      EXPECT_TRUE(check_anonymity(t, f0, f1, path)) << name(k) << " " << e0 << " vs " << e1;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1500);
}

TEST(Properties, IdenticalExpertsNeverSeparated) {
  std::mt19937_64 g(7);
  for (int i = 0; i < 200; ++i) {
    const auto e = random_expr(g);
    const auto f = parse_strategy(e);
    const std::size_t horizon = 2 + g() % 60;
    const auto path = sample_path(f, f, ExternalNature{iid_strategy(0.5)}, horizon, g());
    for (auto k : all_kinds) {
      const auto r = evaluate_test(config(k, 1), path);
      EXPECT_EQ(r.verdict, Verdict::inconclusive) << name(k) << " " << e;
    }
  }
}

TEST(Properties, SamplingIsAFunctionOfTheSeed) {
  std::mt19937_64 g(99);
  for (int i = 0; i < 100; ++i) {
    const auto f0 = parse_strategy(random_expr(g));
    const auto f1 = parse_strategy(random_expr(g));
    const std::uint64_t seed = g();
    const auto a = sample_path(f0, f1, ExternalNature{iid_strategy(0.4)}, 40, seed);
    const auto b = sample_path(f0, f1, ExternalNature{iid_strategy(0.4)}, 40, seed);
    EXPECT_EQ(a.outcomes(), b.outcomes());
  }
}

TEST(Properties, ReplayReproducesForecasts) {
  std::mt19937_64 g(5);
  for (int i = 0; i < 100; ++i) {
    const auto f0 = parse_strategy(random_expr(g));
    const auto f1 = parse_strategy(random_expr(g));
    const auto p = sample_path(f0, f1, ExternalNature{iid_strategy(0.5)}, 30, g());
    const auto q = replay(p.outcomes(), f0, f1);
    ASSERT_EQ(p.size(), q.size());
    for (std::size_t t = 0; t < p.size(); ++t) {
      EXPECT_EQ(p[t].forecast0.p1(), q[t].forecast0.p1());
      EXPECT_EQ(p[t].forecast1.p1(), q[t].forecast1.p1());
    }
  }
}

TEST(Properties, LogRatioIsSumOfLogFactors) {
  std::mt19937_64 g(11);
  for (int i = 0; i < 100; ++i) {
    const auto f0 = parse_strategy(random_expr(g));
    const auto f1 = parse_strategy(random_expr(g));
    const auto p = sample_path(f0, f1, ExternalNature{iid_strategy(0.5)}, 50, g());
    const auto s = likelihood_of(p);
    double sum = 0.0;
    bool nz = false, dz = false;
    for (const auto& e : p.entries()) {
      const double a = e.forecast0.prob(e.outcome), b = e.forecast1.prob(e.outcome);
      dz |= a == 0.0;
      nz |= b == 0.0;
      if (a > 0.0 && b > 0.0) sum += std::log(b) - std::log(a);
    }
    EXPECT_EQ(s.numerator_zero, nz);
    EXPECT_EQ(s.denominator_zero, dz);
    EXPECT_NEAR(s.log_ratio, sum, 1e-9 * (1.0 + std::abs(sum)));
  }
}

TEST(Properties, VerdictCountsConserveTrials) {
  std::mt19937_64 g(3);
  for (int i = 0; i < 10; ++i) {
    Scenario s;
    s.f0 = parse_strategy(random_expr(g));
    s.f1 = parse_strategy(random_expr(g));
    s.nature = ExternalNature{iid_strategy(0.5)};
    s.horizon = 30;
    s.trials = 50 + g() % 50;
    s.master_seed = g();
    for (auto k : all_kinds) s.tests.push_back(config(k, 5));
    const auto rep = estimate_verdict_distribution(s);
    for (const auto& t : rep.tests) EXPECT_EQ(t.all.total(), s.trials);
  }
}

TEST(Properties, IdentitySurgeryOnRandomPairs) {
  std::mt19937_64 g(17);
  for (int i = 0; i < 30; ++i) {
    TailCheck c;
    c.f0 = parse_strategy(random_expr(g));
    c.f1 = parse_strategy(random_expr(g));
    c.n = 1;
    c.horizon = 40;
    c.trials = 20;
    c.seed = g();
    for (auto k : all_kinds) {
      c.test = config(k, 5);
      EXPECT_EQ(check_tail(c).disagreement.count, 0u) << name(k);
    }
  }
}

TEST(Properties, CrossCalibrationConservesCounts) {
  std::mt19937_64 g(23);
  for (int i = 0; i < 100; ++i) {
    const auto f0 = parse_strategy(random_expr(g));
    const auto f1 = parse_strategy(random_expr(g));
    const auto p = sample_path(f0, f1, ExternalNature{iid_strategy(0.5)}, 40, g());
    const auto st = cross_calibration_of(p, 5);
    std::size_t total = 0;
    for (const auto& [key, c] : st.active_profiles()) total += c.nu;
    EXPECT_EQ(st.t(), p.size());
    EXPECT_EQ(total, p.size());
  }
}
