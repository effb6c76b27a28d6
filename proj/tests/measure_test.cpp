#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "expertcmp/measure.hpp"
#include "expertcmp/strategy_expr.hpp"

using namespace expertcmp;

namespace {

std::vector<std::vector<Outcome>> all_words(std::size_t len) {
  std::vector<std::vector<Outcome>> out;
  for (std::size_t bits = 0; bits < (std::size_t{1} << len); ++bits) {
    std::vector<Outcome> w(len);
    for (std::size_t k = 0; k < len; ++k) w[k] = outcome_from(static_cast<int>((bits >> k) & 1u));
    out.push_back(w);
  }
  return out;
}

struct Pair {
  const char* f0;
  const char* f1;
};

const Pair pairs[] = {
    {"iid(0.3)", "iid(0.7)"},
    {"mix(0.5: iid(0.5), 0.5: dirac(\"1*\"))", "recip(1, 2)"},
    {"claim1_f0(0.1)", "claim1_f1()"},
    {"mix(0.2: iid(0.1), 0.8: recip(0.5, 1.5))", "first(0.4, iid(0.6))"},
    {"forced(\"10\", 3, iid(0.4))", "dirac(\"01*\")"},
};

}  // namespace

TEST(ExtendPlayPath, RecordsForecastsBeforeOutcome) {
  const auto half = iid_strategy(0.5);
  const auto p = extend_play_path(PlayPath{}, half, half, Outcome::one);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].outcome, Outcome::one);
  EXPECT_DOUBLE_EQ(p[0].forecast0.p1(), 0.5);
  EXPECT_DOUBLE_EQ(p[0].forecast1.p1(), 0.5);

  const auto d0 = dirac_strategy(parse_sequence("1*"));
  const auto d1 = dirac_strategy(parse_sequence("0001*"));
  const auto h3 = replay(parse_word("101"), d0, d1);
  const auto h4 = extend_play_path(h3, d0, d1, Outcome::zero);
  EXPECT_EQ(h3.size(), 3u);
  EXPECT_DOUBLE_EQ(h4[3].forecast0.p1(), 1.0);
  EXPECT_DOUBLE_EQ(h4[3].forecast1.p1(), 1.0);

  const auto b1 = time_varying_strategy(ReciprocalSchedule{1.0, 2.0});
  EXPECT_DOUBLE_EQ(extend_play_path(PlayPath{}, half, b1, Outcome::one)[0].forecast1.p1(), 2.0 / 3.0);
}

TEST(InducedProbability, Examples) {
  const auto half = iid_strategy(0.5);
  EXPECT_DOUBLE_EQ(induced_prefix_probability(half, half, 0, parse_word("101")), 0.125);
  EXPECT_DOUBLE_EQ(induced_prefix_probability(half, half, 1, parse_word("")), 1.0);
  const auto f0 = parse_strategy("mix(0.5: iid(0.5), 0.5: dirac(\"1*\"))");
  const auto f1 = parse_strategy("recip(1, 2)");
  EXPECT_NEAR(induced_prefix_probability(f0, f1, 0, parse_word("11")), 0.625, 1e-15);
  EXPECT_NEAR(induced_prefix_probability(f0, f1, 1, parse_word("11")), 0.5, 1e-15);
  EXPECT_EQ(induced_prefix_probability(f0, f1, 0, parse_word("0")), 0.25);
  EXPECT_EQ(induced_prefix_probability(dirac_strategy(parse_sequence("1*")), f1, 0, parse_word("10")), 0.0);
  EXPECT_THROW(induced_prefix_probability(f0, f1, 2, parse_word("1")), std::invalid_argument);
}

TEST(InducedProbability, ExampleMixtureOnAllOnes) {
  const auto f0 = parse_strategy("mix(0.5: iid(0.5), 0.5: dirac(\"1*\"))");
  const auto f1 = parse_strategy("recip(1, 2)");
  for (std::size_t t = 1; t <= 60; ++t) {
    const std::vector<Outcome> ones(t, Outcome::one);
    const double want0 = 0.5 + 0.5 * std::ldexp(1.0, -static_cast<int>(t));
    const double want1 = 2.0 / (static_cast<double>(t) + 2.0);  // telescoping product
    EXPECT_NEAR(induced_prefix_probability(f0, f1, 0, ones) / want0, 1.0, 1e-12) << t;
    EXPECT_NEAR(induced_prefix_probability(f0, f1, 1, ones) / want1, 1.0, 1e-12) << t;
  }
}

TEST(InducedProbability, PrefixConsistencyAndNormalization) {
  for (const auto& pr : pairs) {
    const auto f0 = parse_strategy(pr.f0);
    const auto f1 = parse_strategy(pr.f1);
    for (int i : {0, 1}) {
      for (std::size_t len = 0; len <= 7; ++len) {
        double total = 0.0;
        for (const auto& w : all_words(len)) {
          const double pw = induced_prefix_probability(f0, f1, i, w);
          total += pw;
          // One-step consistency: P(w o) = P(w) * f_i(h(w))[o], and the two extensions sum to P(w).
          const auto h = replay(w, f0, f1);
          const Forecast fi = i == 0 ? f0(h) : f1(h);
          double ext = 0.0;
          for (auto o : {Outcome::zero, Outcome::one}) {
            auto wo = w;
            wo.push_back(o);
            const double pwo = induced_prefix_probability(f0, f1, i, wo);
            EXPECT_NEAR(pwo, pw * fi.prob(o), 1e-12 * std::max(pw, 1e-300)) << pr.f0 << " " << to_string(wo);
            ext += pwo;
          }
          EXPECT_NEAR(ext, pw, 1e-12) << pr.f0 << " " << to_string(w);
        }
        EXPECT_NEAR(total, 1.0, 1e-12) << pr.f0 << " expert " << i << " length " << len;
      }
    }
  }
}

TEST(PathLogProbability, MatchesInducedProbability) {
  const auto f0 = iid_strategy(0.3);
  const auto f1 = time_varying_strategy(ReciprocalSchedule{});
  const auto w = parse_word("1101001");
  const auto path = replay(w, f0, f1);
  for (int i : {0, 1}) {
    EXPECT_NEAR(path_log_probability(path, i).value(), induced_prefix_probability(f0, f1, i, w), 1e-15);
  }
  const auto z = path_log_probability(replay(parse_word("0"), dirac_strategy(parse_sequence("1*")), f1), 0);
  EXPECT_TRUE(z.zero);
  EXPECT_EQ(z.value(), 0.0);
}

TEST(SamplePath, DiracNatureIsDeterministic) {
  const auto ones = dirac_strategy(parse_sequence("1*"));
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const auto p = sample_path(ones, iid_strategy(0.5), ExpertMeasure{0}, 50, seed);
    EXPECT_EQ(to_string(p.outcomes()), std::string(50, '1'));
  }
  const auto [c0, c1] = claim1_pair(0.1);
  const auto p = sample_path(c0, c1, ExpertMeasure{1}, 30, 7);
  EXPECT_EQ(to_string(p.outcomes()), std::string(30, '1'));
}

TEST(SamplePath, SameSeedSamePath) {
  const auto f0 = parse_strategy("mix(0.5: iid(0.5), 0.5: iid(0.3))");
  const auto f1 = iid_strategy(0.5);
  EXPECT_EQ(sample_path(f0, f1, ExpertMeasure{0}, 300, 42), sample_path(f0, f1, ExpertMeasure{0}, 300, 42));
  EXPECT_NE(sample_path(f0, f1, ExpertMeasure{0}, 300, 42), sample_path(f0, f1, ExpertMeasure{0}, 300, 43));
  EXPECT_THROW(sample_path(f0, f1, ExpertMeasure{0}, 0, 42), std::invalid_argument);
}

TEST(SamplePath, ClaimOneFirstOutcomeFrequency) {
  const auto [f0, f1] = claim1_pair(0.1);
  int ones = 0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) ones += to_int(sample_path(f0, f1, ExpertMeasure{0}, 1, trial_seed(11, s))[0].outcome);
  EXPECT_NEAR(ones / static_cast<double>(n), 0.9, 0.01);
}

TEST(SamplePath, ExternalNatureDrivesOutcomes) {
  const auto p = sample_path(iid_strategy(0.9), iid_strategy(0.9), ExternalNature{iid_strategy(0.0)}, 40, 3);
  EXPECT_EQ(to_string(p.outcomes()), std::string(40, '0'));
}

TEST(SamplePath, AverageRealizationConcentrates) {
  const auto f = iid_strategy(0.3);
  int inside = 0;
  for (int s = 0; s < 200; ++s) {
    const double a = average_realization(sample_path(f, f, ExpertMeasure{0}, 2000, trial_seed(5, s)));
    if (std::abs(a - 0.3) <= 0.03) ++inside;
  }
  EXPECT_GE(inside, 198);
}
