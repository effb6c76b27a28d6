#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace expertcmp {

/// Output of a comparison test: which expert is deemed better, if any.
enum class Verdict { expert0 = 0, inconclusive = 1, expert1 = 2 };

inline constexpr std::array<Verdict, 3> all_verdicts{Verdict::expert0, Verdict::inconclusive, Verdict::expert1};

/// The verdict with the experts' roles exchanged.
constexpr Verdict complement(Verdict v) {
  switch (v) {
    case Verdict::expert0: return Verdict::expert1;
    case Verdict::expert1: return Verdict::expert0;
    default: return Verdict::inconclusive;
  }
}

/// Numeric value in {0, 1/2, 1}.
constexpr double value(Verdict v) { return 0.5 * static_cast<double>(static_cast<int>(v)); }

constexpr std::size_t index(Verdict v) { return static_cast<std::size_t>(v); }

constexpr Verdict naming(int expert) { return expert == 0 ? Verdict::expert0 : Verdict::expert1; }

constexpr std::string_view name(Verdict v) {
  switch (v) {
    case Verdict::expert0: return "expert0";
    case Verdict::expert1: return "expert1";
    default: return "inconclusive";
  }
}

inline Verdict verdict_from_name(std::string_view s) {
  for (auto v : all_verdicts) {
    if (name(v) == s) return v;
  }
  throw std::invalid_argument("unknown verdict '" + std::string(s) + "'");
}

}  // namespace expertcmp
