#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace expertcmp {

/// A binary outcome drawn by nature. The order zero < one is the natural one.
enum class Outcome : std::uint8_t { zero = 0, one = 1 };

inline Outcome flip(Outcome o) { return o == Outcome::one ? Outcome::zero : Outcome::one; }

inline int to_int(Outcome o) { return static_cast<int>(o); }

inline Outcome outcome_from(int v) {
  if (v != 0 && v != 1) throw std::invalid_argument("outcome must be 0 or 1, got " + std::to_string(v));
  return static_cast<Outcome>(v);
}

/// A probability distribution over {0, 1}, stored as the mass on outcome 1.
class Forecast {
 public:
  constexpr Forecast() = default;

  explicit Forecast(double p1) : p1_(p1) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) {
      throw std::invalid_argument("forecast probability outside [0,1]: " + std::to_string(p1));
    }
  }

  double p1() const { return p1_; }

  /// Mass assigned to `o`.
  double prob(Outcome o) const { return o == Outcome::one ? p1_ : 1.0 - p1_; }

  friend bool operator==(const Forecast&, const Forecast&) = default;

 private:
  double p1_ = 0.5;
};

/// One period of play: both forecasts, announced before `outcome` was drawn.
struct HistoryEntry {
  Outcome outcome = Outcome::zero;
  Forecast forecast0;
  Forecast forecast1;

  const Forecast& forecast(int expert) const { return expert == 0 ? forecast0 : forecast1; }

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

using History = std::span<const HistoryEntry>;

/// Realized outcomes interleaved with the experts' forecasts.
class PlayPath {
 public:
  PlayPath() = default;
  explicit PlayPath(std::vector<HistoryEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const HistoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<HistoryEntry>& entries() const { return entries_; }
  History view() const { return entries_; }

  /// First n entries, 0 <= n <= size().
  History prefix(std::size_t n) const {
    if (n > entries_.size()) throw std::out_of_range("prefix length exceeds path length");
    return History(entries_).first(n);
  }

  /// Entries from index n on.
  History suffix(std::size_t n) const {
    if (n > entries_.size()) throw std::out_of_range("suffix start exceeds path length");
    return History(entries_).subspan(n);
  }

  std::vector<Outcome> outcomes() const {
    std::vector<Outcome> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.outcome);
    return out;
  }

  void push_back(const HistoryEntry& e) { entries_.push_back(e); }
  void reserve(std::size_t n) { entries_.reserve(n); }

  friend bool operator==(const PlayPath&, const PlayPath&) = default;

 private:
  std::vector<HistoryEntry> entries_;
};

/// An infinite outcome sequence of the form prefix followed by `tail` repeated forever.
struct EventuallyConstant {
  std::vector<Outcome> prefix;
  Outcome tail = Outcome::one;

  /// Symbol at 0-based position `index`.
  Outcome at(std::size_t index) const { return index < prefix.size() ? prefix[index] : tail; }

  friend bool operator==(const EventuallyConstant&, const EventuallyConstant&) = default;
};

/// Parses strings like "1*" or "01*" (the symbol before '*' repeats forever).
inline EventuallyConstant parse_sequence(const std::string& text) {
  if (text.size() < 2 || text.back() != '*') {
    throw std::invalid_argument("sequence '" + text + "' must end with '<symbol>*'");
  }
  EventuallyConstant seq;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') throw std::invalid_argument("sequence '" + text + "' has a non-binary symbol");
    seq.prefix.push_back(c == '1' ? Outcome::one : Outcome::zero);
  }
  seq.tail = seq.prefix.back();
  seq.prefix.pop_back();
  return seq;
}

inline std::string to_string(const EventuallyConstant& seq) {
  std::string s;
  for (auto o : seq.prefix) s += o == Outcome::one ? '1' : '0';
  s += seq.tail == Outcome::one ? '1' : '0';
  s += '*';
  return s;
}

/// Parses a finite word such as "0110"; the empty string is the empty word.
inline std::vector<Outcome> parse_word(const std::string& text) {
  std::vector<Outcome> out;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("word '" + text + "' has a non-binary symbol");
    out.push_back(c == '1' ? Outcome::one : Outcome::zero);
  }
  return out;
}

inline std::string to_string(std::span<const Outcome> word) {
  std::string s;
  for (auto o : word) s += o == Outcome::one ? '1' : '0';
  return s;
}

/// Fraction of ones in a nonempty outcome sequence.
inline double average_realization(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("average_realization of an empty sequence");
  std::size_t ones = 0;
  for (auto o : outcomes) ones += o == Outcome::one ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(outcomes.size());
}

inline double average_realization(const PlayPath& path) { return average_realization(path.outcomes()); }

}  // namespace expertcmp
