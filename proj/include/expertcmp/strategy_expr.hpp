#pragma once

// Textual constructors for forecasting strategies, used by scenario files.
//
//   iid(p)                   constant forecast p
//   dirac("01*")             deterministic prediction of 0 then 1 forever
//   recip(a, b)              forecast 1 - a/(t + b) in period t
//   first(p, S)              p on day one, then S
//   forced("11", n, S)       forced prefix for periods < n, then S
//   mix(w1: S1, w2: S2, ...) Bayesian mixture
//   claim1_f0(eps)           first(1 - eps, dirac("1*"))
//   claim1_f1()              dirac("1*")
//
// Numeric arguments may name a scenario parameter instead of a literal.

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "expertcmp/strategy.hpp"

namespace expertcmp {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(const std::string& text, const std::map<std::string, double>& params) : s_(text), params_(params) {}

  ForecastingStrategy parse() {
    auto f = strategy();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("strategy expression '" + s_ + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(s_[start]))) {
      pos_ = start;
      fail("expected a name");
    }
    return s_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      const auto at = pos_;
      const auto id = identifier();
      auto it = params_.find(id);
      if (it == params_.end()) {
        pos_ = at;
        fail("unknown parameter '" + id + "'");
      }
      return it->second;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string quoted() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected a quoted string");
    const auto close = s_.find('"', pos_ + 1);
    if (close == std::string::npos) fail("unterminated string");
    std::string v = s_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    return v;
  }

  std::size_t count() {
    const double v = number();
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) fail("expected a positive integer");
    return static_cast<std::size_t>(v);
  }

  template <class F>
  auto wrap(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ExpressionError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  ForecastingStrategy strategy() {
    const auto fn = identifier();
    expect('(');
    ForecastingStrategy out;
    if (fn == "iid") {
      const double p = number();
      out = wrap([&] { return iid_strategy(p); });
    } else if (fn == "dirac") {
      const auto seq = quoted();
      out = wrap([&] { return dirac_strategy(parse_sequence(seq)); });
    } else if (fn == "recip") {
      const double a = number();
      expect(',');
      const double b = number();
      if (!(b > 0.0)) fail("recip: b must be positive");
      out = time_varying_strategy(ReciprocalSchedule{a, b});
    } else if (fn == "first") {
      const double p = number();
      expect(',');
      auto then = strategy();
      out = wrap([&] { return first_period_strategy(p, then); });
    } else if (fn == "forced") {
      const auto word = quoted();
      expect(',');
      const auto n = count();
      expect(',');
      auto inner = strategy();
      out = wrap([&] { return prefix_forced_strategy(inner, parse_word(word), n); });
    } else if (fn == "mix") {
      std::vector<MixtureComponent> parts;
      do {
        const double w = number();
        expect(':');
        parts.push_back({w, strategy()});
      } while (accept(','));
      out = wrap([&] { return mixture_strategy(parts); });
    } else if (fn == "claim1_f0") {
      const double eps = number();
      out = wrap([&] { return claim1_pair(eps).first; });
    } else if (fn == "claim1_f1") {
      out = claim1_pair(0.5).second;
    } else {
      fail("unknown strategy '" + fn + "'");
    }
    expect(')');
    return out;
  }

  const std::string& s_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ForecastingStrategy parse_strategy(const std::string& text, const std::map<std::string, double>& params = {}) {
  return detail::ExprParser(text, params).parse();
}

}  // namespace expertcmp
