#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expertcmp/core.hpp"

namespace expertcmp {

/// Raised when a strategy's conditional forecast is undefined because the
/// history has probability zero under it (e.g. every mixture component was
/// ruled out by the realized outcomes).
class MeasureZeroHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequential evaluator of a strategy. Each call to next() must pass a
/// history that extends the one passed to the previous call; this lets
/// stateful strategies (mixtures) update incrementally.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Forecast next(History history) = 0;
};

class StrategyModel {
 public:
  virtual ~StrategyModel() = default;
  virtual std::unique_ptr<Predictor> predictor() const = 0;
  /// Constructor expression that rebuilds this strategy (see strategy_expr.hpp).
  virtual std::string expression() const = 0;
};

/// A pure forecasting strategy: maps a finite play-path prefix to a forecast.
/// Immutable and cheap to copy; safe to share between threads.
class ForecastingStrategy {
 public:
  ForecastingStrategy() = default;
  explicit ForecastingStrategy(std::shared_ptr<const StrategyModel> model) : model_(std::move(model)) {}

  /// Forecast for the period following `history`.
  Forecast operator()(History history) const { return predictor()->next(history); }
  Forecast operator()(const PlayPath& path) const { return (*this)(path.view()); }

  std::unique_ptr<Predictor> predictor() const {
    if (!model_) throw std::logic_error("empty forecasting strategy");
    return model_->predictor();
  }

  std::string expression() const { return model_ ? model_->expression() : "<empty>"; }

  explicit operator bool() const { return static_cast<bool>(model_); }

 private:
  std::shared_ptr<const StrategyModel> model_;
};

namespace detail {

inline std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": probability outside [0,1]: " + fmt_real(p));
  }
}

// Strategies whose forecast is a plain function of the history.
template <class Fn>
class StatelessModel final : public StrategyModel {
 public:
  StatelessModel(Fn fn, std::string expr) : fn_(std::move(fn)), expr_(std::move(expr)) {}

  std::unique_ptr<Predictor> predictor() const override { return std::make_unique<P>(fn_); }
  std::string expression() const override { return expr_; }

 private:
  class P final : public Predictor {
   public:
    explicit P(const Fn& fn) : fn_(fn) {}
    Forecast next(History history) override { return fn_(history); }

   private:
    Fn fn_;
  };

  Fn fn_;
  std::string expr_;
};

template <class Fn>
ForecastingStrategy make_stateless(Fn fn, std::string expr) {
  return ForecastingStrategy(std::make_shared<StatelessModel<Fn>>(std::move(fn), std::move(expr)));
}

}  // namespace detail

/// Forecasts p for outcome 1 in every period.
inline ForecastingStrategy iid_strategy(double p) {
  detail::check_probability(p, "iid_strategy");
  return detail::make_stateless([f = Forecast(p)](History) { return f; },
                                "iid(" + detail::fmt_real(p) + ")");
}

/// Deterministically predicts `target`: probability 1 on its next symbol.
inline ForecastingStrategy dirac_strategy(EventuallyConstant target) {
  std::string expr = "dirac(\"" + to_string(target) + "\")";
  return detail::make_stateless(
      [t = std::move(target)](History h) { return Forecast(t.at(h.size()) == Outcome::one ? 1.0 : 0.0); },
      std::move(expr));
}

/// Schedule p(t) = 1 - a / (t + b), t = 1, 2, ... clamped to [0,1].
struct ReciprocalSchedule {
  double a = 1.0;
  double b = 2.0;

  double operator()(std::size_t t) const {
    const double v = 1.0 - a / (static_cast<double>(t) + b);
    return std::clamp(v, 0.0, 1.0);
  }
};

/// History-independent forecast schedule(t) at period t (1-based).
inline ForecastingStrategy time_varying_strategy(std::function<double(std::size_t)> schedule,
                                                 std::string expr) {
  return detail::make_stateless(
      [s = std::move(schedule)](History h) {
        const double p = s(h.size() + 1);
        detail::check_probability(p, "time_varying_strategy");
        return Forecast(p);
      },
      std::move(expr));
}

inline ForecastingStrategy time_varying_strategy(ReciprocalSchedule s) {
  return time_varying_strategy(s, "recip(" + detail::fmt_real(s.a) + ", " + detail::fmt_real(s.b) + ")");
}

/// Forecasts p on day one, then follows `then` on the actual history.
inline ForecastingStrategy first_period_strategy(double p, ForecastingStrategy then) {
  detail::check_probability(p, "first_period_strategy");

  class Model final : public StrategyModel {
   public:
    Model(double p, ForecastingStrategy then) : first_(p), then_(std::move(then)) {}
    std::unique_ptr<Predictor> predictor() const override {
      return std::make_unique<P>(first_, then_.predictor());
    }
    std::string expression() const override {
      return "first(" + detail::fmt_real(first_.p1()) + ", " + then_.expression() + ")";
    }

   private:
    class P final : public Predictor {
     public:
      P(Forecast first, std::unique_ptr<Predictor> then) : first_(first), then_(std::move(then)) {}
      Forecast next(History h) override { return h.empty() ? first_ : then_->next(h); }

     private:
      Forecast first_;
      std::unique_ptr<Predictor> then_;
    };

    Forecast first_;
    ForecastingStrategy then_;
  };

  return ForecastingStrategy(std::make_shared<Model>(p, std::move(then)));
}

/// Probability-1 on `forced` through period n-1, probability 0 on continuing it
/// once the history has left it, and `f` on the actual history from period n on.
inline ForecastingStrategy prefix_forced_strategy(ForecastingStrategy f, std::vector<Outcome> forced, std::size_t n) {
  if (n < 1) throw std::invalid_argument("prefix_forced_strategy: n must be positive");
  if (forced.size() + 1 < n) throw std::invalid_argument("prefix_forced_strategy: forced prefix shorter than n-1");
  forced.resize(n - 1);

  class Model final : public StrategyModel {
   public:
    Model(ForecastingStrategy f, std::vector<Outcome> forced) : f_(std::move(f)), forced_(std::move(forced)) {}
    std::unique_ptr<Predictor> predictor() const override { return std::make_unique<P>(forced_, f_.predictor()); }
    std::string expression() const override {
      return "forced(\"" + to_string(forced_) + "\", " + std::to_string(forced_.size() + 1) + ", " +
             f_.expression() + ")";
    }

   private:
    class P final : public Predictor {
     public:
      P(std::vector<Outcome> forced, std::unique_ptr<Predictor> inner)
          : forced_(std::move(forced)), inner_(std::move(inner)) {}

      Forecast next(History h) override {
        const std::size_t k = h.size();
        if (k >= forced_.size()) return inner_->next(h);
        // Incremental check: only entries beyond the ones already compared are new.
        for (; checked_ < k; ++checked_) {
          if (h[checked_].outcome != forced_[checked_]) on_path_ = false;
        }
        const Outcome target = forced_[k];
        const Outcome favoured = on_path_ ? target : flip(target);
        return Forecast(favoured == Outcome::one ? 1.0 : 0.0);
      }

     private:
      std::vector<Outcome> forced_;
      std::unique_ptr<Predictor> inner_;
      std::size_t checked_ = 0;
      bool on_path_ = true;
    };

    ForecastingStrategy f_;
    std::vector<Outcome> forced_;
  };

  return ForecastingStrategy(std::make_shared<Model>(std::move(f), std::move(forced)));
}

struct MixtureComponent {
  double weight = 0.0;
  ForecastingStrategy strategy;
};

/// Bayesian mixture. Components must forecast from the outcome history alone.
/// The posterior is kept in linear space, renormalized every step; components
/// whose posterior weight reaches 0 are dropped.
inline ForecastingStrategy mixture_strategy(std::vector<MixtureComponent> components) {
  if (components.empty()) throw std::invalid_argument("mixture_strategy: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("mixture_strategy: weights must be positive");
    if (!c.strategy) throw std::invalid_argument("mixture_strategy: empty component");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture_strategy: weights sum to " + detail::fmt_real(total) + ", not 1");
  }

  class Model final : public StrategyModel {
   public:
    explicit Model(std::vector<MixtureComponent> c) : components_(std::move(c)) {}

    std::unique_ptr<Predictor> predictor() const override { return std::make_unique<P>(components_); }

    std::string expression() const override {
      std::string s = "mix(";
      for (std::size_t k = 0; k < components_.size(); ++k) {
        if (k) s += ", ";
        s += detail::fmt_real(components_[k].weight) + ": " + components_[k].strategy.expression();
      }
      return s + ")";
    }

   private:
    class P final : public Predictor {
     public:
      explicit P(const std::vector<MixtureComponent>& components) {
        for (const auto& c : components) {
          weights_.push_back(c.weight);
          predictors_.push_back(c.strategy.predictor());
        }
        cached_.resize(components.size());
      }

      Forecast next(History h) override {
        if (h.size() < processed_) throw std::logic_error("mixture predictor: history went backwards");
        while (processed_ < h.size()) {
          refresh(h.first(processed_));
          const Outcome o = h[processed_].outcome;
          double norm = 0.0;
          for (std::size_t k = 0; k < weights_.size(); ++k) {
            if (weights_[k] == 0.0) continue;
            weights_[k] *= cached_[k].prob(o);
            norm += weights_[k];
          }
          if (!(norm > 0.0)) {
            throw MeasureZeroHistory("mixture: every component assigns probability 0 to outcome " +
                                     std::to_string(to_int(o)) + " at period " + std::to_string(processed_ + 1));
          }
          for (auto& w : weights_) w /= norm;
          ++processed_;
          cache_valid_ = false;
        }
        refresh(h);
        double p1 = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
          if (weights_[k] != 0.0) p1 += weights_[k] * cached_[k].p1();
        }
        return Forecast(std::clamp(p1, 0.0, 1.0));
      }

     private:
      // Component forecasts for the period after `h`, where h.size() == processed_.
      void refresh(History h) {
        if (cache_valid_) return;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
          if (weights_[k] != 0.0) cached_[k] = predictors_[k]->next(h);
        }
        cache_valid_ = true;
      }

      std::vector<double> weights_;
      std::vector<std::unique_ptr<Predictor>> predictors_;
      std::vector<Forecast> cached_;
      std::size_t processed_ = 0;
      bool cache_valid_ = false;
    };

    std::vector<MixtureComponent> components_;
  };

  return ForecastingStrategy(std::make_shared<Model>(std::move(components)));
}

/// The pair from the likelihood-ratio counterexample: f1 predicts all ones;
/// f0 forecasts 1 - eps on day one and agrees with f1 afterwards.
inline std::pair<ForecastingStrategy, ForecastingStrategy> claim1_pair(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("claim1_pair: epsilon must lie in (0,1)");
  auto ones = dirac_strategy(EventuallyConstant{{}, Outcome::one});
  return {first_period_strategy(1.0 - eps, ones), ones};
}

}  // namespace expertcmp
