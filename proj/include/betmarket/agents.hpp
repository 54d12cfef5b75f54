#pragma once

// Decision rules of the three players and how they absorb evidence.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "betmarket/stats_core.hpp"

namespace betmarket {

enum class Action { Buy, Sell, Hold };
enum class Outcome { Heads, Tails };

/// Column order used everywhere results are reported.
enum class AgentKind { Sample = 0, Bayes = 1, Conf = 2 };

inline constexpr std::array<AgentKind, 3> kAllAgents = {
    AgentKind::Sample, AgentKind::Bayes, AgentKind::Conf};

inline constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::Buy: return "buy";
    case Action::Sell: return "sell";
    case Action::Hold: return "hold";
  }
  return "?";
}

inline constexpr std::string_view to_string(Outcome o) {
  return o == Outcome::Heads ? "H" : "T";
}

inline constexpr std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Sample: return "Sample";
    case AgentKind::Bayes: return "Bayes";
    case AgentKind::Conf: return "Conf";
  }
  return "?";
}

inline std::optional<AgentKind> parse_agent(std::string_view s) {
  for (auto k : kAllAgents) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline void record(Counts& c, Outcome o) {
  if (o == Outcome::Heads) {
    ++c.heads;
  } else {
    ++c.tails;
  }
}

struct BayesState {
  BetaParams prior;
  Counts evidence;

  BetaParams posterior() const { return beta_posterior(prior, evidence); }
};

/// The interval is a function of (evidence, alpha) only. An optional table
/// of precomputed intervals for the same alpha short-circuits the quantile
/// solves; it must have been built with this state's alpha.
struct ConfState {
  Counts evidence;
  double alpha = 0.1;
  const IntervalTable* table = nullptr;

  ConfidenceInterval interval() const {
    if (table != nullptr && evidence.total() <= table->max_total()) {
      return table->at(evidence);
    }
    return confidence_interval(evidence, alpha);
  }
};

struct SampleState {
  Counts evidence;

  /// heads / total, or 0.5 before any observation.
  double proportion() const {
    const auto n = evidence.total();
    if (n == 0) return 0.5;
    return static_cast<double>(evidence.heads) / static_cast<double>(n);
  }
};

inline Action bayes_action(const BayesState& s, double price) {
  return price <= beta_mean(s.posterior()) ? Action::Buy : Action::Sell;
}

/// Strict inequalities: a price on either bound is declined.
inline Action conf_action(const ConfidenceInterval& ci, double price) {
  if (price < ci.lower) return Action::Buy;
  if (price > ci.upper) return Action::Sell;
  return Action::Hold;
}

inline Action conf_action(const ConfState& s, double price) {
  return conf_action(s.interval(), price);
}

inline Action sample_action(const SampleState& s, double price) {
  return price <= s.proportion() ? Action::Buy : Action::Sell;
}

inline BayesState observe(BayesState s, Outcome o) {
  record(s.evidence, o);
  return s;
}

inline ConfState observe(ConfState s, Outcome o) {
  record(s.evidence, o);
  return s;
}

inline SampleState observe(SampleState s, Outcome o) {
  record(s.evidence, o);
  return s;
}

/// Token scheduling. Bayes and Sample spend their budget on the last m trials;
/// Conf spends a token whenever its rule produces a bet.
inline bool wants_token(AgentKind kind, std::int64_t trial_index, std::int64_t n,
                        std::int64_t m, std::int64_t tokens_left, Action action) {
  if (tokens_left <= 0) return false;
  switch (kind) {
    case AgentKind::Bayes:
    case AgentKind::Sample:
      return trial_index > n - m;
    case AgentKind::Conf:
      return action != Action::Hold;
  }
  return false;
}

}  // namespace betmarket
