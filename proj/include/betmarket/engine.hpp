#pragma once

// One game of the ticket market: trial generation, payoffs, token budgets
// and per-agent ledgers.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "betmarket/agents.hpp"
#include "betmarket/stats_core.hpp"

namespace betmarket {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Generator behind every random draw. Each trial consumes exactly two
/// 64-bit outputs, price first and outcome second.
using Rng = std::mt19937_64;

struct GameConfig {
  double p = 0.5;
  std::int64_t n = 20;
  std::int64_t m = 10;
  double alpha = 0.1;
  BetaParams prior{1.0, 1.0};
  double abstain_penalty = 0.0;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p must satisfy 0 < p < 1");
    if (n < 1) throw ConfigError("n must be at least 1");
    if (m < 1 || m > n) throw ConfigError("m must satisfy 1 ≤ m ≤ n");
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ConfigError("alpha must satisfy 0 < alpha < 1");
    }
    if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
      throw ConfigError("prior parameters must be positive");
    }
    if (!(abstain_penalty >= 0.0) || !std::isfinite(abstain_penalty)) {
      throw ConfigError("abstain penalty must be a nonnegative number");
    }
  }

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

struct Trial {
  std::int64_t index = 1;
  double price = 0.5;
  Outcome outcome = Outcome::Heads;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct LedgerEntry {
  std::int64_t index = 0;
  Action action = Action::Hold;
  double payoff = 0.0;
  double penalty = 0.0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct AgentResult {
  AgentKind kind = AgentKind::Sample;
  double total_profit = 0.0;
  std::int64_t bets_placed = 0;
  std::int64_t penalized_holds = 0;
  double profit_per_allowed_bet = 0.0;
  double profit_per_actual_bet = 0.0;
  std::vector<LedgerEntry> ledger;

  friend bool operator==(const AgentResult&, const AgentResult&) = default;
};

struct GameResult {
  GameConfig config;
  std::vector<Trial> trials;
  std::array<AgentResult, 3> agents;

  const AgentResult& agent(AgentKind k) const {
    return agents[static_cast<std::size_t>(k)];
  }

  friend bool operator==(const GameResult&, const GameResult&) = default;
};

/// Payoff of one ticket position (Table of buy/sell/hold against heads/tails).
inline double payoff(Action action, Outcome outcome, double price) {
  switch (action) {
    case Action::Buy:
      return outcome == Outcome::Heads ? 1.0 - price : -price;
    case Action::Sell:
      return outcome == Outcome::Heads ? -(1.0 - price) : price;
    case Action::Hold:
      return 0.0;
  }
  return 0.0;
}

/// Uniform on the open interval (0, 1): the top 53 bits shifted by half a step.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform on [0, 1).
inline double uniform_closed_open(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Trial sample_trial(Rng& rng, double p, std::int64_t index = 1) {
  Trial t;
  t.index = index;
  t.price = uniform_open(rng);
  t.outcome = uniform_closed_open(rng) < p ? Outcome::Heads : Outcome::Tails;
  return t;
}

inline std::vector<Trial> generate_trials(Rng& rng, double p, std::int64_t n) {
  std::vector<Trial> trials;
  trials.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 1; i <= n; ++i) trials.push_back(sample_trial(rng, p, i));
  return trials;
}

struct ProfitMetrics {
  double per_allowed = 0.0;
  double per_actual = 0.0;
};

inline ProfitMetrics profit_metrics(double total_profit, std::int64_t m,
                                    std::int64_t bets_placed) {
  if (m < 1) throw ConfigError("m must be at least 1");
  ProfitMetrics pm;
  pm.per_allowed = total_profit / static_cast<double>(m);
  pm.per_actual =
      bets_placed == 0 ? 0.0 : total_profit / static_cast<double>(bets_placed);
  return pm;
}

inline ProfitMetrics profit_metrics(const AgentResult& r, std::int64_t m) {
  return profit_metrics(r.total_profit, m, r.bets_placed);
}

/// Plays a game over a given trial sequence. `table`, when supplied, must hold
/// intervals for config.alpha; it only speeds up Conf.
inline GameResult play_game(const GameConfig& config,
                            std::span<const Trial> trials,
                            const IntervalTable* table = nullptr) {
  config.validate();
  if (static_cast<std::int64_t>(trials.size()) != config.n) {
    throw ConfigError("trial sequence length " + std::to_string(trials.size()) +
                      " does not match n = " + std::to_string(config.n));
  }
  if (table != nullptr && table->alpha() != config.alpha) {
    throw ConfigError("interval table was built for a different alpha");
  }

  GameResult result;
  result.config = config;
  result.trials.assign(trials.begin(), trials.end());

  BayesState bayes{config.prior, {}};
  ConfState conf{{}, config.alpha, table};
  SampleState sample{};
  std::array<std::int64_t, 3> tokens{config.m, config.m, config.m};

  for (auto k : kAllAgents) {
    auto& r = result.agents[static_cast<std::size_t>(k)];
    r.kind = k;
    r.ledger.reserve(trials.size());
  }

  std::int64_t expected_index = 1;
  for (const Trial& t : trials) {
    if (!(t.price > 0.0 && t.price < 1.0)) {
      throw ConfigError("ticket price must lie strictly inside (0, 1)");
    }
    if (t.index != expected_index++) {
      throw ConfigError("trial indices must run 1..n in order");
    }

    const std::array<Action, 3> proposed{sample_action(sample, t.price),
                                         bayes_action(bayes, t.price),
                                         conf_action(conf, t.price)};
    for (auto k : kAllAgents) {
      const auto i = static_cast<std::size_t>(k);
      auto& r = result.agents[i];
      const bool bet =
          wants_token(k, t.index, config.n, config.m, tokens[i], proposed[i]);
      LedgerEntry e;
      e.index = t.index;
      e.action = bet ? proposed[i] : Action::Hold;
      e.payoff = payoff(e.action, t.outcome, t.price);
      if (bet) {
        --tokens[i];
        ++r.bets_placed;
      } else if (k == AgentKind::Conf && config.abstain_penalty > 0.0 &&
                 tokens[i] > 0) {
        e.penalty = config.abstain_penalty;
        ++r.penalized_holds;
      }
      r.total_profit += e.payoff - e.penalty;
      r.ledger.push_back(e);
    }

    sample = observe(sample, t.outcome);
    bayes = observe(bayes, t.outcome);
    conf = observe(conf, t.outcome);
  }

  for (auto& r : result.agents) {
    const auto pm = profit_metrics(r, config.m);
    r.profit_per_allowed_bet = pm.per_allowed;
    r.profit_per_actual_bet = pm.per_actual;
  }
  return result;
}

inline GameResult run_game(const GameConfig& config, Rng& rng,
                           const IntervalTable* table = nullptr) {
  config.validate();
  const auto trials = generate_trials(rng, config.p, config.n);
  return play_game(config, trials, table);
}

}  // namespace betmarket
