#pragma once

// Text formats: sweep-grid files, injected trial files, CSV/JSON writers.
//
// Grid file grammar (one assignment per line, '#' starts a comment):
//
//   line   := key '=' value (',' value)*
//   key    := p | n | m_fraction | alpha | prior_shapes | k_fraction
//           | runs | seed | penalty
//
// prior_shapes values are uniform | tails | heads | symmetric, standing for
// (1,1), (1,k+1), (k+1,1) and (k+1,k+1). Keys left out keep their defaults.
//
// Trial file: one "price,outcome" pair per line, outcome H or T. Blank lines,
// '#' comments and a leading "price,outcome" header are ignored.

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "betmarket/agents.hpp"
#include "betmarket/engine.hpp"
#include "betmarket/harness.hpp"

namespace betmarket {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field +
                           "': " + message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

inline constexpr std::string_view kRecordCsvHeader =
    "p,n,m,alpha,prior_a,prior_b,agent,mean_profit_per_allowed_bet,std_error,"
    "mean_bets_placed,runs,seed";

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(std::string_view text, std::size_t line, const std::string& field) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(line, field, "cannot parse '" + std::string(text) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::size_t line, const std::string& field) {
  std::vector<T> out;
  for (auto item : split(text, ',')) out.push_back(parse_value<T>(item, line, field));
  return out;
}

inline PriorShape parse_shape(std::string_view s, std::size_t line) {
  for (auto shape : kAllPriorShapes) {
    if (to_string(shape) == s) return shape;
  }
  throw ParseError(line, "prior_shapes",
                   "unknown shape '" + std::string(s) +
                       "' (expected uniform, tails, heads or symmetric)");
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_number(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace detail

inline SweepGrid parse_grid(std::istream& in) {
  SweepGrid g;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, std::string(line), "expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, key, "missing value");

    if (key == "p") {
      g.p_values = detail::parse_list<double>(value, line_no, key);
      for (double p : g.p_values) {
        if (!(p > 0.0 && p < 1.0)) throw ParseError(line_no, key, "p must lie in (0, 1)");
      }
    } else if (key == "n") {
      g.n_values = detail::parse_list<std::int64_t>(value, line_no, key);
      for (auto n : g.n_values) {
        if (n < 1) throw ParseError(line_no, key, "n must be at least 1");
      }
    } else if (key == "m_fraction") {
      g.m_fractions = detail::parse_list<double>(value, line_no, key);
      for (double f : g.m_fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ParseError(line_no, key, "fraction must lie in (0, 1]");
      }
    } else if (key == "alpha") {
      g.alpha_values = detail::parse_list<double>(value, line_no, key);
      for (double a : g.alpha_values) {
        if (!(a > 0.0 && a < 1.0)) throw ParseError(line_no, key, "alpha must lie in (0, 1)");
      }
    } else if (key == "prior_shapes") {
      g.prior_shapes.clear();
      for (auto item : detail::split(value, ',')) {
        g.prior_shapes.push_back(detail::parse_shape(item, line_no));
      }
    } else if (key == "k_fraction") {
      g.k_fractions = detail::parse_list<double>(value, line_no, key);
      for (double f : g.k_fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ParseError(line_no, key, "fraction must lie in (0, 1]");
      }
    } else if (key == "runs") {
      g.runs = detail::parse_value<std::int64_t>(value, line_no, key);
      if (g.runs < 1) throw ParseError(line_no, key, "runs must be at least 1");
    } else if (key == "seed") {
      g.master_seed = detail::parse_value<std::uint64_t>(value, line_no, key);
    } else if (key == "penalty") {
      g.abstain_penalty = detail::parse_value<double>(value, line_no, key);
      if (!(g.abstain_penalty >= 0.0)) throw ParseError(line_no, key, "penalty must be >= 0");
    } else {
      throw ParseError(line_no, key, "unknown key");
    }
  }
  return g;
}

inline SweepGrid parse_grid(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_grid(in);
}

inline std::string write_grid(const SweepGrid& g) {
  std::string shapes;
  for (std::size_t i = 0; i < g.prior_shapes.size(); ++i) {
    if (i) shapes += ", ";
    shapes += to_string(g.prior_shapes[i]);
  }
  std::ostringstream out;
  out << "p = " << detail::join(g.p_values) << '\n'
      << "n = " << detail::join(g.n_values) << '\n'
      << "m_fraction = " << detail::join(g.m_fractions) << '\n'
      << "alpha = " << detail::join(g.alpha_values) << '\n'
      << "prior_shapes = " << shapes << '\n';
  if (!g.k_fractions.empty()) out << "k_fraction = " << detail::join(g.k_fractions) << '\n';
  out << "runs = " << g.runs << '\n'
      << "seed = " << g.master_seed << '\n'
      << "penalty = " << format_number(g.abstain_penalty) << '\n';
  return out.str();
}

inline std::vector<Trial> parse_trials(std::istream& in) {
  std::vector<Trial> trials;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (trials.empty() && line == "price,outcome") continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != 2) {
      throw ParseError(line_no, "trial", "expected 'price,outcome'");
    }
    Trial t;
    t.index = static_cast<std::int64_t>(trials.size()) + 1;
    t.price = detail::parse_value<double>(fields[0], line_no, "price");
    if (!(t.price > 0.0 && t.price < 1.0)) {
      throw ParseError(line_no, "price", "price must lie strictly inside (0, 1)");
    }
    if (fields[1] == "H" || fields[1] == "h") {
      t.outcome = Outcome::Heads;
    } else if (fields[1] == "T" || fields[1] == "t") {
      t.outcome = Outcome::Tails;
    } else {
      throw ParseError(line_no, "outcome", "outcome must be H or T");
    }
    trials.push_back(t);
  }
  return trials;
}

inline std::vector<Trial> parse_trials(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trials(in);
}

// ---------------------------------------------------------------------------
// Sweep records

inline void write_records_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << kRecordCsvHeader << '\n';
  for (const auto& c : cells) {
    for (const auto& a : c.agents) {
      out << format_number(c.config.p) << ',' << c.config.n << ',' << c.config.m << ','
          << format_number(c.config.alpha) << ',' << format_number(c.config.prior.a) << ','
          << format_number(c.config.prior.b) << ',' << to_string(a.kind) << ','
          << format_number(a.mean_profit_per_allowed_bet) << ','
          << format_number(a.std_error) << ',' << format_number(a.mean_bets_placed) << ','
          << c.runs << ',' << c.seed << '\n';
    }
  }
}

inline nlohmann::json records_json(const std::vector<CellSummary>& cells) {
  auto rows = nlohmann::json::array();
  for (const auto& c : cells) {
    for (const auto& a : c.agents) {
      rows.push_back({{"p", c.config.p},
                      {"n", c.config.n},
                      {"m", c.config.m},
                      {"alpha", c.config.alpha},
                      {"prior_a", c.config.prior.a},
                      {"prior_b", c.config.prior.b},
                      {"agent", std::string(to_string(a.kind))},
                      {"mean_profit_per_allowed_bet", a.mean_profit_per_allowed_bet},
                      {"std_error", a.std_error},
                      {"mean_bets_placed", a.mean_bets_placed},
                      {"runs", c.runs},
                      {"seed", c.seed}});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Tables

inline void write_table_csv(std::ostream& out, const Table& t) {
  out << "table,p," << t.param_name;
  for (auto k : kAllAgents) {
    const std::string name(to_string(k));
    out << ',' << name << ',' << name << "_se," << name << "_per_actual," << name
        << "_bets";
  }
  out << ",runs\n";
  for (const auto& row : t.rows) {
    out << t.id << ',' << row.p_label << ',' << row.param_label;
    for (const auto& a : row.agents) {
      out << ',' << format_number(a.mean_profit_per_allowed_bet) << ','
          << format_number(a.std_error) << ',' << format_number(a.mean_profit_per_actual_bet)
          << ',' << format_number(a.mean_bets_placed);
    }
    out << ',' << t.cells.front().front().runs << '\n';
  }
}

inline nlohmann::json table_json(const Table& t) {
  nlohmann::json j;
  j["table"] = t.id;
  j["caption"] = t.caption;
  j["parameter"] = t.param_name;
  j["runs"] = t.cells.front().front().runs;
  j["seed"] = t.cells.front().front().seed;
  auto rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r{{"p", row.p_label}, {t.param_name, row.param_label}};
    for (const auto& a : row.agents) {
      r[std::string(to_string(a.kind))] = {
          {"mean_profit_per_allowed_bet", a.mean_profit_per_allowed_bet},
          {"std_error", a.std_error},
          {"mean_profit_per_actual_bet", a.mean_profit_per_actual_bet},
          {"pooled_profit_per_actual_bet", a.pooled_profit_per_actual_bet},
          {"mean_bets_placed", a.mean_bets_placed}};
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_table_text(std::ostream& out, const Table& t) {
  char buf[160];
  out << "Table " << t.id << ": " << t.caption << '\n';
  std::snprintf(buf, sizeof buf, "%-8s %-10s %16s %16s %16s\n", "p", t.param_name.c_str(),
                "Sample", "Bayes", "Conf");
  out << buf;
  std::string last_p;
  for (const auto& row : t.rows) {
    const std::string p = row.p_label == last_p ? "" : row.p_label;
    last_p = row.p_label;
    std::snprintf(buf, sizeof buf, "%-8s %-10s", p.c_str(), row.param_label.c_str());
    out << buf;
    for (const auto& a : row.agents) {
      std::snprintf(buf, sizeof buf, "  %7.4f(%6.4f)", a.mean_profit_per_allowed_bet,
                    a.std_error);
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Single games

inline nlohmann::json game_json(const GameResult& g) {
  nlohmann::json j;
  j["config"] = {{"p", g.config.p},
                 {"n", g.config.n},
                 {"m", g.config.m},
                 {"alpha", g.config.alpha},
                 {"prior_a", g.config.prior.a},
                 {"prior_b", g.config.prior.b},
                 {"penalty", g.config.abstain_penalty}};
  auto trials = nlohmann::json::array();
  for (const auto& t : g.trials) {
    trials.push_back({{"index", t.index},
                      {"price", t.price},
                      {"outcome", std::string(to_string(t.outcome))}});
  }
  j["trials"] = std::move(trials);
  auto agents = nlohmann::json::array();
  for (const auto& a : g.agents) {
    auto ledger = nlohmann::json::array();
    for (const auto& e : a.ledger) {
      ledger.push_back({{"index", e.index},
                        {"action", std::string(to_string(e.action))},
                        {"payoff", e.payoff},
                        {"penalty", e.penalty}});
    }
    agents.push_back({{"agent", std::string(to_string(a.kind))},
                      {"total_profit", a.total_profit},
                      {"bets_placed", a.bets_placed},
                      {"penalized_holds", a.penalized_holds},
                      {"profit_per_allowed_bet", a.profit_per_allowed_bet},
                      {"profit_per_actual_bet", a.profit_per_actual_bet},
                      {"ledger", std::move(ledger)}});
  }
  j["agents"] = std::move(agents);
  return j;
}

inline void write_game_text(std::ostream& out, const GameResult& g) {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "p=%g n=%lld m=%lld alpha=%g prior=(%g,%g) penalty=%g\n", g.config.p,
                static_cast<long long>(g.config.n), static_cast<long long>(g.config.m),
                g.config.alpha, g.config.prior.a, g.config.prior.b, g.config.abstain_penalty);
  out << buf;
  std::snprintf(buf, sizeof buf, "%5s %8s %3s  %-14s %-14s %-14s\n", "trial", "price", "out",
                "Sample", "Bayes", "Conf");
  out << buf;
  for (std::size_t i = 0; i < g.trials.size(); ++i) {
    const auto& t = g.trials[i];
    std::snprintf(buf, sizeof buf, "%5lld %8.5f %3s", static_cast<long long>(t.index), t.price,
                  std::string(to_string(t.outcome)).c_str());
    out << buf;
    for (const auto& a : g.agents) {
      const auto& e = a.ledger[i];
      std::snprintf(buf, sizeof buf, "  %-4s %+9.5f", std::string(to_string(e.action)).c_str(),
                    e.payoff - e.penalty);
      out << buf;
    }
    out << '\n';
  }
  out << "agent   total      bets  per_allowed  per_actual\n";
  for (const auto& a : g.agents) {
    std::snprintf(buf, sizeof buf, "%-7s %+9.5f %5lld  %+10.5f  %+10.5f\n",
                  std::string(to_string(a.kind)).c_str(), a.total_profit,
                  static_cast<long long>(a.bets_placed), a.profit_per_allowed_bet,
                  a.profit_per_actual_bet);
    out << buf;
  }
}

}  // namespace betmarket
