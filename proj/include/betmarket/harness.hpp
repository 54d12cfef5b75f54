#pragma once

// Monte Carlo aggregation over repeated games and parameter-grid sweeps.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "betmarket/agents.hpp"
#include "betmarket/engine.hpp"
#include "betmarket/stats_core.hpp"

namespace betmarket {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

// ---------------------------------------------------------------------------
// Seeds

/// splitmix64 finalizer; every input bit affects every output bit.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Identifies the trial distribution of a cell. Cells that share (p, n) share
/// trial streams, so agents' parameters are compared on common random numbers.
inline std::uint64_t trial_stream_id(const GameConfig& c) {
  return mix64(std::bit_cast<std::uint64_t>(c.p) ^
               mix64(static_cast<std::uint64_t>(c.n)));
}

/// Seed of run `run_index` of stream `cell_id`:
/// mix64(mix64(mix64(master) ^ cell_id) ^ run_index).
inline constexpr std::uint64_t derive_run_seed(std::uint64_t master_seed,
                                               std::uint64_t cell_id,
                                               std::uint64_t run_index) {
  return mix64(mix64(mix64(master_seed) ^ cell_id) ^ run_index);
}

// ---------------------------------------------------------------------------
// Parallel execution

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; the first exception thrown is rethrown.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Grid resolution

/// round-half-up, tolerant of products like 0.3 * 5 landing a hair below .5
inline std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5 + 1e-9));
}

inline std::int64_t resolve_m(double fraction, std::int64_t n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("token fraction must lie in (0, 1]");
  }
  if (n < 1) throw ConfigError("n must be at least 1");
  return std::max<std::int64_t>(1, round_half_up(fraction * static_cast<double>(n)));
}

enum class PriorShape { Uniform, FavorTails, FavorHeads, Symmetric };

inline constexpr std::array<PriorShape, 4> kAllPriorShapes = {
    PriorShape::Uniform, PriorShape::FavorTails, PriorShape::FavorHeads,
    PriorShape::Symmetric};

inline constexpr std::string_view to_string(PriorShape s) {
  switch (s) {
    case PriorShape::Uniform: return "uniform";
    case PriorShape::FavorTails: return "tails";
    case PriorShape::FavorHeads: return "heads";
    case PriorShape::Symmetric: return "symmetric";
  }
  return "?";
}

inline BetaParams make_prior(PriorShape shape, std::int64_t k) {
  const double kp1 = static_cast<double>(k) + 1.0;
  switch (shape) {
    case PriorShape::Uniform: return {1.0, 1.0};
    case PriorShape::FavorTails: return {1.0, kp1};
    case PriorShape::FavorHeads: return {kp1, 1.0};
    case PriorShape::Symmetric: return {kp1, kp1};
  }
  return {1.0, 1.0};
}

/// {(1,1), (1,k+1), (k+1,1), (k+1,k+1)} with k = round-half-up(k_fraction * n).
/// k may be 0, in which case every shape collapses to (1,1).
inline std::array<BetaParams, 4> resolve_priors(double k_fraction, std::int64_t n) {
  if (!(k_fraction > 0.0 && k_fraction <= 1.0)) {
    throw ConfigError("prior fraction must lie in (0, 1]");
  }
  if (n < 1) throw ConfigError("n must be at least 1");
  const auto k = round_half_up(k_fraction * static_cast<double>(n));
  return {make_prior(PriorShape::Uniform, k), make_prior(PriorShape::FavorTails, k),
          make_prior(PriorShape::FavorHeads, k), make_prior(PriorShape::Symmetric, k)};
}

struct SweepGrid {
  std::vector<double> p_values{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::int64_t> n_values{3, 5, 10, 20, 30, 50};
  std::vector<double> m_fractions{0.1, 0.3, 0.5, 0.7, 1.0};
  std::vector<double> alpha_values{0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01};
  std::vector<PriorShape> prior_shapes{kAllPriorShapes.begin(), kAllPriorShapes.end()};
  std::vector<double> k_fractions{0.1, 0.3, 0.5, 0.7, 1.0};
  std::int64_t runs = 100;
  std::uint64_t master_seed = kDefaultSeed;
  double abstain_penalty = 0.0;

  void validate() const {
    auto nonempty = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("grid list '") + what + "' is empty");
    };
    nonempty(!p_values.empty(), "p");
    nonempty(!n_values.empty(), "n");
    nonempty(!m_fractions.empty(), "m_fraction");
    nonempty(!alpha_values.empty(), "alpha");
    nonempty(!prior_shapes.empty(), "prior_shapes");
    const bool needs_k = std::any_of(prior_shapes.begin(), prior_shapes.end(),
                                     [](PriorShape s) { return s != PriorShape::Uniform; });
    if (needs_k) nonempty(!k_fractions.empty(), "k_fraction");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    for (double f : m_fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("token fraction must lie in (0, 1]");
    }
    for (double f : k_fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("prior fraction must lie in (0, 1]");
    }
  }

  friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

/// Priors for one n, in order: (1,1) once if listed, then for each k fraction
/// the remaining listed shapes.
inline std::vector<BetaParams> grid_priors(const SweepGrid& g, std::int64_t n) {
  std::vector<BetaParams> out;
  if (std::find(g.prior_shapes.begin(), g.prior_shapes.end(), PriorShape::Uniform) !=
      g.prior_shapes.end()) {
    out.emplace_back(1.0, 1.0);
  }
  for (double kf : g.k_fractions) {
    const auto k = round_half_up(kf * static_cast<double>(n));
    for (auto shape : g.prior_shapes) {
      if (shape != PriorShape::Uniform) out.push_back(make_prior(shape, k));
    }
  }
  return out;
}

/// Cross product in lexicographic order over (p, n, m_fraction, alpha, prior).
inline std::vector<GameConfig> enumerate_cells(const SweepGrid& g) {
  g.validate();
  std::vector<GameConfig> cells;
  for (double p : g.p_values) {
    for (auto n : g.n_values) {
      const auto priors = grid_priors(g, n);
      for (double mf : g.m_fractions) {
        for (double alpha : g.alpha_values) {
          for (const auto& prior : priors) {
            GameConfig c;
            c.p = p;
            c.n = n;
            c.m = resolve_m(mf, n);
            c.alpha = alpha;
            c.prior = prior;
            c.abstain_penalty = g.abstain_penalty;
            c.validate();
            cells.push_back(c);
          }
        }
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Aggregation

struct AgentSummary {
  AgentKind kind = AgentKind::Sample;
  double mean_profit_per_allowed_bet = 0.0;
  double std_error = 0.0;
  double mean_profit_per_actual_bet = 0.0;
  double std_error_per_actual = 0.0;
  /// Total profit over all runs divided by total bets placed over all runs.
  double pooled_profit_per_actual_bet = 0.0;
  double mean_bets_placed = 0.0;
  double mean_total_profit = 0.0;

  friend bool operator==(const AgentSummary&, const AgentSummary&) = default;
};

struct CellSummary {
  GameConfig config;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  std::uint64_t cell_id = 0;
  std::array<AgentSummary, 3> agents;

  const AgentSummary& agent(AgentKind k) const {
    return agents[static_cast<std::size_t>(k)];
  }

  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

namespace detail {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sequential two-pass mean and standard error; sample order fixes the bits.
inline MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  r.mean = sum / n;
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (n - 1.0) / n);
  return r;
}

struct RunMetrics {
  std::array<double, 3> per_allowed{};
  std::array<double, 3> per_actual{};
  std::array<double, 3> total{};
  std::array<std::int64_t, 3> bets{};
};

}  // namespace detail

/// Runs `runs` independent games of one configuration. Run r is seeded with
/// derive_run_seed(master_seed, cell_id, r); the summary does not depend on
/// `workers`.
inline CellSummary run_cell(const GameConfig& config, std::int64_t runs,
                            std::uint64_t master_seed, std::uint64_t cell_id,
                            unsigned workers = 1) {
  config.validate();
  if (runs < 1) throw ConfigError("runs must be at least 1");

  const IntervalTable table(config.alpha, config.n);
  std::vector<detail::RunMetrics> metrics(static_cast<std::size_t>(runs));

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (metrics.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const std::size_t end = std::min(metrics.size(), (chunk + 1) * kChunk);
    for (std::size_t r = chunk * kChunk; r < end; ++r) {
      Rng rng(derive_run_seed(master_seed, cell_id, r));
      const auto game = run_game(config, rng, &table);
      auto& out = metrics[r];
      for (std::size_t a = 0; a < 3; ++a) {
        const auto& ag = game.agents[a];
        out.per_allowed[a] = ag.profit_per_allowed_bet;
        out.per_actual[a] = ag.profit_per_actual_bet;
        out.total[a] = ag.total_profit;
        out.bets[a] = ag.bets_placed;
      }
    }
  });

  CellSummary s;
  s.config = config;
  s.runs = runs;
  s.seed = master_seed;
  s.cell_id = cell_id;
  std::vector<double> buf(metrics.size());
  for (auto k : kAllAgents) {
    const auto a = static_cast<std::size_t>(k);
    auto& out = s.agents[a];
    out.kind = k;

    for (std::size_t r = 0; r < metrics.size(); ++r) buf[r] = metrics[r].per_allowed[a];
    const auto allowed = detail::mean_and_se(buf);
    out.mean_profit_per_allowed_bet = allowed.mean;
    out.std_error = allowed.se;

    for (std::size_t r = 0; r < metrics.size(); ++r) buf[r] = metrics[r].per_actual[a];
    const auto actual = detail::mean_and_se(buf);
    out.mean_profit_per_actual_bet = actual.mean;
    out.std_error_per_actual = actual.se;

    double profit_sum = 0.0;
    std::int64_t bet_sum = 0;
    for (std::size_t r = 0; r < metrics.size(); ++r) {
      buf[r] = metrics[r].total[a];
      profit_sum += metrics[r].total[a];
      bet_sum += metrics[r].bets[a];
    }
    out.mean_total_profit = detail::mean_and_se(buf).mean;
    out.pooled_profit_per_actual_bet =
        bet_sum == 0 ? 0.0 : profit_sum / static_cast<double>(bet_sum);

    for (std::size_t r = 0; r < metrics.size(); ++r) {
      buf[r] = static_cast<double>(metrics[r].bets[a]);
    }
    out.mean_bets_placed = detail::mean_and_se(buf).mean;
  }
  return s;
}

inline CellSummary run_cell(const GameConfig& config, std::int64_t runs,
                            std::uint64_t master_seed) {
  return run_cell(config, runs, master_seed, trial_stream_id(config), 1);
}

/// Runs every cell in `cells`; output order matches input order.
inline std::vector<CellSummary> run_cells(const std::vector<GameConfig>& cells,
                                          std::int64_t runs,
                                          std::uint64_t master_seed,
                                          unsigned workers = 1) {
  std::vector<CellSummary> out(cells.size());
  if (cells.size() == 1) {
    out[0] = run_cell(cells[0], runs, master_seed, trial_stream_id(cells[0]), workers);
    return out;
  }
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    out[i] = run_cell(cells[i], runs, master_seed, trial_stream_id(cells[i]), 1);
  });
  return out;
}

inline std::vector<CellSummary> sweep(const SweepGrid& grid, unsigned workers = 1) {
  return run_cells(enumerate_cells(grid), grid.runs, grid.master_seed, workers);
}

// ---------------------------------------------------------------------------
// Table reproduction

struct TableRow {
  std::string p_label;      // "0.1" ... or "Overall"
  std::string param_label;  // value of the varying parameter
  std::array<AgentSummary, 3> agents;

  const AgentSummary& agent(AgentKind k) const {
    return agents[static_cast<std::size_t>(k)];
  }
};

struct Table {
  int id = 0;
  std::string caption;
  std::string param_name;
  std::vector<std::string> param_labels;
  std::vector<double> p_values;
  /// cells[pi][vi]: p index, varying-parameter index.
  std::vector<std::vector<CellSummary>> cells;
  std::vector<TableRow> rows;  // per-p blocks followed by the Overall block

  const TableRow& overall(std::size_t vi) const {
    return rows[p_values.size() * param_labels.size() + vi];
  }
};

inline constexpr std::array<int, 4> kTableIds = {2, 3, 4, 5};

namespace detail {

inline std::string format_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct TableLayout {
  std::string caption;
  std::string param_name;
  std::vector<std::string> labels;
  std::vector<std::function<GameConfig(double p)>> make;
};

inline TableLayout table_layout(int id) {
  const SweepGrid defaults;
  TableLayout t;
  auto base = [](double p, std::int64_t n, std::int64_t m, double alpha, BetaParams prior) {
    GameConfig c;
    c.p = p;
    c.n = n;
    c.m = m;
    c.alpha = alpha;
    c.prior = prior;
    return c;
  };
  switch (id) {
    case 2:
      t.caption = "Net profit per allowed bet, varying n (m = 0.5n, alpha = 0.1, prior beta(1,1))";
      t.param_name = "n";
      for (auto n : defaults.n_values) {
        t.labels.push_back(std::to_string(n));
        t.make.push_back([=](double p) {
          return base(p, n, resolve_m(0.5, n), 0.1, {1.0, 1.0});
        });
      }
      break;
    case 3:
      t.caption = "Net profit per allowed bet, varying m (n = 20, alpha = 0.1, prior beta(1,1))";
      t.param_name = "m";
      for (double f : defaults.m_fractions) {
        const auto m = resolve_m(f, 20);
        t.labels.push_back(std::to_string(m));
        t.make.push_back([=](double p) { return base(p, 20, m, 0.1, {1.0, 1.0}); });
      }
      break;
    case 4:
      t.caption = "Net profit per allowed bet, varying 1 - alpha (n = 20, m = 10, prior beta(1,1))";
      t.param_name = "confidence";
      for (double alpha : defaults.alpha_values) {
        t.labels.push_back(format_label(1.0 - alpha));
        t.make.push_back([=](double p) { return base(p, 20, 10, alpha, {1.0, 1.0}); });
      }
      break;
    case 5: {
      t.caption = "Net profit per allowed bet, varying prior beta(a,b) (n = 20, m = 10, alpha = 0.1)";
      t.param_name = "prior";
      const auto pr = resolve_priors(0.5, 20);
      // uniform, favors heads, favors tails, symmetric
      for (const auto& prior : {pr[0], pr[2], pr[1], pr[3]}) {
        t.labels.push_back("(" + format_label(prior.a) + "," + format_label(prior.b) + ")");
        t.make.push_back([=](double p) { return base(p, 20, 10, 0.1, prior); });
      }
      break;
    }
    default:
      throw ConfigError("unknown table id " + std::to_string(id) +
                        " (expected 2, 3, 4 or 5)");
  }
  return t;
}

}  // namespace detail

/// Reproduces one of the published cross-sections. Rows are ordered by p
/// then by the varying parameter; the Overall block weights every p equally.
inline Table reproduce_table(int id, std::int64_t runs, std::uint64_t master_seed,
                             unsigned workers = 1) {
  const SweepGrid defaults;
  auto layout = detail::table_layout(id);

  Table t;
  t.id = id;
  t.caption = layout.caption;
  t.param_name = layout.param_name;
  t.param_labels = layout.labels;
  t.p_values = defaults.p_values;

  const std::size_t np = t.p_values.size();
  const std::size_t nv = t.param_labels.size();
  std::vector<GameConfig> configs;
  for (double p : t.p_values) {
    for (std::size_t v = 0; v < nv; ++v) configs.push_back(layout.make[v](p));
  }
  const auto summaries = run_cells(configs, runs, master_seed, workers);

  t.cells.assign(np, std::vector<CellSummary>(nv));
  for (std::size_t pi = 0; pi < np; ++pi) {
    for (std::size_t v = 0; v < nv; ++v) {
      const auto& s = summaries[pi * nv + v];
      t.cells[pi][v] = s;
      TableRow row;
      row.p_label = detail::format_label(t.p_values[pi]);
      row.param_label = t.param_labels[v];
      row.agents = s.agents;
      t.rows.push_back(row);
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    TableRow row;
    row.p_label = "Overall";
    row.param_label = t.param_labels[v];
    for (auto k : kAllAgents) {
      const auto a = static_cast<std::size_t>(k);
      AgentSummary o;
      o.kind = k;
      double var = 0.0, var_actual = 0.0;
      for (std::size_t pi = 0; pi < np; ++pi) {
        const auto& c = t.cells[pi][v].agents[a];
        o.mean_profit_per_allowed_bet += c.mean_profit_per_allowed_bet;
        o.mean_profit_per_actual_bet += c.mean_profit_per_actual_bet;
        o.pooled_profit_per_actual_bet += c.pooled_profit_per_actual_bet;
        o.mean_bets_placed += c.mean_bets_placed;
        o.mean_total_profit += c.mean_total_profit;
        var += c.std_error * c.std_error;
        var_actual += c.std_error_per_actual * c.std_error_per_actual;
      }
      const double dn = static_cast<double>(np);
      o.mean_profit_per_allowed_bet /= dn;
      o.mean_profit_per_actual_bet /= dn;
      o.pooled_profit_per_actual_bet /= dn;
      o.mean_bets_placed /= dn;
      o.mean_total_profit /= dn;
      o.std_error = std::sqrt(var) / dn;
      o.std_error_per_actual = std::sqrt(var_actual) / dn;
      row.agents[a] = o;
    }
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace betmarket
