// Command-line front end: single games, table reproductions and grid sweeps.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "betmarket/betmarket.hpp"

namespace {

using namespace betmarket;

struct RunOptions {
  double p = 0.5;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> m;
  double alpha = 0.1;
  std::vector<double> prior{1.0, 1.0};
  double penalty = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::string trials_path;
  std::string format = "text";
};

struct TableOptions {
  int id = 0;
  std::int64_t runs = 100;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "csv";
  std::string out;
  unsigned workers = 1;
};

struct SweepOptions {
  std::string grid_path;
  std::optional<std::int64_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> penalty;
  std::string format = "csv";
  std::string out;
  std::string write_grid_path;
  unsigned workers = 1;
};

// Streams to `path`, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw std::runtime_error("failed writing output");
  }

 private:
  std::ofstream file_;
};

int cmd_run(const RunOptions& o) {
  if (o.prior.size() != 2) throw ConfigError("--prior expects two values a,b");
  std::vector<Trial> injected;
  if (!o.trials_path.empty()) {
    std::ifstream in(o.trials_path);
    if (!in) throw std::runtime_error("cannot open trial file '" + o.trials_path + "'");
    injected = parse_trials(in);
    if (injected.empty()) throw ConfigError("trial file contains no trials");
  }

  GameConfig c;
  c.p = o.p;
  c.n = o.n.value_or(injected.empty() ? 20 : static_cast<std::int64_t>(injected.size()));
  c.m = o.m.value_or(c.n >= 1 ? resolve_m(0.5, c.n) : 1);
  c.alpha = o.alpha;
  c.prior = BetaParams(o.prior[0], o.prior[1]);
  c.abstain_penalty = o.penalty;
  c.validate();

  GameResult result;
  if (injected.empty()) {
    Rng rng(o.seed);
    result = run_game(c, rng);
  } else {
    result = play_game(c, injected);
  }

  if (o.format == "json") {
    std::cout << game_json(result).dump(2) << '\n';
  } else {
    write_game_text(std::cout, result);
  }
  return 0;
}

int cmd_table(const TableOptions& o) {
  const auto table = reproduce_table(o.id, o.runs, o.seed, o.workers);
  Output out(o.out);
  if (o.format == "json") {
    out.stream() << table_json(table).dump(2) << '\n';
  } else if (o.format == "text") {
    write_table_text(out.stream(), table);
  } else {
    write_table_csv(out.stream(), table);
  }
  out.finish();
  return 0;
}

int cmd_sweep(const SweepOptions& o) {
  SweepGrid grid;
  if (!o.grid_path.empty()) {
    std::ifstream in(o.grid_path);
    if (!in) throw std::runtime_error("cannot open grid file '" + o.grid_path + "'");
    try {
      grid = parse_grid(in);
    } catch (const ParseError& e) {
      throw std::runtime_error(o.grid_path + ": " + e.what());
    }
  }
  if (o.runs) grid.runs = *o.runs;
  if (o.seed) grid.master_seed = *o.seed;
  if (o.penalty) grid.abstain_penalty = *o.penalty;
  grid.validate();

  if (!o.write_grid_path.empty()) {
    Output g(o.write_grid_path);
    g.stream() << write_grid(grid);
    g.finish();
  }

  const auto cells = sweep(grid, o.workers);
  Output out(o.out);
  if (o.format == "json") {
    out.stream() << records_json(cells).dump(2) << '\n';
  } else {
    write_records_csv(out.stream(), cells);
  }
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Betting-market simulation of Bayesian, confidence-interval and "
               "sample-proportion agents"};
  app.require_subcommand(1);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Play one game and print its ledger");
  run_cmd->add_option("--p", run.p, "Chance of heads")->capture_default_str();
  run_cmd->add_option("--n", run.n, "Number of trials (defaults to the trial file length, else 20)");
  run_cmd->add_option("--m", run.m, "Token budget (defaults to round(0.5 n))");
  run_cmd->add_option("--alpha", run.alpha, "Conf's alpha")->capture_default_str();
  run_cmd->add_option("--prior", run.prior, "Bayes prior a,b")->delimiter(',')->expected(2);
  run_cmd->add_option("--penalty", run.penalty, "Charge to Conf per declined trial")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Generator seed")->capture_default_str();
  run_cmd->add_option("--trials", run.trials_path, "Injected price,outcome file");
  run_cmd->add_option("--format", run.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  TableOptions table;
  table.workers = hw;
  auto* table_cmd = app.add_subcommand("table", "Reproduce a published results table");
  table_cmd->add_option("--id", table.id, "Table id (2, 3, 4 or 5)")->required();
  table_cmd->add_option("--runs", table.runs, "Games per cell")->capture_default_str();
  table_cmd->add_option("--seed", table.seed, "Master seed")->capture_default_str();
  table_cmd->add_option("--format", table.format, "csv, json or text")
      ->check(CLI::IsMember({"csv", "json", "text"}))
      ->capture_default_str();
  table_cmd->add_option("--out", table.out, "Output file (default stdout)");
  table_cmd->add_option("--workers", table.workers, "Worker threads")->capture_default_str();

  SweepOptions sw;
  sw.workers = hw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter-grid sweep");
  sweep_cmd->add_option("--grid", sw.grid_path, "Grid file (default: the full grid)");
  sweep_cmd->add_option("--runs", sw.runs, "Games per cell (overrides the grid file)");
  sweep_cmd->add_option("--seed", sw.seed, "Master seed (overrides the grid file)");
  sweep_cmd->add_option("--penalty", sw.penalty, "Charge to Conf per declined trial");
  sweep_cmd->add_option("--format", sw.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "Output file (default stdout)");
  sweep_cmd->add_option("--write-grid", sw.write_grid_path, "Also write the effective grid file");
  sweep_cmd->add_option("--workers", sw.workers, "Worker threads")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (table_cmd->parsed()) return cmd_table(table);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
