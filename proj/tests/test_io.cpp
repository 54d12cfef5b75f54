#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "betmarket/io.hpp"

using namespace betmarket;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(GridFile, DefaultsWhenEmpty) {
  EXPECT_EQ(parse_grid(""), SweepGrid{});
  EXPECT_EQ(parse_grid("# only a comment\n\n"), SweepGrid{});
}

TEST(GridFile, ParsesEveryKey) {
  const auto g = parse_grid(
      "p = 0.2, 0.8   # two values\n"
      "n = 7\n"
      "m_fraction = 0.5\n"
      "alpha = 0.05, 0.01\n"
      "prior_shapes = uniform, symmetric\n"
      "k_fraction = 0.3\n"
      "runs = 12\n"
      "seed = 99\n"
      "penalty = 0.01\n");
  EXPECT_EQ(g.p_values, (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(g.n_values, (std::vector<std::int64_t>{7}));
  EXPECT_EQ(g.alpha_values, (std::vector<double>{0.05, 0.01}));
  EXPECT_EQ(g.prior_shapes, (std::vector<PriorShape>{PriorShape::Uniform, PriorShape::Symmetric}));
  EXPECT_EQ(g.runs, 12);
  EXPECT_EQ(g.master_seed, 99u);
  EXPECT_EQ(g.abstain_penalty, 0.01);
  // (1,1) plus (k+1,k+1) with k = round(0.3 * 7) = 2
  const auto cells = enumerate_cells(g);
  EXPECT_EQ(cells.size(), 2u * 1u * 1u * 2u * 2u);
  EXPECT_EQ(cells[1].prior, BetaParams(3, 3));
}

TEST(GridFile, ErrorsCarryLineAndField) {
  try {
    parse_grid("p = 0.5\nn = 3, x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "n");
  }
  EXPECT_THROW(parse_grid("bogus = 1\n"), ParseError);
  EXPECT_THROW(parse_grid("p 0.5\n"), ParseError);
  EXPECT_THROW(parse_grid("p = 1.5\n"), ParseError);
  EXPECT_THROW(parse_grid("prior_shapes = lopsided\n"), ParseError);
  EXPECT_THROW(parse_grid("runs = 0\n"), ParseError);
  EXPECT_THROW(parse_grid("alpha =\n"), ParseError);
}

TEST(GridFile, WriteThenParseRoundTrips) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  std::uniform_int_distribution<int> len(1, 6), nval(1, 200);
  for (int i = 0; i < 300; ++i) {
    SweepGrid g;
    g.p_values.resize(len(rng));
    for (auto& p : g.p_values) p = unit(rng);
    g.n_values.resize(len(rng));
    for (auto& n : g.n_values) n = nval(rng);
    g.m_fractions.resize(len(rng));
    for (auto& f : g.m_fractions) f = unit(rng);
    g.alpha_values.resize(len(rng));
    for (auto& a : g.alpha_values) a = unit(rng);
    g.prior_shapes.clear();
    for (auto s : kAllPriorShapes) {
      if (rng() & 1) g.prior_shapes.push_back(s);
    }
    if (g.prior_shapes.empty()) g.prior_shapes.push_back(PriorShape::Uniform);
    g.k_fractions.resize(len(rng));
    for (auto& k : g.k_fractions) k = unit(rng);
    g.runs = nval(rng);
    g.master_seed = rng();
    g.abstain_penalty = (rng() & 1) ? unit(rng) : 0.0;
    ASSERT_EQ(parse_grid(write_grid(g)), g) << write_grid(g);
  }
}

TEST(TrialFile, ParsesPairs) {
  const auto t = parse_trials("price,outcome\n0.9,H\n# note\n\n0.1, T\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (Trial{1, 0.9, Outcome::Heads}));
  EXPECT_EQ(t[1], (Trial{2, 0.1, Outcome::Tails}));
}

TEST(TrialFile, RejectsMalformedLines) {
  EXPECT_THROW(parse_trials("0.5\n"), ParseError);
  EXPECT_THROW(parse_trials("0.5,X\n"), ParseError);
  EXPECT_THROW(parse_trials("1.0,H\n"), ParseError);
  EXPECT_THROW(parse_trials("abc,H\n"), ParseError);
  try {
    parse_trials("0.5,H\n0.4,Q\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "outcome");
  }
}

TEST(Records, CsvHeaderAndRowCount) {
  SweepGrid g;
  g.p_values = {0.3, 0.7};
  g.n_values = {10};
  g.m_fractions = {0.5};
  g.alpha_values = {0.1};
  g.prior_shapes = {PriorShape::Uniform};
  g.runs = 40;
  std::ostringstream out;
  write_records_csv(out, sweep(g));
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 1u + 2u * 3u);
  EXPECT_EQ(lines[0],
            "p,n,m,alpha,prior_a,prior_b,agent,mean_profit_per_allowed_bet,std_error,"
            "mean_bets_placed,runs,seed");
  EXPECT_EQ(lines[1].substr(0, 17), "0.3,10,5,0.1,1,1,");
}

TEST(Records, CsvAndJsonAgreeValueForValue) {
  SweepGrid g;
  g.p_values = {0.1, 0.9};
  g.n_values = {5, 20};
  g.m_fractions = {0.3};
  g.alpha_values = {0.2};
  g.prior_shapes = {PriorShape::Uniform, PriorShape::FavorHeads};
  g.k_fractions = {0.5};
  g.runs = 60;
  const auto cells = sweep(g);
  std::ostringstream csv;
  write_records_csv(csv, cells);
  const auto json = nlohmann::json::parse(records_json(cells).dump());
  const auto lines = lines_of(csv.str());
  ASSERT_EQ(lines.size(), json.size() + 1);

  std::vector<std::string> header;
  {
    std::istringstream h(lines[0]);
    for (std::string f; std::getline(h, f, ',');) header.push_back(f);
  }
  for (std::size_t r = 0; r < json.size(); ++r) {
    std::istringstream row(lines[r + 1]);
    std::size_t col = 0;
    for (std::string f; std::getline(row, f, ','); ++col) {
      const auto& v = json[r][header[col]];
      if (v.is_string()) {
        EXPECT_EQ(f, v.get<std::string>());
      } else if (v.is_number_unsigned() || v.is_number_integer()) {
        EXPECT_EQ(std::stoull(f), v.get<std::uint64_t>()) << header[col];
      } else {
        EXPECT_EQ(std::stod(f), v.get<double>()) << header[col];
      }
    }
    EXPECT_EQ(col, header.size());
  }
}

TEST(TableOutput, CsvHasStdErrorColumnsAndOverallRows) {
  const auto t = reproduce_table(5, 30, 2);
  std::ostringstream out;
  write_table_csv(out, t);
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 1u + 24u);
  EXPECT_NE(lines[0].find("Conf_se"), std::string::npos);
  EXPECT_EQ(lines.back().substr(0, 18), "5,Overall,(11,11),");
  const auto j = table_json(t);
  EXPECT_EQ(j["rows"].size(), 24u);
}

TEST(GameOutput, JsonCarriesLedgers) {
  GameConfig c;
  c.n = 2;
  c.m = 1;
  const auto r = play_game(c, parse_trials("0.9,H\n0.1,H\n"));
  const auto j = game_json(r);
  EXPECT_EQ(j["agents"][1]["agent"], "Bayes");
  EXPECT_DOUBLE_EQ(j["agents"][1]["total_profit"].get<double>(), 0.9);
  EXPECT_EQ(j["agents"][1]["ledger"][1]["action"], "buy");
  std::ostringstream text;
  write_game_text(text, r);
  EXPECT_NE(text.str().find("Bayes"), std::string::npos);
}
