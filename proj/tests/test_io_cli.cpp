#include "cli.hpp"
#include "fpa/table_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fpa;
namespace fs = std::filesystem;

namespace {

class TempDir
{
public:
  TempDir()
  {
    path_ = fs::temp_directory_path() / ("fpa_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

std::string
slurp(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void
spit(const std::string& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run
run(std::vector<std::string> args)
{
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return { code, out.str(), err.str() };
}

} // namespace

TEST(TableIo, BidTableRoundTrip)
{
  BidFunctions f{ TabulatedBidFunction(Role::discounted, { 0.1, 1.0 / 3.0, 0.9 }, { 0.05, 0.2, 0.7 }),
                  TabulatedBidFunction(Role::undiscounted, { 0.0, 0.5, 1.0 }, { 0.0, 0.4, 0.8 }) };
  std::istringstream in(bid_table_csv(f));
  auto g = read_bid_table_csv(in);
  EXPECT_EQ(g.discounted.valuations(), f.discounted.valuations());
  EXPECT_EQ(g.discounted.bids(), f.discounted.bids());
  EXPECT_EQ(g.undiscounted.bids(), f.undiscounted.bids());
  std::istringstream bad("valuation,bid\n");
  EXPECT_THROW(read_bid_table_csv(bad), FormatError);
}

TEST(TableIo, OutcomesCsv)
{
  SweepRow ok;
  ok.rate = 0.05;
  ok.stats = AuctionOutcomeStats{ 2.0 / 3.0, 0.99, 0.2, 0.2, 0.1, 0.1, 0.4, 0.0666 };
  SweepRow bad;
  bad.rate = 0.1;
  bad.error = "no b*";
  std::vector<SweepRow> rows{ ok, bad };
  auto full = outcomes_csv(rows);
  EXPECT_EQ(full.substr(0, full.find('\n')), outcomes_header);
  EXPECT_NE(full.find("0.05,0.6666666666666666,0.99,0.2,0.2,0.1,0.1,0.4,0.0666,2,0.333,ok"), std::string::npos);
  EXPECT_NE(full.find("0.1,,,,,,,,,,,failed"), std::string::npos);
  auto r3 = outcomes_csv(rows, true);
  EXPECT_NE(r3.find("0.050,0.667,0.990,0.200"), std::string::npos);
}

TEST(TableIo, DistributionJson)
{
  for (auto d : { Distribution::uniform(0, 0.8), Distribution::lognormal(0.5, 2), Distribution::truncated_lognormal(0.4, 3, 0, 0.999) }) {
    auto back = distribution_from_json(to_json(d));
    EXPECT_EQ(back.describe(), d.describe());
    EXPECT_EQ(back.support(), d.support());
  }
  EXPECT_THROW(distribution_from_json(nlohmann::json{ { "kind", "uniform" }, { "lo", 0 }, { "hi", 1 }, { "mid", 0.5 } }),
               FormatError);
  EXPECT_THROW(distribution_from_json(nlohmann::json{ { "kind", "beta" } }), FormatError);
  EXPECT_THROW(distribution_from_json(nlohmann::json{ { "kind", "uniform" }, { "lo", 0 } }), FormatError);
  EXPECT_THROW(distribution_from_json(nlohmann::json{ { "kind", "uniform" }, { "lo", 1 }, { "hi", 0 } }), FormatError);
}

TEST(Grid, Expansion)
{
  EXPECT_EQ(cli::parse_grid("0,0.05,...,0.25"), (std::vector<double>{ 0, 0.05, 0.1, 0.15, 0.2, 0.25 }));
  EXPECT_EQ(cli::parse_grid("0.15"), (std::vector<double>{ 0.15 }));
  EXPECT_EQ(cli::parse_grid("0.1, 0.2"), (std::vector<double>{ 0.1, 0.2 }));
  EXPECT_THROW(cli::parse_grid("0,...,1"), std::exception);
  EXPECT_THROW(cli::parse_grid("0,0.3,...,1"), std::exception);
  EXPECT_THROW(cli::parse_grid("x"), std::exception);
}

TEST(Cli, SolveWritesTableAndReport)
{
  TempDir dir;
  auto r = run({ "solve", "--out", dir / "bids.csv", "--probes", "11" });
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream table(dir / "bids.csv");
  auto f = read_bid_table_csv(table);
  for (std::size_t i = 0; i < f.undiscounted.size(); i += 500)
    EXPECT_NEAR(f.undiscounted.bids()[i], 0.8 * f.undiscounted.valuations()[i], 1e-3);
  auto rep = nlohmann::json::parse(slurp(dir / "bids.csv.json"));
  EXPECT_NEAR(rep.at("bstar").get<double>(), 0.8, 1e-4);
}

TEST(Cli, SolveWithBadBracketExitsThree)
{
  TempDir dir;
  spit(dir / "cfg.json", R"({"solver": {"bracket": [0.9, 0.99]}})");
  auto r = run({ "solve", "--config", dir / "cfg.json" });
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("bracket"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyExitsTwo)
{
  TempDir dir;
  spit(dir / "cfg.json", R"({"solver": {"stpes": 100}})");
  EXPECT_EQ(run({ "solve", "--config", dir / "cfg.json" }).code, 2);
  spit(dir / "cfg.json", R"({"colour": 1})");
  EXPECT_EQ(run({ "solve", "--config", dir / "cfg.json" }).code, 2);
  spit(dir / "cfg.json", "{not json");
  EXPECT_EQ(run({ "solve", "--config", dir / "cfg.json" }).code, 2);
  EXPECT_EQ(run({ "solve", "--config", dir / "missing.json" }).code, 2);
}

TEST(Cli, FlagsOverrideConfig)
{
  TempDir dir;
  spit(dir / "cfg.json", R"({"solver": {"steps": 100000, "rate": 0.2}})");
  auto r = run({ "solve", "--config", dir / "cfg.json", "--steps", "1000", "--rate", "0", "--probes", "3" });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("knots=1001,1001"), std::string::npos) << r.out;
}

TEST(Cli, OutcomesSweep)
{
  TempDir dir;
  spit(dir / "cfg.json", R"({"solver": {"steps": 2000}})");
  auto r = run({ "outcomes", "--config", dir / "cfg.json", "--sweep", "0,0.05,...,0.25", "--out", dir / "t.csv" });
  ASSERT_EQ(r.code, 0) << r.err;
  auto text = slurp(dir / "t.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_EQ(text.substr(0, text.find('\n')), outcomes_header);

  r = run({ "outcomes", "--config", dir / "cfg.json", "--sweep", "0.15", "--round3" });
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
  EXPECT_EQ(r.out.rfind("0.150,", std::string::npos) != std::string::npos, true);
}

TEST(Cli, OutcomesFailedRowWarns)
{
  TempDir dir;
  spit(dir / "cfg.json", R"({"solver": {"steps": 1000, "bracket": [0.9, 0.99]}})");
  auto r = run({ "outcomes", "--config", dir / "cfg.json", "--sweep", "0.1" });
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("failed"), std::string::npos);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, VerifyIsReproducible)
{
  auto a = run({ "verify", "--theorem", "additive", "--seed", "9", "--trials", "3000" });
  auto b = run({ "verify", "--theorem", "additive", "--seed", "9", "--trials", "3000" });
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("result=PASS"), std::string::npos);
  EXPECT_EQ(run({ "verify", "--trials", "0" }).code, 2);
  EXPECT_EQ(run({ "verify", "--theorem", "pythagoras" }).code, 2);
}

TEST(Cli, PlotdataCurves)
{
  TempDir dir;
  ASSERT_EQ(run({ "solve", "--rate", "0.25", "--steps", "2000", "--probes", "3", "--out", dir / "s.csv" }).code, 0);
  auto r = run({ "plotdata", "--solve", dir / "s.csv.json" });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "role,r,valuation,bid");
  EXPECT_NE(r.out.find("discounted,0.25,"), std::string::npos);
  EXPECT_NE(r.out.find("undiscounted,0.25,"), std::string::npos);

  spit(dir / "empty.json", "");
  EXPECT_EQ(run({ "plotdata", "--solve", dir / "empty.json" }).code, 2);
  spit(dir / "empty.json", "{}");
  EXPECT_EQ(run({ "plotdata", "--solve", dir / "empty.json" }).code, 2);
}

TEST(Cli, PlotdataSymmetricCurvesCoincide)
{
  TempDir dir;
  ASSERT_EQ(run({ "solve", "--steps", "2000", "--probes", "3", "--out", dir / "s.csv" }).code, 0);
  auto stored = read_solve_report(nlohmann::json::parse(slurp(dir / "s.csv.json")));
  for (double v = 0.05; v < 1.0; v += 0.05)
    EXPECT_NEAR(stored.tables.discounted.bid_at(v), stored.tables.undiscounted.bid_at(v), 1e-9);
}

TEST(Cli, EstimateEndToEnd)
{
  TempDir dir;
  // bids of 5 symmetric U[0,1] bidders at 0.8 v
  std::ofstream f(dir / "bids.csv");
  f << "auction_id,bidder_class,bid\n";
  std::uint64_t state = 1;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>((state >> 11) + 1) * 0x1.0p-53;
  };
  for (int a = 0; a < 5000; ++a) {
    f << "a" << a << ",discounted," << 0.8 * next() << "\n";
    for (int j = 0; j < 4; ++j)
      f << "a" << a << ",other," << 0.8 * next() << "\n";
  }
  f << "a0,other,-3\n";
  f.close();

  auto r = run({ "estimate", "--bids", dir / "bids.csv", "--rate", "0", "--out", dir / "est.csv" });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find(":25002:"), std::string::npos) << r.err;
  auto text = slurp(dir / "est.csv");
  EXPECT_EQ(text.substr(0, text.find(',')), "class");
  EXPECT_NE(text.find("\ndiscounted,"), std::string::npos);
  EXPECT_NE(text.find("\nother,"), std::string::npos);

  EXPECT_EQ(run({ "estimate", "--bids", dir / "bids.csv", "--rate", "1.5" }).code, 2);
  spit(dir / "nohdr.csv", "a1,other,2.5\n");
  auto bad = run({ "estimate", "--bids", dir / "nohdr.csv" });
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("auction_id,bidder_class,bid"), std::string::npos);
}

TEST(Cli, UsageErrors)
{
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({ "frobnicate" }).code, 2);
  EXPECT_EQ(run({ "solve", "--steps", "many" }).code, 2);
  EXPECT_EQ(run({ "solve", "--steps", "10" }).code, 2);
}
