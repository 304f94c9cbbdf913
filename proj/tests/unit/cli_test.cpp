#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "experiment.hpp"
#include "sfn/model_io.hpp"

namespace sfn::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sfn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

const std::vector<std::string> kQuick = {"--max-depth", "1", "--max-iters", "40", "--threads", "1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--algo", "nope", "--out", path("m.json")}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--reduction", "0", "--out", path("m.json")}).code, kExitUsage);
  EXPECT_EQ(cli({"predict"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, MissingFilesAreDataErrors) {
  EXPECT_EQ(cli({"train", "--data", path("missing.csv"), "--out", path("m.json")}).code, kExitData);
  EXPECT_EQ(cli({"predict", "--model", path("missing.json")}).code, kExitData);
  EXPECT_EQ(cli({"report", "--log", path("missing.jsonl")}).code, kExitData);
}

TEST_F(CliTest, TrainPredictReport) {
  const auto model = path("m.json");
  const auto r = cli(with({"train", "--data", "synthetic-grid", "--out", model}, kQuick));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# config ", 0), 0u);
  EXPECT_NE(r.out.find("weights"), std::string::npos);
  EXPECT_TRUE(fs::exists(model + ".steps.jsonl"));
  EXPECT_EQ(model_kind(read_text_file(model)), "sfn");

  {
    std::ofstream csv(path("pts.csv"));
    csv << "x1,x2\n0.1,0.2\n-0.5,0.5\n0.9,-0.3\n";
  }
  const auto p = cli({"predict", "--model", model, "--data", path("pts.csv")});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  std::istringstream lines(p.out);
  std::string line;
  std::size_t values = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') ++values;
  EXPECT_EQ(values, 3u);

  const auto grid = cli({"predict", "--model", model, "--format", "records"});
  ASSERT_EQ(grid.code, kExitOk) << grid.err;
  EXPECT_GE(std::count(grid.out.begin(), grid.out.end(), '\n'), 100);

  const auto rep = cli({"report", "--log", model + ".steps.jsonl"});
  EXPECT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_NE(rep.out.find("accepted"), std::string::npos);
}

TEST_F(CliTest, FrsFullReductionWritesFlkBytes) {
  const auto a = path("flk.json"), b = path("frs.json");
  ASSERT_EQ(cli(with({"train", "--algo", "flk", "--seed", "3", "--out", a}, kQuick)).code, kExitOk);
  ASSERT_EQ(cli(with({"train", "--algo", "frs", "--reduction", "1", "--seed", "3", "--out", b}, kQuick)).code,
            kExitOk);
  EXPECT_EQ(read_text_file(a), read_text_file(b));
}

TEST_F(CliTest, SeriesPrediction) {
  const auto model = path("rtt.json");
  ASSERT_EQ(cli(with({"train", "--data", "rtt-surrogate", "--length", "600", "--prefix", "300",
                      "--out", model}, kQuick))
                .code,
            kExitOk);
  {
    std::ofstream csv(path("s.csv"));
    csv << "rtt\n30\n31\n33\n32\n35\n";
  }
  const auto p = cli({"predict", "--model", model, "--data", path("s.csv"), "--series"});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  std::istringstream lines(p.out);
  std::string line;
  std::size_t values = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') ++values;
  EXPECT_EQ(values, 2u);
  {
    std::ofstream csv(path("short.csv"));
    csv << "rtt\n30\n31\n";
  }
  EXPECT_EQ(cli({"predict", "--model", model, "--data", path("short.csv"), "--series"}).code, kExitData);
}

TEST_F(CliTest, BenchmarkRecordsAreDeterministic) {
  const std::vector<std::string> args = {"benchmark", "--data", "synthetic-grid", "--runs", "2",
                                         "--methods", "flk,frs,es-bp", "--max-depth", "1",
                                         "--max-iters", "40", "--mlp-epochs", "50",
                                         "--hidden-grid", "1,2", "--format", "records"};
  const auto a = cli(args), b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"summary\""), std::string::npos);
}

TEST(Methods, Parse) {
  EXPECT_EQ(parse_methods("all").size(), 8u);
  const auto m = parse_methods("b,br-bp");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(method_name(m[0]), "B-SFN");
  EXPECT_EQ(method_name(m[1]), "BR-BP");
}

}  // namespace
}  // namespace sfn::cli
