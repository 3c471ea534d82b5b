#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellspace/cellspace.hpp"
#include "cellspace/cli.hpp"

using namespace cellspace;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cellspace_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateProduct) {
  const auto r = run({"generate", "product", "--sizes", "2,2,2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.err, "points: 8 cells: 15\n");
  const SpaceDoc doc = read_space(r.out);
  EXPECT_EQ(doc.tree, product_space({{2, 2, 2}}));
}

TEST_F(Cli, GenerateFatCantorToFile) {
  const auto r = run({"generate", "fat-cantor", "--depth", "4", "--out", path("f.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "points: 16 cells: 31\n");
  const SpaceDoc doc = read_space(slurp(path("f.json")));
  ASSERT_TRUE(doc.embedding.has_value());
  EXPECT_EQ(doc.embedding->leaves, fat_cantor(4).embedding.leaves);
}

TEST_F(Cli, GenerateRandomIsRepeatable) {
  const auto a = run({"generate", "random", "--seed", "7", "--points", "20"});
  const auto b = run({"generate", "random", "--seed", "7", "--points", "20"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_space(a.out).tree.point_count(), 20U);
  EXPECT_NE(a.out, run({"generate", "random", "--seed", "8", "--points", "20"}).out);
}

TEST_F(Cli, GenerateWeightsAndMeasures) {
  const auto r = run({"generate", "product", "--sizes", "2,2", "--rho", "1,1/3", "--level-weights", "3/4,1/4;1/2,1/2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const SpaceDoc doc = read_space(r.out);
  EXPECT_EQ((*doc.weight)(CellTree::root()), Rational(1));
  EXPECT_EQ(doc.measure->atom(0), Rational(3, 8));
  const auto ray = run({"generate", "ray", "--arity", "3", "--depth", "2", "--beta", "1/2", "--measure", "uniform"});
  ASSERT_EQ(ray.code, 0) << ray.err;
  EXPECT_EQ(read_space(ray.out).tree, product_space({{3, 3}}));
}

TEST_F(Cli, GenerateBadParameters) {
  EXPECT_EQ(run({"generate", "product"}).code, 2);
  EXPECT_EQ(run({"generate", "product", "--sizes", "2,1"}).code, 2);
  EXPECT_EQ(run({"generate", "cantor"}).code, 2);
  EXPECT_EQ(run({"generate", "mystery"}).code, 2);
  EXPECT_EQ(run({"generate", "fat-cantor", "--depth", "2", "--theta", "1/2,2"}).code, 2);
  EXPECT_EQ(run({"generate", "product", "--sizes", "2", "--level-weights", "1/2,1/3"}).code, 2);
  EXPECT_EQ(run({"generate", "random", "--points", "100", "--branch", "2", "--max-depth", "3"}).code, 2);
  EXPECT_EQ(run({"generate", "product", "--sizes", "x"}).code, 2);
}

TEST_F(Cli, UsageAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const auto h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("distortion"), std::string::npos);
}

TEST_F(Cli, ValidateOutcomes) {
  run({"generate", "product", "--sizes", "2,3", "--beta", "1/2", "--out", path("p.json")});
  const auto ok = run({"validate", path("p.json")});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("weight metric ultrametric inequality: ok"), std::string::npos);
  EXPECT_NE(ok.out.find("weight metric balls are cells: ok"), std::string::npos);

  const auto overlap = run({"validate", write("o.json", R"({"points":["a","b","c"],"cells":[["a","b","c"],["a","b"],["b","c"],["a"],["b"],["c"]]})")});
  EXPECT_EQ(overlap.code, 1);
  EXPECT_NE(overlap.out.find("structure: FAIL Overlap"), std::string::npos) << overlap.out;

  EXPECT_EQ(run({"validate", write("t.json", R"({"children":[{"point":"a"},)")}).code, 2);
  EXPECT_EQ(run({"validate", path("missing.json")}).code, 2);

  const auto missing_singleton = write("l.json", R"({"points":["a","b"],"cells":[["a","b"]]})");
  EXPECT_EQ(run({"validate", missing_singleton}).code, 0);
  EXPECT_EQ(run({"validate", "--strict-base", missing_singleton}).code, 1);
}

TEST_F(Cli, ValidateMetricCsv) {
  run({"generate", "fat-cantor", "--depth", "3", "--out", path("f.json")});
  const auto f = fat_cantor(3);
  write("f.csv", write_metric_csv(euclidean_table(f.tree, f.embedding)));
  const auto r = run({"validate", path("f.json"), "--metric", path("f.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("metric triangle inequality: ok"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("metric balls are cells: FAIL"), std::string::npos) << r.out;

  write("bad.csv", ",a,b\na,0,1\nb,1,0\n");
  EXPECT_EQ(run({"validate", path("f.json"), "--metric", path("bad.csv")}).code, 2);
}

TEST_F(Cli, AnalyzeMiddleThirds) {
  run({"generate", "cantor", "--depth", "3", "--out", path("c.json")});
  const auto r = run({"analyze", path("c.json"), "--format", "json", "--measure", "uniform"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["geometry"], "interval");
  EXPECT_EQ(j["alpha"], "1/3");
  EXPECT_EQ(j["beta"], "1/3");
  EXPECT_EQ(j["gamma"], "1/3");
  EXPECT_EQ(j["k1"], 2);
  EXPECT_EQ(j["k2"], "2");
  EXPECT_EQ(j["measure_doubling"]["value"], "5/2");
  EXPECT_EQ(j["regular"], true);

  const auto table = run({"analyze", path("c.json")});
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("alpha: 1/3\n"), std::string::npos);
  EXPECT_NE(table.out.find("witness gamma:"), std::string::npos);
  const auto decimals = run({"analyze", path("c.json"), "--decimals", "3"});
  EXPECT_NE(decimals.out.find("alpha: 0.333\n"), std::string::npos) << decimals.out;
}

TEST_F(Cli, AnalyzeMeasuresAndSinglePoint) {
  run({"generate", "product", "--sizes", "2,2", "--measure", "uniform", "--out", path("b.json")});
  const Json j = Json::parse(run({"analyze", path("b.json"), "--format", "json"}).out);
  EXPECT_EQ(j["k2"], "2");
  EXPECT_EQ(j["geometry"], "none");

  const Json s = Json::parse(run({"analyze", write("s.json", R"({"point":"p"})"), "--format", "json"}).out);
  EXPECT_EQ(s["k1"], 0);
  EXPECT_EQ(s["points"], 1);
}

TEST_F(Cli, AnalyzeInputErrors) {
  run({"generate", "product", "--sizes", "2,2", "--out", path("b.json")});
  EXPECT_EQ(run({"analyze", path("b.json"), "--geometry", "weight"}).code, 2);
  EXPECT_EQ(run({"analyze", path("b.json"), "--geometry", "metric"}).code, 2);
  EXPECT_EQ(run({"analyze", path("b.json"), "--format", "xml"}).code, 2);
  write("m.csv", ",x,y\nx,0,1\ny,1,0\n");
  EXPECT_EQ(run({"analyze", path("b.json"), "--metric", path("m.csv")}).code, 2);
}

TEST_F(Cli, DistortionVerdicts) {
  const auto pass = run({"distortion", "product:2", "--depths", "4,6", "--metric-a", "geometric:1/2", "--metric-b",
                         "geometric:1/3", "--grid", "pow2:8"});
  EXPECT_EQ(pass.code, 0) << pass.out << pass.err;
  EXPECT_EQ(pass.out.rfind("verdict: PASS\n", 0), 0U);

  const auto self = run({"distortion", "cantor", "--depths", "3,5", "--metric-a", "euclidean", "--metric-b", "euclidean",
                         "--grid", "pow2:6"});
  EXPECT_EQ(self.code, 0) << self.out;

  const auto fail = run({"distortion", "fat-cantor", "--depths", "4,6", "--metric-a", "euclidean", "--metric-b",
                         "regular:1/2", "--grid", "pow2:10", "--out", path("run")});
  EXPECT_EQ(fail.code, 1) << fail.out << fail.err;
  EXPECT_NE(fail.out.find("witness: "), std::string::npos);
  const Json v = Json::parse(slurp(path("run/verdict.json")));
  EXPECT_EQ(v["pass"], false);
  EXPECT_EQ(v["witness"].size(), 3U);
  EXPECT_TRUE(fs::exists(path("run/profile_0_depth4.csv")));
  EXPECT_TRUE(fs::exists(path("run/envelope_1_depth6.csv")));
}

TEST_F(Cli, DistortionFromFiles) {
  run({"generate", "product", "--sizes", "2,2,2", "--out", path("a.json")});
  run({"generate", "product", "--sizes", "2,2,2,2", "--out", path("b.json")});
  const auto r = run({"distortion", path("a.json"), path("b.json"), "--metric-a", "regular:1/2", "--metric-b",
                      "regular:1/4", "--grid", "pow2:4"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST_F(Cli, DistortionInputErrors) {
  const std::vector<std::string> base{"distortion", "product:2", "--metric-a", "geometric:1/2", "--metric-b", "geometric:1/3"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args).code;
  };
  EXPECT_EQ(with({"--depths", "3"}), 2);
  EXPECT_EQ(with({"--depths", "3,4", "--grid", "1/2,1"}), 2);
  EXPECT_EQ(with({"--depths", "3,4", "--tol", "0"}), 2);
  EXPECT_EQ(run({"distortion", "product:2", "--depths", "3,4", "--metric-a", "euclidean", "--metric-b", "regular:1/2"}).code, 2);
  EXPECT_EQ(run({"distortion", "product:2", "--depths", "3,4", "--metric-a", "nope", "--metric-b", "regular:1/2"}).code, 2);
}
