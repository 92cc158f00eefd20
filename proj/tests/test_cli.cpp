#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rbood/cli.hpp"
#include "rbood/error.hpp"
#include "rbood/persist.hpp"
#include "rbood/synthetic.hpp"
#include "rbood/table.hpp"

using namespace rbood;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args, const std::string& input = {}) {
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = rbood::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_table(const fs::path& p, const FeatureTable& t) {
  std::ofstream out(p);
  write_csv(out, t);
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("rbood_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + std::to_string(reinterpret_cast<std::uintptr_t>(&dir_) % 100000));
    fs::create_directories(dir_);
    MixtureSpec spec;
    spec.features = 3;
    write_table(dir_ / "train.csv", generate_mixture(spec, 12000, 1));
    write_table(dir_ / "op.csv", generate_mixture(spec, 300, 2));
    spec.shift = 3;
    write_table(dir_ / "ood.csv", generate_mixture(spec, 300, 3));
    auto r = invoke({"induce", "--data", p("train.csv"), "--out", p("rules.txt"), "--max-depth", "3", "--min-leaf", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"baseline", "--data", p("train.csv"), "--rules", p("rules.txt"), "--out", p("base.json"), "--ns", "300",
             "--ntr", "30", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string p(const std::string& name) { return (dir_ / name).string(); }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, BaselinesAreByteIdenticalAcrossRuns) {
  auto r = invoke({"baseline", "--data", p("train.csv"), "--rules", p("rules.txt"), "--out", p("again.json"), "--ns", "300",
                "--ntr", "30", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(p("base.json")), slurp(p("again.json")));
  auto bundle = load_baselines(p("base.json"));
  EXPECT_EQ(baselines_to_text(bundle), slurp(p("base.json")));
  EXPECT_EQ(baselines_from_text(baselines_to_text(bundle)).baselines, bundle.baselines);
  EXPECT_EQ(bundle.training.training.size(), 30u);
  EXPECT_NE(r.out.find("fingerprint"), std::string::npos);
}

TEST_F(Cli, DetectExitCodes) {
  auto in = invoke({"detect", "--data", p("op.csv"), "--rules", p("rules.txt"), "--baseline", p("base.json")});
  EXPECT_EQ(in.code, rbood::cli::kExitInDistribution) << in.err;
  auto doc = nlohmann::json::parse(in.out);
  EXPECT_EQ(doc["verdict"], "in-distribution");
  auto out = invoke({"detect", "--data", p("ood.csv"), "--rules", p("rules.txt"), "--baseline", p("base.json"), "--format",
                  "csv"});
  EXPECT_EQ(out.code, rbood::cli::kExitOutOfDistribution) << out.err;
  EXPECT_EQ(out.out.rfind("metric,", 0), 0u);
}

TEST_F(Cli, TamperedOrMismatchedBaselineExitsWithFingerprintCode) {
  auto text = slurp(p("base.json"));
  auto pos = text.find("\"seed\": 5");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"seed\": 6");
  std::ofstream(p("tampered.json")) << text;
  auto r = invoke({"detect", "--data", p("op.csv"), "--rules", p("rules.txt"), "--baseline", p("tampered.json")});
  EXPECT_EQ(r.code, rbood::cli::kExitFingerprint);
  EXPECT_FALSE(r.err.empty());

  std::ofstream(p("other_rules.txt")) << "if x1 <= 0 then c0\nif x1 > 0 then c1\n";
  r = invoke({"detect", "--data", p("op.csv"), "--rules", p("other_rules.txt"), "--baseline", p("base.json")});
  EXPECT_EQ(r.code, rbood::cli::kExitFingerprint);
  r = invoke({"stream", "--data", p("op.csv"), "--rules", p("other_rules.txt"), "--baseline", p("base.json")});
  EXPECT_EQ(r.code, rbood::cli::kExitFingerprint);
}

TEST_F(Cli, ConfigurationErrors) {
  auto r = invoke({"baseline", "--data", p("train.csv"), "--rules", p("rules.txt"), "--out", p("g.json"), "--mode", "group",
                "--nop", "1", "--ns", "300", "--ntr", "30"});
  EXPECT_EQ(r.code, rbood::cli::kExitError);
  EXPECT_FALSE(r.err.empty());
  r = invoke({"induce", "--data", p("op.csv"), "--label", "missing"});
  EXPECT_EQ(r.code, rbood::cli::kExitError);
  r = invoke({"detect", "--data", p("nope.csv"), "--rules", p("rules.txt"), "--baseline", p("base.json")});
  EXPECT_EQ(r.code, rbood::cli::kExitError);
  r = invoke({"baseline", "--data", p("train.csv"), "--rules", p("rules.txt"), "--out", p("big.json"), "--ns", "5000"});
  EXPECT_EQ(r.code, rbood::cli::kExitError);
  EXPECT_NE(r.err.find("5000"), std::string::npos);
  EXPECT_EQ(invoke({"bogus"}).code, rbood::cli::kExitError);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(p("run.cfg")) << "# baseline settings\nns = 200\nntr = 20\nseed = 5\n";
  auto r = invoke({"baseline", "--config", p("run.cfg"), "--data", p("train.csv"), "--rules", p("rules.txt"), "--out",
                p("cfg.json"), "--ns", "300"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto b = load_baselines(p("cfg.json")).baselines;
  EXPECT_EQ(b.config.n_s, 300u);
  EXPECT_EQ(b.config.n_tr, 20u);
}

TEST_F(Cli, GroupModeBaselineAndDetect) {
  auto r = invoke({"baseline", "--data", p("train.csv"), "--rules", p("rules.txt"), "--out", p("group.json"), "--mode",
                "group", "--ns", "100", "--ntr", "24", "--nop", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rbi"), std::string::npos);
  r = invoke({"detect", "--data", p("ood.csv"), "--rules", p("rules.txt"), "--baseline", p("group.json")});
  EXPECT_EQ(r.code, rbood::cli::kExitOutOfDistribution) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["mode"], "group");
}

TEST_F(Cli, StreamWritesTicksAndWarnsOnWindowMismatch) {
  auto r = invoke({"stream", "--data", "-", "--rules", p("rules.txt"), "--baseline", p("base.json"), "--ns", "250",
                "--stride", "25"},
               slurp(p("op.csv")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("300"), std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "sample_index,metric,value,base_min,base_max,flag,verdict");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3 * 3);  // ticks at 249, 274, 299
}

TEST_F(Cli, EvalSummary) {
  auto r = invoke({"eval", "--in-source", "mixture:features=3", "--ood-source", "mixture:features=3,shift=3", "--ns", "200",
                "--ntr", "10", "--repetitions", "4", "--min-leaf", "50", "--max-depth", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["repetitions"], 4);
  EXPECT_EQ(doc["fnr"], 0.0);
}

TEST_F(Cli, Featurize) {
  auto r = invoke({"featurize", "--data", p("op.csv"), "--columns", "x1", "--window", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_NE(header.find("x1_mean"), std::string::npos);
  EXPECT_NE(header.find("x1_kurtosis"), std::string::npos);
}
