#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hmfmd/bundle.hpp"
#include "hmfmd/cli.hpp"
#include "test_support.hpp"

namespace hmfmd {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string str(const fs::path& p) { return p.string(); }

constexpr const char* kTinyConfig = R"({
  "train": {"lr": 0.01, "batch_size": 16, "max_epochs": 2, "patience": 2, "L_target": 4,
            "hidden_dim": 4, "lstm_layers": 1},
  "synth": {"n_train": 40, "n_dev": 20, "n_test": 10, "L_target": 4, "window_min": 1,
            "window_max": 2, "modality_dims": [2, 3, 2], "seed": 3}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ofstream(dir / "cfg.json") << kTinyConfig;
    ASSERT_EQ(run({"synth", "--config", cfg(), "--out", str(dir / "data")}).code, 0);
  }
  std::string cfg() const { return str(dir / "cfg.json"); }
  test::TempDir dir{"cli"};
};

TEST_F(CliTest, FullPipelineAndManifest) {
  auto r = run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "1", "--out",
                str(dir / "s1")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* m : {"A", "V", "T"}) EXPECT_TRUE(fs::exists(dir / "s1" / m / "params.txt"));

  r = run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "2",
           "--stage1-dir", str(dir / "s1"), "--out", str(dir / "s2")});
  ASSERT_EQ(r.code, 0) << r.err;

  r = run({"eval", "--bundle", str(dir / "s2"), "--bundle", str(dir / "s1" / "A"), "--data",
           str(dir / "data"), "--partition", "test", "--out", str(dir / "ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AUC test"), std::string::npos);
  EXPECT_NE(r.out.find("2 models"), std::string::npos);

  const auto manifest =
      nlohmann::json::parse(read_text_file(dir / "s2" / cli::kRunManifestFile));
  EXPECT_EQ(manifest.at("command"), "train");
  EXPECT_TRUE(manifest.contains("version"));
  bool saw_stage1 = false;
  for (const auto& in : manifest.at("inputs")) {
    EXPECT_EQ(in.at("sha256").get<std::string>().size(), 64u);
    saw_stage1 = saw_stage1 || in.at("path").get<std::string>().find("s1") != std::string::npos;
  }
  EXPECT_TRUE(saw_stage1);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  for (const char* out : {"r1", "r2"}) {
    ASSERT_EQ(run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "1",
                   "--modality", "T", "--out", str(dir / out)})
                  .code,
              0);
  }
  for (const char* f : {"params.txt", "predictions.csv", "report.json", "manifest.json"}) {
    EXPECT_EQ(read_text_file(dir / "r1" / "T" / f), read_text_file(dir / "r2" / "T" / f)) << f;
  }
}

TEST_F(CliTest, ManifestReplaysConfig) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "1",
                 "--modality", "A", "--seed", "5", "--out", str(dir / "a")})
                .code,
            0);
  ASSERT_EQ(run({"train", "--config", str(dir / "a" / cli::kRunManifestFile), "--data",
                 str(dir / "data"), "--stage", "1", "--modality", "A", "--out", str(dir / "b")})
                .code,
            0);
  EXPECT_EQ(read_text_file(dir / "a" / "A" / "params.txt"),
            read_text_file(dir / "b" / "A" / "params.txt"));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"train", "--data", str(dir / "data"), "--out", str(dir / "x")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"eval", "--data", str(dir / "data"), "--out", str(dir / "x")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "2",
                 "--channels", "A,Y", "--out", str(dir / "x")})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "1",
                 "--L-target", "0", "--out", str(dir / "x")})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
}

TEST_F(CliTest, MalformedDataExitsThree) {
  std::ofstream(dir / "data" / "labels.csv") << "sample_id,label\nx,7\n";
  const auto r = run({"train", "--config", cfg(), "--data", str(dir / "data"), "--stage", "1",
                      "--out", str(dir / "x")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("labels.csv:2:"), std::string::npos);
}

TEST(CliGradcheck, PassesAndDetectsCorruption) {
  test::TempDir dir("gc");
  auto r = run({"gradcheck", "--scope", "layers", "--out", str(dir.path())});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out;
  EXPECT_NE(r.out.find("gradcheck passed"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / cli::kRunManifestFile));
  r = run({"gradcheck", "--scope", "layers", "--corrupt", "0.01", "--out", str(dir.path())});
  EXPECT_EQ(r.code, cli::kExitVerificationFailure);
}

TEST(CliVersion, PrintsVersion) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.0.0\n");
}

TEST(Sha256, KnownDigest) {
  test::TempDir dir("sha");
  std::ofstream(dir / "abc") << "abc";
  EXPECT_EQ(cli::sha256_file(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace hmfmd
