// cli_test.cc

// Copyright 2026  The reslstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "reslstm/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "reslstm/network.h"

namespace reslstm {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string &name) {
  const char *env = std::getenv("RESLSTM_TEST_TMP");
  fs::path dir = env ? env : fs::temp_directory_path() / "reslstm_test";
  dir /= "cli_" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string &s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(Cli, HelpOnEverySubcommand) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"gen-data", "--teacher-scale"}, {"train", "--shuffle-seed"},
      {"eval", "--model"},             {"grad-check", "--tol"},
      {"count-params", "--table1"}};
  for (const auto &[cmd, flag] : cases) {
    const Result r = run({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_NE(r.out.find(flag), std::string::npos) << cmd;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run({"count-params", "--bogus"}).code, cli::kBadFlags);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kBadFlags);
}

TEST(Cli, CountParamsLargeResidualModel) {
  const Result r = run({"count-params", "--depth", "2", "--style", "standard",
                        "--variant", "res1", "--nx", "300", "--nc", "1024",
                        "--nr", "512", "--nnr", "0", "--nout", "1936"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "12504976 (12.5M)\n");
}

TEST(Cli, CountParamsTinyNetwork) {
  const Result r = run({"count-params", "--depth", "1", "--style", "fast",
                        "--nx", "2", "--nc", "3", "--nr", "1", "--nnr", "1",
                        "--nout", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 3), "60 ");
}

TEST(Cli, CountParamsTable) {
  const Result r = run({"count-params", "--table1", "--nout", "1936"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  ASSERT_EQ(rows.size(), 24u);
  EXPECT_EQ(rows[0], "LSTM\t2\t9576336\t9.6M");
  EXPECT_EQ(rows[3], "LSTM Res-1\t2\t12504976\t12.5M");
}

TEST(Cli, FormatMillions) {
  EXPECT_EQ(cli::format_millions(12504976), "12.5M");
  EXPECT_EQ(cli::format_millions(19027856), "19.0M");
  EXPECT_EQ(cli::format_millions(60), "0.0M");
}

TEST(Cli, GenDataIsDeterministic) {
  const fs::path dir = temp_dir("gen");
  for (const char *sub : {"a", "b"}) {
    const Result r = run({"gen-data", "--seed", "7", "--utts", "50", "--out",
                          (dir / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(dir / "a")) {
    const fs::path other = dir / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << other;
    ++files;
  }
  EXPECT_EQ(files, std::distance(fs::directory_iterator(dir / "b"),
                                 fs::directory_iterator{}));
  EXPECT_EQ(count_lines(slurp(dir / "a" / "manifest.txt")), 50u);
}

TEST(Cli, GenDataSeedFromEnvironment) {
  const fs::path dir = temp_dir("envseed");
  ::setenv("RESLSTM_SEED", "11", 1);
  const Result a = run({"gen-data", "--utts", "5", "--out", (dir / "a").string()});
  ::unsetenv("RESLSTM_SEED");
  const Result b = run({"gen-data", "--seed", "11", "--utts", "5", "--out",
                        (dir / "b").string()});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(dir / "a" / "utt00003.feat"), slurp(dir / "b" / "utt00003.feat"));
}

TEST(Cli, GenDataZeroUtterancesIsUsageError) {
  const fs::path dir = temp_dir("zero");
  const Result r = run({"gen-data", "--utts", "0", "--out", (dir / "c").string()});
  EXPECT_EQ(r.code, cli::kBadFlags);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(dir / "c"));
}

TEST(Cli, GenDataUnwritableLeavesNothing) {
  const fs::path dir = temp_dir("unwritable");
  std::ofstream(dir / "file") << "x";
  const Result r = run({"gen-data", "--utts", "3", "--out",
                        (dir / "file" / "sub").string()});
  EXPECT_EQ(r.code, cli::kIoFailure);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Cli, GenDataHeldoutManifest) {
  const fs::path dir = temp_dir("heldout");
  const Result r = run({"gen-data", "--utts", "6", "--heldout", "3", "--out",
                        (dir / "c").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("heldout=3"), std::string::npos);
  EXPECT_EQ(count_lines(slurp(dir / "c" / "heldout.txt")), 3u);
  EXPECT_EQ(count_lines(slurp(dir / "c" / "manifest.txt")), 6u);
}

class TrainedCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    // ctest runs each test in its own process, possibly in parallel.
    dir_ = new fs::path(temp_dir("train_" + std::to_string(::getpid())));
    const Result r = run({"gen-data", "--seed", "3", "--utts", "12", "--heldout",
                          "4", "--emit-teacher", "--out", corpus().string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path corpus() { return *dir_ / "corpus"; }
  static fs::path manifest() { return corpus() / "manifest.txt"; }
  static fs::path dir() { return *dir_; }
  static fs::path *dir_;
};
fs::path *TrainedCorpus::dir_ = nullptr;

TEST_F(TrainedCorpus, TeacherScoresZero) {
  const Result r = run({"eval", "--manifest", (corpus() / "heldout.txt").string(),
                        "--model", (corpus() / "teacher.rlm").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 13), "fer=0.000000 ");
}

TEST_F(TrainedCorpus, ZeroLearningRateKeepsInitialization) {
  const fs::path model = dir() / "lr0.rlm";
  const Result r = run({"train", "--manifest", manifest().string(), "--model",
                        model.string(), "--lr", "0", "--epochs", "2", "--seed",
                        "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Model m = load_model(model.string());
  EXPECT_EQ(m.params.flatten(), init_params(m.config, 5).flatten());
}

TEST_F(TrainedCorpus, TrainPrintsReportsAndLogs) {
  const fs::path model = dir() / "m.rlm", log = dir() / "train.log";
  const Result r = run({"train", "--manifest", manifest().string(), "--dev",
                        (corpus() / "heldout.txt").string(), "--model",
                        model.string(), "--epochs", "3", "--log", log.string(),
                        "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 3u);
  EXPECT_EQ(r.out.substr(0, 13), "epoch=1 loss=");
  EXPECT_EQ(slurp(log), r.out);
  EXPECT_TRUE(fs::exists(model));
  const Result e = run({"eval", "--manifest", manifest().string(), "--model",
                        model.string()});
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(e.out.substr(0, 4), "fer=");
}

TEST_F(TrainedCorpus, TrainIsDeterministic) {
  for (const char *name : {"d1.rlm", "d2.rlm"}) {
    const Result r = run({"train", "--manifest", manifest().string(), "--model",
                          (dir() / name).string(), "--epochs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir() / "d1.rlm"), slurp(dir() / "d2.rlm"));
}

TEST_F(TrainedCorpus, BadFlagsFailBeforeTouchingFiles) {
  const fs::path model = dir() / "never.rlm";
  EXPECT_EQ(run({"train", "--manifest", (dir() / "missing.txt").string(),
                 "--model", model.string(), "--momentum", "1.5"})
                .code,
            cli::kBadFlags);
  EXPECT_EQ(run({"train", "--manifest", (dir() / "missing.txt").string(),
                 "--model", model.string(), "--variant", "res9"})
                .code,
            cli::kBadFlags);
  EXPECT_FALSE(fs::exists(model));
}

TEST_F(TrainedCorpus, MissingInputsAreIoErrors) {
  EXPECT_EQ(run({"train", "--manifest", (dir() / "missing.txt").string(),
                 "--model", (dir() / "x.rlm").string()})
                .code,
            cli::kIoFailure);
  EXPECT_EQ(run({"eval", "--manifest", manifest().string(), "--model",
                 (dir() / "missing.rlm").string()})
                .code,
            cli::kIoFailure);
}

TEST_F(TrainedCorpus, DivergenceIsNumericFailure) {
  const fs::path model = dir() / "diverged.rlm";
  const Result r = run({"train", "--manifest", manifest().string(), "--model",
                        model.string(), "--lr", "1e300", "--clip", "0",
                        "--momentum", "0", "--epochs", "2"});
  EXPECT_EQ(r.code, cli::kNumericFailure) << r.err;
  EXPECT_FALSE(fs::exists(model));
}

TEST_F(TrainedCorpus, ConfigFileWithFlagOverride) {
  const fs::path cfg = dir() / "train.cfg";
  std::ofstream(cfg) << "# experiment\nmanifest=" << manifest().string()
                     << "\nepochs=4\nlr=0\nseed=9\n";
  const fs::path model = dir() / "cfg.rlm";
  const Result r = run({"train", "--config", cfg.string(), "--model",
                        model.string(), "--epochs", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 1u);
  const Model m = load_model(model.string());
  EXPECT_EQ(m.params.flatten(), init_params(m.config, 9).flatten());
}

TEST(Cli, GradCheckDefaultsPass) {
  const Result r = run({"grad-check"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_lines(r.out), 9u);
  EXPECT_NE(r.out.find("max_rel_err="), std::string::npos);
}

TEST(Cli, GradCheckToleranceExceeded) {
  const Result r = run({"grad-check", "--style", "fast", "--variant", "res2",
                        "--tol", "1e-30"});
  EXPECT_EQ(r.code, cli::kToleranceExceeded);
}

}  // namespace
}  // namespace reslstm
