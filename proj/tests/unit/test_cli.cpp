// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#ifdef CBRIKB_CLI_PATH

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(CBRIKB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "cbrikb-cli-XXXXXX").string();
    ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name) << body;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run("--no-such-flag"), 2);
  EXPECT_EQ(run("answer"), 2);
}

TEST_F(Cli, ConfigErrorExitsThree) {
  const auto cfg = write("bad.cfg", "bogus_key = 1\n");
  EXPECT_EQ(run("experiment --config " + cfg.string()), 3);
}

TEST_F(Cli, MissingFileIsNotSuccess) {
  EXPECT_EQ(run("ingest --kb " + (dir_ / "absent.tsv").string()), 2);
}

TEST_F(Cli, SynthThenExperiment) {
  ASSERT_EQ(run("synth --out " + dir_.string()), 0);
  const auto cfg = write("one.cfg",
                         "kg = kb.tsv\ntrain = 1hop_train.tsv\ntest = 1hop_test.tsv\n"
                         "use_kbc = false\nuse_text = false\nrevise = false\n"
                         "output_dir = out\n");
  EXPECT_EQ(run("experiment --config " + cfg.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out"));
}

}  // namespace

#endif
