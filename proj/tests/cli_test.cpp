// Copyright 2026 The melodyclf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the melodyclf executable end to end through the shell.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "melody/performance.hpp"
#include "melody/pipeline.hpp"

namespace melody {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("melody_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  Result run(const std::string& args) {
    const fs::path log = root_ / "log.txt";
    const std::string cmd = std::string(MELODYCLF_BINARY) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_file(log);
    return r;
  }

  std::string p(const std::string& name) const { return (root_ / name).string(); }

  fs::path root_;
};

TEST_F(CliTest, UsageErrorsExitOneWithGrammar) {
  auto r = run("");
  EXPECT_EQ(r.code, 1);
  r = run("midi2events --in x");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("--labels"), std::string::npos) << r.output;
  r = run("synth-data --n 3 --out " + p("s"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("--task"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(p("s")));
  EXPECT_EQ(run("train --data a --out b --cell rnn").code, 1);
  EXPECT_EQ(run("sweep --data a --labels b --out c --steps 10,0").code, 1);
  EXPECT_EQ(run("no-such-command").code, 1);
}

TEST_F(CliTest, HelpExitsZero) {
  auto r = run("pianoroll --help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("--col-fs"), std::string::npos);
}

TEST_F(CliTest, DataErrorsExitTwoWithoutPartialOutput) {
  write_file_atomic(p("labels.csv"), "name,label\na,1\n");
  auto r = run("midi2events --in " + p("") + " --labels " + p("labels.csv") + " --out " + p("out.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(p("out.jsonl")));

  write_file_atomic(p("labels.csv"), "id,label\nmissing,1\n");
  EXPECT_EQ(run("midi2events --in " + p("") + " --labels " + p("labels.csv") + " --out " + p("out.jsonl")).code, 2);
  EXPECT_FALSE(fs::exists(p("out.jsonl")));

  write_file_atomic(p("bad.jsonl"), "{not json\n");
  EXPECT_EQ(run("train --data " + p("bad.jsonl") + " --out " + p("run")).code, 2);
  EXPECT_FALSE(fs::exists(p("run")));
  EXPECT_FALSE(fs::exists(p("run.partial")));
}

TEST_F(CliTest, SynthEncodeTrainPredictEvaluate) {
  ASSERT_EQ(run("synth-data --task pitch --n 20 --seed 3 --out " + p("midi")).code, 0);
  EXPECT_TRUE(fs::exists(p("midi/labels.csv")));
  EXPECT_TRUE(fs::exists(p("midi/synth_00000.mid")));

  ASSERT_EQ(run("midi2events --in " + p("midi") + " --labels " + p("midi/labels.csv") + " --steps 100 --out " +
                p("data.jsonl"))
                .code,
            0);
  std::istringstream jsonl(read_file(p("data.jsonl")));
  const auto data = read_jsonl(jsonl);
  ASSERT_EQ(data.size(), 20u);
  for (const auto& s : data) {
    EXPECT_EQ(s.steps_per_second, 100);
    for (int id : s.events) EXPECT_LT(id, 278);
  }

  const std::string flags = " --epochs 2 --checkpoint-epoch 1 --seed 5";
  ASSERT_EQ(run("train --data " + p("data.jsonl") + " --out " + p("run") + flags).code, 0);
  EXPECT_TRUE(fs::exists(p("run/metrics.csv")));
  EXPECT_TRUE(fs::exists(p("run/checkpoints/epoch_001/manifest.txt")));
  EXPECT_TRUE(fs::exists(p("run/checkpoints/epoch_002/params.bin")));
  EXPECT_EQ(read_file(p("run/metrics.csv")).substr(0, 40), "epoch,train_loss,train_auc,val_loss,val_")
      << read_file(p("run/metrics.csv"));

  ASSERT_EQ(run("predict --checkpoint " + p("run/checkpoints/epoch_001") + " --data " + p("data.jsonl") +
                " --out " + p("preds.jsonl"))
                .code,
            0);
  EXPECT_EQ(read_file(p("preds.jsonl")), read_file(p("run/predictions_epoch_001.jsonl")));

  auto r = run("eval-auc --predictions " + p("preds.jsonl") + " --labels " + p("midi/labels.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  const double value = std::stod(r.output);
  EXPECT_GE(value, 0.0);
  EXPECT_LE(value, 1.0);

  // Rerunning with the same seed reproduces the run byte for byte.
  ASSERT_EQ(run("train --data " + p("data.jsonl") + " --out " + p("run2") + flags).code, 0);
  EXPECT_EQ(read_file(p("run/metrics.csv")), read_file(p("run2/metrics.csv")));
  EXPECT_EQ(read_file(p("run/checkpoints/epoch_002/params.bin")), read_file(p("run2/checkpoints/epoch_002/params.bin")));

  // A checkpoint never accepts data encoded at another resolution.
  ASSERT_EQ(run("midi2events --in " + p("midi") + " --labels " + p("midi/labels.csv") + " --steps 1 --out " +
                p("coarse.jsonl"))
                .code,
            0);
  EXPECT_EQ(run("predict --checkpoint " + p("run/checkpoints/epoch_001") + " --data " + p("coarse.jsonl") +
                " --out " + p("x.jsonl"))
                .code,
            2);
}

TEST_F(CliTest, SweepWritesOneDirectoryPerStep) {
  ASSERT_EQ(run("synth-data --task timing --n 16 --seed 1 --out " + p("midi")).code, 0);
  const std::string args = "sweep --data " + p("midi") + " --labels " + p("midi/labels.csv") +
                           " --steps 10,1 --epochs 2 --checkpoint-epoch 1 --seed 7 --out ";
  ASSERT_EQ(run(args + p("runs")).code, 0);
  for (const char* dir : {"steps_10", "steps_1"}) {
    const fs::path d = root_ / "runs" / dir;
    EXPECT_TRUE(fs::exists(d / "metrics.csv")) << dir;
    EXPECT_TRUE(fs::exists(d / "checkpoints/epoch_001/manifest.txt")) << dir;
    EXPECT_TRUE(fs::exists(d / "checkpoints/epoch_002/manifest.txt")) << dir;
    EXPECT_TRUE(fs::exists(d / "predictions_epoch_001.jsonl")) << dir;
  }
  EXPECT_NE(read_file(p("runs/steps_1/checkpoints/epoch_001/manifest.txt")).find("steps_per_second 1\n"),
            std::string::npos);
  ASSERT_EQ(run(args + p("runs_again")).code, 0);
  EXPECT_EQ(read_file(p("runs/steps_10/metrics.csv")), read_file(p("runs_again/steps_10/metrics.csv")));
  EXPECT_EQ(read_file(p("runs/steps_1/checkpoints/epoch_002/params.bin")),
            read_file(p("runs_again/steps_1/checkpoints/epoch_002/params.bin")));
}

TEST_F(CliTest, DecodeAndPianoroll) {
  ASSERT_EQ(run("synth-data --task pitch --n 4 --seed 2 --out " + p("midi")).code, 0);
  ASSERT_EQ(run("midi2events --in " + p("midi") + " --labels " + p("midi/labels.csv") + " --steps 100 --out " +
                p("data.jsonl"))
                .code,
            0);
  ASSERT_EQ(run("events2midi --in " + p("data.jsonl") + " --out " + p("decoded")).code, 0);
  EXPECT_TRUE(fs::exists(p("decoded/synth_00003.mid")));
  EXPECT_TRUE(fs::exists(p("decoded/labels.csv")));

  ASSERT_EQ(run("pianoroll --in " + p("midi") + " --labels " + p("midi/labels.csv") + " --out " + p("roll.txt")).code,
            0);
  const std::string roll = read_file(p("roll.txt"));
  EXPECT_EQ(std::count(roll.begin(), roll.end(), '\n'), 4);
  // 16 bars at 120 QPM and 8 frames per second.
  const std::string first = roll.substr(0, roll.find('\n'));
  EXPECT_LE(std::count(first.begin(), first.end(), ',') + 1, 256);
}

TEST_F(CliTest, IngestSkipsBadFiles) {
  fs::create_directories(p("xml"));
  write_file_atomic(p("xml/good.xml"),
                    "<score-partwise><part-list/><part id=\"P1\"><measure><attributes><divisions>1</divisions>"
                    "</attributes><note><pitch><step>C</step><octave>4</octave></pitch><duration>2</duration>"
                    "</note></measure></part></score-partwise>");
  write_file_atomic(p("xml/bad.xml"), "<score-timewise/>");
  write_file_atomic(p("xml/zipped.mxl"), "PK\x03\x04");
  auto r = run("ingest-musicxml --in " + p("xml") + " --bars 16 --out " + p("mid"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(p("mid/good.mid")));
  EXPECT_FALSE(fs::exists(p("mid/bad.mid")));
  EXPECT_NE(r.output.find("bad.xml"), std::string::npos);
  EXPECT_NE(r.output.find("zipped.mxl"), std::string::npos);
}

}  // namespace
}  // namespace melody
