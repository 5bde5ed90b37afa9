// Copyright 2026 The dopd Authors
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


#include "dopd/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dopd/commands.hpp"
#include "dopd/error.hpp"
#include "dopd/graph.hpp"

namespace dopd {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("dopd_test_" + tag)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

ExperimentConfig Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in);
}

ErrorCode ParseError(const std::string& text) {
  try {
    Parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

TEST(ConfigTest, PresetsRoundTrip) {
  for (const auto& name : PresetNames()) {
    const ExperimentConfig c = Preset(name);
    std::ostringstream out;
    WriteConfig(out, c);
    EXPECT_EQ(Parse(out.str()), c) << name;
  }
  ExperimentConfig odd;
  odd.kappa = 1.0 / 3;
  odd.problem.tightness = 0.1 + 0.2;
  odd.out_dir = "some dir";
  std::ostringstream out;
  WriteConfig(out, odd);
  EXPECT_EQ(Parse(out.str()), odd);
}

TEST(ConfigTest, PresetGrid) {
  const ExperimentConfig q9 = Preset("pev50-q9");
  EXPECT_EQ(q9.problem.kind, ProblemKind::kPev);
  EXPECT_EQ(q9.problem.num_agents, 50);
  EXPECT_EQ(q9.graph.period_q, 9);
  EXPECT_EQ(q9.kappa, 0.2);
  EXPECT_EQ(Preset("pev100-q1").problem.num_agents, 100);
  EXPECT_EQ(Preset("synthetic-invariant").problem.drift, 0);
  try {
    Preset("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigParse);
  }
}

TEST(ConfigTest, PartialFileKeepsDefaults) {
  const ExperimentConfig c = Parse(
      "# comment\n[problem]\nkind = synthetic\nagents = 4\n[run]\nkappa = 0.1\n"
      "algorithm = centralized\n[graph]\nbalanced = true\n");
  EXPECT_EQ(c.problem.kind, ProblemKind::kSynthetic);
  EXPECT_EQ(c.problem.num_agents, 4);
  EXPECT_EQ(c.kappa, 0.1);
  EXPECT_EQ(c.algorithm, Algorithm::kCentralized);
  EXPECT_TRUE(c.graph.balanced);
  EXPECT_EQ(c.horizon, ExperimentConfig{}.horizon);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_EQ(ParseError("[run]\nkappa = fast\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[run]\nhorizon = 10.5\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[run]\nspeed = 1\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[plot]\ncolor = red\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[problem]\nkind = lattice\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[graph]\nbalanced = yes\n"), ErrorCode::kConfigParse);
  EXPECT_EQ(ParseError("[run\n"), ErrorCode::kConfigParse);
  try {
    Parse("[run]\nspeed = 1\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run.speed"), std::string::npos);
  }
}

TEST(ConfigTest, MissingFileNamesThePath) {
  try {
    LoadConfig("/nonexistent/dir/exp.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/exp.ini"), std::string::npos);
    EXPECT_EQ(ExitCodeFor(e.code()), kExitConfig);
  }
}

TEST(ConfigTest, KappaRangeIsEnforced) {
  ExperimentConfig c = Preset("synthetic-equal-rate");
  c.kappa = 0.3;
  EXPECT_THROW(BuildRunConfig(c), Error);
  c.allow_any_kappa = true;
  EXPECT_EQ(BuildRunConfig(c).schedule.kappa(), 0.3);
  c.kappa = 0;
  c.allow_any_kappa = false;
  EXPECT_THROW(BuildRunConfig(c), Error);
}

TEST(ConfigTest, BuildsGraphsAndChecksAgents) {
  TempDir dir("build");
  ExperimentConfig c = Preset("synthetic-invariant");
  const RunConfig run = BuildRunConfig(c);
  EXPECT_EQ(run.graphs->num_nodes(), 6);
  EXPECT_EQ(run.graphs->period_q, 2);
  SaveGraphSequence((dir.path() / "g.txt").string(), GenerateSwitchingCycle(5, 2, 1));
  c.graph.path = (dir.path() / "g.txt").string();
  EXPECT_THROW(BuildRunConfig(c), Error);
  c.graph.path.clear();
  c.algorithm = Algorithm::kBalanced;
  EXPECT_THROW(BuildRunConfig(c), Error);
  c.graph.balanced = true;
  EXPECT_NO_THROW(BuildRunConfig(c));
}

TEST(CommandTest, RunWritesDeterministicFiles) {
  TempDir dir("run");
  ExperimentConfig c = Preset("synthetic-equal-rate");
  c.horizon = 300;
  c.record_every = 1;
  c.out_dir = (dir.path() / "a").string();
  std::ostringstream out, err;
  ASSERT_EQ(CmdRun(c, out, err), kExitOk) << err.str();
  const std::string name = "run_pushsum_6_2_0.2_1";
  for (const std::string f : {name + ".csv", "metrics_" + name + ".csv", "rates_" + name + ".txt",
                              name + ".ini"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "a" / f)) << f;
  }
  const ExperimentConfig first = c;
  c.out_dir = (dir.path() / "b").string();
  ASSERT_EQ(CmdRun(c, out, err), kExitOk);
  for (const std::string f : {name + ".csv", "metrics_" + name + ".csv"}) {
    EXPECT_EQ(Slurp(dir.path() / "a" / f), Slurp(dir.path() / "b" / f)) << f;
  }
  // The written config reproduces the run.
  EXPECT_EQ(LoadConfig((dir.path() / "a" / (name + ".ini")).string()), first);
}

TEST(CommandTest, RunReportsConfigErrors) {
  ExperimentConfig c = Preset("pev50-q4");
  c.horizon = 2;
  std::ostringstream out, err;
  EXPECT_EQ(CmdRun(c, out, err), kExitConfig);
  EXPECT_NE(err.str().find("horizon"), std::string::npos);
}

TEST(CommandTest, ValidateGraphFiles) {
  TempDir dir("validate");
  const auto good = dir.path() / "good.txt";
  SaveGraphSequence(good.string(), GenerateSwitchingCycle(7, 3, 2));
  std::ostringstream out, err;
  ValidateOptions o;
  o.graph_path = good.string();
  EXPECT_EQ(CmdValidate(o, out, err), kExitOk) << out.str() << err.str();
  EXPECT_NE(out.str().find("ok"), std::string::npos);

  const auto zero = dir.path() / "zero.txt";
  Write(zero, "2 1\n0 0 1\n1 0 0\n");
  out.str("");
  o.graph_path = zero.string();
  EXPECT_EQ(CmdValidate(o, out, err), kExitValidation);
  EXPECT_NE(out.str().find("clause 2"), std::string::npos);

  // Nodes {0, 1} never reach node 2.
  const auto split = dir.path() / "split.txt";
  Write(split, "3 1\n0 0 0.5\n1 0 0.5\n0 1 0.5\n1 1 0.5\n2 2 1\n");
  out.str("");
  o.graph_path = split.string();
  EXPECT_EQ(CmdValidate(o, out, err), kExitValidation);
  EXPECT_NE(out.str().find("clause 3 round 0"), std::string::npos);

  o.graph_path = (dir.path() / "absent.txt").string();
  EXPECT_EQ(CmdValidate(o, out, err), kExitConfig);
}

TEST(CommandTest, RatesTable) {
  TempDir dir("rates");
  const auto csv = dir.path() / "metrics_x.csv";
  std::ostringstream body;
  body << "t,reg,reg_over_t,regc,regc_over_t\n";
  for (double t = 10; t <= 1e5; t *= 10) {
    const double v = std::pow(t, 0.9);
    body << t << ',' << FormatDouble(v) << ',' << FormatDouble(v / t) << ',' << FormatDouble(v)
         << ',' << FormatDouble(v / t) << '\n';
  }
  Write(csv, body.str());
  RatesOptions o;
  o.paths = {csv.string()};
  o.kappa = 0.2;
  std::ostringstream out, err;
  EXPECT_EQ(CmdRates(o, out, err), kExitOk) << err.str();
  EXPECT_NE(out.str().find("0.9"), std::string::npos);
  EXPECT_NE(out.str().find("pass"), std::string::npos);
  o.time_invariant = true;
  o.margin = 0;
  EXPECT_EQ(CmdRates(o, out, err), kExitValidation);

  const auto empty = dir.path() / "empty.csv";
  Write(empty, "");
  o.paths = {empty.string()};
  EXPECT_EQ(CmdRates(o, out, err), kExitConfig);
}

}  // namespace
}  // namespace dopd
