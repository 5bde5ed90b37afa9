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


#ifndef DOPD_CONFIG_HPP_
#define DOPD_CONFIG_HPP_

// Experiment configuration: an INI-style text file with the sections
// [problem], [graph], [run], [output] and [metrics]. Every field has a
// default, so a file only lists what it changes.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dopd/engine.hpp"

namespace dopd {

enum class ProblemKind { kPev, kSynthetic, kFile };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kPev;
  int num_agents = 50;
  std::uint64_t seed = 1;
  std::string path;  // kFile only
  // kSynthetic only.
  int dim = 2;
  int coupling = 1;
  double drift = 1.0;
  double tightness = 0.5;

  bool operator==(const ProblemSpec&) const = default;
};

struct GraphSpec {
  int period_q = 4;
  std::uint64_t seed = 1;
  bool balanced = false;
  std::string path;  // read from file when non-empty

  bool operator==(const GraphSpec&) const = default;
};

struct MetricsSpec {
  std::int64_t t_min = 10;
  int per_decade = 4;
  double window = 0.5;  // fraction of the log-t range used by the fits
  double margin = 0.1;  // slack allowed over the theoretical exponent

  bool operator==(const MetricsSpec&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  GraphSpec graph;
  Algorithm algorithm = Algorithm::kPushSum;
  double kappa = StepSchedule::kDefaultKappa;
  bool allow_any_kappa = false;
  std::int64_t horizon = 10'000;
  std::uint64_t seed = 1;
  std::int64_t record_every = 1;
  int threads = 1;
  std::string out_dir = ".";
  MetricsSpec metrics;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws kConfigParse naming the offending key; unknown keys are errors.
ExperimentConfig ParseConfig(std::istream& in);
// Throws kIo naming the path when the file cannot be opened.
ExperimentConfig LoadConfig(const std::string& path);
// Writes every field; ParseConfig reads it back unchanged.
void WriteConfig(std::ostream& out, const ExperimentConfig& config);

// Throws kConfigParse for unknown names.
ExperimentConfig Preset(const std::string& name);
std::vector<std::string> PresetNames();

// Builds problem and graphs. Throws kConfigParse for values outside their
// domain, including kappa outside (0, 1/4) without allow_any_kappa.
RunConfig BuildRunConfig(const ExperimentConfig& config);

}  // namespace dopd

#endif  // DOPD_CONFIG_HPP_
