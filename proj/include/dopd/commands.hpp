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


#ifndef DOPD_COMMANDS_HPP_
#define DOPD_COMMANDS_HPP_

// The run, validate and rates subcommands, independent of argument parsing.
// Each returns the process exit status and reports on the given streams.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dopd/config.hpp"
#include "dopd/error.hpp"

namespace dopd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

int ExitCodeFor(ErrorCode code);

// Writes {out_dir}/{run}.csv, {out_dir}/metrics_{run}.csv,
// {out_dir}/rates_{run}.txt and {out_dir}/{run}.ini.
int CmdRun(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  std::string graph_path;
  double a_min = 0;   // 0 uses the smallest positive weight of the sequence
  int period_q = 0;   // 0 uses the period stored in the file
  std::int64_t horizon = 0;  // 0 checks two full periods
  bool strict_rows = false;
};

int CmdValidate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

struct RatesOptions {
  std::vector<std::string> paths;
  double kappa = 0.2;
  double window = 0.5;
  double margin = 0.1;
  bool time_invariant = false;  // compare the violation against 3/4 + kappa/2
};

// One line per fitted series: slope, bound, verdict. Exit 1 if any fails.
int CmdRates(const RatesOptions& options, std::ostream& out, std::ostream& err);

}  // namespace dopd

#endif  // DOPD_COMMANDS_HPP_
