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

#ifndef DOPD_ENGINE_HPP_
#define DOPD_ENGINE_HPP_

// Drives a full run of one algorithm over a problem and a graph sequence and
// records a trace of cumulative losses, cumulative constraint values and
// consensus diagnostics.
//
// Round t = 0 .. T-1 maps x_t to x_{t+1}. The trace covers t = 1 .. T: the
// loss of round t is sum_i f_{i,t}(x_{i,t}), the decision made before f_{i,t}
// is revealed.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dopd/algorithm.hpp"
#include "dopd/error.hpp"
#include "dopd/graph.hpp"
#include "dopd/problem.hpp"

namespace dopd {

enum class Algorithm { kPushSum, kBalanced, kCentralized };

const char* AlgorithmName(Algorithm alg);
// Throws kConfigParse for unknown names.
Algorithm ParseAlgorithm(const std::string& name);

enum class HistoryMode { kAuto, kAlways, kNever };

// Full decision history is kept in kAuto mode only up to this many scalars.
inline constexpr std::int64_t kHistoryLimit = 10'000'000;

struct RunConfig {
  std::shared_ptr<const OnlineProblem> problem;
  std::shared_ptr<const GraphSequence> graphs;  // unused by kCentralized
  StepSchedule schedule;
  std::int64_t horizon = 1000;
  std::uint64_t seed = 0;  // label of the run; problem and graphs carry their own seeds
  Algorithm algorithm = Algorithm::kPushSum;
  std::int64_t record_every = 1;  // round T is always recorded
  HistoryMode history = HistoryMode::kAuto;
  int threads = 1;
};

// Throws kInvalidArgument with the first problem found.
void Validate(const RunConfig& config);

struct TraceRow {
  std::int64_t t = 0;
  double loss_cum = 0;  // sum_{s<=t} sum_i f_{i,s}(x_{i,s})
  Vector g_cum;         // sum_{s<=t} sum_i g_i(x_{i,s})
  double w_sum_err = 0;      // |sum_i w_{i,t} - N|
  double w_max_dev = 0;      // max_i |w_{i,t} - 1|
  double y_track_err = 0;    // |(1/N) sum_i y_{i,t} - (1/N) sum_i g_i(x_{i,t})|
  double mu_tilde_mean = 0;  // (1/N) sum_i |mu_tilde_{i,t}|
  double mu_tilde_max = 0;   // max_i |mu_tilde_{i,t}|
  double consensus_gap = 0;  // max_i |mu_tilde_{i,t} - mean_j mu_{j,t-1}|
};

// Maxima over every round 1 .. T, recorded or not.
struct TraceSummary {
  double max_w_sum_err = 0;
  double max_w_dev = 0;
  double max_y_track_err = 0;
  double max_mu_tilde_mean = 0;
  double max_mu_tilde = 0;
  double max_consensus_gap = 0;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::kPushSum;
  Eigen::Index num_agents = 0;
  int period_q = 0;
  double kappa = 0;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  std::vector<TraceRow> rows;
  // history[k] concatenates x_{1,t} .. x_{N,t} for t = rows[k].t; empty when
  // history is off.
  std::vector<Vector> history;
  TraceSummary summary;
  std::vector<Vector> final_x;
};

// Deterministic in the config: the thread count does not change the result.
RunTrace Run(const RunConfig& config);

// One sweep entry is produced by the recipe from (N, Q, kappa).
struct SweepPoint {
  int num_agents = 0;
  int period_q = 1;
  double kappa = StepSchedule::kDefaultKappa;
};

enum class SweepAxis { kNumAgents, kPeriod, kKappa };

struct SweepEntry {
  SweepPoint point;
  std::optional<RunTrace> trace;
  std::optional<ErrorCode> error_code;
  std::string error;
};

using RunRecipe = std::function<RunConfig(const SweepPoint&)>;

// Independent runs, one per value along `axis`, in input order. Errors of one
// entry are recorded in that entry and do not stop the sweep.
std::vector<SweepEntry> RunSweep(const RunRecipe& recipe, const SweepPoint& base, SweepAxis axis,
                                 std::span<const double> values);

// run_{alg}_{N}_{Q}_{kappa}_{seed}
std::string RunName(const RunTrace& trace);

// Header t,reg_cum,regc_norm,w_sum_err,mu_consensus_gap,y_track_err; one line
// per trace row. `reg_cum` is aligned with trace.rows.
void WriteRunCsv(std::ostream& out, const RunTrace& trace, std::span<const double> reg_cum);

// Shortest decimal text that reads back to the same double.
std::string FormatDouble(double v);

}  // namespace dopd

#endif  // DOPD_ENGINE_HPP_
