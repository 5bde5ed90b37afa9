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

#ifndef DOPD_METRICS_HPP_
#define DOPD_METRICS_HPP_

// Regret and constraint violation of a run against the offline comparator
//
//   x* = argmin_{x in X} sum_{t=1}^T sum_i f_{i,t}(x_i)  s.t.  sum_i g_i(x_i) <= 0,
//
// plus log-log rate fits of both series.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dopd/engine.hpp"
#include "dopd/error.hpp"
#include "dopd/problem.hpp"

namespace dopd {

enum class OfflineMethod { kInteriorPoint, kAveragedPrimalDual };

struct OfflineOptimum {
  std::vector<Vector> x_star;
  std::int64_t horizon = 0;
  double objective = 0;             // sum_{t=1}^T sum_i f_{i,t}(x*_i)
  double feasibility_residual = 0;  // |[sum_i g_i(x*_i)]_+|
  double dual_gap = 0;              // duality gap estimate on the objective scale
  Vector multiplier;                // coupling multiplier, if available
  OfflineMethod method = OfflineMethod::kInteriorPoint;
  int iterations = 0;
};

// Thrown when the averaged primal-dual route hits its iteration cap; carries
// the best averaged iterate found.
class OfflineNonConvergence : public Error {
 public:
  OfflineNonConvergence(const std::string& msg, OfflineOptimum best)
      : Error(ErrorCode::kNonConvergence, msg), best_(std::move(best)) {}
  const OfflineOptimum& best() const { return best_; }

 private:
  OfflineOptimum best_;
};

struct OfflineOptions {
  double tol = 1e-6;
  // Averaged primal-dual route only.
  std::int64_t max_iter = 1'000'000;
  std::int64_t window = 1000;
  double step0 = 1.0;
  // Force the averaged primal-dual route even when the interior point applies.
  bool force_primal_dual = false;
};

// Quadratic or linear costs with affine constraints are solved exactly by the
// block interior-point method; anything else goes through the averaged
// centralized primal-dual iteration on the time-summed program.
OfflineOptimum SolveOffline(const OnlineProblem& problem, std::int64_t horizon,
                            const OfflineOptions& options = {});

// Comparators for several horizons from one pass over the rounds. Horizons
// must be increasing. Needs aggregatable costs (see AccumulateCost).
std::vector<OfflineOptimum> SolveOfflineSeries(const OnlineProblem& problem,
                                               std::span<const std::int64_t> horizons,
                                               const OfflineOptions& options = {});

// sum_{s=1}^t sum_i f_{i,s}(x_i) for every t in `rounds` (increasing).
std::vector<double> CumulativeCost(const OnlineProblem& problem, std::span<const Vector> x,
                                   std::span<const std::int64_t> rounds);

// Reg(t) at every trace row against the fixed comparator of the trace
// horizon. Throws kLengthMismatch when the horizons or agent counts differ.
std::vector<double> Regret(const OnlineProblem& problem, const RunTrace& trace,
                           const OfflineOptimum& offline);

// |[sum_{s<=t} sum_i g_i(x_{i,s})]_+| at every trace row.
std::vector<double> ConstraintViolation(const RunTrace& trace);

// The same from per-round constraint sums: entry t-1 of the result is the
// violation after round t.
std::vector<double> ConstraintViolationFromRounds(std::span<const Vector> round_sums);

struct SeriesPoint {
  double t = 0;
  double value = 0;
};

struct RateFit {
  double slope = 0;
  double intercept = 0;
  int used = 0;
  int skipped = 0;  // nonpositive values inside the window
};

// Least-squares slope of log(value) against log(t) over the samples whose t
// lies in the last `window` fraction of the log-t range. Nonpositive values
// are skipped and counted; fewer than two usable samples throws
// kNonPositiveValues.
RateFit FitRate(std::span<const SeriesPoint> series, double window = 0.5);

// The same over samples with t_lo <= t <= t_hi.
RateFit FitRateRange(std::span<const SeriesPoint> series, double t_lo, double t_hi);

// Regret and violation as functions of the horizon: at checkpoint tau the
// comparator is the offline optimum for horizon tau.
struct HorizonPoint {
  std::int64_t t = 0;
  double reg = 0;
  double regc = 0;
};

// Roughly `per_decade` log-spaced trace rounds from t_min to the horizon.
std::vector<std::int64_t> Checkpoints(const RunTrace& trace, std::int64_t t_min, int per_decade);

std::vector<HorizonPoint> HorizonSeries(const OnlineProblem& problem, const RunTrace& trace,
                                        std::span<const std::int64_t> checkpoints,
                                        const OfflineOptions& options = {});

struct TheoryExponents {
  double regret;                   // 1/2 + 2 kappa
  double violation;                // 1 - kappa/2
  double violation_time_invariant;  // 3/4 + kappa/2
};

TheoryExponents Exponents(double kappa);

// Header t,reg,reg_over_t,regc,regc_over_t.
void WriteMetricsCsv(std::ostream& out, std::span<const HorizonPoint> points);
std::vector<HorizonPoint> ReadMetricsCsv(std::istream& in);

struct RateReport {
  std::optional<RateFit> reg;  // empty when regret is not positive on the window
  std::string reg_note;
  std::optional<RateFit> regc;  // empty when the violation vanishes on the window
  std::string regc_note;
  TheoryExponents theory;
  double kappa = 0;
  double window = 0.5;
};

RateReport ComputeRates(std::span<const HorizonPoint> points, double kappa, double window);
void WriteRates(std::ostream& out, const RateReport& report);

}  // namespace dopd

#endif  // DOPD_METRICS_HPP_
