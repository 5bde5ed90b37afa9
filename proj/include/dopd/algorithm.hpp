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

#ifndef DOPD_ALGORITHM_HPP_
#define DOPD_ALGORITHM_HPP_

// Per-agent updates of the distributed online primal-dual push-sum method,
// the centralized saddle-point baseline and the balanced-graph baseline.
//
// One push-sum round t, for every agent i, reading only round-t values:
//   w_{i,t+1}  = sum_j a_ij w_j                          (Mix)
//   mu_hat_i   = sum_j a_ij mu_j,  y_hat_i = sum_j a_ij y_j
//   x_{i,t+1}  = P_{X_i}(x_i - alpha_t s_i),
//                s_i = df_{i,t}(x_i) + dg_i(x_i)^T mu_hat_i / w_{i,t+1}
//   mu_{i,t+1} = [mu_hat_i + alpha_t (y_hat_i / w_{i,t+1}^2
//                                     - beta_t mu_hat_i / w_{i,t+1})]_+
//   y_{i,t+1}  = y_hat_i + g_i(x_{i,t+1}) - g_i(x_i)

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dopd/graph.hpp"
#include "dopd/problem.hpp"

namespace dopd {

// alpha_t = 1/sqrt(t), beta_t = t^-kappa for t >= 1; alpha_0 = beta_0 = 1.
class StepSchedule {
 public:
  static constexpr double kDefaultKappa = 0.2;

  StepSchedule() = default;
  // kappa must lie in (0, 1/4) unless allow_any_kappa, which still needs
  // kappa >= 0 so that beta stays nonincreasing.
  explicit StepSchedule(double kappa, bool allow_any_kappa = false);

  double kappa() const { return kappa_; }
  bool in_theory_range() const { return kappa_ > 0 && kappa_ < 0.25; }
  double alpha(std::int64_t t) const;
  double beta(std::int64_t t) const;

 private:
  double kappa_ = kDefaultKappa;
};

struct StepSizes {
  double alpha;
  double beta;
};

StepSizes ScheduleValues(const StepSchedule& schedule, std::int64_t t);

struct AgentState {
  Vector x;
  Vector mu;
  Vector y;
  double w = 1;
  // Mixed values of the current round and their rescalings by w_next.
  Vector mu_hat;
  Vector y_hat;
  double w_next = 1;
  Vector mu_tilde;
  Vector y_tilde;
  // g_i(x), carried so the tracking update does not re-evaluate it.
  Vector g_x;
  // Active set of the last projection onto a polyhedral X_i.
  std::vector<Eigen::Index> projection_hint;
};

inline constexpr double kWeightUnderflow = 1e-12;

// w = 1, x = P_{X_i}(0), mu = 0, y = g_i(x).
AgentState InitialState(const OnlineProblem& problem, Eigen::Index i);
std::vector<AgentState> InitialStates(const OnlineProblem& problem);

// Projection onto X_i. For polyhedra `hint` seeds and receives the active set.
Vector ProjectLocal(const OnlineProblem& problem, Eigen::Index i, const Vector& z,
                    std::vector<Eigen::Index>* hint = nullptr);

// Fills w_next, mu_hat, y_hat, mu_tilde and y_tilde of every state.
void Mix(std::span<AgentState> states, const WeightMatrix& a);

// x_{i,t+1}; `cost_grad` is a subgradient of f_{i,t} at state.x.
Vector PrimalStep(AgentState& state, const OnlineProblem& problem, Eigen::Index i, double alpha,
                  const Vector& cost_grad);
Vector PrimalStep(AgentState& state, const OnlineProblem& problem, Eigen::Index i,
                  std::int64_t t, const StepSchedule& schedule);

Vector DualStep(const AgentState& state, const StepSchedule& schedule, std::int64_t t);
Vector DualStep(const AgentState& state, StepSizes steps);

// y_{i,t+1}; also returns g_i(x_next) through `g_next`.
Vector TrackingStep(const AgentState& state, const OnlineProblem& problem, Eigen::Index i,
                    const Vector& x_next, Vector* g_next = nullptr);

// One full push-sum round on every agent. `cost_grads[i]` is a subgradient of
// f_{i,t} at states[i].x.
void PushSumRound(std::span<AgentState> states, const WeightMatrix& a,
                  const OnlineProblem& problem, std::int64_t t, const StepSchedule& schedule,
                  std::span<const Vector> cost_grads);

struct CentralizedState {
  std::vector<Vector> x;
  Vector mu;
};

// Arrow-Hurwicz-Uzawa step on L_t(x, mu) = sum_i f_{i,t}(x_i) + mu . g(x).
CentralizedState CentralizedStep(const CentralizedState& current, const OnlineProblem& problem,
                                 std::int64_t t, double alpha);
CentralizedState CentralizedStep(const CentralizedState& current, const OnlineProblem& problem,
                                 double alpha, std::span<const Vector> cost_grads);

// Balanced-graph primal-dual step; needs a doubly stochastic A and leaves w
// untouched. Throws kNotDoublyStochastic otherwise.
std::vector<AgentState> BalancedBaselineStep(std::span<const AgentState> states,
                                             const WeightMatrix& a, const OnlineProblem& problem,
                                             std::int64_t t, double alpha);
std::vector<AgentState> BalancedBaselineStep(std::span<const AgentState> states,
                                             const WeightMatrix& a, const OnlineProblem& problem,
                                             double alpha, std::span<const Vector> cost_grads);

}  // namespace dopd

#endif  // DOPD_ALGORITHM_HPP_
