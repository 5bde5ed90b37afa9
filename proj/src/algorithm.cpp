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

#include "dopd/algorithm.hpp"

#include <cmath>
#include <string>

#include "dopd/error.hpp"

namespace dopd {

StepSchedule::StepSchedule(double kappa, bool allow_any_kappa) : kappa_(kappa) {
  Require(std::isfinite(kappa) && kappa >= 0, ErrorCode::kInvalidArgument,
          "kappa must be a nonnegative number");
  Require(allow_any_kappa || in_theory_range(), ErrorCode::kInvalidArgument,
          "kappa must lie in (0, 1/4); got " + std::to_string(kappa));
}

double StepSchedule::alpha(std::int64_t t) const {
  return t <= 0 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(t));
}

double StepSchedule::beta(std::int64_t t) const {
  return t <= 0 ? 1.0 : std::pow(static_cast<double>(t), -kappa_);
}

StepSizes ScheduleValues(const StepSchedule& schedule, std::int64_t t) {
  Require(t >= 0, ErrorCode::kInvalidArgument, "round index must be nonnegative");
  return {schedule.alpha(t), schedule.beta(t)};
}

Vector ProjectLocal(const OnlineProblem& problem, Eigen::Index i, const Vector& z,
                    std::vector<Eigen::Index>* hint) {
  const ConvexSetd& set = problem.agent(i).set;
  if (const auto* poly = set.get_if<Polyhedrond>()) {
    if (hint != nullptr) {
      const std::vector<Eigen::Index> seed = *hint;
      return ProjectPolyhedron(*poly, z, seed, hint);
    }
    return ProjectPolyhedron(*poly, z);
  }
  return Project(set, z);
}

AgentState InitialState(const OnlineProblem& problem, Eigen::Index i) {
  AgentState s;
  s.x = ProjectLocal(problem, i, Vector::Zero(problem.dim(i)), &s.projection_hint);
  const Eigen::Index m = problem.coupling_dim();
  s.mu = Vector::Zero(m);
  s.g_x = problem.ConstraintValue(i, s.x);
  s.y = s.g_x;
  s.w = 1;
  s.mu_hat = s.mu;
  s.y_hat = s.y;
  s.w_next = 1;
  s.mu_tilde = s.mu;
  s.y_tilde = s.y;
  return s;
}

std::vector<AgentState> InitialStates(const OnlineProblem& problem) {
  std::vector<AgentState> states;
  states.reserve(static_cast<std::size_t>(problem.num_agents()));
  for (Eigen::Index i = 0; i < problem.num_agents(); ++i) {
    states.push_back(InitialState(problem, i));
  }
  return states;
}

void Mix(std::span<AgentState> states, const WeightMatrix& a) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Require(a.size() == n, ErrorCode::kDimensionMismatch,
          "weight matrix has " + std::to_string(a.size()) + " nodes, states have " +
              std::to_string(n));
  for (auto& s : states) {
    s.w_next = 0;
    s.mu_hat.setZero(s.mu.size());
    s.y_hat.setZero(s.y.size());
  }
  // Column j pushes agent j's values to its out-neighbours; the loop order is
  // fixed, so the floating-point sums are reproducible.
  const auto& entries = a.entries();
  for (Eigen::Index j = 0; j < entries.outerSize(); ++j) {
    const AgentState& src = states[static_cast<std::size_t>(j)];
    for (WeightMatrix::Sparse::InnerIterator it(entries, j); it; ++it) {
      AgentState& dst = states[static_cast<std::size_t>(it.row())];
      const double aij = it.value();
      dst.w_next += aij * src.w;
      dst.mu_hat.noalias() += aij * src.mu;
      dst.y_hat.noalias() += aij * src.y;
    }
  }
  for (auto& s : states) {
    s.mu_tilde = s.mu_hat / s.w_next;
    s.y_tilde = s.y_hat / s.w_next;
  }
}

namespace {

void CheckWeight(const AgentState& state) {
  if (!(state.w_next > kWeightUnderflow)) {
    throw Error(ErrorCode::kWeightUnderflow,
                "push-sum weight " + std::to_string(state.w_next) +
                    " underflowed; the graph sequence violates the connectivity assumption");
  }
}

}  // namespace

Vector PrimalStep(AgentState& state, const OnlineProblem& problem, Eigen::Index i, double alpha,
                  const Vector& cost_grad) {
  CheckWeight(state);
  Vector step = cost_grad;
  if (problem.coupling_dim() > 0) {
    step += problem.ConstraintSubgradientTransposeTimes(i, state.x, state.mu_tilde);
  }
  return ProjectLocal(problem, i, state.x - alpha * step, &state.projection_hint);
}

Vector PrimalStep(AgentState& state, const OnlineProblem& problem, Eigen::Index i,
                  std::int64_t t, const StepSchedule& schedule) {
  return PrimalStep(state, problem, i, schedule.alpha(t),
                    problem.CostSubgradient(i, t, state.x));
}

Vector DualStep(const AgentState& state, StepSizes steps) {
  CheckWeight(state);
  const double w = state.w_next;
  Vector v = state.mu_hat +
             steps.alpha * (state.y_hat / (w * w) - steps.beta * state.mu_hat / w);
  return v.cwiseMax(0.0);
}

Vector DualStep(const AgentState& state, const StepSchedule& schedule, std::int64_t t) {
  return DualStep(state, ScheduleValues(schedule, t));
}

Vector TrackingStep(const AgentState& state, const OnlineProblem& problem, Eigen::Index i,
                    const Vector& x_next, Vector* g_next) {
  Vector g = problem.ConstraintValue(i, x_next);
  Vector y = state.y_hat + g - state.g_x;
  if (g_next != nullptr) *g_next = std::move(g);
  return y;
}

void PushSumRound(std::span<AgentState> states, const WeightMatrix& a,
                  const OnlineProblem& problem, std::int64_t t, const StepSchedule& schedule,
                  std::span<const Vector> cost_grads) {
  Require(cost_grads.size() == states.size(), ErrorCode::kDimensionMismatch,
          "one cost subgradient per agent expected");
  Mix(states, a);
  const StepSizes steps = ScheduleValues(schedule, t);
  for (std::size_t k = 0; k < states.size(); ++k) {
    AgentState& s = states[k];
    const auto i = static_cast<Eigen::Index>(k);
    Vector x_next = PrimalStep(s, problem, i, steps.alpha, cost_grads[k]);
    Vector mu_next = DualStep(s, steps);
    Vector g_next;
    Vector y_next = TrackingStep(s, problem, i, x_next, &g_next);
    s.x = std::move(x_next);
    s.mu = std::move(mu_next);
    s.y = std::move(y_next);
    s.g_x = std::move(g_next);
    s.w = s.w_next;
  }
}

CentralizedState CentralizedStep(const CentralizedState& current, const OnlineProblem& problem,
                                 double alpha, std::span<const Vector> cost_grads) {
  const Eigen::Index n_agents = problem.num_agents();
  Require(static_cast<Eigen::Index>(current.x.size()) == n_agents &&
              static_cast<Eigen::Index>(cost_grads.size()) == n_agents,
          ErrorCode::kDimensionMismatch, "centralized state does not match the problem");
  Require(current.mu.size() == problem.coupling_dim(), ErrorCode::kDimensionMismatch,
          "multiplier has the wrong length");
  CentralizedState next;
  next.x.reserve(current.x.size());
  Vector g_sum = Vector::Zero(problem.coupling_dim());
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const Vector& xi = current.x[static_cast<std::size_t>(i)];
    Vector step = cost_grads[static_cast<std::size_t>(i)];
    if (problem.coupling_dim() > 0) {
      step += problem.ConstraintSubgradientTransposeTimes(i, xi, current.mu);
      g_sum += problem.ConstraintValue(i, xi);
    }
    next.x.push_back(ProjectLocal(problem, i, xi - alpha * step));
  }
  next.mu = (current.mu + alpha * g_sum).cwiseMax(0.0);
  return next;
}

CentralizedState CentralizedStep(const CentralizedState& current, const OnlineProblem& problem,
                                 std::int64_t t, double alpha) {
  std::vector<Vector> grads;
  for (Eigen::Index i = 0; i < problem.num_agents(); ++i) {
    grads.push_back(problem.CostSubgradient(i, t, current.x.at(static_cast<std::size_t>(i))));
  }
  return CentralizedStep(current, problem, alpha, grads);
}

std::vector<AgentState> BalancedBaselineStep(std::span<const AgentState> states,
                                             const WeightMatrix& a, const OnlineProblem& problem,
                                             double alpha, std::span<const Vector> cost_grads) {
  Require(a.IsDoublyStochastic(1e-10), ErrorCode::kNotDoublyStochastic,
          "balanced baseline needs a doubly stochastic weight matrix");
  Require(cost_grads.size() == states.size(), ErrorCode::kDimensionMismatch,
          "one cost subgradient per agent expected");
  std::vector<AgentState> next(states.begin(), states.end());
  Mix(next, a);
  for (std::size_t k = 0; k < next.size(); ++k) {
    AgentState& s = next[k];
    const auto i = static_cast<Eigen::Index>(k);
    Vector step = cost_grads[k];
    if (problem.coupling_dim() > 0) {
      step += problem.ConstraintSubgradientTransposeTimes(i, s.x, s.mu_hat);
    }
    Vector x_next = ProjectLocal(problem, i, s.x - alpha * step, &s.projection_hint);
    Vector mu_next = (s.mu_hat + alpha * s.y_hat).cwiseMax(0.0);
    Vector g_next = problem.ConstraintValue(i, x_next);
    s.y = s.y_hat + g_next - s.g_x;
    s.x = std::move(x_next);
    s.mu = std::move(mu_next);
    s.g_x = std::move(g_next);
    // The baseline has no push-sum weight; keep the mixed fields consistent
    // with w = 1 for the diagnostics.
    s.w = 1;
    s.w_next = 1;
    s.mu_tilde = s.mu_hat;
    s.y_tilde = s.y_hat;
  }
  return next;
}

std::vector<AgentState> BalancedBaselineStep(std::span<const AgentState> states,
                                             const WeightMatrix& a, const OnlineProblem& problem,
                                             std::int64_t t, double alpha) {
  std::vector<Vector> grads;
  for (std::size_t k = 0; k < states.size(); ++k) {
    grads.push_back(problem.CostSubgradient(static_cast<Eigen::Index>(k), t, states[k].x));
  }
  return BalancedBaselineStep(states, a, problem, alpha, grads);
}

}  // namespace dopd
