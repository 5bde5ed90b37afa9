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

#ifndef DOPD_PROBLEM_HPP_
#define DOPD_PROBLEM_HPP_

// Online problem instances: per-agent time-varying costs f_{i,t}, a
// time-invariant coupled constraint map g_i and a local convex set X_i.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dopd/geometry.hpp"

namespace dopd {

struct ZeroCost {};

// f(x) = c . x with a fixed c.
struct FixedLinearCost {
  Vector c;
};

// f_{i,t}(x) = c_{i,t} . x, c_{i,t} = offset + u_{i,t} with u_{i,t} i.i.d.
// uniform on [lo, hi]^n, drawn from the counter-based generator keyed on
// (problem seed, i, t). An empty offset means zero.
struct RandomLinearCost {
  double lo = 0;
  double hi = 10;
  Vector offset;
};

// f_{i,t}(x) = weight * |x - theta_{i,t}|^2 with
// theta_{i,t} = center + drift * u_{i,t}, u_{i,t} uniform on [-1, 1]^n.
// drift == 0 gives a time-invariant cost.
struct QuadraticCost {
  Vector center;
  double weight = 1;
  double drift = 0;
};

// f(x) = max_k (slopes.row(k) . x + intercepts(k)); time-invariant.
struct MaxAffineCost {
  Matrix slopes;
  Vector intercepts;
};

using CostModel =
    std::variant<ZeroCost, FixedLinearCost, RandomLinearCost, QuadraticCost, MaxAffineCost>;

// g(x) = D x - b, or componentwise max(0, D x - b) when `hinge` is set.
struct ConstraintMap {
  Matrix d;
  Vector b;
  bool hinge = false;
};

struct Agent {
  ConvexSetd set;
  CostModel cost;
  ConstraintMap constraint;
};

// sum_{t in range} f_{i,t}(x) = 0.5 x^T hessian x + linear . x + constant.
struct QuadraticAggregate {
  Matrix hessian;
  Vector linear;
  double constant = 0;
  std::int64_t rounds = 0;
};

class OnlineProblem {
 public:
  OnlineProblem(std::vector<Agent> agents, Eigen::Index coupling_dim, std::uint64_t seed,
                std::string name = "custom");

  Eigen::Index num_agents() const { return static_cast<Eigen::Index>(agents_.size()); }
  Eigen::Index dim(Eigen::Index i) const { return agent(i).set.dim(); }
  Eigen::Index total_dim() const;
  Eigen::Index coupling_dim() const { return m_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& name() const { return name_; }
  const Agent& agent(Eigen::Index i) const;
  const std::vector<Agent>& agents() const { return agents_; }

  bool time_invariant_costs() const;
  bool affine_constraints() const;

  double Cost(Eigen::Index i, std::int64_t t, const Vector& x) const;
  // Smallest-active-index rule at kinks of max-affine costs.
  Vector CostSubgradient(Eigen::Index i, std::int64_t t, const Vector& x) const;
  // Cost value and subgradient with one draw of the round's data.
  double CostAndSubgradient(Eigen::Index i, std::int64_t t, const Vector& x, Vector& grad) const;

  Vector ConstraintValue(Eigen::Index i, const Vector& x) const;
  // Row k is a subgradient of component k. Hinges at zero count as inactive.
  Matrix ConstraintSubgradient(Eigen::Index i, const Vector& x) const;
  // ConstraintSubgradient(i, x)^T v without materialising the matrix.
  Vector ConstraintSubgradientTransposeTimes(Eigen::Index i, const Vector& x,
                                             const Vector& v) const;

  // c_{i,t} of a RandomLinearCost agent.
  Vector LinearCoefficients(Eigen::Index i, std::int64_t t) const;
  // theta_{i,t} of a QuadraticCost agent.
  Vector QuadraticTarget(Eigen::Index i, std::int64_t t) const;

  // Adds round t of agent i to a quadratic aggregate. Returns false when the
  // cost family is not quadratic (max-affine), leaving `agg` untouched.
  bool AccumulateCost(Eigen::Index i, std::int64_t t, QuadraticAggregate& agg) const;
  QuadraticAggregate EmptyAggregate(Eigen::Index i) const;

 private:
  void CheckDim(Eigen::Index i, const Vector& x) const;

  std::vector<Agent> agents_;
  Eigen::Index m_;
  std::uint64_t seed_;
  std::string name_;
};

struct PevOptions {
  int slots = 24;
  // Unit prices are tariff + U[cost_lo, cost_hi]; the defaults keep every
  // price inside [0, 10].
  double cost_lo = 0;
  double cost_hi = 5;
  // Time-of-use tariff tariff_peak * (1 + cos(2 pi (k - n/4) / n)) / 2 for
  // slot k, shared by all vehicles.
  double tariff_peak = 5;
  // Network capacities are (1 + headroom) times the load of the even-rate
  // Slater point: per slot, and per pair of consecutive slots.
  double slot_headroom = 0.10;
  double pair_headroom = 0.05;
  // Unit of the coupled rows: D_i and b are multiplied by this factor.
  double coupling_scale = 1.0;
  int max_retries = 8;
};

// Stand-in for the electric-vehicle charging benchmark with n_i = 24 slots.
// Vehicle i is plugged in during [arrive_i, depart_i); X_i bounds the rate by
// [0, r_max] inside that window and 0 outside, and bounds the cumulative
// energy E_min(k) <= sum_{s<=k} x_s <= E_max(k), where E_min enforces that the
// required energy can still be delivered at 90% of r_max. The coupling
// g_i(x) = D_i x - b/N has m = 48 rows: grid power per slot (charging
// efficiency on the diagonal) and per pair of consecutive slots. Prices are
// noisy around a shared tariff, so cheap slots attract every vehicle.
struct PevInstance {
  OnlineProblem problem;
  Vector b;
  std::vector<Vector> slater_point;
  double slater_margin = 0;  // min_k (b - sum_i D_i xhat_i)_k
};

PevInstance MakePev(int num_agents, std::uint64_t seed, const PevOptions& options = {});

struct SyntheticOptions {
  int num_agents = 6;
  int dim = 2;
  int coupling = 1;
  double drift = 1.0;     // 0 makes costs time-invariant
  double tightness = 0.5;  // fraction of the centre's constraint value removed from b
};

// Quadratic tracking costs on boxes [-1, 1]^n with an affine coupling that
// cuts off the cost centres, so the coupled constraint is active at the
// offline optimum while x = 0 stays strictly feasible.
OnlineProblem MakeSyntheticQuadratic(std::uint64_t seed, const SyntheticOptions& options = {});

struct BoundEstimates {
  double b_x = 0;  // max |x|
  double b_f = 0;  // max |f_{i,t}(x)|
  double b_g = 0;  // max |g_i(x)|
  double c_f = 0;  // max |subgradient of f|
  double c_g = 0;  // max spectral norm of the constraint subgradient matrix
  int samples = 0;
};

// Empirical maxima over sampled points of every X_i and sampled rounds.
// Sample k depends only on (seed, k), so estimates only grow with `samples`.
BoundEstimates EstimateBounds(const OnlineProblem& problem, int samples, std::uint64_t seed);

void WriteProblem(std::ostream& out, const OnlineProblem& problem);
OnlineProblem ReadProblem(std::istream& in);
OnlineProblem LoadProblem(const std::string& path);
void SaveProblem(const std::string& path, const OnlineProblem& problem);

}  // namespace dopd

#endif  // DOPD_PROBLEM_HPP_
