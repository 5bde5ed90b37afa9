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

#include "dopd/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dopd/error.hpp"
#include "dopd/rng.hpp"
#include "oracles.hpp"

namespace dopd {
namespace {

Vector V(std::initializer_list<double> v) {
  Vector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) r(k++) = x;
  return r;
}

ConstraintMap NoCoupling(Eigen::Index n) { return {Matrix(0, n), Vector(0), false}; }

OnlineProblem Single(CostModel cost, ConvexSetd set, ConstraintMap g, Eigen::Index m) {
  return OnlineProblem({Agent{std::move(set), std::move(cost), std::move(g)}}, m, 1);
}

TEST(CostTest, LinearAndQuadratic) {
  const auto box = MakeBox<double>(V({-5, -5}), V({5, 5}));
  const OnlineProblem p = Single(FixedLinearCost{V({2, 3})}, box, NoCoupling(2), 0);
  EXPECT_EQ(p.Cost(0, 7, V({1, 1})), 5);
  EXPECT_EQ(p.Cost(0, 7, V({0, 0})), 0);
  EXPECT_EQ(p.CostSubgradient(0, 3, V({4, -1})), V({2, 3}));

  const OnlineProblem q = Single(QuadraticCost{V({0.5, -0.5}), 1.0, 0.3}, box, NoCoupling(2), 0);
  for (std::int64_t t : {1, 2, 50}) {
    const Vector theta = q.QuadraticTarget(0, t);
    EXPECT_NEAR(q.Cost(0, t, theta), 0, 1e-15);
    const Vector x = V({1, 2});
    EXPECT_TRUE(q.CostSubgradient(0, t, x).isApprox(2 * (x - theta)));
  }
}

TEST(CostTest, RandomLinearIsReproducibleInAnyOrder) {
  const auto box = MakeBox<double>(Vector::Zero(3), Vector::Ones(3));
  const OnlineProblem p = Single(RandomLinearCost{0, 10}, box, NoCoupling(3), 0);
  const Vector c5 = p.LinearCoefficients(0, 5);
  const Vector c2 = p.LinearCoefficients(0, 2);
  EXPECT_EQ(p.LinearCoefficients(0, 5), c5);
  EXPECT_EQ(p.LinearCoefficients(0, 2), c2);
  EXPECT_NE(c5, c2);
  EXPECT_GE(c5.minCoeff(), 0);
  EXPECT_LE(c5.maxCoeff(), 10);
}

TEST(CostTest, MaxAffineTieTakesFirstPieceAndIsSubgradient) {
  Matrix slopes(2, 2);
  slopes << 1, 0, 0, 1;
  const auto box = MakeBox<double>(V({-3, -3}), V({3, 3}));
  const OnlineProblem p = Single(MaxAffineCost{slopes, V({0, 0})}, box, NoCoupling(2), 0);
  const Vector x = V({1, 1});
  const Vector s = p.CostSubgradient(0, 0, x);
  EXPECT_EQ(s, V({1, 0}));
  CounterRng rng(3, 0);
  for (int k = 0; k < 100; ++k) {
    const Vector y = testing::RandomVector(rng, 2, -3, 3);
    EXPECT_GE(p.Cost(0, 0, y) - p.Cost(0, 0, x), s.dot(y - x) - 1e-12);
  }
}

TEST(ConstraintTest, AffineMatchesNaiveLoops) {
  CounterRng rng(4, 0);
  const Eigen::Index n = 4;
  const Eigen::Index m = 3;
  Matrix d(m, n);
  Vector b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    b(r) = rng.Uniform(-1, 1);
    for (Eigen::Index c = 0; c < n; ++c) d(r, c) = rng.Uniform(-1, 1);
  }
  const OnlineProblem p = Single(ZeroCost{}, MakeBox<double>(Vector::Constant(n, -1),
                                                             Vector::Constant(n, 1)),
                                 ConstraintMap{d, b, false}, m);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testing::RandomVector(rng, n, -1, 1);
    const Vector g = p.ConstraintValue(0, x);
    for (Eigen::Index r = 0; r < m; ++r) {
      double acc = 0;
      for (Eigen::Index c = 0; c < n; ++c) acc += d(r, c) * x(c);
      EXPECT_NEAR(g(r), acc - b(r), 1e-14);
    }
    EXPECT_EQ(p.ConstraintSubgradient(0, x), d);
  }
}

TEST(ConstraintTest, IdentityMap) {
  const OnlineProblem p = Single(ZeroCost{}, MakeBox<double>(V({-2, -2}), V({2, 2})),
                                 ConstraintMap{Matrix::Identity(2, 2), Vector::Zero(2), false}, 2);
  EXPECT_EQ(p.ConstraintValue(0, V({1, -1})), V({1, -1}));
}

TEST(ConstraintTest, HingeTieRuleIsInactive) {
  Matrix d(1, 2);
  d << 1, 0;
  const OnlineProblem p = Single(ZeroCost{}, MakeBox<double>(V({-2, -2}), V({2, 2})),
                                 ConstraintMap{d, V({0}), true}, 1);
  EXPECT_EQ(p.ConstraintSubgradient(0, V({-1, 0})).row(0), Eigen::RowVector2d(0, 0));
  EXPECT_EQ(p.ConstraintSubgradient(0, V({0, 0})).row(0), Eigen::RowVector2d(0, 0));
  EXPECT_EQ(p.ConstraintSubgradient(0, V({1, 0})).row(0), Eigen::RowVector2d(1, 0));
  CounterRng rng(5, 0);
  for (const Vector& x : {V({-1, 0}), V({0, 0}), V({1, 0.5})}) {
    const Matrix s = p.ConstraintSubgradient(0, x);
    for (int k = 0; k < 100; ++k) {
      const Vector y = testing::RandomVector(rng, 2, -2, 2);
      EXPECT_GE((p.ConstraintValue(0, y) - p.ConstraintValue(0, x))(0),
                (s * (y - x))(0) - 1e-12);
    }
  }
}

TEST(ConstraintTest, DimensionMismatch) {
  const OnlineProblem p = Single(ZeroCost{}, MakeBox<double>(V({-2, -2}), V({2, 2})),
                                 ConstraintMap{Matrix::Identity(2, 2), Vector::Zero(2), false}, 2);
  try {
    p.ConstraintValue(0, V({1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  EXPECT_THROW(p.Cost(0, 0, V({1, 2, 3})), Error);
}

TEST(PevTest, SingleVehicleIsFeasibleAtZero) {
  const PevInstance pev = MakePev(1, 3);
  EXPECT_GE(pev.b.minCoeff(), 0);
  const Vector g = pev.problem.ConstraintValue(0, Vector::Zero(24));
  EXPECT_LE(g.maxCoeff(), 0);
  EXPECT_GT(pev.slater_margin, 0);
}

TEST(PevTest, ConstraintSumMatchesRecomputation) {
  const PevInstance pev = MakePev(2, 1);
  const OnlineProblem& p = pev.problem;
  EXPECT_EQ(p.coupling_dim(), 48);
  CounterRng rng(6, 0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector total = Vector::Zero(48);
    Vector expected = Vector::Zero(48);
    for (Eigen::Index i = 0; i < 2; ++i) {
      const Vector x = testing::RandomVector(rng, 24, 0, 1);
      total += p.ConstraintValue(i, x);
      const Matrix& d = p.agent(i).constraint.d;
      for (Eigen::Index r = 0; r < 48; ++r) {
        double acc = 0;
        for (Eigen::Index c = 0; c < 24; ++c) acc += d(r, c) * x(c);
        expected(r) += acc - pev.b(r) / 2;
      }
    }
    EXPECT_LE((total - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PevTest, FiftyVehiclesHaveSlaterPoint) {
  const PevInstance pev = MakePev(50, 2);
  EXPECT_EQ(pev.problem.num_agents(), 50);
  Vector total = Vector::Zero(48);
  for (Eigen::Index i = 0; i < 50; ++i) {
    EXPECT_TRUE(pev.problem.agent(i).set.Contains(pev.slater_point[static_cast<std::size_t>(i)]));
    total += pev.problem.ConstraintValue(i, pev.slater_point[static_cast<std::size_t>(i)]);
  }
  EXPECT_LT(total.maxCoeff(), 0);
  EXPECT_NEAR(-total.maxCoeff(), pev.slater_margin, 1e-9);
}

TEST(PevTest, Deterministic) {
  const PevInstance a = MakePev(5, 9);
  const PevInstance b = MakePev(5, 9);
  EXPECT_EQ(a.b, b.b);
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_EQ(a.problem.agent(i).constraint.d, b.problem.agent(i).constraint.d);
    EXPECT_EQ(a.problem.LinearCoefficients(i, 17), b.problem.LinearCoefficients(i, 17));
  }
}

TEST(PevTest, PricesAreNoiseAroundSharedTariff) {
  PevOptions options;
  options.cost_lo = 0;
  options.cost_hi = 1;
  options.tariff_peak = 4;
  const OnlineProblem p = MakePev(4, 2, options).problem;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (std::int64_t t : {1, 9, 400}) {
      const Vector c = p.LinearCoefficients(i, t);
      for (int k = 0; k < 24; ++k) {
        const double tariff = 2.0 * (1.0 + std::cos(2.0 * std::acos(-1.0) * (k - 6.0) / 24.0));
        EXPECT_GE(c(k) - tariff, -1e-12);
        EXPECT_LE(c(k) - tariff, 1 + 1e-12);
      }
    }
  }
}

TEST(SyntheticTest, OriginStrictlyFeasibleAndCentreInfeasible) {
  SyntheticOptions opts;
  const OnlineProblem p = MakeSyntheticQuadratic(4, opts);
  Vector at_zero = Vector::Zero(opts.coupling);
  Vector at_centre = Vector::Zero(opts.coupling);
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
    at_zero += p.ConstraintValue(i, Vector::Zero(opts.dim));
    at_centre += p.ConstraintValue(i, std::get<QuadraticCost>(p.agent(i).cost).center);
  }
  EXPECT_LT(at_zero.maxCoeff(), 0);
  EXPECT_GT(at_centre.maxCoeff(), 0);
  EXPECT_FALSE(p.time_invariant_costs());
  opts.drift = 0;
  EXPECT_TRUE(MakeSyntheticQuadratic(4, opts).time_invariant_costs());
}

TEST(BoundsTest, UnitIntervalLinearCost) {
  const OnlineProblem p =
      Single(FixedLinearCost{V({1})}, MakeBox<double>(V({0}), V({1})), NoCoupling(1), 0);
  const BoundEstimates e = EstimateBounds(p, 400, 1);
  EXPECT_NEAR(e.b_x, 1, 1e-12);
  EXPECT_NEAR(e.c_f, 1, 1e-12);
}

TEST(BoundsTest, ZeroCostAndPev) {
  const OnlineProblem z =
      Single(ZeroCost{}, MakeBox<double>(V({0}), V({1})), NoCoupling(1), 0);
  const BoundEstimates ez = EstimateBounds(z, 50, 1);
  EXPECT_EQ(ez.b_f, 0);
  EXPECT_EQ(ez.c_f, 0);
  const BoundEstimates ep = EstimateBounds(MakePev(2, 1).problem, 20, 1);
  for (double v : {ep.b_x, ep.b_f, ep.b_g, ep.c_f, ep.c_g}) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0);
  }
}

TEST(ProblemIoTest, RoundTrip) {
  const OnlineProblem p = MakePev(3, 5).problem;
  std::stringstream ss;
  WriteProblem(ss, p);
  const OnlineProblem back = ReadProblem(ss);
  ASSERT_EQ(back.num_agents(), 3);
  EXPECT_EQ(back.seed(), p.seed());
  CounterRng rng(7, 0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vector x = testing::RandomVector(rng, 24, 0, 1);
    EXPECT_EQ(back.ConstraintValue(i, x), p.ConstraintValue(i, x));
    EXPECT_EQ(back.Cost(i, 11, x), p.Cost(i, 11, x));
    EXPECT_EQ(Project(back.agent(i).set, x), Project(p.agent(i).set, x));
  }
}

TEST(ProblemIoTest, BadLineReportsLineNumber) {
  std::stringstream ss("dopd-problem 1\nname x\nagents two\n");
  try {
    ReadProblem(ss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

}  // namespace
}  // namespace dopd
