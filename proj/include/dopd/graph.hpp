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

#ifndef DOPD_GRAPH_HPP_
#define DOPD_GRAPH_HPP_

// Time-varying directed communication graphs and their mixing matrices.
//
// Orientation: entry (i, j) of a weight matrix is the weight node i applies
// to the value pushed along edge j -> i. Column j therefore describes how
// node j splits its mass among its out-neighbours.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dopd {

// topology(i, j) == true iff edge j -> i exists.
using Topology = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

class WeightMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

  WeightMatrix() = default;
  explicit WeightMatrix(Sparse entries);
  explicit WeightMatrix(const Eigen::MatrixXd& dense);

  Eigen::Index size() const { return entries_.rows(); }
  const Sparse& entries() const { return entries_; }
  Eigen::MatrixXd ToDense() const { return Eigen::MatrixXd(entries_); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_.coeff(i, j); }

  Eigen::VectorXd ColumnSums() const;
  Eigen::VectorXd RowSums() const;
  // Smallest strictly positive entry; +inf for an all-zero matrix.
  double MinPositive() const;
  bool HasNegativeEntry() const;
  bool HasAllSelfLoops() const;
  bool IsColumnStochastic(double tol = 1e-12) const;
  bool IsDoublyStochastic(double tol = 1e-12) const;
  Topology Pattern() const;

  bool operator==(const WeightMatrix& other) const;

 private:
  Sparse entries_;
};

// Equal split over out-neighbours: column j holds 1/d_j on every i with
// topology(i, j). Throws kEmptyColumn, kInvalidArgument (missing self-loop)
// or kMinWeightInfeasible.
WeightMatrix MakeColumnStochastic(const Topology& topology, double a_min);

// Symmetric doubly stochastic weights on an undirected pattern:
// a_ij = 1 / (1 + max(d_i, d_j)) off the diagonal, degree without self-loop.
WeightMatrix MakeMetropolis(const Topology& symmetric_topology);

// One period of mixing matrices, repeated cyclically: round t uses
// matrices[t mod size].
struct GraphSequence {
  std::vector<WeightMatrix> matrices;
  int period_q = 1;
  std::uint64_t seed = 0;

  Eigen::Index num_nodes() const { return matrices.empty() ? 0 : matrices.front().size(); }
  const WeightMatrix& at(std::int64_t t) const {
    return matrices[static_cast<std::size_t>(t % static_cast<std::int64_t>(matrices.size()))];
  }
  double MinPositiveWeight() const;
  bool operator==(const GraphSequence& other) const = default;
};

GraphSequence ConstantSequence(WeightMatrix a, int period_q = 1);

struct AssumptionOptions {
  // Additionally require every row sum <= 1. Together with column
  // stochasticity this forces double stochasticity, so it is off unless the
  // caller is validating a balanced sequence.
  bool require_row_sums_at_most_one = false;
  double tol = 1e-12;
};

struct AssumptionViolation {
  // 1: weight lower bound, 2: stochasticity, 3: joint strong connectivity,
  // 0: a node without a self-loop.
  int clause = 0;
  std::int64_t round = 0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionViolation> violations;
  bool ok() const { return violations.empty(); }
  bool Has(int clause) const;
};

// Checks rounds t in [0, horizon] and windows [t, t + Q - 1] inside that
// range. At most one entry per clause, for the first offending round.
AssumptionReport CheckAssumption1(const GraphSequence& seq, std::int64_t horizon, double a_min,
                                  int period_q, const AssumptionOptions& options = {});

bool IsStronglyConnected(const Topology& topology);

struct SwitchingOptions {
  bool balanced = false;
  int max_retries = 16;
};

// Q sparse digraphs with self-loops, cycled with period Q. A random directed
// Hamiltonian cycle is dealt across the Q graphs so that their union is
// strongly connected; each graph also receives the edges of one random
// permutation, which keeps in- and out-degrees close without balancing them.
// Pure function of (n, Q, seed, options).
GraphSequence GenerateSwitchingCycle(int n, int period_q, std::uint64_t seed,
                                     const SwitchingOptions& options = {});

void WriteGraphSequence(std::ostream& out, const GraphSequence& seq);
GraphSequence ReadGraphSequence(std::istream& in);
GraphSequence LoadGraphSequence(const std::string& path);
void SaveGraphSequence(const std::string& path, const GraphSequence& seq);

}  // namespace dopd

#endif  // DOPD_GRAPH_HPP_
