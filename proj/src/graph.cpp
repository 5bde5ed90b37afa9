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

#include "dopd/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "dopd/error.hpp"
#include "dopd/rng.hpp"

namespace dopd {

WeightMatrix::WeightMatrix(Sparse entries) : entries_(std::move(entries)) {
  Require(entries_.rows() == entries_.cols(), ErrorCode::kDimensionMismatch,
          "weight matrix must be square");
  entries_.makeCompressed();
}

WeightMatrix::WeightMatrix(const Eigen::MatrixXd& dense)
    : WeightMatrix(Sparse(dense.sparseView(0.0, 0.0))) {}

Eigen::VectorXd WeightMatrix::ColumnSums() const {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(size());
  for (Eigen::Index j = 0; j < entries_.outerSize(); ++j) {
    for (Sparse::InnerIterator it(entries_, j); it; ++it) sums(j) += it.value();
  }
  return sums;
}

Eigen::VectorXd WeightMatrix::RowSums() const {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(size());
  for (Eigen::Index j = 0; j < entries_.outerSize(); ++j) {
    for (Sparse::InnerIterator it(entries_, j); it; ++it) sums(it.row()) += it.value();
  }
  return sums;
}

double WeightMatrix::MinPositive() const {
  double lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < entries_.outerSize(); ++j) {
    for (Sparse::InnerIterator it(entries_, j); it; ++it) {
      if (it.value() > 0) lo = std::min(lo, it.value());
    }
  }
  return lo;
}

bool WeightMatrix::HasNegativeEntry() const {
  for (Eigen::Index j = 0; j < entries_.outerSize(); ++j) {
    for (Sparse::InnerIterator it(entries_, j); it; ++it) {
      if (it.value() < 0) return true;
    }
  }
  return false;
}

bool WeightMatrix::HasAllSelfLoops() const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!(entries_.coeff(i, i) > 0)) return false;
  }
  return true;
}

bool WeightMatrix::IsColumnStochastic(double tol) const {
  if (HasNegativeEntry()) return false;
  return ((ColumnSums().array() - 1.0).abs() <= tol).all();
}

bool WeightMatrix::IsDoublyStochastic(double tol) const {
  return IsColumnStochastic(tol) && ((RowSums().array() - 1.0).abs() <= tol).all();
}

Topology WeightMatrix::Pattern() const {
  Topology t = Topology::Constant(size(), size(), false);
  for (Eigen::Index j = 0; j < entries_.outerSize(); ++j) {
    for (Sparse::InnerIterator it(entries_, j); it; ++it) {
      if (it.value() != 0) t(it.row(), j) = true;
    }
  }
  return t;
}

bool WeightMatrix::operator==(const WeightMatrix& other) const {
  if (size() != other.size()) return false;
  return ToDense() == other.ToDense();
}

WeightMatrix MakeColumnStochastic(const Topology& topology, double a_min) {
  const Eigen::Index n = topology.rows();
  Require(topology.cols() == n, ErrorCode::kDimensionMismatch, "topology must be square");
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index out_degree = topology.col(j).count();
    Require(out_degree > 0, ErrorCode::kEmptyColumn,
            "node " + std::to_string(j) + " has no out-edges");
    Require(topology(j, j), ErrorCode::kInvalidArgument,
            "node " + std::to_string(j) + " lacks a self-loop");
    const double w = 1.0 / static_cast<double>(out_degree);
    Require(w >= a_min, ErrorCode::kMinWeightInfeasible,
            "equal split 1/" + std::to_string(out_degree) + " at node " + std::to_string(j) +
                " is below a_min");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (topology(i, j)) triplets.emplace_back(i, j, w);
    }
  }
  WeightMatrix::Sparse a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return WeightMatrix(std::move(a));
}

WeightMatrix MakeMetropolis(const Topology& symmetric_topology) {
  const Eigen::Index n = symmetric_topology.rows();
  Require(symmetric_topology.cols() == n, ErrorCode::kDimensionMismatch,
          "topology must be square");
  Eigen::VectorXi degree = Eigen::VectorXi::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || !symmetric_topology(i, j)) continue;
      Require(symmetric_topology(j, i), ErrorCode::kInvalidArgument,
              "Metropolis weights need a symmetric topology");
      ++degree(i);
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || !symmetric_topology(i, j)) continue;
      a(i, j) = 1.0 / (1.0 + std::max(degree(i), degree(j)));
      off += a(i, j);
    }
    a(i, i) = 1.0 - off;
  }
  return WeightMatrix(a);
}

double GraphSequence::MinPositiveWeight() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& m : matrices) lo = std::min(lo, m.MinPositive());
  return lo;
}

GraphSequence ConstantSequence(WeightMatrix a, int period_q) {
  GraphSequence seq;
  seq.matrices.push_back(std::move(a));
  seq.period_q = period_q;
  return seq;
}

bool AssumptionReport::Has(int clause) const {
  return std::any_of(violations.begin(), violations.end(),
                     [clause](const AssumptionViolation& v) { return v.clause == clause; });
}

namespace {

void Reach(const Topology& adj, bool transpose, std::vector<char>& seen) {
  const Eigen::Index n = adj.rows();
  std::vector<Eigen::Index> stack{0};
  seen.assign(static_cast<std::size_t>(n), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index u = 0; u < n; ++u) {
      // Edge v -> u is adj(u, v); the transpose walks edges backwards.
      const bool edge = transpose ? adj(v, u) : adj(u, v);
      if (edge && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
}

}  // namespace

bool IsStronglyConnected(const Topology& topology) {
  if (topology.rows() <= 1) return true;
  std::vector<char> seen;
  for (bool transpose : {false, true}) {
    Reach(topology, transpose, seen);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

AssumptionReport CheckAssumption1(const GraphSequence& seq, std::int64_t horizon, double a_min,
                                  int period_q, const AssumptionOptions& options) {
  Require(period_q >= 1, ErrorCode::kInvalidArgument, "Q must be positive");
  Require(horizon >= period_q, ErrorCode::kInvalidArgument, "horizon must be at least Q");
  Require(!seq.matrices.empty(), ErrorCode::kInvalidArgument, "empty graph sequence");
  AssumptionReport report;
  const auto period = static_cast<std::int64_t>(seq.matrices.size());
  // The sequence repeats with its stored period, so one period of rounds and
  // windows covers every case.
  const std::int64_t last_round = std::min(horizon, period - 1);
  bool clause0 = false, clause1 = false, clause2 = false;
  for (std::int64_t t = 0; t <= last_round; ++t) {
    const WeightMatrix& a = seq.at(t);
    std::ostringstream why;
    if (!clause0 && !a.HasAllSelfLoops()) {
      report.violations.push_back({0, t, "a node has no self-loop"});
      clause0 = true;
    }
    if (!clause1 && a.MinPositive() < a_min) {
      why << "positive weight " << a.MinPositive() << " below a=" << a_min;
      report.violations.push_back({1, t, why.str()});
      clause1 = true;
    }
    if (!clause2) {
      const Eigen::VectorXd cols = a.ColumnSums();
      Eigen::Index j = 0;
      const double col_err = (cols.array() - 1.0).abs().maxCoeff(&j);
      std::ostringstream msg;
      if (a.HasNegativeEntry()) {
        msg << "negative entry";
      } else if (col_err > options.tol) {
        msg << "column " << j << " sums to " << cols(j);
      } else if (options.require_row_sums_at_most_one) {
        const Eigen::VectorXd rows = a.RowSums();
        Eigen::Index i = 0;
        if (rows.maxCoeff(&i) > 1.0 + options.tol) msg << "row " << i << " sums to " << rows(i);
      }
      if (!msg.str().empty()) {
        report.violations.push_back({2, t, msg.str()});
        clause2 = true;
      }
    }
  }
  const std::int64_t last_window = std::min(horizon - period_q + 1, period - 1);
  const Eigen::Index n = seq.num_nodes();
  for (std::int64_t t = 0; t <= last_window; ++t) {
    Topology acc = Topology::Constant(n, n, false);
    for (int l = 0; l < period_q; ++l) acc = acc.array() || seq.at(t + l).Pattern().array();
    if (!IsStronglyConnected(acc)) {
      report.violations.push_back(
          {3, t, "union over rounds [" + std::to_string(t) + ", " +
                     std::to_string(t + period_q - 1) + "] is not strongly connected"});
      break;
    }
  }
  return report;
}

namespace {

GraphSequence GenerateOnce(int n, int period_q, std::uint64_t seed, std::uint64_t attempt,
                           bool balanced) {
  CounterRng rng(seed, 0x6772617068ULL + attempt);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int k = n - 1; k > 0; --k) {
    const auto r = static_cast<int>(rng.Below(static_cast<std::uint64_t>(k + 1)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(r)]);
  }
  // Cycle edges order[k] -> order[k+1], dealt to the Q graphs in shuffled
  // order so every graph is sparse and only the union closes the cycle.
  std::vector<std::pair<int, int>> cycle;
  for (int k = 0; k < n; ++k) {
    cycle.emplace_back(order[static_cast<std::size_t>(k)],
                       order[static_cast<std::size_t>((k + 1) % n)]);
  }
  for (int k = n - 1; k > 0; --k) {
    const auto r = static_cast<int>(rng.Below(static_cast<std::uint64_t>(k + 1)));
    std::swap(cycle[static_cast<std::size_t>(k)], cycle[static_cast<std::size_t>(r)]);
  }
  std::vector<Topology> tops(static_cast<std::size_t>(period_q),
                             Topology::Identity(n, n).cast<bool>());
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const auto [from, to] = cycle[k];
    tops[k % static_cast<std::size_t>(period_q)](to, from) = true;
  }
  // One random permutation of extra edges per graph keeps in- and
  // out-degrees comparable, so push-sum weights stay away from zero.
  for (auto& top : tops) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = n - 1; k > 0; --k) {
      const auto r = static_cast<int>(rng.Below(static_cast<std::uint64_t>(k + 1)));
      std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(r)]);
    }
    for (int from = 0; from < n; ++from) {
      const int to = perm[static_cast<std::size_t>(from)];
      if (to != from) top(to, from) = true;
    }
  }
  GraphSequence seq;
  seq.period_q = period_q;
  seq.seed = seed;
  for (auto& top : tops) {
    if (balanced) {
      Topology sym = top.array() || top.transpose().array();
      seq.matrices.push_back(MakeMetropolis(sym));
    } else {
      seq.matrices.push_back(MakeColumnStochastic(top, 1.0 / n));
    }
  }
  return seq;
}

}  // namespace

GraphSequence GenerateSwitchingCycle(int n, int period_q, std::uint64_t seed,
                                     const SwitchingOptions& options) {
  Require(n >= 2, ErrorCode::kInvalidArgument, "need at least two nodes");
  Require(period_q >= 1, ErrorCode::kInvalidArgument, "Q must be positive");
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    GraphSequence seq =
        GenerateOnce(n, period_q, seed, static_cast<std::uint64_t>(attempt), options.balanced);
    AssumptionOptions check;
    check.require_row_sums_at_most_one = options.balanced;
    const auto horizon = static_cast<std::int64_t>(2 * period_q);
    if (CheckAssumption1(seq, horizon, seq.MinPositiveWeight(), period_q, check).ok()) {
      return seq;
    }
  }
  throw Error(ErrorCode::kGenerationFailed,
              "no valid switching sequence for seed " + std::to_string(seed));
}

void WriteGraphSequence(std::ostream& out, const GraphSequence& seq) {
  out << seq.num_nodes() << ' ' << seq.period_q << '\n';
  out << std::setprecision(17);
  for (std::size_t g = 0; g < seq.matrices.size(); ++g) {
    if (g > 0) out << "---\n";
    const auto& a = seq.matrices[g].entries();
    // Row-major order so files read naturally as "i j a_ij".
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows(a);
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it) {
        out << i << ' ' << it.col() << ' ' << it.value() << '\n';
      }
    }
  }
}

GraphSequence ReadGraphSequence(std::istream& in) {
  std::string line;
  auto next_content = [&](std::string& s) -> bool {
    while (std::getline(in, s)) {
      const auto hash = s.find('#');
      if (hash != std::string::npos) s.erase(hash);
      if (s.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  Require(next_content(line), ErrorCode::kConfigParse, "graph file is empty");
  long n = 0, q = 0;
  {
    std::istringstream header(line);
    Require(static_cast<bool>(header >> n >> q) && n >= 1 && q >= 1, ErrorCode::kConfigParse,
            "graph header must be 'n Q' with positive integers");
  }
  GraphSequence seq;
  seq.period_q = static_cast<int>(q);
  std::vector<Eigen::Triplet<double>> triplets;
  auto flush = [&]() {
    WeightMatrix::Sparse a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    seq.matrices.emplace_back(std::move(a));
    triplets.clear();
  };
  while (next_content(line)) {
    if (line.find("---") != std::string::npos) {
      flush();
      continue;
    }
    std::istringstream row(line);
    long i = -1, j = -1;
    double w = 0;
    Require(static_cast<bool>(row >> i >> j >> w), ErrorCode::kConfigParse,
            "bad edge line: '" + line + "'");
    Require(i >= 0 && i < n && j >= 0 && j < n, ErrorCode::kConfigParse,
            "edge index out of range: '" + line + "'");
    triplets.emplace_back(i, j, w);
  }
  flush();
  return seq;
}

GraphSequence LoadGraphSequence(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open graph file " + path);
  return ReadGraphSequence(in);
}

void SaveGraphSequence(const std::string& path, const GraphSequence& seq) {
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write graph file " + path);
  WriteGraphSequence(out, seq);
}

}  // namespace dopd
