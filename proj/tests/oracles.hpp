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

#ifndef DOPD_TESTS_ORACLES_HPP_
#define DOPD_TESTS_ORACLES_HPP_

// Independent reference implementations used only by the tests.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

#include "dopd/geometry.hpp"
#include "dopd/rng.hpp"

namespace dopd::testing {

// Projection onto {x : rows x <= rhs} by enumerating every subset of at most
// n constraints, projecting onto the affine hull of the subset, and keeping
// the closest feasible candidate.
inline Vector EnumerationProjection(const Matrix& rows, const Vector& rhs, const Vector& z,
                                    double feas_tol = 1e-10) {
  const Eigen::Index n = z.size();
  const auto k = static_cast<int>(rows.rows());
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& x) {
    if ((rows * x - rhs).maxCoeff() > feas_tol) return;
    const double d = (x - z).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  };
  if (k == 0 || (rows * z - rhs).maxCoeff() <= 0) return z;
  std::vector<int> subset;
  // Iterate over bitmasks of size <= n; k stays small in the tests.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
    subset.clear();
    for (int j = 0; j < k; ++j) {
      if (mask >> j & 1) subset.push_back(j);
    }
    if (static_cast<Eigen::Index>(subset.size()) > n) continue;
    const auto s = static_cast<Eigen::Index>(subset.size());
    Matrix a(s, n);
    Vector b(s);
    for (Eigen::Index r = 0; r < s; ++r) {
      a.row(r) = rows.row(subset[static_cast<std::size_t>(r)]);
      b(r) = rhs(subset[static_cast<std::size_t>(r)]);
    }
    const Matrix gram = a * a.transpose();
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() < s) continue;
    const Vector lambda = lu.solve(a * z - b);
    consider(z - a.transpose() * lambda);
  }
  return best;
}

// Random compact polyhedron in dimension n: k random halfspaces around the
// origin (which stays strictly feasible) inside the box [-2, 2]^n.
inline Polyhedrond RandomPolyhedron(CounterRng& rng, int n, int k) {
  Matrix rows(k, n);
  Vector rhs(k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < n; ++c) rows(r, c) = rng.Uniform(-1, 1);
    rhs(r) = rng.Uniform(0.1, 1.0);
  }
  return Polyhedrond(rows, rhs, MakeBox<double>(Vector::Constant(n, -2), Vector::Constant(n, 2)));
}

// min c.x over the bounded polytope {rows x <= rhs} by enumerating every
// vertex: each n-subset of rows with a nonsingular system is solved and kept
// when feasible. Returns +inf when no vertex is feasible.
inline double EnumerationLpMinimum(const Matrix& rows, const Vector& rhs, const Vector& c,
                                   Vector* argmin = nullptr, double feas_tol = 1e-9) {
  const Eigen::Index n = c.size();
  const auto k = static_cast<int>(rows.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  // Lexicographic n-subsets of {0, .., k-1}.
  for (Eigen::Index j = 0; j < n; ++j) pick[static_cast<std::size_t>(j)] = static_cast<int>(j);
  while (true) {
    Matrix a(n, n);
    Vector b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      a.row(r) = rows.row(pick[static_cast<std::size_t>(r)]);
      b(r) = rhs(pick[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible()) {
      const Vector x = lu.solve(b);
      if ((rows * x - rhs).maxCoeff() <= feas_tol && c.dot(x) < best) {
        best = c.dot(x);
        if (argmin != nullptr) *argmin = x;
      }
    }
    Eigen::Index j = n - 1;
    while (j >= 0 && pick[static_cast<std::size_t>(j)] == k - n + j) --j;
    if (j < 0) break;
    ++pick[static_cast<std::size_t>(j)];
    for (Eigen::Index l = j + 1; l < n; ++l) {
      pick[static_cast<std::size_t>(l)] = pick[static_cast<std::size_t>(l - 1)] + 1;
    }
  }
  return best;
}

inline Vector RandomVector(CounterRng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.Uniform(lo, hi);
  return v;
}

}  // namespace dopd::testing

#endif  // DOPD_TESTS_ORACLES_HPP_
