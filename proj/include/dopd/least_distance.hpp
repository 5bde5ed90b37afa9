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

#ifndef DOPD_LEAST_DISTANCE_HPP_
#define DOPD_LEAST_DISTANCE_HPP_

// Exact Euclidean projection onto a polyhedron {x : N^T x >= e} by the dual
// active-set method of Goldfarb and Idnani, specialised to the identity
// Hessian. The factorisation J^T N_A = [R; 0] of the active normals is kept up
// to date with Givens rotations, so adding or dropping a constraint costs
// O(n^2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace dopd {

template <typename Scalar>
struct LeastDistanceResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  std::vector<Eigen::Index> active;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> multipliers;  // one per active index
  int iterations = 0;
  bool converged = false;
  bool infeasible = false;
  Scalar max_violation = 0;
};

template <typename Scalar>
class LeastDistanceSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  LeastDistanceSolver() = default;

  // Column j of `normals` and entry j of `bounds` describe n_j^T x >= e_j.
  LeastDistanceSolver(Matrix normals, Vector bounds)
      : normals_(std::move(normals)), bounds_(std::move(bounds)) {
    norms_ = normals_.colwise().norm().transpose();
    for (Index j = 0; j < norms_.size(); ++j) {
      if (norms_(j) == Scalar(0)) norms_(j) = Scalar(1);
    }
  }

  Index dim() const { return normals_.rows(); }
  Index num_constraints() const { return normals_.cols(); }
  const Matrix& normals() const { return normals_; }
  const Vector& bounds() const { return bounds_; }

  // Largest scaled violation max_j (e_j - n_j^T x) / |n_j|, clamped at zero.
  Scalar MaxViolation(const Vector& x) const {
    if (num_constraints() == 0) return Scalar(0);
    Vector slack = normals_.transpose() * x - bounds_;
    return std::max(Scalar(0), (-slack.array() / norms_.array()).maxCoeff());
  }

  // `hint` may carry the active set of a nearby earlier solve; it only
  // affects the work done, never the answer.
  LeastDistanceResult<Scalar> Solve(const Vector& z, Scalar tol, int max_iter,
                                    std::span<const Index> hint = {}) const {
    const Index n = dim();
    const Index p = num_constraints();
    LeastDistanceResult<Scalar> out;
    Vector x = z;
    Matrix J = Matrix::Identity(n, n);
    Matrix R = Matrix::Zero(n, n);
    Vector u = Vector::Zero(n);
    std::vector<Index> active;
    active.reserve(static_cast<std::size_t>(n));
    std::vector<char> is_active(static_cast<std::size_t>(p), 0);
    Index q = 0;
    Vector d(n);
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    auto add = [&](Index idx) -> bool {
      d.noalias() = J.transpose() * normals_.col(idx);
      for (Index j = n - 1; j > q; --j) {
        Eigen::JacobiRotation<Scalar> g;
        g.makeGivens(d(j - 1), d(j));
        d.applyOnTheLeft(j - 1, j, g.adjoint());
        J.applyOnTheRight(j - 1, j, g);
      }
      if (std::abs(d(q)) <= Scalar(1e3) * eps * norms_(idx)) return false;
      R.col(q).head(q + 1) = d.head(q + 1);
      active.push_back(idx);
      is_active[static_cast<std::size_t>(idx)] = 1;
      ++q;
      return true;
    };

    auto drop = [&](Index k) {
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])] = 0;
      active.erase(active.begin() + k);
      for (Index j = k; j + 1 < q; ++j) {
        R.col(j).head(q) = R.col(j + 1).head(q);
        u(j) = u(j + 1);
      }
      R.col(q - 1).setZero();
      u(q - 1) = 0;
      for (Index j = k; j + 1 < q; ++j) {
        Eigen::JacobiRotation<Scalar> g;
        g.makeGivens(R(j, j), R(j + 1, j));
        R.block(j, j, 2, q - 1 - j).applyOnTheLeft(0, 1, g.adjoint());
        R(j + 1, j) = 0;
        J.applyOnTheRight(j, j + 1, g);
      }
      --q;
    };

    // Warm start: factor the hinted constraints, then keep dropping the most
    // negative multiplier until the equality-constrained point is dual
    // feasible. That point solves the subproblem restricted to the hint, which
    // is a valid starting state for the dual method.
    if (!hint.empty()) {
      for (Index idx : hint) {
        if (idx < 0 || idx >= p || is_active[static_cast<std::size_t>(idx)] || q == n) continue;
        add(idx);
      }
      while (q > 0) {
        Vector rhs(q);
        for (Index k = 0; k < q; ++k) {
          const Index idx = active[static_cast<std::size_t>(k)];
          rhs(k) = bounds_(idx) - normals_.col(idx).dot(z);
        }
        auto Rq = R.topLeftCorner(q, q).template triangularView<Eigen::Upper>();
        Vector w = Rq.transpose().solve(rhs);
        Vector mult = Rq.solve(w);
        Index worst = 0;
        const Scalar lowest = mult.minCoeff(&worst);
        if (lowest >= Scalar(0)) {
          u.head(q) = mult;
          x = z + J.leftCols(q) * w;
          break;
        }
        drop(worst);
      }
    }

    int iter = 0;
    while (true) {
      // Pick the most violated inactive constraint.
      Index pick = -1;
      Scalar worst = tol;
      for (Index j = 0; j < p; ++j) {
        if (is_active[static_cast<std::size_t>(j)]) continue;
        const Scalar viol = (bounds_(j) - normals_.col(j).dot(x)) / norms_(j);
        if (viol > worst) {
          worst = viol;
          pick = j;
        }
      }
      if (pick < 0) {
        out.converged = true;
        break;
      }
      Scalar u_pick = 0;
      bool added = false;
      while (!added) {
        if (++iter > max_iter) {
          out.x = x;
          out.iterations = iter;
          out.max_violation = MaxViolation(x);
          out.active = active;
          out.multipliers = u.head(q);
          return out;
        }
        const auto& np = normals_.col(pick);
        d.noalias() = J.transpose() * np;
        Vector step = J.rightCols(n - q) * d.tail(n - q);
        Vector r(q);
        if (q > 0) {
          r = R.topLeftCorner(q, q).template triangularView<Eigen::Upper>().solve(d.head(q));
        }
        Scalar t_partial = std::numeric_limits<Scalar>::infinity();
        Index leaving = -1;
        for (Index k = 0; k < q; ++k) {
          if (r(k) > eps * Scalar(16)) {
            const Scalar ratio = u(k) / r(k);
            if (ratio < t_partial) {
              t_partial = ratio;
              leaving = k;
            }
          }
        }
        const Scalar curvature = step.dot(np);
        const Scalar slack = np.dot(x) - bounds_(pick);
        Scalar t_full = std::numeric_limits<Scalar>::infinity();
        if (curvature > eps * Scalar(1e3) * norms_(pick) * norms_(pick)) {
          t_full = -slack / curvature;
        }
        const Scalar t = std::min(t_partial, t_full);
        if (!std::isfinite(t)) {
          out.infeasible = true;
          out.x = x;
          out.iterations = iter;
          out.max_violation = MaxViolation(x);
          return out;
        }
        if (!std::isfinite(t_full)) {
          u.head(q) -= t * r;
          u_pick += t;
          drop(leaving);
          continue;
        }
        x += t * step;
        u.head(q) -= t * r;
        u_pick += t;
        if (t_full <= t_partial) {
          if (!add(pick)) {
            // Numerically dependent on the active set; the full step already
            // satisfied it.
            break;
          }
          u(q - 1) = u_pick;
          added = true;
        } else {
          drop(leaving);
        }
      }
    }
    out.x = std::move(x);
    out.iterations = iter;
    out.max_violation = MaxViolation(out.x);
    out.active = std::move(active);
    out.multipliers = u.head(q);
    return out;
  }

 private:
  Matrix normals_;
  Vector bounds_;
  Vector norms_;
};

}  // namespace dopd

#endif  // DOPD_LEAST_DISTANCE_HPP_
