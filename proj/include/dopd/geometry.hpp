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

#ifndef DOPD_GEOMETRY_HPP_
#define DOPD_GEOMETRY_HPP_

// Convex sets used as local constraint sets and their Euclidean projections.
//
// Box, NonnegOrthant and Halfspace are projected in closed form. A Polyhedron
// {x : C x <= d} inside a mandatory bounding box is projected exactly by the
// dual active-set solver; ProjectDykstra offers the iterative alternative
// that converges to the same point.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dopd/error.hpp"
#include "dopd/least_distance.hpp"

namespace dopd {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Box {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  Eigen::Index dim() const { return lower.size(); }
};

template <typename Scalar>
struct NonnegOrthant {
  Eigen::Index dim = 0;
};

// {x : normal . x <= offset}
template <typename Scalar>
struct Halfspace {
  VectorX<Scalar> normal;
  Scalar offset = 0;

  Eigen::Index dim() const { return normal.size(); }
};

template <typename Scalar>
Box<Scalar> MakeBox(VectorX<Scalar> lower, VectorX<Scalar> upper) {
  Require(lower.size() == upper.size(), ErrorCode::kDimensionMismatch,
          "box bounds have different lengths");
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    Require(std::isfinite(lower(k)) && std::isfinite(upper(k)),
            ErrorCode::kInvalidArgument, "box bounds must be finite");
    Require(lower(k) <= upper(k), ErrorCode::kInvalidArgument,
            "box lower bound exceeds upper bound at coordinate " + std::to_string(k));
  }
  return Box<Scalar>{std::move(lower), std::move(upper)};
}

template <typename Scalar>
Halfspace<Scalar> MakeHalfspace(VectorX<Scalar> normal, Scalar offset) {
  Require(normal.norm() > Scalar(0), ErrorCode::kInvalidArgument,
          "halfspace normal must be nonzero");
  return Halfspace<Scalar>{std::move(normal), offset};
}

template <typename Scalar>
VectorX<Scalar> ProjectBox(const Box<Scalar>& box, const VectorX<Scalar>& z) {
  return z.cwiseMax(box.lower).cwiseMin(box.upper);
}

// Compact polyhedron {x in box : rows * x <= rhs}. Immutable; the active-set
// solver over the stacked constraints (rows plus box faces) is built once.
template <typename Scalar>
class Polyhedron {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  static constexpr Scalar kDefaultTolerance = Scalar(1e-9);
  static constexpr int kDefaultMaxIter = 10000;

  // Throws kInfeasible if the set is empty.
  Polyhedron(Matrix rows, Vector rhs, Box<Scalar> box)
      : rows_(std::move(rows)), rhs_(std::move(rhs)), box_(std::move(box)) {
    const Eigen::Index n = box_.dim();
    Require(rows_.cols() == n || rows_.rows() == 0, ErrorCode::kDimensionMismatch,
            "polyhedron rows do not match the box dimension");
    if (rows_.rows() == 0) rows_.resize(0, n);
    Require(rhs_.size() == rows_.rows(), ErrorCode::kDimensionMismatch,
            "polyhedron rhs length does not match the number of rows");
    const Eigen::Index k = rows_.rows();
    Matrix normals(n, k + 2 * n);
    Vector bounds(k + 2 * n);
    normals.leftCols(k) = -rows_.transpose();
    bounds.head(k) = -rhs_;
    normals.middleCols(k, n).setIdentity();
    bounds.segment(k, n) = box_.lower;
    normals.rightCols(n) = -Matrix::Identity(n, n);
    bounds.tail(n) = -box_.upper;
    solver_ = LeastDistanceSolver<Scalar>(std::move(normals), std::move(bounds));

    // Feasibility probe from the box centre.
    const Vector centre = (box_.lower + box_.upper) / Scalar(2);
    auto probe = solver_.Solve(centre, kDefaultTolerance, kDefaultMaxIter);
    Require(!probe.infeasible && probe.converged &&
                Residual(probe.x) <= Scalar(1e-8) * (Scalar(1) + rhs_.cwiseAbs().sum()),
            ErrorCode::kInfeasible, "polyhedron is empty");
  }

  Eigen::Index dim() const { return box_.dim(); }
  const Matrix& rows() const { return rows_; }
  const Vector& rhs() const { return rhs_; }
  const Box<Scalar>& box() const { return box_; }
  const LeastDistanceSolver<Scalar>& solver() const { return solver_; }

  // Largest constraint violation; zero inside the set.
  Scalar Residual(const Vector& x) const {
    Scalar r = 0;
    if (rows_.rows() > 0) r = std::max(r, (rows_ * x - rhs_).maxCoeff());
    r = std::max(r, (box_.lower - x).maxCoeff());
    r = std::max(r, (x - box_.upper).maxCoeff());
    return r;
  }

 private:
  Matrix rows_;
  Vector rhs_;
  Box<Scalar> box_;
  LeastDistanceSolver<Scalar> solver_;
};

template <typename Scalar>
class ConvexSet {
 public:
  using Vector = VectorX<Scalar>;
  using Variant = std::variant<Box<Scalar>, NonnegOrthant<Scalar>, Halfspace<Scalar>,
                               Polyhedron<Scalar>>;

  ConvexSet(Box<Scalar> s) : set_(std::move(s)) {}              // NOLINT
  ConvexSet(NonnegOrthant<Scalar> s) : set_(std::move(s)) {}    // NOLINT
  ConvexSet(Halfspace<Scalar> s) : set_(std::move(s)) {}        // NOLINT
  ConvexSet(Polyhedron<Scalar> s) : set_(std::move(s)) {}       // NOLINT

  const Variant& variant() const { return set_; }

  template <typename T>
  const T* get_if() const { return std::get_if<T>(&set_); }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, NonnegOrthant<Scalar>>) {
            return s.dim;
          } else {
            return s.dim();
          }
        },
        set_);
  }

  bool is_compact() const {
    return std::holds_alternative<Box<Scalar>>(set_) ||
           std::holds_alternative<Polyhedron<Scalar>>(set_);
  }

  // Largest violation of the set's defining inequalities.
  Scalar Residual(const Vector& x) const {
    return std::visit(
        [&](const auto& s) -> Scalar {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box<Scalar>>) {
            return std::max({Scalar(0), (s.lower - x).maxCoeff(), (x - s.upper).maxCoeff()});
          } else if constexpr (std::is_same_v<T, NonnegOrthant<Scalar>>) {
            return x.size() == 0 ? Scalar(0) : std::max(Scalar(0), -x.minCoeff());
          } else if constexpr (std::is_same_v<T, Halfspace<Scalar>>) {
            return std::max(Scalar(0), s.normal.dot(x) - s.offset);
          } else {
            return std::max(Scalar(0), s.Residual(x));
          }
        },
        set_);
  }

  bool Contains(const Vector& x, Scalar tol = Scalar(1e-8)) const {
    return x.size() == dim() && Residual(x) <= tol;
  }

  // Bounding box for compact sets.
  std::optional<Box<Scalar>> BoundingBox() const {
    if (const auto* b = get_if<Box<Scalar>>()) return *b;
    if (const auto* p = get_if<Polyhedron<Scalar>>()) return p->box();
    return std::nullopt;
  }

 private:
  Variant set_;
};

// Exact projection onto a polyhedron. `hint` and `active_out` let a caller
// that projects nearby points repeatedly reuse the previous active set.
template <typename Scalar>
VectorX<Scalar> ProjectPolyhedron(const Polyhedron<Scalar>& poly, const VectorX<Scalar>& z,
                                  std::span<const Eigen::Index> hint = {},
                                  std::vector<Eigen::Index>* active_out = nullptr) {
  auto res = poly.solver().Solve(z, Scalar(1e-12), Polyhedron<Scalar>::kDefaultMaxIter, hint);
  Require(!res.infeasible, ErrorCode::kInfeasible, "polyhedron projection found no feasible point");
  if (!res.converged) {
    throw Error(ErrorCode::kNonConvergence,
                "active-set projection hit its iteration cap, residual " +
                    std::to_string(static_cast<double>(poly.Residual(res.x))));
  }
  // Box faces are exact by construction; clamp away round-off.
  VectorX<Scalar> x = ProjectBox(poly.box(), res.x);
  if (active_out != nullptr) *active_out = std::move(res.active);
  return x;
}

template <typename Scalar>
VectorX<Scalar> Project(const ConvexSet<Scalar>& set, const VectorX<Scalar>& z) {
  Require(z.size() == set.dim(), ErrorCode::kDimensionMismatch,
          "point has dimension " + std::to_string(z.size()) + ", set has " +
              std::to_string(set.dim()));
  return std::visit(
      [&](const auto& s) -> VectorX<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) {
          return ProjectBox(s, z);
        } else if constexpr (std::is_same_v<T, NonnegOrthant<Scalar>>) {
          return z.cwiseMax(Scalar(0));
        } else if constexpr (std::is_same_v<T, Halfspace<Scalar>>) {
          const Scalar excess = s.normal.dot(z) - s.offset;
          if (excess <= Scalar(0)) return z;
          return z - (excess / s.normal.squaredNorm()) * s.normal;
        } else {
          return ProjectPolyhedron(s, z);
        }
      },
      set.variant());
}

// The set as {x : rows x <= rhs}.
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> ToInequalities(const ConvexSet<Scalar>& set) {
  using M = MatrixX<Scalar>;
  using V = VectorX<Scalar>;
  const Eigen::Index n = set.dim();
  auto box_rows = [n](const Box<Scalar>& b, M& rows, V& rhs, Eigen::Index offset) {
    rows.block(offset, 0, n, n).setIdentity();
    rows.block(offset + n, 0, n, n) = -M::Identity(n, n);
    rhs.segment(offset, n) = b.upper;
    rhs.segment(offset + n, n) = -b.lower;
  };
  return std::visit(
      [&](const auto& s) -> std::pair<M, V> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) {
          M rows(2 * n, n);
          V rhs(2 * n);
          box_rows(s, rows, rhs, 0);
          return {rows, rhs};
        } else if constexpr (std::is_same_v<T, NonnegOrthant<Scalar>>) {
          return {-M::Identity(n, n), V::Zero(n)};
        } else if constexpr (std::is_same_v<T, Halfspace<Scalar>>) {
          return {s.normal.transpose(), V::Constant(1, s.offset)};
        } else {
          const Eigen::Index k = s.rows().rows();
          M rows(k + 2 * n, n);
          V rhs(k + 2 * n);
          rows.topRows(k) = s.rows();
          rhs.head(k) = s.rhs();
          box_rows(s.box(), rows, rhs, k);
          return {rows, rhs};
        }
      },
      set.variant());
}

template <typename Scalar>
struct DykstraReport {
  VectorX<Scalar> x;
  int cycles = 0;
  Scalar last_displacement = 0;
  Scalar residual = 0;
};

// Cyclic Dykstra over the halfspaces {rows.row(k) x <= rhs(k)} and the box.
// Converged once a full cycle moves the iterate and every correction term by
// less than tol/10 and the iterate violates no constraint by more than tol.
// The iterate alone can stall for a cycle while the corrections still move.
template <typename Scalar>
DykstraReport<Scalar> ProjectDykstraReport(const MatrixX<Scalar>& rows, const VectorX<Scalar>& rhs,
                                           const Box<Scalar>& box, const VectorX<Scalar>& z,
                                           Scalar tol, int max_iter) {
  Require(tol > Scalar(0) && max_iter >= 1, ErrorCode::kInvalidArgument,
          "Dykstra needs tol > 0 and max_iter >= 1");
  const Eigen::Index n = box.dim();
  Require(z.size() == n, ErrorCode::kDimensionMismatch, "point does not match box dimension");
  const Eigen::Index k = rhs.size();
  Require(k == 0 || (rows.rows() == k && rows.cols() == n), ErrorCode::kDimensionMismatch,
          "constraint rows do not match rhs or box dimension");

  VectorX<Scalar> row_sq(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    row_sq(j) = rows.row(j).squaredNorm();
    Require(row_sq(j) > Scalar(0), ErrorCode::kInvalidArgument, "zero constraint row");
  }
  // For halfspaces the Dykstra increment is a multiple of the normal, so only
  // the scalar multiplier is stored.
  VectorX<Scalar> lambda = VectorX<Scalar>::Zero(k);
  VectorX<Scalar> box_increment = VectorX<Scalar>::Zero(n);
  VectorX<Scalar> x = z;
  DykstraReport<Scalar> rep;
  auto residual = [&](const VectorX<Scalar>& v) {
    Scalar r = std::max({Scalar(0), (box.lower - v).maxCoeff(), (v - box.upper).maxCoeff()});
    if (k > 0) r = std::max(r, (rows * v - rhs).maxCoeff());
    return r;
  };
  for (int cycle = 1; cycle <= max_iter; ++cycle) {
    const VectorX<Scalar> start = x;
    const VectorX<Scalar> lambda_start = lambda;
    const VectorX<Scalar> box_start = box_increment;
    for (Eigen::Index j = 0; j < k; ++j) {
      // y = x + lambda_j a_j, then project y onto {a_j . v <= rhs_j}.
      const Scalar ay = rows.row(j).dot(x) + lambda(j) * row_sq(j);
      const Scalar new_lambda = std::max(Scalar(0), (ay - rhs(j)) / row_sq(j));
      x += (lambda(j) - new_lambda) * rows.row(j).transpose();
      lambda(j) = new_lambda;
    }
    const VectorX<Scalar> y = x + box_increment;
    x = ProjectBox(box, y);
    box_increment = y - x;

    rep.cycles = cycle;
    rep.last_displacement = (x - start).norm();
    Scalar correction_change = (box_increment - box_start).norm();
    for (Eigen::Index j = 0; j < k; ++j) {
      correction_change = std::max(
          correction_change, std::abs(lambda(j) - lambda_start(j)) * std::sqrt(row_sq(j)));
    }
    if (rep.last_displacement < tol / Scalar(10) && correction_change < tol / Scalar(10)) {
      rep.residual = residual(x);
      if (rep.residual <= tol) {
        rep.x = std::move(x);
        return rep;
      }
    }
  }
  rep.x = x;
  rep.residual = residual(x);
  throw Error(ErrorCode::kNonConvergence,
              "Dykstra did not converge in " + std::to_string(max_iter) +
                  " cycles: last displacement " +
                  std::to_string(static_cast<double>(rep.last_displacement)) + ", residual " +
                  std::to_string(static_cast<double>(rep.residual)));
}

template <typename Scalar>
VectorX<Scalar> ProjectDykstra(const MatrixX<Scalar>& rows, const VectorX<Scalar>& rhs,
                               const Box<Scalar>& box, const VectorX<Scalar>& z,
                               Scalar tol = Scalar(1e-9), int max_iter = 10000) {
  return ProjectDykstraReport(rows, rhs, box, z, tol, max_iter).x;
}

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using ConvexSetd = ConvexSet<double>;
using Boxd = Box<double>;
using Polyhedrond = Polyhedron<double>;

}  // namespace dopd

#endif  // DOPD_GEOMETRY_HPP_
