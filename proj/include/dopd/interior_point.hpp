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

#ifndef DOPD_INTERIOR_POINT_HPP_
#define DOPD_INTERIOR_POINT_HPP_

// Primal-dual interior-point solver for block-angular convex QPs
//
//   min  sum_i 0.5 x_i^T H_i x_i + q_i . x_i
//   s.t. G_i x_i <= h_i            (local rows, one block per agent)
//        sum_i C_i x_i <= d        (coupling rows)
//
// with Mehrotra predictor-corrector steps. The Newton system is reduced to
// one Cholesky factorisation per block plus an m x m Schur complement over
// the coupling rows, so the cost grows linearly in the number of blocks.

#include <Eigen/Dense>

#include <vector>

namespace dopd {

struct QpBlock {
  Eigen::MatrixXd hessian;  // n x n, symmetric positive semidefinite
  Eigen::VectorXd linear;   // n
  Eigen::MatrixXd g;        // local rows, k x n
  Eigen::VectorXd h;        // k
  Eigen::MatrixXd c;        // coupling rows, m x n
};

struct BlockQp {
  std::vector<QpBlock> blocks;
  Eigen::VectorXd d;  // m
};

struct IpmOptions {
  double tol = 1e-9;
  // Accepted when the target cannot be reached before rounding takes over.
  double acceptable_tol = 1e-6;
  int max_iter = 200;
  double step_fraction = 0.99;
  double regularization = 1e-12;
  int refinement_steps = 3;
};

struct IpmResult {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> local_duals;
  Eigen::VectorXd coupling_dual;
  double objective = 0;
  // Scaled infinity norms of the final residuals and the complementarity gap
  // s . z over all rows.
  double primal_residual = 0;
  double dual_residual = 0;
  double gap = 0;
  int iterations = 0;
  bool converged = false;
  bool reached_tol = false;  // false when only acceptable_tol was met
};

// Throws kDimensionMismatch for inconsistent blocks and kNonConvergence when
// no iterate meets acceptable_tol; the message carries the best residuals.
IpmResult SolveBlockQp(const BlockQp& qp, const IpmOptions& options = {});

}  // namespace dopd

#endif  // DOPD_INTERIOR_POINT_HPP_
