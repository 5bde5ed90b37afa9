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

#include "dopd/interior_point.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dopd/error.hpp"

namespace dopd {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Direction {
  std::vector<VectorXd> dx, ds, dz;
  VectorXd ds_c, dz_c;
};

// Largest step in (0, 1] keeping v + a * dv >= 0.
double MaxStep(const VectorXd& v, const VectorXd& dv) {
  double a = 1;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (dv(k) < 0) a = std::min(a, -v(k) / dv(k));
  }
  return a;
}

double InfNorm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

IpmResult SolveBlockQp(const BlockQp& qp, const IpmOptions& options) {
  const std::size_t nb = qp.blocks.size();
  const Eigen::Index m = qp.d.size();
  double scale_h = InfNorm(qp.d);
  double scale_q = 0;
  Eigen::Index rows_total = m;
  for (std::size_t b = 0; b < nb; ++b) {
    const QpBlock& blk = qp.blocks[b];
    const Eigen::Index n = blk.linear.size();
    Require(blk.hessian.rows() == n && blk.hessian.cols() == n && blk.g.cols() == n &&
                blk.g.rows() == blk.h.size() && blk.c.rows() == m && blk.c.cols() == n,
            ErrorCode::kDimensionMismatch, "inconsistent QP block " + std::to_string(b));
    scale_h = std::max(scale_h, InfNorm(blk.h));
    scale_q = std::max(scale_q, InfNorm(blk.linear));
    rows_total += blk.h.size();
  }

  std::vector<VectorXd> x(nb), s(nb), z(nb), rd(nb), rp(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const QpBlock& blk = qp.blocks[b];
    x[b] = VectorXd::Zero(blk.linear.size());
    s[b] = blk.h.cwiseMax(1.0);
    z[b] = VectorXd::Ones(blk.h.size());
  }
  VectorXd s_c = qp.d.cwiseMax(1.0);
  VectorXd z_c = VectorXd::Ones(m);
  VectorXd rp_c(m);

  std::vector<Eigen::LLT<MatrixXd>> chol(nb);
  std::vector<MatrixXd> bmat(nb);  // H + G^T W G per block
  std::vector<MatrixXd> y(nb);     // B^-1 C^T
  Eigen::LDLT<MatrixXd> schur;

  auto objective = [&]() {
    double obj = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      const QpBlock& blk = qp.blocks[b];
      obj += 0.5 * x[b].dot(blk.hessian * x[b]) + blk.linear.dot(x[b]);
    }
    return obj;
  };

  // (B + C^T W_c C)^-1 via the block factorisations and the Schur complement.
  auto apply_inverse = [&](const std::vector<VectorXd>& rhs) {
    std::vector<VectorXd> dx(nb);
    VectorXd cu = VectorXd::Zero(m);
    for (std::size_t b = 0; b < nb; ++b) {
      dx[b] = chol[b].solve(rhs[b]);
      if (m > 0) cu.noalias() += qp.blocks[b].c * dx[b];
    }
    if (m > 0) {
      const VectorXd v = schur.solve(cu);
      for (std::size_t b = 0; b < nb; ++b) dx[b].noalias() -= y[b] * v;
    }
    return dx;
  };
  auto apply_matrix = [&](const std::vector<VectorXd>& v) {
    std::vector<VectorXd> out(nb);
    VectorXd cv = VectorXd::Zero(m);
    for (std::size_t b = 0; b < nb; ++b) {
      out[b] = bmat[b] * v[b];
      if (m > 0) cv.noalias() += qp.blocks[b].c * v[b];
    }
    if (m > 0) {
      const VectorXd wcv = cv.cwiseProduct(z_c).cwiseQuotient(s_c);
      for (std::size_t b = 0; b < nb; ++b) out[b].noalias() += qp.blocks[b].c.transpose() * wcv;
    }
    return out;
  };

  // Solves the reduced Newton system for complementarity right-hand sides
  // rc (per block) and rc_c (coupling): Z ds + S dz = -rc. The Schur
  // complement loses accuracy once coupling rows are strongly active while
  // local rows are not, so the solve is refined against the explicit matrix.
  auto solve = [&](const std::vector<VectorXd>& rc, const VectorXd& rc_c) {
    Direction dir;
    dir.ds.resize(nb);
    dir.dz.resize(nb);
    const VectorXd coupling_term = (z_c.cwiseProduct(rp_c) - rc_c).cwiseQuotient(s_c);
    std::vector<VectorXd> rhs(nb);
    double rhs_norm = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      const QpBlock& blk = qp.blocks[b];
      rhs[b] = -rd[b] - blk.g.transpose() * (z[b].cwiseProduct(rp[b]) - rc[b])
                                                   .cwiseQuotient(s[b]);
      if (m > 0) rhs[b].noalias() -= blk.c.transpose() * coupling_term;
      rhs_norm = std::max(rhs_norm, InfNorm(rhs[b]));
    }
    dir.dx = apply_inverse(rhs);
    for (int pass = 0; pass < options.refinement_steps; ++pass) {
      const std::vector<VectorXd> mdx = apply_matrix(dir.dx);
      std::vector<VectorXd> res(nb);
      double res_norm = 0;
      for (std::size_t b = 0; b < nb; ++b) {
        res[b] = rhs[b] - mdx[b];
        res_norm = std::max(res_norm, InfNorm(res[b]));
      }
      if (res_norm <= 1e-14 * (1 + rhs_norm)) break;
      const std::vector<VectorXd> corr = apply_inverse(res);
      for (std::size_t b = 0; b < nb; ++b) dir.dx[b] += corr[b];
    }
    VectorXd cdx = VectorXd::Zero(m);
    for (std::size_t b = 0; b < nb; ++b) {
      if (m > 0) cdx.noalias() += qp.blocks[b].c * dir.dx[b];
    }
    for (std::size_t b = 0; b < nb; ++b) {
      dir.ds[b] = -rp[b] - qp.blocks[b].g * dir.dx[b];
      dir.dz[b] = (-rc[b] - z[b].cwiseProduct(dir.ds[b])).cwiseQuotient(s[b]);
    }
    dir.ds_c = -rp_c - cdx;
    dir.dz_c = (-rc_c - z_c.cwiseProduct(dir.ds_c)).cwiseQuotient(s_c);
    return dir;
  };

  auto step_length = [&](const Direction& dir) {
    double a = std::min(MaxStep(s_c, dir.ds_c), MaxStep(z_c, dir.dz_c));
    for (std::size_t b = 0; b < nb; ++b) {
      a = std::min({a, MaxStep(s[b], dir.ds[b]), MaxStep(z[b], dir.dz[b])});
    }
    return a;
  };

  IpmResult res;
  // Best iterate by the largest of the three scaled residuals. Close to the
  // optimum rounding can make a step worse; the best point is then kept.
  IpmResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  std::vector<VectorXd> best_x, best_z;
  VectorXd best_zc;
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    // Residuals.
    double pres = 0;
    double dres = 0;
    double sz = s_c.dot(z_c);
    rp_c = s_c - qp.d;
    for (std::size_t b = 0; b < nb; ++b) {
      const QpBlock& blk = qp.blocks[b];
      rd[b] = blk.hessian * x[b] + blk.linear + blk.g.transpose() * z[b];
      if (m > 0) {
        rd[b].noalias() += blk.c.transpose() * z_c;
        rp_c.noalias() += blk.c * x[b];
      }
      rp[b] = blk.g * x[b] + s[b] - blk.h;
      pres = std::max(pres, InfNorm(rp[b]));
      dres = std::max(dres, InfNorm(rd[b]));
      sz += s[b].dot(z[b]);
    }
    pres = std::max(pres, InfNorm(rp_c)) / (1 + scale_h);
    dres /= (1 + scale_q);
    const double obj = objective();
    res.primal_residual = pres;
    res.dual_residual = dres;
    res.gap = sz;
    res.objective = obj;
    res.iterations = iter;
    const double merit = std::max({pres, dres, sz / (1 + std::abs(obj))});
    if (!std::isfinite(merit) || merit > 1e6 * best_merit) break;
    if (merit < best_merit) {
      best_merit = merit;
      best = res;
      best_x = x;
      best_z = z;
      best_zc = z_c;
    }
    if (merit <= options.tol) break;
    if (iter == options.max_iter) break;

    // Factorise the reduced system.
    bool factor_ok = true;
    MatrixXd k_mat = MatrixXd::Zero(m, m);
    if (m > 0) k_mat.diagonal() = s_c.cwiseQuotient(z_c);
    for (std::size_t b = 0; b < nb; ++b) {
      const QpBlock& blk = qp.blocks[b];
      const VectorXd w = z[b].cwiseQuotient(s[b]);
      bmat[b] = blk.hessian;
      bmat[b].noalias() += blk.g.transpose() * w.asDiagonal() * blk.g;
      bmat[b].diagonal().array() += options.regularization;
      chol[b].compute(bmat[b]);
      if (chol[b].info() != Eigen::Success) {
        // Near the optimum the block can lose definiteness to rounding.
        bmat[b].diagonal().array() += 1e-14 * bmat[b].diagonal().cwiseAbs().maxCoeff();
        chol[b].compute(bmat[b]);
      }
      if (chol[b].info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      if (m > 0) {
        y[b] = chol[b].solve(blk.c.transpose());
        k_mat.noalias() += blk.c * y[b];
      }
    }
    if (!factor_ok) break;
    if (m > 0) schur.compute(k_mat);

    // Predictor.
    const double mu = sz / static_cast<double>(std::max<Eigen::Index>(rows_total, 1));
    std::vector<VectorXd> rc(nb);
    for (std::size_t b = 0; b < nb; ++b) rc[b] = s[b].cwiseProduct(z[b]);
    VectorXd rc_c = s_c.cwiseProduct(z_c);
    const Direction aff = solve(rc, rc_c);
    const double a_aff = step_length(aff);
    double sz_aff = (s_c + a_aff * aff.ds_c).dot(z_c + a_aff * aff.dz_c);
    for (std::size_t b = 0; b < nb; ++b) {
      sz_aff += (s[b] + a_aff * aff.ds[b]).dot(z[b] + a_aff * aff.dz[b]);
    }
    const double mu_aff = sz_aff / static_cast<double>(std::max<Eigen::Index>(rows_total, 1));
    const double sigma = std::pow(mu_aff / mu, 3);

    // Corrector.
    for (std::size_t b = 0; b < nb; ++b) {
      rc[b].array() += aff.ds[b].array() * aff.dz[b].array() - sigma * mu;
    }
    rc_c.array() += aff.ds_c.array() * aff.dz_c.array() - sigma * mu;
    const Direction dir = solve(rc, rc_c);
    const double a = std::min(1.0, options.step_fraction * step_length(dir));
    for (std::size_t b = 0; b < nb; ++b) {
      x[b] += a * dir.dx[b];
      s[b] += a * dir.ds[b];
      z[b] += a * dir.dz[b];
    }
    s_c += a * dir.ds_c;
    z_c += a * dir.dz_c;
  }

  if (!(best_merit <= options.acceptable_tol)) {
    throw Error(ErrorCode::kNonConvergence,
                "interior point stopped after " + std::to_string(res.iterations) +
                    " iterations: primal residual " + std::to_string(best.primal_residual) +
                    ", dual residual " + std::to_string(best.dual_residual) + ", gap " +
                    std::to_string(best.gap));
  }
  best.converged = true;
  best.reached_tol = best_merit <= options.tol;
  best.x = std::move(best_x);
  best.local_duals = std::move(best_z);
  best.coupling_dual = std::move(best_zc);
  return best;
}

}  // namespace dopd
