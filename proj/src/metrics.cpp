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

#include "dopd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "dopd/interior_point.hpp"

namespace dopd {
namespace {

bool Aggregatable(const OnlineProblem& p) {
  if (!p.affine_constraints()) return false;
  for (const Agent& a : p.agents()) {
    if (std::holds_alternative<MaxAffineCost>(a.cost)) return false;
  }
  return true;
}

double FeasibilityResidual(const OnlineProblem& p, std::span<const Vector> x) {
  Vector g = Vector::Zero(p.coupling_dim());
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
    g += p.ConstraintValue(i, x[static_cast<std::size_t>(i)]);
  }
  return g.cwiseMax(0.0).norm();
}

double AggregateValue(const QuadraticAggregate& agg, const Vector& x) {
  return 0.5 * x.dot(agg.hessian * x) + agg.linear.dot(x) + agg.constant;
}

// Exact comparator from the time-summed aggregates; the QP is scaled by 1/T.
OfflineOptimum SolveAggregated(const OnlineProblem& p, std::span<const QuadraticAggregate> aggs,
                               std::int64_t horizon, const OfflineOptions& options) {
  BlockQp qp;
  const double scale = 1.0 / static_cast<double>(std::max<std::int64_t>(horizon, 1));
  const Eigen::Index m = p.coupling_dim();
  qp.d = Vector::Zero(m);
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
    const Agent& a = p.agent(i);
    const QuadraticAggregate& agg = aggs[static_cast<std::size_t>(i)];
    QpBlock blk;
    blk.hessian = scale * agg.hessian;
    blk.linear = scale * agg.linear;
    std::tie(blk.g, blk.h) = ToInequalities(a.set);
    blk.c = m > 0 ? a.constraint.d : Matrix(0, p.dim(i));
    if (m > 0) qp.d += a.constraint.b;
    qp.blocks.push_back(std::move(blk));
  }
  IpmOptions ipm;
  ipm.tol = std::min(1e-9, options.tol);
  const IpmResult res = SolveBlockQp(qp, ipm);

  OfflineOptimum out;
  out.method = OfflineMethod::kInteriorPoint;
  out.horizon = horizon;
  out.iterations = res.iterations;
  out.multiplier = res.coupling_dual;
  out.dual_gap = res.gap / scale;
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
    // Interior iterates may sit a rounding error outside X_i.
    Vector xi = Project(p.agent(i).set, res.x[static_cast<std::size_t>(i)]);
    out.objective += AggregateValue(aggs[static_cast<std::size_t>(i)], xi);
    out.x_star.push_back(std::move(xi));
  }
  out.feasibility_residual = FeasibilityResidual(p, out.x_star);
  return out;
}

std::vector<QuadraticAggregate> EmptyAggregates(const OnlineProblem& p) {
  std::vector<QuadraticAggregate> aggs;
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) aggs.push_back(p.EmptyAggregate(i));
  return aggs;
}

void Accumulate(const OnlineProblem& p, std::vector<QuadraticAggregate>& aggs,
                std::int64_t from, std::int64_t to) {
  for (std::int64_t t = from; t <= to; ++t) {
    for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
      p.AccumulateCost(i, t, aggs[static_cast<std::size_t>(i)]);
    }
  }
}

// Averaged centralized primal-dual on min_{x in X} F(x) s.t. sum_i g_i(x_i) <= 0
// with F the per-round average of the costs over rounds 1..T.
OfflineOptimum SolvePrimalDual(const OnlineProblem& p, std::int64_t horizon,
                               const OfflineOptions& options) {
  const Eigen::Index n_agents = p.num_agents();
  const auto n_size = static_cast<std::size_t>(n_agents);
  const bool invariant = p.time_invariant_costs();
  const std::int64_t t_first = 1;
  const std::int64_t t_last = invariant ? 1 : horizon;
  const double inv_rounds = 1.0 / static_cast<double>(t_last - t_first + 1);

  auto mean_grad = [&](Eigen::Index i, const Vector& xi) {
    Vector g = Vector::Zero(xi.size());
    for (std::int64_t t = t_first; t <= t_last; ++t) g += p.CostSubgradient(i, t, xi);
    return Vector(g * inv_rounds);
  };
  auto mean_cost = [&](std::span<const Vector> x) {
    double acc = 0;
    for (std::int64_t t = t_first; t <= t_last; ++t) {
      for (Eigen::Index i = 0; i < n_agents; ++i) acc += p.Cost(i, t, x[static_cast<std::size_t>(i)]);
    }
    return acc * inv_rounds;
  };

  CentralizedState st;
  std::vector<Vector> avg;
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    st.x.push_back(Project(p.agent(i).set, Vector(Vector::Zero(p.dim(i)))));
    avg.push_back(st.x.back());
  }
  st.mu = Vector::Zero(p.coupling_dim());
  Vector mu_avg = st.mu;
  double weight_sum = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  std::vector<Vector> grads(n_size);

  auto finish = [&](std::int64_t k) {
    OfflineOptimum out;
    out.method = OfflineMethod::kAveragedPrimalDual;
    out.horizon = horizon;
    out.x_star = avg;
    out.multiplier = mu_avg;
    out.iterations = static_cast<int>(std::min<std::int64_t>(k, INT32_MAX));
    out.feasibility_residual = FeasibilityResidual(p, avg);
    out.objective = mean_cost(avg) * static_cast<double>(horizon);
    // Lagrangian gap estimate at the averaged pair.
    Vector g_sum = Vector::Zero(p.coupling_dim());
    for (Eigen::Index i = 0; i < n_agents; ++i) g_sum += p.ConstraintValue(i, avg[static_cast<std::size_t>(i)]);
    out.dual_gap = std::abs(mu_avg.dot(g_sum)) * static_cast<double>(horizon);
    return out;
  };

  for (std::int64_t k = 1; k <= options.max_iter; ++k) {
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      grads[static_cast<std::size_t>(i)] = mean_grad(i, st.x[static_cast<std::size_t>(i)]);
    }
    const double a = options.step0 / std::sqrt(static_cast<double>(k));
    st = CentralizedStep(st, p, a, grads);
    weight_sum += a;
    const double w = a / weight_sum;
    for (std::size_t i = 0; i < n_size; ++i) avg[i] += w * (st.x[i] - avg[i]);
    mu_avg += w * (st.mu - mu_avg);

    if (k % options.window == 0) {
      const double obj = mean_cost(avg);
      const double res = FeasibilityResidual(p, avg);
      if (res <= options.tol && std::abs(obj - last_obj) <= options.tol * (1 + std::abs(obj))) {
        return finish(k);
      }
      last_obj = obj;
    }
  }
  OfflineOptimum best = finish(options.max_iter);
  throw OfflineNonConvergence(
      "averaged primal-dual hit the cap of " + std::to_string(options.max_iter) +
          " iterations: feasibility residual " + std::to_string(best.feasibility_residual),
      std::move(best));
}

const TraceRow& RowAt(const RunTrace& trace, std::int64_t t) {
  auto it = std::lower_bound(trace.rows.begin(), trace.rows.end(), t,
                             [](const TraceRow& r, std::int64_t v) { return r.t < v; });
  Require(it != trace.rows.end() && it->t == t, ErrorCode::kLengthMismatch,
          "round " + std::to_string(t) + " is not recorded in the trace");
  return *it;
}

}  // namespace

OfflineOptimum SolveOffline(const OnlineProblem& problem, std::int64_t horizon,
                            const OfflineOptions& options) {
  Require(horizon >= 1, ErrorCode::kInvalidArgument, "offline horizon must be positive");
  if (!options.force_primal_dual && Aggregatable(problem)) {
    std::vector<QuadraticAggregate> aggs = EmptyAggregates(problem);
    Accumulate(problem, aggs, 1, horizon);
    return SolveAggregated(problem, aggs, horizon, options);
  }
  return SolvePrimalDual(problem, horizon, options);
}

std::vector<OfflineOptimum> SolveOfflineSeries(const OnlineProblem& problem,
                                               std::span<const std::int64_t> horizons,
                                               const OfflineOptions& options) {
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    Require(horizons[k] >= 1 && (k == 0 || horizons[k] > horizons[k - 1]),
            ErrorCode::kInvalidArgument, "horizons must be positive and increasing");
  }
  std::vector<OfflineOptimum> out;
  if (horizons.empty()) return out;
  if (options.force_primal_dual || !Aggregatable(problem)) {
    if (problem.time_invariant_costs()) {
      // One minimiser serves every horizon; only the objective scales.
      const OfflineOptimum one = SolveOffline(problem, 1, options);
      for (std::int64_t h : horizons) {
        OfflineOptimum o = one;
        o.horizon = h;
        o.objective *= static_cast<double>(h);
        o.dual_gap *= static_cast<double>(h);
        out.push_back(std::move(o));
      }
      return out;
    }
    for (std::int64_t h : horizons) out.push_back(SolveOffline(problem, h, options));
    return out;
  }
  std::vector<QuadraticAggregate> aggs = EmptyAggregates(problem);
  std::int64_t done = 0;
  for (std::int64_t h : horizons) {
    Accumulate(problem, aggs, done + 1, h);
    done = h;
    out.push_back(SolveAggregated(problem, aggs, h, options));
  }
  return out;
}

std::vector<double> CumulativeCost(const OnlineProblem& problem, std::span<const Vector> x,
                                   std::span<const std::int64_t> rounds) {
  Require(static_cast<Eigen::Index>(x.size()) == problem.num_agents(),
          ErrorCode::kLengthMismatch, "one decision per agent expected");
  std::vector<double> out;
  out.reserve(rounds.size());
  double acc = 0;
  std::int64_t t = 0;
  for (std::int64_t r : rounds) {
    Require(r >= t, ErrorCode::kInvalidArgument, "rounds must be increasing");
    for (; t < r;) {
      ++t;
      for (Eigen::Index i = 0; i < problem.num_agents(); ++i) {
        acc += problem.Cost(i, t, x[static_cast<std::size_t>(i)]);
      }
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> Regret(const OnlineProblem& problem, const RunTrace& trace,
                           const OfflineOptimum& offline) {
  Require(offline.horizon == trace.horizon, ErrorCode::kLengthMismatch,
          "offline comparator is for horizon " + std::to_string(offline.horizon) +
              ", the trace has " + std::to_string(trace.horizon));
  Require(trace.num_agents == problem.num_agents() &&
              static_cast<Eigen::Index>(offline.x_star.size()) == problem.num_agents(),
          ErrorCode::kLengthMismatch, "agent counts of trace, comparator and problem differ");
  std::vector<std::int64_t> rounds;
  rounds.reserve(trace.rows.size());
  for (const auto& r : trace.rows) rounds.push_back(r.t);
  const std::vector<double> comp = CumulativeCost(problem, offline.x_star, rounds);
  std::vector<double> reg(trace.rows.size());
  for (std::size_t k = 0; k < reg.size(); ++k) reg[k] = trace.rows[k].loss_cum - comp[k];
  return reg;
}

std::vector<double> ConstraintViolation(const RunTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.rows.size());
  for (const auto& r : trace.rows) out.push_back(r.g_cum.cwiseMax(0.0).norm());
  return out;
}

std::vector<double> ConstraintViolationFromRounds(std::span<const Vector> round_sums) {
  std::vector<double> out;
  if (round_sums.empty()) return out;
  Vector acc = Vector::Zero(round_sums.front().size());
  for (const Vector& g : round_sums) {
    Require(g.size() == acc.size(), ErrorCode::kDimensionMismatch,
            "constraint sums have different lengths");
    acc += g;
    out.push_back(acc.cwiseMax(0.0).norm());
  }
  return out;
}

RateFit FitRateRange(std::span<const SeriesPoint> series, double t_lo, double t_hi) {
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const SeriesPoint& p : series) {
    if (p.t < t_lo || p.t > t_hi || !(p.t > 0)) continue;
    if (!(p.value > 0)) {
      ++fit.skipped;
      continue;
    }
    const double lx = std::log(p.t);
    const double ly = std::log(p.value);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++fit.used;
  }
  if (fit.used < 2) {
    throw Error(ErrorCode::kNonPositiveValues,
                "rate fit needs two positive samples; " + std::to_string(fit.used) +
                    " usable, " + std::to_string(fit.skipped) + " nonpositive skipped");
  }
  const double n = fit.used;
  const double den = n * sxx - sx * sx;
  Require(den > 0, ErrorCode::kInvalidArgument, "rate fit needs at least two distinct t");
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

RateFit FitRate(std::span<const SeriesPoint> series, double window) {
  Require(window > 0 && window <= 1, ErrorCode::kInvalidArgument, "window must be in (0, 1]");
  Require(!series.empty(), ErrorCode::kEmptyInput, "rate fit on an empty series");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0;
  for (const SeriesPoint& p : series) {
    if (p.t > 0) {
      lo = std::min(lo, p.t);
      hi = std::max(hi, p.t);
    }
  }
  const double cut = std::exp(std::log(hi) - window * (std::log(hi) - std::log(lo)));
  // Guard the boundary sample against rounding in exp/log.
  return FitRateRange(series, cut * (1 - 1e-12), hi);
}

std::vector<std::int64_t> Checkpoints(const RunTrace& trace, std::int64_t t_min, int per_decade) {
  Require(per_decade >= 1, ErrorCode::kInvalidArgument, "per_decade must be positive");
  std::vector<std::int64_t> out;
  if (trace.rows.empty()) return out;
  const std::int64_t horizon = trace.rows.back().t;
  auto snap = [&](std::int64_t t) {
    auto it = std::lower_bound(trace.rows.begin(), trace.rows.end(), t,
                               [](const TraceRow& r, std::int64_t v) { return r.t < v; });
    return it == trace.rows.end() ? horizon : it->t;
  };
  for (int k = 0;; ++k) {
    const double v = std::pow(10.0, static_cast<double>(k) / per_decade);
    const auto t = static_cast<std::int64_t>(std::llround(v));
    if (t > horizon) break;
    if (t < t_min) continue;
    const std::int64_t s = snap(t);
    if (out.empty() || s > out.back()) out.push_back(s);
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

std::vector<HorizonPoint> HorizonSeries(const OnlineProblem& problem, const RunTrace& trace,
                                        std::span<const std::int64_t> checkpoints,
                                        const OfflineOptions& options) {
  const std::vector<OfflineOptimum> opt = SolveOfflineSeries(problem, checkpoints, options);
  std::vector<HorizonPoint> out;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const TraceRow& row = RowAt(trace, checkpoints[k]);
    out.push_back({row.t, row.loss_cum - opt[k].objective, row.g_cum.cwiseMax(0.0).norm()});
  }
  return out;
}

TheoryExponents Exponents(double kappa) {
  return {0.5 + 2 * kappa, 1 - kappa / 2, 0.75 + kappa / 2};
}

void WriteMetricsCsv(std::ostream& out, std::span<const HorizonPoint> points) {
  out << "t,reg,reg_over_t,regc,regc_over_t\n";
  for (const HorizonPoint& p : points) {
    const double t = static_cast<double>(p.t);
    out << p.t << ',' << FormatDouble(p.reg) << ',' << FormatDouble(p.reg / t) << ','
        << FormatDouble(p.regc) << ',' << FormatDouble(p.regc / t) << '\n';
  }
}

std::vector<HorizonPoint> ReadMetricsCsv(std::istream& in) {
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kEmptyInput,
          "metrics csv is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    Require(it != header.end(), ErrorCode::kMissingColumn,
            "metrics csv has no '" + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ct = column("t");
  const std::size_t cr = column("reg");
  const std::size_t cc = column("regc");
  std::vector<HorizonPoint> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    Require(cells.size() == header.size(), ErrorCode::kConfigParse,
            "metrics csv line " + std::to_string(line_no) + " has " +
                std::to_string(cells.size()) + " fields, expected " +
                std::to_string(header.size()));
    try {
      HorizonPoint p;
      p.t = std::stoll(cells[ct]);
      p.reg = std::stod(cells[cr]);
      p.regc = std::stod(cells[cc]);
      out.push_back(p);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfigParse,
                  "metrics csv line " + std::to_string(line_no) + " is not numeric");
    }
  }
  Require(!out.empty(), ErrorCode::kEmptyInput, "metrics csv has no data rows");
  return out;
}

RateReport ComputeRates(std::span<const HorizonPoint> points, double kappa, double window) {
  RateReport rep;
  rep.kappa = kappa;
  rep.window = window;
  rep.theory = Exponents(kappa);
  std::vector<SeriesPoint> reg, regc;
  for (const HorizonPoint& p : points) {
    reg.push_back({static_cast<double>(p.t), p.reg});
    regc.push_back({static_cast<double>(p.t), p.regc});
  }
  try {
    rep.reg = FitRate(reg, window);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonPositiveValues) throw;
    rep.reg_note = "regret is not positive on the window; fit skipped";
  }
  try {
    rep.regc = FitRate(regc, window);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonPositiveValues) throw;
    rep.regc_note = "constraint violation vanishes on the window; fit skipped";
  }
  return rep;
}

void WriteRates(std::ostream& out, const RateReport& r) {
  out << "kappa " << FormatDouble(r.kappa) << '\n';
  out << "window " << FormatDouble(r.window) << '\n';
  if (r.reg) {
    out << "reg_slope " << FormatDouble(r.reg->slope) << " samples " << r.reg->used
        << " skipped " << r.reg->skipped << '\n';
  } else {
    out << "reg_slope none # " << r.reg_note << '\n';
  }
  if (r.regc) {
    out << "regc_slope " << FormatDouble(r.regc->slope) << " samples " << r.regc->used
        << " skipped " << r.regc->skipped << '\n';
  } else {
    out << "regc_slope none # " << r.regc_note << '\n';
  }
  out << "bound_reg " << FormatDouble(r.theory.regret) << '\n';
  out << "bound_regc " << FormatDouble(r.theory.violation) << '\n';
  out << "bound_regc_time_invariant " << FormatDouble(r.theory.violation_time_invariant) << '\n';
}

}  // namespace dopd
