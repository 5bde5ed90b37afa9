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

#include "dopd/engine.hpp"

#include <barrier>
#include <charconv>
#include <cmath>
#include <ostream>
#include <thread>

namespace dopd {
namespace {

// Persistent workers that split an index range into fixed contiguous chunks,
// so the assignment of agents to threads never changes between rounds.
class WorkerPool {
 public:
  explicit WorkerPool(int threads)
      : threads_(std::max(1, threads)), start_(threads_), done_(threads_) {
    for (int w = 1; w < threads_; ++w) {
      workers_.emplace_back([this, w] {
        for (;;) {
          start_.arrive_and_wait();
          if (stop_) return;
          RunChunk(w);
          done_.arrive_and_wait();
        }
      });
    }
  }

  ~WorkerPool() {
    if (!workers_.empty()) {
      stop_ = true;
      start_.arrive_and_wait();
      for (auto& t : workers_) t.join();
    }
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // Calls fn(i) for every i in [0, n). Exceptions are rethrown after all
  // workers finished; the lowest failing index wins.
  void ParallelFor(Eigen::Index n, const std::function<void(Eigen::Index)>& fn) {
    n_ = n;
    fn_ = &fn;
    errors_.assign(static_cast<std::size_t>(threads_), nullptr);
    if (threads_ == 1) {
      RunChunk(0);
    } else {
      start_.arrive_and_wait();
      RunChunk(0);
      done_.arrive_and_wait();
    }
    for (auto& e : errors_) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  void RunChunk(int w) {
    const Eigen::Index lo = n_ * w / threads_;
    const Eigen::Index hi = n_ * (w + 1) / threads_;
    try {
      for (Eigen::Index i = lo; i < hi; ++i) (*fn_)(i);
    } catch (...) {
      errors_[static_cast<std::size_t>(w)] = std::current_exception();
    }
  }

  int threads_;
  std::barrier<> start_;
  std::barrier<> done_;
  std::vector<std::thread> workers_;
  bool stop_ = false;
  Eigen::Index n_ = 0;
  const std::function<void(Eigen::Index)>* fn_ = nullptr;
  std::vector<std::exception_ptr> errors_;
};

struct MuStats {
  double mean = 0;
  double max = 0;
  double gap = 0;
};

// mu_tilde statistics after a mix, against the mean of the pre-mix mu.
MuStats ComputeMuStats(std::span<const AgentState> states, const Vector& mu_bar) {
  MuStats st;
  for (const auto& s : states) {
    const double nrm = s.mu_tilde.norm();
    st.mean += nrm;
    st.max = std::max(st.max, nrm);
    st.gap = std::max(st.gap, (s.mu_tilde - mu_bar).norm());
  }
  st.mean /= static_cast<double>(states.size());
  return st;
}

Vector MeanMu(std::span<const AgentState> states, Eigen::Index m) {
  Vector bar = Vector::Zero(m);
  for (const auto& s : states) bar += s.mu;
  return bar / static_cast<double>(states.size());
}

bool KeepHistory(const RunConfig& c) {
  switch (c.history) {
    case HistoryMode::kAlways:
      return true;
    case HistoryMode::kNever:
      return false;
    case HistoryMode::kAuto:
      break;
  }
  const double entries = static_cast<double>(c.problem->total_dim()) *
                         static_cast<double>(c.horizon);
  return entries <= static_cast<double>(kHistoryLimit);
}

void UpdateSummary(TraceSummary& s, const TraceRow& r) {
  s.max_w_sum_err = std::max(s.max_w_sum_err, r.w_sum_err);
  s.max_w_dev = std::max(s.max_w_dev, r.w_max_dev);
  s.max_y_track_err = std::max(s.max_y_track_err, r.y_track_err);
  s.max_mu_tilde_mean = std::max(s.max_mu_tilde_mean, r.mu_tilde_mean);
  s.max_mu_tilde = std::max(s.max_mu_tilde, r.mu_tilde_max);
  s.max_consensus_gap = std::max(s.max_consensus_gap, r.consensus_gap);
}

Vector Concatenate(const OnlineProblem& p, const std::function<const Vector&(std::size_t)>& x) {
  Vector out(p.total_dim());
  Eigen::Index off = 0;
  for (Eigen::Index i = 0; i < p.num_agents(); ++i) {
    const Vector& xi = x(static_cast<std::size_t>(i));
    out.segment(off, xi.size()) = xi;
    off += xi.size();
  }
  return out;
}

}  // namespace

const char* AlgorithmName(Algorithm alg) {
  switch (alg) {
    case Algorithm::kPushSum:
      return "pushsum";
    case Algorithm::kBalanced:
      return "balanced";
    case Algorithm::kCentralized:
      return "centralized";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "pushsum") return Algorithm::kPushSum;
  if (name == "balanced") return Algorithm::kBalanced;
  if (name == "centralized") return Algorithm::kCentralized;
  throw Error(ErrorCode::kConfigParse,
              "unknown algorithm '" + name + "' (expected pushsum, balanced or centralized)");
}

void Validate(const RunConfig& c) {
  Require(c.problem != nullptr, ErrorCode::kInvalidArgument, "run has no problem");
  Require(c.horizon >= 4, ErrorCode::kInvalidArgument,
          "horizon must be at least 4, got " + std::to_string(c.horizon));
  Require(c.record_every >= 1, ErrorCode::kInvalidArgument, "record_every must be positive");
  Require(c.threads >= 1, ErrorCode::kInvalidArgument, "threads must be positive");
  if (c.algorithm != Algorithm::kCentralized) {
    Require(c.graphs != nullptr && !c.graphs->matrices.empty(), ErrorCode::kInvalidArgument,
            "run needs a graph sequence");
    Require(c.graphs->num_nodes() == c.problem->num_agents(), ErrorCode::kDimensionMismatch,
            "graph sequence has " + std::to_string(c.graphs->num_nodes()) +
                " nodes but the problem has " + std::to_string(c.problem->num_agents()) +
                " agents");
  }
}

RunTrace Run(const RunConfig& config) {
  Validate(config);
  const OnlineProblem& p = *config.problem;
  const Eigen::Index n_agents = p.num_agents();
  const Eigen::Index m = p.coupling_dim();
  const auto n_size = static_cast<std::size_t>(n_agents);
  const bool keep_history = KeepHistory(config);
  const bool centralized = config.algorithm == Algorithm::kCentralized;

  RunTrace trace;
  trace.algorithm = config.algorithm;
  trace.num_agents = n_agents;
  trace.period_q = config.graphs ? config.graphs->period_q : 0;
  trace.kappa = config.schedule.kappa();
  trace.seed = config.seed;
  trace.horizon = config.horizon;

  WorkerPool pool(config.threads);
  std::vector<AgentState> states;
  CentralizedState cstate;
  if (centralized) {
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      cstate.x.push_back(ProjectLocal(p, i, Vector::Zero(p.dim(i))));
    }
    cstate.mu = Vector::Zero(m);
  } else {
    states = InitialStates(p);
  }
  auto x_of = [&](std::size_t i) -> const Vector& {
    return centralized ? cstate.x[i] : states[i].x;
  };

  std::vector<double> losses(n_size, 0.0);
  std::vector<Vector> grads(n_size);
  std::vector<Vector> g_values(n_size);
  MuStats pending;  // statistics of the mix that produced the current round's mu_tilde
  double loss_cum = 0;
  Vector g_cum = Vector::Zero(m);

  for (std::int64_t t = 0; t <= config.horizon; ++t) {
    // Reveal f_{i,t} at the current decisions.
    pool.ParallelFor(n_agents, [&](Eigen::Index i) {
      const auto k = static_cast<std::size_t>(i);
      losses[k] = p.CostAndSubgradient(i, t, x_of(k), grads[k]);
      if (centralized) g_values[k] = p.ConstraintValue(i, x_of(k));
    });

    if (t >= 1) {
      TraceRow row;
      row.t = t;
      Vector g_sum = Vector::Zero(m);
      Vector y_sum = Vector::Zero(m);
      double w_sum = 0;
      for (std::size_t k = 0; k < n_size; ++k) {
        loss_cum += losses[k];
        if (centralized) {
          g_sum += g_values[k];
        } else {
          g_sum += states[k].g_x;
          y_sum += states[k].y;
          w_sum += states[k].w;
          row.w_max_dev = std::max(row.w_max_dev, std::abs(states[k].w - 1));
        }
      }
      g_cum += g_sum;
      row.loss_cum = loss_cum;
      row.g_cum = g_cum;
      if (!centralized) {
        row.w_sum_err = std::abs(w_sum - static_cast<double>(n_agents));
        row.y_track_err = (y_sum - g_sum).norm() / static_cast<double>(n_agents);
      }
      row.mu_tilde_mean = pending.mean;
      row.mu_tilde_max = pending.max;
      row.consensus_gap = pending.gap;
      UpdateSummary(trace.summary, row);
      if (t % config.record_every == 0 || t == config.horizon) {
        if (keep_history) trace.history.push_back(Concatenate(p, x_of));
        trace.rows.push_back(std::move(row));
      }
    }
    if (t == config.horizon) break;

    const StepSizes steps = ScheduleValues(config.schedule, t);
    switch (config.algorithm) {
      case Algorithm::kPushSum: {
        const Vector mu_bar = MeanMu(states, m);
        Mix(states, config.graphs->at(t));
        pending = ComputeMuStats(states, mu_bar);
        // After the mix every agent reads only its own state.
        pool.ParallelFor(n_agents, [&](Eigen::Index i) {
          AgentState& s = states[static_cast<std::size_t>(i)];
          Vector x_next = PrimalStep(s, p, i, steps.alpha, grads[static_cast<std::size_t>(i)]);
          Vector mu_next = DualStep(s, steps);
          Vector g_next;
          Vector y_next = TrackingStep(s, p, i, x_next, &g_next);
          s.x = std::move(x_next);
          s.mu = std::move(mu_next);
          s.y = std::move(y_next);
          s.g_x = std::move(g_next);
          s.w = s.w_next;
        });
        break;
      }
      case Algorithm::kBalanced: {
        const Vector mu_bar = MeanMu(states, m);
        states = BalancedBaselineStep(states, config.graphs->at(t), p, steps.alpha, grads);
        pending = ComputeMuStats(states, mu_bar);
        break;
      }
      case Algorithm::kCentralized: {
        cstate = CentralizedStep(cstate, p, steps.alpha, grads);
        const double nrm = cstate.mu.norm();
        pending = MuStats{nrm, nrm, 0.0};
        break;
      }
    }
  }

  for (std::size_t k = 0; k < n_size; ++k) trace.final_x.push_back(x_of(k));
  return trace;
}

std::vector<SweepEntry> RunSweep(const RunRecipe& recipe, const SweepPoint& base, SweepAxis axis,
                                 std::span<const double> values) {
  std::vector<SweepEntry> out;
  out.reserve(values.size());
  for (double v : values) {
    SweepEntry e;
    e.point = base;
    switch (axis) {
      case SweepAxis::kNumAgents:
        e.point.num_agents = static_cast<int>(std::lround(v));
        break;
      case SweepAxis::kPeriod:
        e.point.period_q = static_cast<int>(std::lround(v));
        break;
      case SweepAxis::kKappa:
        e.point.kappa = v;
        break;
    }
    try {
      e.trace = Run(recipe(e.point));
    } catch (const Error& err) {
      e.error_code = err.code();
      e.error = err.what();
    } catch (const std::exception& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string RunName(const RunTrace& trace) {
  return std::string("run_") + AlgorithmName(trace.algorithm) + "_" +
         std::to_string(trace.num_agents) + "_" + std::to_string(trace.period_q) + "_" +
         FormatDouble(trace.kappa) + "_" + std::to_string(trace.seed);
}

void WriteRunCsv(std::ostream& out, const RunTrace& trace, std::span<const double> reg_cum) {
  Require(reg_cum.size() == trace.rows.size(), ErrorCode::kLengthMismatch,
          "regret series does not match the trace rows");
  out << "t,reg_cum,regc_norm,w_sum_err,mu_consensus_gap,y_track_err\n";
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& r = trace.rows[k];
    out << r.t << ',' << FormatDouble(reg_cum[k]) << ','
        << FormatDouble(r.g_cum.cwiseMax(0.0).norm()) << ',' << FormatDouble(r.w_sum_err) << ','
        << FormatDouble(r.consensus_gap) << ',' << FormatDouble(r.y_track_err) << '\n';
  }
}

}  // namespace dopd
