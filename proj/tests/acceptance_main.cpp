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


// Acceptance suite: prints one [PASS] or [FAIL] line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dopd/commands.hpp"
#include "dopd/config.hpp"
#include "dopd/engine.hpp"
#include "dopd/geometry.hpp"
#include "dopd/metrics.hpp"
#include "oracles.hpp"

namespace dopd {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Criteria 1 and 2 share the N=50, Q=4, T=1e4 run.
struct PevRun {
  RunConfig config;
  RunTrace trace;
  double seconds = 0;
};

const PevRun& Pev50Q4() {
  static const PevRun run = [] {
    PevRun r;
    r.config = BuildRunConfig(Preset("pev50-q4"));
    r.config.history = HistoryMode::kNever;
    const auto start = Clock::now();
    r.trace = Run(r.config);
    r.seconds = Seconds(start);
    return r;
  }();
  return run;
}

Outcome WeightConservation() {
  const PevRun& r = Pev50Q4();
  const double err = r.trace.summary.max_w_sum_err;
  return {err <= 1e-9 && r.seconds < 60,
          "max |sum w - N| = " + Num(err) + ", run time " + Num(r.seconds) + " s"};
}

Outcome TrackingIdentity() {
  const double err = Pev50Q4().trace.summary.max_y_track_err;
  return {err <= 1e-9, "max tracking error = " + Num(err)};
}

Outcome BalancedFixedPoint() {
  ExperimentConfig c = Preset("pev50-q4");
  c.graph.balanced = true;
  RunConfig run = BuildRunConfig(c);
  run.horizon = 10'000;
  run.history = HistoryMode::kNever;
  const RunTrace tr = Run(run);
  const double dev = tr.summary.max_w_dev;
  return {dev <= 1e-12, "max |w - 1| = " + Num(dev) + " over 1e4 rounds, N = 50"};
}

Outcome ProjectionOracle() {
  CounterRng rng(2026, 4);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.Below(3));
    const int k = 1 + static_cast<int>(rng.Below(5));
    const Polyhedrond poly = testing::RandomPolyhedron(rng, n, k);
    const Vector z = testing::RandomVector(rng, n, -4, 4);
    const auto [rows, rhs] = ToInequalities(ConvexSetd(poly));
    worst = std::max(worst, (ProjectPolyhedron(poly, z) -
                             testing::EnumerationProjection(rows, rhs, z)).norm());
  }
  double excess = -1;
  for (int trial = 0; trial < 10'000; ++trial) {
    const int n = 1 + static_cast<int>(rng.Below(3));
    const Polyhedrond poly = testing::RandomPolyhedron(rng, n, 1 + static_cast<int>(rng.Below(5)));
    const Vector a = testing::RandomVector(rng, n, -4, 4);
    const Vector b = testing::RandomVector(rng, n, -4, 4);
    excess = std::max(excess, (ProjectPolyhedron(poly, a) - ProjectPolyhedron(poly, b)).norm() -
                                  (a - b).norm());
  }
  return {worst <= 1e-6 && excess <= 1e-9,
          "max oracle gap " + Num(worst) + ", max nonexpansive excess " + Num(excess)};
}

Outcome Reduction() {
  const Vector lo = Vector::Constant(3, -0.4);
  const Vector hi = Vector::Constant(3, 0.6);
  Vector center(3);
  center << 0.5, -0.2, 0.1;
  RunConfig c;
  c.problem = std::make_shared<OnlineProblem>(
      std::vector<Agent>{Agent{MakeBox<double>(lo, hi), QuadraticCost{center, 1, 1},
                               ConstraintMap{Matrix::Zero(1, 3), Vector::Zero(1), false}}},
      1, 5);
  c.graphs = std::make_shared<GraphSequence>(
      ConstantSequence(MakeColumnStochastic(Topology::Identity(1, 1).cast<bool>(), 1.0)));
  c.horizon = 1000;
  c.history = HistoryMode::kAlways;
  const RunTrace tr = Run(c);
  Vector x = Vector::Zero(3);
  double worst = 0;
  for (std::int64_t t = 0; t < c.horizon; ++t) {
    const double alpha = t == 0 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(t));
    x = (x - alpha * 2 * (x - c.problem->QuadraticTarget(0, t))).cwiseMax(lo).cwiseMin(hi);
    worst = std::max(worst, (tr.history[static_cast<std::size_t>(t)] - x).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-12, "max coordinate difference " + Num(worst) + " over T = 1000"};
}

Outcome TrendReproduction() {
  bool pass = true;
  std::string detail;
  for (const char* name :
       {"pev50-q1", "pev50-q4", "pev50-q9", "pev100-q1", "pev100-q4", "pev100-q9"}) {
    RunConfig run;
    RunTrace trace;
    if (std::string(name) == "pev50-q4") {
      run = Pev50Q4().config;
      trace = Pev50Q4().trace;
    } else {
      run = BuildRunConfig(Preset(name));
      run.history = HistoryMode::kNever;
      trace = Run(run);
    }
    const std::vector<std::int64_t> cps = {1000, 10'000};
    const auto hs = HorizonSeries(*run.problem, trace, cps);
    const double r3 = std::abs(hs[0].reg) / 1e3, r4 = std::abs(hs[1].reg) / 1e4;
    const double c3 = hs[0].regc / 1e3, c4 = hs[1].regc / 1e4;
    const bool ok = r4 < r3 && c4 < c3;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + name + " |Reg/T| " + Num(r3) + "->" +
              Num(r4) + ", Reg^c/T " + Num(c3) + "->" + Num(c4) + (ok ? "" : " (not smaller)");
  }
  return {pass, detail};
}

std::vector<HorizonPoint> SyntheticSeries(const std::string& preset) {
  RunConfig run = BuildRunConfig(Preset(preset));
  run.history = HistoryMode::kNever;
  run.record_every = 1;
  const RunTrace tr = Run(run);
  return HorizonSeries(*run.problem, tr, Checkpoints(tr, 100, 6));
}

Outcome RateCheck() {
  const auto hs = SyntheticSeries("synthetic-equal-rate");
  std::vector<SeriesPoint> reg, regc;
  bool positive = true;
  for (const auto& p : hs) {
    if (p.t < 1000) continue;
    positive = positive && p.reg > 0;
    reg.push_back({static_cast<double>(p.t), p.reg});
    regc.push_back({static_cast<double>(p.t), p.regc});
  }
  const double bound = Exponents(0.2).regret + 0.1;
  const RateFit fc = FitRateRange(regc, 1e3, 1e5);
  std::string detail = "Reg^c slope " + Num(fc.slope);
  bool pass = fc.slope <= Exponents(0.2).violation + 0.1;
  if (positive) {
    const RateFit fr = FitRateRange(reg, 1e3, 1e5);
    detail = "Reg slope " + Num(fr.slope) + ", " + detail;
    pass = pass && fr.slope <= bound;
  } else {
    detail = "regret not positive, Reg fit skipped, " + detail;
    pass = false;
  }
  return {pass, detail + " (bound 0.9 + 0.1, T in [1e3, 1e5])"};
}

Outcome TimeInvariantCheck() {
  const auto hs = SyntheticSeries("synthetic-invariant");
  std::vector<SeriesPoint> regc;
  for (const auto& p : hs) regc.push_back({static_cast<double>(p.t), p.regc});
  const double bound = Exponents(0.2).violation_time_invariant + 0.1;
  const RateFit f = FitRateRange(regc, 1e3, 1e5);
  return {f.slope <= bound, "Reg^c slope " + Num(f.slope) + " (bound 0.85 + 0.1)"};
}

Outcome Boundedness() {
  RunConfig run = BuildRunConfig(Preset("pev50-q4"));
  run.horizon = 100'000;
  run.history = HistoryMode::kNever;
  const RunTrace tr = Run(run);
  double first = 0, last = 0, overall = 0;
  for (const TraceRow& r : tr.rows) {
    overall = std::max(overall, r.mu_tilde_mean);
    if (r.t >= 1000 && r.t <= 10'000) first = std::max(first, r.mu_tilde_mean);
    if (r.t > 10'000) last = std::max(last, r.mu_tilde_mean);
  }
  return {std::isfinite(overall) && last <= 2 * first,
          "max mean |mu~| " + Num(overall) + ", on [1e3, 1e4] " + Num(first) + ", on (1e4, 1e5] " +
              Num(last)};
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "dopd_acceptance_determinism";
  fs::remove_all(root);
  ExperimentConfig c = Preset("pev50-q9");
  c.horizon = 2000;
  std::ostringstream out, err;
  for (const char* sub : {"a", "b"}) {
    c.out_dir = (root / sub).string();
    if (CmdRun(c, out, err) != kExitOk) return {false, "run failed: " + err.str()};
  }
  int files = 0;
  bool same = true;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    if (name.extension() == ".ini") continue;
    ++files;
    same = same && Slurp(entry.path()) == Slurp(root / "b" / name);
  }
  fs::remove_all(root);
  return {same && files == 3, std::to_string(files) + " output files compared byte by byte"};
}

}  // namespace
}  // namespace dopd

int main() {
  using dopd::Outcome;
  const std::vector<std::function<Outcome()>> criteria = {
      dopd::WeightConservation, dopd::TrackingIdentity, dopd::BalancedFixedPoint,
      dopd::ProjectionOracle,   dopd::Reduction,        dopd::TrendReproduction,
      dopd::RateCheck,          dopd::TimeInvariantCheck, dopd::Boundedness,
      dopd::Determinism};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << k + 1 << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
