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


#include "dopd/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "dopd/engine.hpp"
#include "dopd/graph.hpp"
#include "dopd/metrics.hpp"

namespace dopd {
namespace {

std::ofstream OpenOutput(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void CloseOutput(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  Require(!out.fail(), ErrorCode::kIo, "failed writing " + path.string());
}

int Report(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return ExitCodeFor(e.code());
}

const char* Verdict(double slope, double bound, double margin) {
  return slope <= bound + margin ? "pass" : "FAIL";
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kEmptyColumn:
    case ErrorCode::kMinWeightInfeasible:
    case ErrorCode::kConfigParse:
    case ErrorCode::kMissingColumn:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kIo:
      return kExitConfig;
    case ErrorCode::kNonConvergence:
    case ErrorCode::kInfeasible:
    case ErrorCode::kGenerationFailed:
    case ErrorCode::kWeightUnderflow:
    case ErrorCode::kNotDoublyStochastic:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kNonPositiveValues:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int CmdRun(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig run = BuildRunConfig(config);
    const RunTrace trace = Run(run);
    const OnlineProblem& problem = *run.problem;

    const OfflineOptimum offline = SolveOffline(problem, trace.horizon);
    const std::vector<double> reg = Regret(problem, trace, offline);
    const auto checkpoints = Checkpoints(trace, config.metrics.t_min, config.metrics.per_decade);
    const auto series = HorizonSeries(problem, trace, checkpoints);
    const RateReport rates = ComputeRates(series, config.kappa, config.metrics.window);

    const std::filesystem::path dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    Require(!ec, ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
    const std::string name = RunName(trace);

    const auto run_path = dir / (name + ".csv");
    auto f = OpenOutput(run_path);
    WriteRunCsv(f, trace, reg);
    CloseOutput(f, run_path);

    const auto metrics_path = dir / ("metrics_" + name + ".csv");
    f = OpenOutput(metrics_path);
    WriteMetricsCsv(f, series);
    CloseOutput(f, metrics_path);

    const auto rates_path = dir / ("rates_" + name + ".txt");
    f = OpenOutput(rates_path);
    WriteRates(f, rates);
    CloseOutput(f, rates_path);

    const auto config_path = dir / (name + ".ini");
    f = OpenOutput(config_path);
    WriteConfig(f, config);
    CloseOutput(f, config_path);

    const TraceRow& last = trace.rows.back();
    out << name << '\n'
        << "  T " << trace.horizon << "  Reg/T " << FormatDouble(reg.back() / trace.horizon)
        << "  Reg^c/T "
        << FormatDouble(ConstraintViolation(trace).back() / static_cast<double>(last.t)) << '\n'
        << "  max |sum w - N| " << FormatDouble(trace.summary.max_w_sum_err)
        << "  max tracking error " << FormatDouble(trace.summary.max_y_track_err)
        << "  max mean |mu~| " << FormatDouble(trace.summary.max_mu_tilde_mean) << '\n'
        << "  wrote " << run_path.string() << ", " << metrics_path.string() << ", "
        << rates_path.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdValidate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const GraphSequence seq = LoadGraphSequence(options.graph_path);
    const int q = options.period_q > 0 ? options.period_q : seq.period_q;
    const double a_min = options.a_min > 0 ? options.a_min : seq.MinPositiveWeight();
    const std::int64_t horizon = options.horizon > 0 ? options.horizon : 2 * std::int64_t{q};
    AssumptionOptions check;
    check.require_row_sums_at_most_one = options.strict_rows;
    const AssumptionReport report = CheckAssumption1(seq, horizon, a_min, q, check);
    out << options.graph_path << ": n " << seq.num_nodes() << ", Q " << q << ", a_min "
        << FormatDouble(a_min) << ", rounds 0.." << horizon << '\n';
    if (report.ok()) {
      out << "ok\n";
      return kExitOk;
    }
    for (const auto& v : report.violations) {
      out << "clause " << v.clause << " round " << v.round << ": " << v.detail << '\n';
    }
    return kExitValidation;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdRates(const RatesOptions& options, std::ostream& out, std::ostream& err) {
  try {
    Require(!options.paths.empty(), ErrorCode::kConfigParse, "no metrics files given");
    const TheoryExponents theory = Exponents(options.kappa);
    const double regc_bound =
        options.time_invariant ? theory.violation_time_invariant : theory.violation;
    bool all_pass = true;
    out << std::left << std::setw(10) << "series" << std::setw(12) << "slope" << std::setw(10)
        << "bound" << "verdict  file\n";
    auto line = [&](const char* series, const std::optional<RateFit>& fit,
                    const std::string& note, double bound, const std::string& path) {
      out << std::setw(10) << series;
      if (fit) {
        const char* v = Verdict(fit->slope, bound, options.margin);
        all_pass = all_pass && fit->slope <= bound + options.margin;
        out << std::setw(12) << FormatDouble(fit->slope) << std::setw(10) << FormatDouble(bound)
            << std::setw(9) << v;
      } else {
        out << std::setw(12) << "none" << std::setw(10) << FormatDouble(bound) << std::setw(9)
            << "skip";
      }
      out << path;
      if (!fit) out << "  # " << note;
      out << '\n';
    };
    for (const auto& path : options.paths) {
      std::ifstream in(path);
      Require(in.good(), ErrorCode::kIo, "cannot open metrics file " + path);
      const auto points = ReadMetricsCsv(in);
      const RateReport r = ComputeRates(points, options.kappa, options.window);
      line("reg", r.reg, r.reg_note, theory.regret, path);
      line("regc", r.regc, r.regc_note, regc_bound, path);
    }
    out << "margin " << FormatDouble(options.margin) << "  kappa " << FormatDouble(options.kappa)
        << '\n';
    return all_pass ? kExitOk : kExitValidation;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

}  // namespace dopd
