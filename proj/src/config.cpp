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


#include "dopd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <system_error>

#include "dopd/error.hpp"

namespace dopd {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {"kind", "agents", "seed", "path", "dim", "coupling", "drift", "tightness"}},
      {"graph", {"period", "seed", "balanced", "path"}},
      {"run",
       {"algorithm", "kappa", "allow_any_kappa", "horizon", "seed", "record_every", "threads"}},
      {"output", {"dir"}},
      {"metrics", {"t_min", "per_decade", "window", "margin"}},
  };
  return keys;
}

[[noreturn]] void Fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfigParse, key + ": " + what);
}

template <class T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) Fail(key, "cannot parse '" + text + "'");
  return value;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void Get(const std::string& key, T& out) const {
    const auto text = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!text) return;
    if constexpr (std::is_same_v<T, std::string>) {
      out = *text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (*text == "true") {
        out = true;
      } else if (*text == "false") {
        out = false;
      } else {
        Fail(key, "expected true or false, got '" + *text + "'");
      }
    } else {
      out = ParseNumber<T>(key, *text);
    }
  }

 private:
  const pt::ptree& tree_;
};

ProblemKind ParseProblemKind(const std::string& name) {
  if (name == "pev") return ProblemKind::kPev;
  if (name == "synthetic") return ProblemKind::kSynthetic;
  if (name == "file") return ProblemKind::kFile;
  Fail("problem.kind", "unknown kind '" + name + "'");
}

const char* ProblemKindName(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kPev: return "pev";
    case ProblemKind::kSynthetic: return "synthetic";
    case ProblemKind::kFile: return "file";
  }
  return "pev";
}

const char* BoolName(bool b) { return b ? "true" : "false"; }

ExperimentConfig PevPreset(int n, int q) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::kPev;
  c.problem.num_agents = n;
  c.graph.period_q = q;
  c.horizon = 10'000;
  return c;
}

ExperimentConfig SyntheticPreset(double drift, double tightness) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::kSynthetic;
  c.problem.num_agents = 6;
  c.problem.drift = drift;
  c.problem.tightness = tightness;
  c.graph.period_q = 2;
  c.horizon = 100'000;
  c.record_every = 10;
  return c;
}

}  // namespace

ExperimentConfig ParseConfig(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigParse,
                "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = KnownKeys().find(section);
    if (it == KnownKeys().end()) {
      if (!body.empty() || body.data().empty()) Fail(section, "unknown section");
      Fail(section, "key outside of any section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) Fail(section + "." + key, "unknown key");
    }
  }

  ExperimentConfig c;
  const Reader r(tree);
  std::string kind = ProblemKindName(c.problem.kind);
  r.Get("problem.kind", kind);
  c.problem.kind = ParseProblemKind(kind);
  r.Get("problem.agents", c.problem.num_agents);
  r.Get("problem.seed", c.problem.seed);
  r.Get("problem.path", c.problem.path);
  r.Get("problem.dim", c.problem.dim);
  r.Get("problem.coupling", c.problem.coupling);
  r.Get("problem.drift", c.problem.drift);
  r.Get("problem.tightness", c.problem.tightness);

  r.Get("graph.period", c.graph.period_q);
  r.Get("graph.seed", c.graph.seed);
  r.Get("graph.balanced", c.graph.balanced);
  r.Get("graph.path", c.graph.path);

  std::string alg = AlgorithmName(c.algorithm);
  r.Get("run.algorithm", alg);
  c.algorithm = ParseAlgorithm(alg);
  r.Get("run.kappa", c.kappa);
  r.Get("run.allow_any_kappa", c.allow_any_kappa);
  r.Get("run.horizon", c.horizon);
  r.Get("run.seed", c.seed);
  r.Get("run.record_every", c.record_every);
  r.Get("run.threads", c.threads);

  r.Get("output.dir", c.out_dir);

  r.Get("metrics.t_min", c.metrics.t_min);
  r.Get("metrics.per_decade", c.metrics.per_decade);
  r.Get("metrics.window", c.metrics.window);
  r.Get("metrics.margin", c.metrics.margin);
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open config file " + path);
  return ParseConfig(in);
}

void WriteConfig(std::ostream& out, const ExperimentConfig& c) {
  out << "[problem]\n"
      << "kind = " << ProblemKindName(c.problem.kind) << '\n'
      << "agents = " << c.problem.num_agents << '\n'
      << "seed = " << c.problem.seed << '\n'
      << "path = " << c.problem.path << '\n'
      << "dim = " << c.problem.dim << '\n'
      << "coupling = " << c.problem.coupling << '\n'
      << "drift = " << FormatDouble(c.problem.drift) << '\n'
      << "tightness = " << FormatDouble(c.problem.tightness) << '\n'
      << "\n[graph]\n"
      << "period = " << c.graph.period_q << '\n'
      << "seed = " << c.graph.seed << '\n'
      << "balanced = " << BoolName(c.graph.balanced) << '\n'
      << "path = " << c.graph.path << '\n'
      << "\n[run]\n"
      << "algorithm = " << AlgorithmName(c.algorithm) << '\n'
      << "kappa = " << FormatDouble(c.kappa) << '\n'
      << "allow_any_kappa = " << BoolName(c.allow_any_kappa) << '\n'
      << "horizon = " << c.horizon << '\n'
      << "seed = " << c.seed << '\n'
      << "record_every = " << c.record_every << '\n'
      << "threads = " << c.threads << '\n'
      << "\n[output]\n"
      << "dir = " << c.out_dir << '\n'
      << "\n[metrics]\n"
      << "t_min = " << c.metrics.t_min << '\n'
      << "per_decade = " << c.metrics.per_decade << '\n'
      << "window = " << FormatDouble(c.metrics.window) << '\n'
      << "margin = " << FormatDouble(c.metrics.margin) << '\n';
}

std::vector<std::string> PresetNames() {
  return {"pev50-q1",  "pev50-q4",  "pev50-q9",           "pev100-q1",
          "pev100-q4", "pev100-q9", "synthetic-equal-rate", "synthetic-invariant"};
}

ExperimentConfig Preset(const std::string& name) {
  if (name == "pev50-q1") return PevPreset(50, 1);
  if (name == "pev50-q4") return PevPreset(50, 4);
  if (name == "pev50-q9") return PevPreset(50, 9);
  if (name == "pev100-q1") return PevPreset(100, 1);
  if (name == "pev100-q4") return PevPreset(100, 4);
  if (name == "pev100-q9") return PevPreset(100, 9);
  // kappa = 1/5 puts the regret and violation exponents at 0.9 together.
  if (name == "synthetic-equal-rate") return SyntheticPreset(1.0, 0.2);
  if (name == "synthetic-invariant") return SyntheticPreset(0.0, 0.5);
  throw Error(ErrorCode::kConfigParse, "unknown preset '" + name + "'");
}

RunConfig BuildRunConfig(const ExperimentConfig& c) {
  if (!c.allow_any_kappa && !(c.kappa > 0 && c.kappa < 0.25)) {
    Fail("run.kappa", "must lie in (0, 1/4); pass --allow-any-kappa to override");
  }
  if (c.horizon < 4) Fail("run.horizon", "must be at least 4");
  if (c.record_every < 1) Fail("run.record_every", "must be positive");
  if (c.threads < 1) Fail("run.threads", "must be positive");
  if (c.metrics.t_min < 1 || c.metrics.per_decade < 1) {
    Fail("metrics", "t_min and per_decade must be positive");
  }
  if (!(c.metrics.window > 0 && c.metrics.window <= 1)) Fail("metrics.window", "must lie in (0, 1]");

  RunConfig run;
  switch (c.problem.kind) {
    case ProblemKind::kPev:
      if (c.problem.num_agents < 1) Fail("problem.agents", "must be positive");
      run.problem =
          std::make_shared<OnlineProblem>(MakePev(c.problem.num_agents, c.problem.seed).problem);
      break;
    case ProblemKind::kSynthetic: {
      SyntheticOptions so;
      so.num_agents = c.problem.num_agents;
      so.dim = c.problem.dim;
      so.coupling = c.problem.coupling;
      so.drift = c.problem.drift;
      so.tightness = c.problem.tightness;
      try {
        run.problem = std::make_shared<OnlineProblem>(MakeSyntheticQuadratic(c.problem.seed, so));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInvalidArgument) throw;
        Fail("problem", e.what());
      }
      break;
    }
    case ProblemKind::kFile:
      if (c.problem.path.empty()) Fail("problem.path", "required for kind = file");
      run.problem = std::make_shared<OnlineProblem>(LoadProblem(c.problem.path));
      break;
  }

  const auto n = static_cast<int>(run.problem->num_agents());
  if (!c.graph.path.empty()) {
    run.graphs = std::make_shared<GraphSequence>(LoadGraphSequence(c.graph.path));
    if (run.graphs->num_nodes() != n) {
      Fail("graph.path", "graph has " + std::to_string(run.graphs->num_nodes()) +
                             " nodes, problem has " + std::to_string(n) + " agents");
    }
  } else if (n >= 2) {
    if (c.algorithm == Algorithm::kBalanced && !c.graph.balanced) {
      Fail("graph.balanced", "the balanced algorithm needs balanced = true");
    }
    if (c.graph.period_q < 1) Fail("graph.period", "must be positive");
    SwitchingOptions so;
    so.balanced = c.graph.balanced;
    run.graphs =
        std::make_shared<GraphSequence>(GenerateSwitchingCycle(n, c.graph.period_q, c.graph.seed, so));
  } else {
    run.graphs = std::make_shared<GraphSequence>(
        ConstantSequence(MakeColumnStochastic(Topology::Identity(1, 1).cast<bool>(), 1.0)));
  }
  run.schedule = StepSchedule(c.kappa, c.allow_any_kappa);
  run.horizon = c.horizon;
  run.seed = c.seed;
  run.algorithm = c.algorithm;
  run.record_every = c.record_every;
  run.threads = c.threads;
  return run;
}

}  // namespace dopd
