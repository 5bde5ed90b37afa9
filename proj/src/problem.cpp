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

#include "dopd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "dopd/error.hpp"
#include "dopd/rng.hpp"

namespace dopd {
namespace {

constexpr std::uint64_t kCostStream = 0x636f7374ULL;    // "cost"
constexpr std::uint64_t kTargetStream = 0x74676574ULL;  // "tget"
constexpr std::uint64_t kPevStream = 0x70657600ULL;
constexpr std::uint64_t kSynthStream = 0x73796e00ULL;
constexpr std::uint64_t kSampleStream = 0x73616d70ULL;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::Index CostDim(const CostModel& cost) {
  return std::visit(Overloaded{
                        [](const ZeroCost&) -> Eigen::Index { return -1; },
                        [](const FixedLinearCost& c) -> Eigen::Index { return c.c.size(); },
                        [](const RandomLinearCost& c) -> Eigen::Index {
                          return c.offset.size() == 0 ? -1 : c.offset.size();
                        },
                        [](const QuadraticCost& c) -> Eigen::Index { return c.center.size(); },
                        [](const MaxAffineCost& c) -> Eigen::Index { return c.slopes.cols(); },
                    },
                    cost);
}

}  // namespace

OnlineProblem::OnlineProblem(std::vector<Agent> agents, Eigen::Index coupling_dim,
                             std::uint64_t seed, std::string name)
    : agents_(std::move(agents)), m_(coupling_dim), seed_(seed), name_(std::move(name)) {
  Require(!agents_.empty(), ErrorCode::kInvalidArgument, "problem needs at least one agent");
  Require(m_ >= 0, ErrorCode::kInvalidArgument, "negative coupling dimension");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Agent& a = agents_[i];
    const Eigen::Index n = a.set.dim();
    const std::string who = "agent " + std::to_string(i) + ": ";
    const Eigen::Index cd = CostDim(a.cost);
    Require(cd < 0 || cd == n, ErrorCode::kDimensionMismatch, who + "cost dimension mismatch");
    if (const auto* ma = std::get_if<MaxAffineCost>(&a.cost)) {
      Require(ma->slopes.rows() >= 1 && ma->intercepts.size() == ma->slopes.rows(),
              ErrorCode::kDimensionMismatch, who + "max-affine pieces malformed");
    }
    if (const auto* rl = std::get_if<RandomLinearCost>(&a.cost)) {
      Require(rl->lo <= rl->hi, ErrorCode::kInvalidArgument, who + "cost range reversed");
    }
    Require(a.constraint.d.rows() == m_ && a.constraint.b.size() == m_ &&
                (m_ == 0 || a.constraint.d.cols() == n),
            ErrorCode::kDimensionMismatch, who + "constraint map does not match dimensions");
  }
}

Eigen::Index OnlineProblem::total_dim() const {
  Eigen::Index total = 0;
  for (const auto& a : agents_) total += a.set.dim();
  return total;
}

const Agent& OnlineProblem::agent(Eigen::Index i) const {
  Require(i >= 0 && i < num_agents(), ErrorCode::kInvalidArgument,
          "agent index " + std::to_string(i) + " out of range");
  return agents_[static_cast<std::size_t>(i)];
}

bool OnlineProblem::time_invariant_costs() const {
  return std::all_of(agents_.begin(), agents_.end(), [](const Agent& a) {
    if (std::holds_alternative<RandomLinearCost>(a.cost)) return false;
    if (const auto* q = std::get_if<QuadraticCost>(&a.cost)) return q->drift == 0;
    return true;
  });
}

bool OnlineProblem::affine_constraints() const {
  return std::none_of(agents_.begin(), agents_.end(),
                      [](const Agent& a) { return a.constraint.hinge; });
}

void OnlineProblem::CheckDim(Eigen::Index i, const Vector& x) const {
  Require(x.size() == dim(i), ErrorCode::kDimensionMismatch,
          "agent " + std::to_string(i) + " expects dimension " + std::to_string(dim(i)) +
              ", got " + std::to_string(x.size()));
}

Vector OnlineProblem::LinearCoefficients(Eigen::Index i, std::int64_t t) const {
  const auto& cost = std::get<RandomLinearCost>(agent(i).cost);
  const Eigen::Index n = dim(i);
  Vector c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c(k) = cost.lo + (cost.hi - cost.lo) *
                         KeyedUniform(seed_, kCostStream, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
  }
  if (cost.offset.size() > 0) c += cost.offset;
  return c;
}

Vector OnlineProblem::QuadraticTarget(Eigen::Index i, std::int64_t t) const {
  const auto& cost = std::get<QuadraticCost>(agent(i).cost);
  if (cost.drift == 0) return cost.center;
  Vector theta = cost.center;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double u = KeyedUniform(seed_, kTargetStream, static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
    theta(k) += cost.drift * (2 * u - 1);
  }
  return theta;
}

double OnlineProblem::CostAndSubgradient(Eigen::Index i, std::int64_t t, const Vector& x,
                                         Vector& grad) const {
  CheckDim(i, x);
  return std::visit(
      Overloaded{
          [&](const ZeroCost&) {
            grad = Vector::Zero(x.size());
            return 0.0;
          },
          [&](const FixedLinearCost& c) {
            grad = c.c;
            return c.c.dot(x);
          },
          [&](const RandomLinearCost&) {
            grad = LinearCoefficients(i, t);
            return grad.dot(x);
          },
          [&](const QuadraticCost& c) {
            const Vector diff = x - QuadraticTarget(i, t);
            grad = (2 * c.weight) * diff;
            return c.weight * diff.squaredNorm();
          },
          [&](const MaxAffineCost& c) {
            const Vector vals = c.slopes * x + c.intercepts;
            Eigen::Index best = 0;
            // maxCoeff returns the first maximiser, which is the tie rule.
            const double v = vals.maxCoeff(&best);
            grad = c.slopes.row(best).transpose();
            return v;
          },
      },
      agent(i).cost);
}

double OnlineProblem::Cost(Eigen::Index i, std::int64_t t, const Vector& x) const {
  Vector unused;
  return CostAndSubgradient(i, t, x, unused);
}

Vector OnlineProblem::CostSubgradient(Eigen::Index i, std::int64_t t, const Vector& x) const {
  Vector grad;
  CostAndSubgradient(i, t, x, grad);
  return grad;
}

Vector OnlineProblem::ConstraintValue(Eigen::Index i, const Vector& x) const {
  CheckDim(i, x);
  const ConstraintMap& g = agent(i).constraint;
  if (m_ == 0) return Vector(0);
  Vector v = g.d * x - g.b;
  if (g.hinge) v = v.cwiseMax(0.0);
  return v;
}

Matrix OnlineProblem::ConstraintSubgradient(Eigen::Index i, const Vector& x) const {
  CheckDim(i, x);
  const ConstraintMap& g = agent(i).constraint;
  if (m_ == 0) return Matrix(0, x.size());
  if (!g.hinge) return g.d;
  Matrix s = g.d;
  const Vector inner = g.d * x - g.b;
  for (Eigen::Index k = 0; k < m_; ++k) {
    if (inner(k) <= 0) s.row(k).setZero();
  }
  return s;
}

QuadraticAggregate OnlineProblem::EmptyAggregate(Eigen::Index i) const {
  const Eigen::Index n = dim(i);
  return QuadraticAggregate{Matrix::Zero(n, n), Vector::Zero(n), 0.0, 0};
}

bool OnlineProblem::AccumulateCost(Eigen::Index i, std::int64_t t, QuadraticAggregate& agg) const {
  const bool quadratic = std::visit(Overloaded{
                                        [&](const ZeroCost&) { return true; },
                                        [&](const FixedLinearCost& c) {
                                          agg.linear += c.c;
                                          return true;
                                        },
                                        [&](const RandomLinearCost&) {
                                          agg.linear += LinearCoefficients(i, t);
                                          return true;
                                        },
                                        [&](const QuadraticCost& c) {
                                          const Vector theta = QuadraticTarget(i, t);
                                          agg.hessian.diagonal().array() += 2 * c.weight;
                                          agg.linear -= (2 * c.weight) * theta;
                                          agg.constant += c.weight * theta.squaredNorm();
                                          return true;
                                        },
                                        [&](const MaxAffineCost&) { return false; },
                                    },
                                    agent(i).cost);
  if (quadratic) ++agg.rounds;
  return quadratic;
}

Vector OnlineProblem::ConstraintSubgradientTransposeTimes(Eigen::Index i, const Vector& x,
                                                          const Vector& v) const {
  CheckDim(i, x);
  const ConstraintMap& g = agent(i).constraint;
  if (m_ == 0) return Vector::Zero(x.size());
  if (!g.hinge) return g.d.transpose() * v;
  return ConstraintSubgradient(i, x).transpose() * v;
}

PevInstance MakePev(int num_agents, std::uint64_t seed, const PevOptions& options) {
  Require(num_agents >= 1, ErrorCode::kInvalidArgument, "PEV needs N >= 1");
  Require(options.slots >= 8, ErrorCode::kInvalidArgument, "PEV needs at least 8 slots");
  Require(options.coupling_scale > 0, ErrorCode::kInvalidArgument,
          "coupling_scale must be positive");
  const int n = options.slots;
  const int m = 2 * n;
  Vector tariff(n);
  for (int k = 0; k < n; ++k) {
    tariff(k) = options.tariff_peak * 0.5 *
                (1.0 + std::cos(2.0 * std::numbers::pi * (k - n / 4.0) / n));
  }
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::vector<Agent> agents;
    std::vector<Vector> xhat;
    Vector load = Vector::Zero(m);
    for (int i = 0; i < num_agents; ++i) {
      CounterRng rng(seed, kPevStream + static_cast<std::uint64_t>(attempt) * 0x10000ULL +
                               static_cast<std::uint64_t>(i));
      const double r_max = rng.Uniform(1.0, 2.0);
      const int arrive = static_cast<int>(rng.Below(static_cast<std::uint64_t>(n / 3 + 1)));
      const int depart = n - static_cast<int>(rng.Below(static_cast<std::uint64_t>(n / 3 + 1)));
      const int window = depart - arrive;
      const double e_req = rng.Uniform(0.3, 0.6) * window * r_max;

      // Cumulative rows for the slots inside the window.
      std::vector<std::pair<Eigen::RowVectorXd, double>> cuts;
      for (int k = arrive; k < depart; ++k) {
        Eigen::RowVectorXd prefix = Eigen::RowVectorXd::Zero(n);
        prefix.segment(arrive, k - arrive + 1).setOnes();
        const double done = static_cast<double>(k - arrive + 1) / window;
        const double e_max = std::min(1.1 * e_req, e_req * (done + 0.5));
        const double e_min = e_req - 0.9 * r_max * (depart - 1 - k);
        cuts.emplace_back(prefix, e_max);
        if (e_min > 0) cuts.emplace_back(-prefix, -e_min);
      }
      Matrix rows(static_cast<Eigen::Index>(cuts.size()), n);
      Vector rhs(rows.rows());
      for (std::size_t r = 0; r < cuts.size(); ++r) {
        rows.row(static_cast<Eigen::Index>(r)) = cuts[r].first;
        rhs(static_cast<Eigen::Index>(r)) = cuts[r].second;
      }
      Vector upper = Vector::Zero(n);
      upper.segment(arrive, window).setConstant(r_max);
      Polyhedrond poly(rows, rhs, MakeBox<double>(Vector::Zero(n), upper));

      Vector eta(n);
      for (int k = 0; k < n; ++k) eta(k) = rng.Uniform(0.9, 1.1);
      eta *= options.coupling_scale;
      Matrix d = Matrix::Zero(m, n);
      for (int k = 0; k < n; ++k) {
        d(k, k) = eta(k);
        d(n + k, k) = eta(k);
        if (k + 1 < n) d(n + k, k + 1) = eta(k + 1);
      }
      Vector point = Vector::Zero(n);
      point.segment(arrive, window).setConstant(1.02 * e_req / window);
      load += d * point;
      agents.push_back(Agent{ConvexSetd(std::move(poly)),
                             RandomLinearCost{options.cost_lo, options.cost_hi, tariff},
                             ConstraintMap{d, Vector::Zero(m), false}});
      xhat.push_back(std::move(point));
    }
    // Slots no vehicle can use still get a small positive capacity.
    const double floor = 0.02 * load.mean();
    Vector b(m);
    for (int r = 0; r < m; ++r) {
      const double h = r < n ? options.slot_headroom : options.pair_headroom;
      b(r) = (1.0 + h) * load(r) + floor;
    }
    const double margin = (b - load).minCoeff();
    if (!(margin > 0)) continue;
    for (auto& a : agents) a.constraint.b = b / num_agents;
    OnlineProblem problem(std::move(agents), m, seed, "pev");
    // Slater probe through the oracles themselves.
    Vector total = Vector::Zero(m);
    bool inside = true;
    for (int i = 0; i < num_agents; ++i) {
      total += problem.ConstraintValue(i, xhat[static_cast<std::size_t>(i)]);
      inside = inside && problem.agent(i).set.Contains(xhat[static_cast<std::size_t>(i)], 0.0);
    }
    if (!inside || !(total.maxCoeff() < 0)) continue;
    return PevInstance{std::move(problem), b, std::move(xhat), -total.maxCoeff()};
  }
  throw Error(ErrorCode::kGenerationFailed,
              "PEV Slater probe failed for seed " + std::to_string(seed));
}

OnlineProblem MakeSyntheticQuadratic(std::uint64_t seed, const SyntheticOptions& options) {
  Require(options.num_agents >= 1 && options.dim >= 1 && options.coupling >= 0,
          ErrorCode::kInvalidArgument, "bad synthetic sizes");
  Require(options.tightness > 0 && options.tightness < 1, ErrorCode::kInvalidArgument,
          "tightness must lie in (0, 1)");
  const int n = options.dim;
  const int m = options.coupling;
  std::vector<Agent> agents;
  Vector load = Vector::Zero(m);
  for (int i = 0; i < options.num_agents; ++i) {
    CounterRng rng(seed, kSynthStream + static_cast<std::uint64_t>(i));
    Vector center(n);
    for (int k = 0; k < n; ++k) center(k) = rng.Uniform(0.2, 0.9);
    Matrix d(m, n);
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < n; ++k) d(r, k) = rng.Uniform(0.5, 1.5);
    }
    load += d * center;
    agents.push_back(Agent{ConvexSetd(MakeBox<double>(Vector::Constant(n, -1.0),
                                                      Vector::Constant(n, 1.0))),
                           QuadraticCost{center, 1.0, options.drift},
                           ConstraintMap{d, Vector::Zero(m), false}});
  }
  const Vector b = (1.0 - options.tightness) * load;
  for (auto& a : agents) a.constraint.b = b / options.num_agents;
  return OnlineProblem(std::move(agents), m, seed,
                       options.drift == 0 ? "synthetic-invariant" : "synthetic");
}

BoundEstimates EstimateBounds(const OnlineProblem& problem, int samples, std::uint64_t seed) {
  Require(samples >= 1, ErrorCode::kInvalidArgument, "need at least one sample");
  BoundEstimates est;
  est.samples = samples;
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < problem.num_agents(); ++i) {
      const ConvexSetd& set = problem.agent(i).set;
      const Eigen::Index n = set.dim();
      CounterRng rng(seed, kSampleStream ^ (static_cast<std::uint64_t>(s) << 20) ^
                               static_cast<std::uint64_t>(i));
      Vector lo = Vector::Constant(n, -1.0), hi = Vector::Constant(n, 1.0);
      if (auto box = set.BoundingBox()) {
        lo = box->lower;
        hi = box->upper;
      }
      // Draw from the box widened by half its width on each side so the
      // projection lands on faces and vertices with positive probability.
      Vector z(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double w = hi(k) - lo(k);
        z(k) = rng.Uniform(lo(k) - 0.5 * w, hi(k) + 0.5 * w);
      }
      const Vector x = Project(set, z);
      const auto t = static_cast<std::int64_t>(rng.Below(1u << 20));
      Vector grad;
      const double f = problem.CostAndSubgradient(i, t, x, grad);
      est.b_x = std::max(est.b_x, x.norm());
      est.b_f = std::max(est.b_f, std::abs(f));
      est.c_f = std::max(est.c_f, grad.norm());
      if (problem.coupling_dim() > 0) {
        est.b_g = std::max(est.b_g, problem.ConstraintValue(i, x).norm());
        const Matrix jac = problem.ConstraintSubgradient(i, x);
        Eigen::JacobiSVD<Matrix> svd(jac);
        est.c_g = std::max(est.c_g, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
      }
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Text format.

namespace {

void WriteVector(std::ostream& out, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) out << ' ' << v(k);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line split into a stream; the first token is returned.
  std::string Next(std::istringstream& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      tokens.clear();
      tokens.str(line);
      std::string key;
      if (tokens >> key) return key;
    }
    Fail("unexpected end of file");
  }

  std::string Expect(std::istringstream& tokens, const std::string& key) {
    const std::string got = Next(tokens);
    if (got != key) Fail("expected '" + key + "', found '" + got + "'");
    return got;
  }

  template <typename T>
  T Read(std::istringstream& tokens, const char* what) {
    T v{};
    if (!(tokens >> v)) Fail(std::string("cannot read ") + what);
    return v;
  }

  Vector ReadVector(std::istringstream& tokens, Eigen::Index n, const char* what) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = Read<double>(tokens, what);
    return v;
  }

  [[noreturn]] void Fail(const std::string& why) const {
    throw Error(ErrorCode::kConfigParse, "problem file line " + std::to_string(line_no_) + ": " + why);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void WriteProblem(std::ostream& out, const OnlineProblem& problem) {
  out << std::setprecision(17);
  out << "dopd-problem 1\n";
  out << "name " << problem.name() << '\n';
  out << "agents " << problem.num_agents() << '\n';
  out << "coupling " << problem.coupling_dim() << '\n';
  out << "seed " << problem.seed() << '\n';
  for (Eigen::Index i = 0; i < problem.num_agents(); ++i) {
    const Agent& a = problem.agent(i);
    const Eigen::Index n = a.set.dim();
    out << "agent " << i << '\n';
    std::visit(Overloaded{
                   [&](const Boxd& b) {
                     out << "set box " << n << "\nlower";
                     WriteVector(out, b.lower);
                     out << "\nupper";
                     WriteVector(out, b.upper);
                     out << '\n';
                   },
                   [&](const NonnegOrthant<double>&) { out << "set orthant " << n << '\n'; },
                   [&](const Halfspace<double>& h) {
                     out << "set halfspace " << n << "\nnormal";
                     WriteVector(out, h.normal);
                     out << "\noffset " << h.offset << '\n';
                   },
                   [&](const Polyhedrond& p) {
                     out << "set polyhedron " << n << ' ' << p.rows().rows() << "\nlower";
                     WriteVector(out, p.box().lower);
                     out << "\nupper";
                     WriteVector(out, p.box().upper);
                     out << '\n';
                     for (Eigen::Index r = 0; r < p.rows().rows(); ++r) {
                       out << "row";
                       WriteVector(out, p.rows().row(r).transpose());
                       out << ' ' << p.rhs()(r) << '\n';
                     }
                   },
               },
               a.set.variant());
    std::visit(Overloaded{
                   [&](const ZeroCost&) { out << "cost zero\n"; },
                   [&](const FixedLinearCost& c) {
                     out << "cost fixed_linear";
                     WriteVector(out, c.c);
                     out << '\n';
                   },
                   [&](const RandomLinearCost& c) {
                     out << "cost random_linear " << c.lo << ' ' << c.hi << ' '
                         << (c.offset.size() > 0 ? 1 : 0);
                     if (c.offset.size() > 0) WriteVector(out, c.offset);
                     out << '\n';
                   },
                   [&](const QuadraticCost& c) {
                     out << "cost quadratic " << c.weight << ' ' << c.drift;
                     WriteVector(out, c.center);
                     out << '\n';
                   },
                   [&](const MaxAffineCost& c) {
                     out << "cost max_affine " << c.slopes.rows() << '\n';
                     for (Eigen::Index k = 0; k < c.slopes.rows(); ++k) {
                       out << "piece";
                       WriteVector(out, c.slopes.row(k).transpose());
                       out << ' ' << c.intercepts(k) << '\n';
                     }
                   },
               },
               a.cost);
    out << "constraint " << (a.constraint.hinge ? "hinge" : "affine") << '\n';
    for (Eigen::Index r = 0; r < problem.coupling_dim(); ++r) {
      out << "g";
      WriteVector(out, a.constraint.d.row(r).transpose());
      out << ' ' << a.constraint.b(r) << '\n';
    }
  }
  out << "end\n";
}

OnlineProblem ReadProblem(std::istream& in) {
  LineReader reader(in);
  std::istringstream tok;
  reader.Expect(tok, "dopd-problem");
  if (reader.Read<int>(tok, "version") != 1) reader.Fail("unsupported version");
  reader.Expect(tok, "name");
  const auto name = reader.Read<std::string>(tok, "name");
  reader.Expect(tok, "agents");
  const auto num_agents = reader.Read<long>(tok, "agent count");
  reader.Expect(tok, "coupling");
  const auto m = reader.Read<long>(tok, "coupling dimension");
  reader.Expect(tok, "seed");
  const auto seed = reader.Read<std::uint64_t>(tok, "seed");
  if (num_agents < 1 || m < 0) reader.Fail("bad sizes");
  std::vector<Agent> agents;
  for (long i = 0; i < num_agents; ++i) {
    reader.Expect(tok, "agent");
    if (reader.Read<long>(tok, "agent index") != i) reader.Fail("agents out of order");
    reader.Expect(tok, "set");
    const auto kind = reader.Read<std::string>(tok, "set kind");
    const auto n = reader.Read<long>(tok, "dimension");
    if (n < 1) reader.Fail("bad dimension");
    std::optional<ConvexSetd> set;
    if (kind == "box" || kind == "polyhedron") {
      long k = 0;
      if (kind == "polyhedron") k = reader.Read<long>(tok, "row count");
      reader.Expect(tok, "lower");
      Vector lo = reader.ReadVector(tok, n, "lower bound");
      reader.Expect(tok, "upper");
      Vector hi = reader.ReadVector(tok, n, "upper bound");
      Boxd box = MakeBox<double>(lo, hi);
      if (kind == "box") {
        set.emplace(std::move(box));
      } else {
        Matrix rows(k, n);
        Vector rhs(k);
        for (long r = 0; r < k; ++r) {
          reader.Expect(tok, "row");
          rows.row(r) = reader.ReadVector(tok, n, "row").transpose();
          rhs(r) = reader.Read<double>(tok, "row rhs");
        }
        set.emplace(Polyhedrond(rows, rhs, box));
      }
    } else if (kind == "orthant") {
      set.emplace(NonnegOrthant<double>{n});
    } else if (kind == "halfspace") {
      reader.Expect(tok, "normal");
      Vector normal = reader.ReadVector(tok, n, "normal");
      reader.Expect(tok, "offset");
      set.emplace(MakeHalfspace<double>(normal, reader.Read<double>(tok, "offset")));
    } else {
      reader.Fail("unknown set kind '" + kind + "'");
    }
    reader.Expect(tok, "cost");
    const auto cost_kind = reader.Read<std::string>(tok, "cost kind");
    CostModel cost;
    if (cost_kind == "zero") {
      cost = ZeroCost{};
    } else if (cost_kind == "fixed_linear") {
      cost = FixedLinearCost{reader.ReadVector(tok, n, "cost vector")};
    } else if (cost_kind == "random_linear") {
      const auto lo = reader.Read<double>(tok, "cost lo");
      RandomLinearCost rl{lo, reader.Read<double>(tok, "cost hi"), Vector()};
      if (reader.Read<int>(tok, "offset flag") != 0) {
        rl.offset = reader.ReadVector(tok, n, "cost offset");
      }
      cost = std::move(rl);
    } else if (cost_kind == "quadratic") {
      QuadraticCost q;
      q.weight = reader.Read<double>(tok, "weight");
      q.drift = reader.Read<double>(tok, "drift");
      q.center = reader.ReadVector(tok, n, "center");
      cost = std::move(q);
    } else if (cost_kind == "max_affine") {
      const auto k = reader.Read<long>(tok, "piece count");
      if (k < 1) reader.Fail("max_affine needs pieces");
      MaxAffineCost c{Matrix(k, n), Vector(k)};
      for (long r = 0; r < k; ++r) {
        reader.Expect(tok, "piece");
        c.slopes.row(r) = reader.ReadVector(tok, n, "slope").transpose();
        c.intercepts(r) = reader.Read<double>(tok, "intercept");
      }
      cost = std::move(c);
    } else {
      reader.Fail("unknown cost kind '" + cost_kind + "'");
    }
    reader.Expect(tok, "constraint");
    const auto ckind = reader.Read<std::string>(tok, "constraint kind");
    if (ckind != "affine" && ckind != "hinge") reader.Fail("unknown constraint kind");
    ConstraintMap g{Matrix(m, n), Vector(m), ckind == "hinge"};
    for (long r = 0; r < m; ++r) {
      reader.Expect(tok, "g");
      g.d.row(r) = reader.ReadVector(tok, n, "constraint row").transpose();
      g.b(r) = reader.Read<double>(tok, "constraint offset");
    }
    agents.push_back(Agent{std::move(*set), std::move(cost), std::move(g)});
  }
  reader.Expect(tok, "end");
  return OnlineProblem(std::move(agents), m, seed, name);
}

OnlineProblem LoadProblem(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open problem file " + path);
  return ReadProblem(in);
}

void SaveProblem(const std::string& path, const OnlineProblem& problem) {
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write problem file " + path);
  WriteProblem(out, problem);
}

}  // namespace dopd
