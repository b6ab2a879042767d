// Copyright 2026 The primsel Authors
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

// 0-1 integer program for primitive selection:
//
//   minimize    c^T x
//   subject to  A x (<=|=) b,  x integer, x >= 0
//
// Variables are one binary per (layer, candidate), one binary per nonzero
// transition entry (edge, j, k) linearizing the product of its two endpoint
// binaries via  x_j + x_k - y <= 1,  and in min-workspace mode one integer
// epigraph variable W bounded below by every layer's chosen footprint.

#ifndef PRIMSEL_ILP_PROBLEM_HPP_
#define PRIMSEL_ILP_PROBLEM_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "primsel/core.hpp"
#include "primsel/cost.hpp"

namespace primsel {

enum class SolveMode { kMinTime, kMinMemorySum, kMinWorkspace };

// How a memory budget is measured in min-time mode: whole-network sum, or
// the largest single-layer footprint (layer-by-layer workspace execution).
enum class MemoryMeasure { kSum, kPeakLayer };

struct SolveRequest {
  SolveMode mode = SolveMode::kMinTime;
  std::optional<Bytes> memory_budget;
  MemoryMeasure memory_measure = MemoryMeasure::kSum;
  std::optional<Duration> time_budget;
  std::optional<std::chrono::milliseconds> time_limit;
};

inline void validate_request(const SolveRequest& req) {
  if (req.mode == SolveMode::kMinTime && req.time_budget.has_value()) {
    throw Error(ErrorCode::kInvalidRequest, "min-time mode takes a memory budget, not a time budget");
  }
  if (req.mode != SolveMode::kMinTime && req.memory_budget.has_value()) {
    throw Error(ErrorCode::kInvalidRequest,
                "memory-minimizing modes take a time budget, not a memory budget");
  }
}

enum class SolveStatus { kOptimal, kInfeasible, kTimedOut };

constexpr std::string_view SolveStatusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kTimedOut: return "timed_out";
  }
  return "unknown";
}

struct SolveStats {
  std::uint64_t nodes = 0;
  double wall_seconds = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kInfeasible;
  // Present when optimal, or when a timed-out search holds an incumbent.
  std::optional<Selection> selection;
  std::optional<std::uint64_t> objective;
  // Proven lower bound on the optimum; equals `objective` when optimal.
  std::uint64_t lower_bound = 0;
  SolveStats stats;
};

enum class VarKind { kChoice, kProduct, kWorkspace };

struct VarMeta {
  VarKind kind = VarKind::kChoice;
  std::size_t layer = 0;      // kChoice
  std::size_t candidate = 0;  // kChoice
  std::size_t edge = 0;       // kProduct
  std::size_t from_candidate = 0;
  std::size_t to_candidate = 0;
  Duration transition_cost = 0;  // kProduct
  std::int64_t upper = 1;
};

enum class Relation { kLessEqual, kEqual };

enum class RowRole {
  kOneHot,         // sum_j x_ij = 1
  kProductLink,    // x_ij + x_i'k - y <= 1
  kMemoryBudget,   // sum m x <= M
  kTimeBudget,     // sum t x + sum trans y <= E
  kLayerCap,       // sum_j m_ij x_ij <= M   (peak-layer memory budget)
  kWorkspaceLink,  // sum_j m_ij x_ij - W <= 0
};

struct Term {
  std::size_t var = 0;
  std::int64_t coef = 0;
};

struct Constraint {
  RowRole role = RowRole::kOneHot;
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  std::int64_t rhs = 0;
  std::size_t layer = 0;  // owning layer for per-layer rows
};

struct IlpProblem {
  // Non-owning; the network must outlive the problem.
  const Network* network = nullptr;
  SolveRequest request;
  std::vector<VarMeta> vars;
  std::vector<std::int64_t> objective;
  std::vector<Constraint> constraints;
  std::vector<std::size_t> choice_offset;  // first choice var of each layer
  std::optional<std::size_t> workspace_var;

  std::size_t num_vars() const { return vars.size(); }
  std::size_t choice_var(std::size_t layer, std::size_t candidate) const {
    return choice_offset[layer] + candidate;
  }
  std::size_t primary_var_count() const {
    return static_cast<std::size_t>(
        std::count_if(vars.begin(), vars.end(),
                      [](const VarMeta& v) { return v.kind == VarKind::kChoice; }));
  }
  std::size_t product_var_count() const {
    return static_cast<std::size_t>(
        std::count_if(vars.begin(), vars.end(),
                      [](const VarMeta& v) { return v.kind == VarKind::kProduct; }));
  }
};

inline IlpProblem build_problem(const Network& net, const SolveRequest& request) {
  validate_request(request);
  IlpProblem p;
  p.network = &net;
  p.request = request;

  const bool time_objective = request.mode == SolveMode::kMinTime;
  Bytes max_memory = 0;

  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    p.choice_offset.push_back(p.vars.size());
    Constraint one_hot{RowRole::kOneHot, {}, Relation::kEqual, 1, i};
    for (std::size_t j = 0; j < net.candidate_count(i); ++j) {
      const auto& c = net.candidate(i, j);
      VarMeta v;
      v.kind = VarKind::kChoice;
      v.layer = i;
      v.candidate = j;
      one_hot.terms.push_back({p.vars.size(), 1});
      p.vars.push_back(v);
      p.objective.push_back(time_objective ? ToCoefficient(c.time_cost)
                            : request.mode == SolveMode::kMinMemorySum
                                ? ToCoefficient(c.memory_cost)
                                : 0);
      max_memory = std::max(max_memory, c.memory_cost);
    }
    p.constraints.push_back(std::move(one_hot));
  }

  // Product variables only for entries that cost something; a zero entry can
  // never change the objective or a time budget.
  std::vector<std::size_t> product_vars;
  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    const auto& edge = net.edges()[e];
    for (std::size_t j = 0; j < edge.matrix.rows(); ++j) {
      for (std::size_t k = 0; k < edge.matrix.cols(); ++k) {
        const Duration cost = edge.matrix.at(j, k);
        if (cost == 0) continue;
        VarMeta v;
        v.kind = VarKind::kProduct;
        v.edge = e;
        v.from_candidate = j;
        v.to_candidate = k;
        v.transition_cost = cost;
        const std::size_t y = p.vars.size();
        p.vars.push_back(v);
        p.objective.push_back(time_objective ? ToCoefficient(cost) : 0);
        p.constraints.push_back({RowRole::kProductLink,
                                 {{p.choice_var(edge.from, j), 1},
                                  {p.choice_var(edge.to, k), 1},
                                  {y, -1}},
                                 Relation::kLessEqual,
                                 1,
                                 edge.from});
        product_vars.push_back(y);
      }
    }
  }

  if (request.mode == SolveMode::kMinWorkspace) {
    VarMeta w;
    w.kind = VarKind::kWorkspace;
    w.upper = ToCoefficient(max_memory);
    p.workspace_var = p.vars.size();
    p.vars.push_back(w);
    p.objective.push_back(1);
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      Constraint link{RowRole::kWorkspaceLink, {}, Relation::kLessEqual, 0, i};
      for (std::size_t j = 0; j < net.candidate_count(i); ++j) {
        link.terms.push_back({p.choice_var(i, j), ToCoefficient(net.candidate(i, j).memory_cost)});
      }
      link.terms.push_back({*p.workspace_var, -1});
      p.constraints.push_back(std::move(link));
    }
  }

  if (request.memory_budget.has_value()) {
    const std::int64_t budget = ToCoefficient(*request.memory_budget);
    if (request.memory_measure == MemoryMeasure::kSum) {
      Constraint row{RowRole::kMemoryBudget, {}, Relation::kLessEqual, budget, 0};
      for (std::size_t i = 0; i < net.layer_count(); ++i) {
        for (std::size_t j = 0; j < net.candidate_count(i); ++j) {
          row.terms.push_back({p.choice_var(i, j), ToCoefficient(net.candidate(i, j).memory_cost)});
        }
      }
      p.constraints.push_back(std::move(row));
    } else {
      for (std::size_t i = 0; i < net.layer_count(); ++i) {
        Constraint row{RowRole::kLayerCap, {}, Relation::kLessEqual, budget, i};
        for (std::size_t j = 0; j < net.candidate_count(i); ++j) {
          row.terms.push_back({p.choice_var(i, j), ToCoefficient(net.candidate(i, j).memory_cost)});
        }
        p.constraints.push_back(std::move(row));
      }
    }
  }

  if (request.time_budget.has_value()) {
    Constraint row{RowRole::kTimeBudget, {}, Relation::kLessEqual,
                   ToCoefficient(*request.time_budget), 0};
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      for (std::size_t j = 0; j < net.candidate_count(i); ++j) {
        row.terms.push_back({p.choice_var(i, j), ToCoefficient(net.candidate(i, j).time_cost)});
      }
    }
    for (std::size_t y : product_vars) {
      row.terms.push_back({y, ToCoefficient(p.vars[y].transition_cost)});
    }
    p.constraints.push_back(std::move(row));
  }
  return p;
}

// Full variable vector for a selection: choice binaries from the assignment,
// every other variable at the smallest value its rows allow (y = 1 exactly
// when both endpoints are chosen, W = largest chosen footprint).
inline std::vector<std::int64_t> CompleteAssignment(const IlpProblem& p,
                                                    std::span<const std::size_t> choice) {
  std::vector<std::int64_t> x(p.num_vars(), 0);
  for (std::size_t i = 0; i < choice.size(); ++i) x[p.choice_var(i, choice[i])] = 1;
  for (const auto& row : p.constraints) {
    if (row.role != RowRole::kProductLink && row.role != RowRole::kWorkspaceLink) continue;
    // Rows of the form  sum(a x) - z <= rhs  force  z >= sum(a x) - rhs.
    std::int64_t fixed = 0;
    std::size_t free_var = 0;
    for (const auto& t : row.terms) {
      if (t.coef < 0) {
        free_var = t.var;
      } else {
        fixed += t.coef * x[t.var];
      }
    }
    x[free_var] = std::max(x[free_var], fixed - row.rhs);
  }
  return x;
}

inline bool IsFeasible(const IlpProblem& p, std::span<const std::int64_t> x) {
  for (const auto& row : p.constraints) {
    __int128 lhs = 0;
    for (const auto& t : row.terms) lhs += static_cast<__int128>(t.coef) * x[t.var];
    if (row.relation == Relation::kEqual ? lhs != row.rhs : lhs > row.rhs) return false;
  }
  return true;
}

inline __int128 ObjectiveValue(const IlpProblem& p, std::span<const std::int64_t> x) {
  __int128 total = 0;
  for (std::size_t v = 0; v < x.size(); ++v) total += static_cast<__int128>(p.objective[v]) * x[v];
  return total;
}

// Transition time as the linear model sees it: sum of trans * y with each
// product variable at its constrained minimum.
inline Duration linearized_transition_value(const IlpProblem& p,
                                            std::span<const std::size_t> choice) {
  CheckSelection(*p.network, choice);
  const auto x = CompleteAssignment(p, choice);
  Duration total = 0;
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    if (p.vars[v].kind == VarKind::kProduct) {
      total = CheckedAdd(total, CheckedMul(p.vars[v].transition_cost,
                                           static_cast<std::uint64_t>(x[v])));
    }
  }
  return total;
}

inline std::string VarName(const IlpProblem& p, std::size_t v) {
  const VarMeta& m = p.vars[v];
  switch (m.kind) {
    case VarKind::kChoice:
      return "x_" + std::to_string(m.layer) + "_" + std::to_string(m.candidate);
    case VarKind::kProduct:
      return "y_" + std::to_string(m.edge) + "_" + std::to_string(m.from_candidate) + "_" +
             std::to_string(m.to_candidate);
    case VarKind::kWorkspace:
      return "W";
  }
  return "v" + std::to_string(v);
}

// CPLEX LP text, readable by CBC, HiGHS, GLPK and friends.
inline void WriteLp(const IlpProblem& p, std::ostream& os) {
  auto write_terms = [&](const std::vector<Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
      if (t.coef == 0) continue;
      if (t.coef < 0) {
        os << (first ? "- " : " - ");
      } else if (!first) {
        os << " + ";
      }
      const std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
      if (mag != 1) os << mag << ' ';
      os << VarName(p, t.var);
      first = false;
    }
    if (first) os << "0 " << VarName(p, 0);
  };

  if (p.network != nullptr) os << "\\ network: " << p.network->profile().name << "\n";
  os << "Minimize\n obj: ";
  std::vector<Term> obj;
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    if (p.objective[v] != 0) obj.push_back({v, p.objective[v]});
  }
  write_terms(obj);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < p.constraints.size(); ++r) {
    const auto& row = p.constraints[r];
    os << " c" << r << ": ";
    write_terms(row.terms);
    os << (row.relation == Relation::kEqual ? " = " : " <= ") << row.rhs << "\n";
  }
  os << "Bounds\n";
  if (p.workspace_var.has_value()) {
    os << " 0 <= W <= " << p.vars[*p.workspace_var].upper << "\n";
  }
  os << "Binaries\n";
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    if (p.vars[v].kind != VarKind::kWorkspace) os << ' ' << VarName(p, v) << "\n";
  }
  if (p.workspace_var.has_value()) os << "Generals\n W\n";
  os << "End\n";
}

}  // namespace primsel

#endif  // PRIMSEL_ILP_PROBLEM_HPP_
