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

// Solve modes on top of the ILP, the baselines they are compared against
// (greedy replacement, one primitive family everywhere) and the exhaustive
// oracle used to verify all of them.

#ifndef PRIMSEL_STRATEGIES_HPP_
#define PRIMSEL_STRATEGIES_HPP_

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "primsel/branch_and_bound.hpp"
#include "primsel/core.hpp"
#include "primsel/cost.hpp"
#include "primsel/ilp_problem.hpp"

namespace primsel {

inline SolveOutcome Solve(const Network& net, const SolveRequest& request) {
  const IlpProblem problem = build_problem(net, request);
  return solve_bnb(problem, request.time_limit);
}

inline SolveOutcome solve_min_time(const Network& net, std::optional<Bytes> memory_budget = {},
                                   MemoryMeasure measure = MemoryMeasure::kSum,
                                   std::optional<std::chrono::milliseconds> time_limit = {}) {
  SolveRequest req;
  req.mode = SolveMode::kMinTime;
  req.memory_budget = memory_budget;
  req.memory_measure = measure;
  req.time_limit = time_limit;
  return Solve(net, req);
}

inline SolveOutcome solve_min_memory(const Network& net, std::optional<Duration> time_budget = {},
                                     std::optional<std::chrono::milliseconds> time_limit = {}) {
  SolveRequest req;
  req.mode = SolveMode::kMinMemorySum;
  req.time_budget = time_budget;
  req.time_limit = time_limit;
  return Solve(net, req);
}

inline SolveOutcome solve_min_workspace(const Network& net,
                                        std::optional<Duration> time_budget = {},
                                        std::optional<std::chrono::milliseconds> time_limit = {}) {
  SolveRequest req;
  req.mode = SolveMode::kMinWorkspace;
  req.time_budget = time_budget;
  req.time_limit = time_limit;
  return Solve(net, req);
}

inline Bytes MinimumMemorySum(const Network& net) {
  Bytes total = 0;
  for (const auto& layer : net.profile().layers) {
    Bytes lowest = layer.candidates.front().memory_cost;
    for (const auto& c : layer.candidates) lowest = std::min(lowest, c.memory_cost);
    total = CheckedAdd(total, lowest);
  }
  return total;
}

inline Bytes MaximumMemorySum(const Network& net) {
  Bytes total = 0;
  for (const auto& layer : net.profile().layers) {
    Bytes highest = 0;
    for (const auto& c : layer.candidates) highest = std::max(highest, c.memory_cost);
    total = CheckedAdd(total, highest);
  }
  return total;
}

inline constexpr std::uint64_t kDefaultBruteForceCap = 1'000'000;

// Objective of `choice` under `request`, or nothing when a budget is violated.
inline std::optional<std::uint64_t> ScoreForRequest(const Network& net, const SolveRequest& request,
                                                    std::span<const std::size_t> choice) {
  const ObjectiveBreakdown b = evaluate(net, choice);
  if (request.memory_budget.has_value()) {
    const Bytes used =
        request.memory_measure == MemoryMeasure::kSum ? b.memory_sum : b.workspace_max;
    if (used > *request.memory_budget) return std::nullopt;
  }
  if (request.time_budget.has_value() && b.total_time > *request.time_budget) return std::nullopt;
  switch (request.mode) {
    case SolveMode::kMinTime: return b.total_time;
    case SolveMode::kMinMemorySum: return b.memory_sum;
    case SolveMode::kMinWorkspace: return b.workspace_max;
  }
  return std::nullopt;
}

// Exhaustive enumeration in lexicographic order, keeping the first optimum.
inline SolveOutcome brute_force(const Network& net, const SolveRequest& request,
                                std::uint64_t cap = kDefaultBruteForceCap) {
  validate_request(request);
  const std::uint64_t count = net.assignment_count(cap);
  if (count > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "more than " + std::to_string(cap) + " assignments to enumerate");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = net.layer_count();
  std::vector<std::size_t> choice(m, 0);
  std::optional<std::vector<std::size_t>> best;
  std::uint64_t best_value = 0;
  SolveOutcome out;
  for (;;) {
    ++out.stats.nodes;
    auto value = ScoreForRequest(net, request, choice);
    if (value.has_value() && (!best.has_value() || *value < best_value)) {
      best = choice;
      best_value = *value;
    }
    bool wrapped = true;
    for (std::size_t i = m; i-- > 0;) {
      if (++choice[i] < net.candidate_count(i)) {
        wrapped = false;
        break;
      }
      choice[i] = 0;
    }
    if (wrapped) break;
  }
  if (best.has_value()) {
    out.status = SolveStatus::kOptimal;
    out.objective = best_value;
    out.lower_bound = best_value;
    out.selection = MakeSelection(net, std::move(*best));
  }
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// Memory-constrained greedy baseline: start from the fastest selection and,
// while over budget, swap the largest chosen footprint for the fastest
// (transitions included) strictly smaller candidate of that layer. Layers
// already at their smallest candidate are passed over.
inline Selection solve_greedy(const Network& net, Bytes memory_budget) {
  if (memory_budget < MinimumMemorySum(net)) {
    throw Error(ErrorCode::kInfeasible, "budget is below the smallest possible footprint");
  }
  SolveOutcome fastest = solve_min_time(net);
  if (fastest.status != SolveStatus::kOptimal) {
    throw Error(ErrorCode::kInfeasible, "no unconstrained selection found");
  }
  std::vector<std::size_t> choice = fastest.selection->choice;
  while (memory_sum(net, choice) > memory_budget) {
    std::optional<std::size_t> target;
    Bytes largest = 0;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      const Bytes mine = net.candidate(i, choice[i]).memory_cost;
      const bool can_shrink =
          std::any_of(net.layer(i).candidates.begin(), net.layer(i).candidates.end(),
                      [&](const PrimitiveCandidate& c) { return c.memory_cost < mine; });
      if (can_shrink && (!target.has_value() || mine > largest)) {
        target = i;
        largest = mine;
      }
    }
    if (!target.has_value()) {
      throw Error(ErrorCode::kInfeasible, "greedy replacement cannot reach the budget");
    }
    const std::size_t i = *target;
    std::optional<std::size_t> pick;
    Duration pick_time = 0;
    std::vector<std::size_t> trial = choice;
    for (std::size_t k = 0; k < net.candidate_count(i); ++k) {
      if (net.candidate(i, k).memory_cost >= largest) continue;
      trial[i] = k;
      const Duration t = total_time(net, trial);
      if (!pick.has_value() || t < pick_time) {
        pick = k;
        pick_time = t;
      }
    }
    choice[i] = *pick;
  }
  return MakeSelection(net, std::move(choice));
}

inline Selection solve_uniform(const Network& net, std::string_view family) {
  std::vector<std::size_t> choice(net.layer_count());
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const auto& cands = net.layer(i).candidates;
    auto it = std::find_if(cands.begin(), cands.end(),
                           [&](const PrimitiveCandidate& c) { return c.id == family; });
    if (it == cands.end()) {
      throw Error(ErrorCode::kMissingFamily, "layer '" + net.layer(i).layer_id +
                                                 "' has no candidate '" + std::string(family) +
                                                 "'");
    }
    choice[i] = static_cast<std::size_t>(it - cands.begin());
  }
  return MakeSelection(net, std::move(choice));
}

// Candidate ids offered by every layer, in first-layer order.
inline std::vector<std::string> CommonFamilies(const Network& net) {
  std::vector<std::string> out;
  for (const auto& c : net.layer(0).candidates) {
    bool everywhere = true;
    for (const auto& layer : net.profile().layers) {
      everywhere = everywhere && std::any_of(layer.candidates.begin(), layer.candidates.end(),
                                             [&](const PrimitiveCandidate& o) {
                                               return o.id == c.id;
                                             });
    }
    if (everywhere) out.push_back(c.id);
  }
  return out;
}

// Fastest uniform selection whose memory sum fits, if any.
inline std::optional<Selection> BestUniform(const Network& net, Bytes memory_budget) {
  std::optional<Selection> best;
  for (const auto& family : CommonFamilies(net)) {
    Selection s = solve_uniform(net, family);
    if (s.breakdown.memory_sum > memory_budget) continue;
    if (!best.has_value() || s.breakdown.total_time < best->breakdown.total_time) {
      best = std::move(s);
    }
  }
  return best;
}

struct MethodResult {
  std::string name;
  bool feasible = false;
  std::optional<Selection> selection;
};

struct ComparisonRow {
  Bytes budget = 0;
  std::vector<MethodResult> methods;

  const MethodResult* find(std::string_view name) const {
    for (const auto& m : methods) {
      if (m.name == name) return &m;
    }
    return nullptr;
  }
};

struct ComparisonReport {
  std::string reference = "greedy";
  std::vector<ComparisonRow> rows;

  // time(reference) / time(method); nothing unless both are feasible.
  std::optional<double> speedup(const ComparisonRow& row, std::string_view method) const {
    const MethodResult* ref = row.find(reference);
    const MethodResult* other = row.find(method);
    if (ref == nullptr || other == nullptr || !ref->feasible || !other->feasible) {
      return std::nullopt;
    }
    if (method == reference) return 1.0;
    const double num = static_cast<double>(ref->selection->breakdown.total_time);
    const double den = static_cast<double>(other->selection->breakdown.total_time);
    return den == 0.0 ? std::nullopt : std::optional<double>(num / den);
  }
};

inline ComparisonReport compare(const Network& net, std::span<const Bytes> budgets,
                                std::optional<std::chrono::milliseconds> time_limit = {}) {
  ComparisonReport report;
  for (Bytes budget : budgets) {
    ComparisonRow row;
    row.budget = budget;

    MethodResult ilp{"ilp", false, std::nullopt};
    const bool binding = budget < MaximumMemorySum(net);
    SolveOutcome o = solve_min_time(net, binding ? std::optional<Bytes>(budget) : std::nullopt,
                                    MemoryMeasure::kSum, time_limit);
    if (o.selection.has_value() && o.status != SolveStatus::kInfeasible) {
      ilp.feasible = true;
      ilp.selection = std::move(o.selection);
    }
    row.methods.push_back(std::move(ilp));

    MethodResult greedy{"greedy", false, std::nullopt};
    try {
      greedy.selection = solve_greedy(net, budget);
      greedy.feasible = true;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kInfeasible) throw;
    }
    row.methods.push_back(std::move(greedy));

    MethodResult uniform{"uniform", false, BestUniform(net, budget)};
    uniform.feasible = uniform.selection.has_value();
    row.methods.push_back(std::move(uniform));

    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace primsel

#endif  // PRIMSEL_STRATEGIES_HPP_
