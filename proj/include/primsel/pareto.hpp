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

// Time/memory trade-off curves: one min-time solve per memory budget.

#ifndef PRIMSEL_PARETO_HPP_
#define PRIMSEL_PARETO_HPP_

#include <algorithm>
#include <chrono>
#include <future>
#include <optional>
#include <span>
#include <vector>

#include "primsel/strategies.hpp"

namespace primsel {

struct FrontierPoint {
  Bytes budget = 0;
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<Selection> selection;
  // Achieved values of `selection`; memory is the sum, or the largest layer
  // in workspace mode.
  Bytes achieved_memory = 0;
  Duration achieved_time = 0;
};

struct SweepOptions {
  bool workspace = false;
  unsigned threads = 1;
  std::optional<std::chrono::milliseconds> time_limit;
};

inline Bytes MaximumPeakLayer(const Network& net) {
  Bytes hi = 0;
  for (const auto& layer : net.profile().layers) {
    for (const auto& c : layer.candidates) hi = std::max(hi, c.memory_cost);
  }
  return hi;
}

// A budget no selection can exceed is solved as unconstrained, so the grid
// may contain arbitrarily large values.
inline FrontierPoint SolveBudget(const Network& net, Bytes budget, const SweepOptions& opts) {
  FrontierPoint p;
  p.budget = budget;
  const Bytes ceiling = opts.workspace ? MaximumPeakLayer(net) : MaximumMemorySum(net);
  SolveOutcome o = solve_min_time(
      net, budget >= ceiling ? std::nullopt : std::optional<Bytes>(budget),
      opts.workspace ? MemoryMeasure::kPeakLayer : MemoryMeasure::kSum, opts.time_limit);
  p.status = o.status;
  if (o.selection.has_value()) {
    p.achieved_memory =
        opts.workspace ? o.selection->breakdown.workspace_max : o.selection->breakdown.memory_sum;
    p.achieved_time = o.selection->breakdown.total_time;
    p.selection = std::move(o.selection);
  }
  return p;
}

// Points come back sorted by budget whatever the thread count.
inline std::vector<FrontierPoint> sweep_memory_budget(const Network& net,
                                                      std::span<const Bytes> budgets,
                                                      const SweepOptions& opts = {}) {
  if (budgets.empty()) throw Error(ErrorCode::kInvalidRequest, "empty budget list");
  std::vector<Bytes> sorted(budgets.begin(), budgets.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<FrontierPoint> points(sorted.size());
  const std::size_t workers = std::max<std::size_t>(1, opts.threads);
  for (std::size_t base = 0; base < sorted.size(); base += workers) {
    const std::size_t end = std::min(sorted.size(), base + workers);
    if (workers == 1) {
      points[base] = SolveBudget(net, sorted[base], opts);
      continue;
    }
    std::vector<std::future<FrontierPoint>> jobs;
    for (std::size_t i = base; i < end; ++i) {
      jobs.push_back(std::async(std::launch::async, SolveBudget, std::cref(net), sorted[i],
                                std::cref(opts)));
    }
    for (std::size_t i = base; i < end; ++i) points[i] = jobs[i - base].get();
  }
  return points;
}

// Non-dominated points by achieved (memory, time), memory ascending. Time is
// strictly decreasing along the result.
inline std::vector<FrontierPoint> extract_frontier(std::span<const FrontierPoint> points) {
  std::vector<FrontierPoint> solved;
  for (const auto& p : points) {
    if (p.selection.has_value()) solved.push_back(p);
  }
  std::stable_sort(solved.begin(), solved.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.achieved_memory != b.achieved_memory) return a.achieved_memory < b.achieved_memory;
    return a.achieved_time < b.achieved_time;
  });
  std::vector<FrontierPoint> out;
  for (auto& p : solved) {
    if (out.empty() || p.achieved_time < out.back().achieved_time) out.push_back(std::move(p));
  }
  return out;
}

// `k` evenly spaced budgets over the reachable memory range, both ends included.
inline std::vector<Bytes> auto_grid(const Network& net, std::size_t k, bool workspace = false) {
  if (k == 0) return {};
  Bytes lo = 0;
  Bytes hi = 0;
  if (workspace) {
    for (const auto& layer : net.profile().layers) {
      Bytes lowest = layer.candidates.front().memory_cost;
      for (const auto& c : layer.candidates) {
        lowest = std::min(lowest, c.memory_cost);
        hi = std::max(hi, c.memory_cost);
      }
      lo = std::max(lo, lowest);
    }
  } else {
    lo = MinimumMemorySum(net);
    hi = MaximumMemorySum(net);
  }
  if (k == 1) return {hi};
  std::vector<Bytes> out;
  for (std::size_t i = 0; i < k; ++i) {
    const unsigned __int128 step = static_cast<unsigned __int128>(hi - lo) * i / (k - 1);
    out.push_back(lo + static_cast<Bytes>(step));
  }
  return out;
}

}  // namespace primsel

#endif  // PRIMSEL_PARETO_HPP_
