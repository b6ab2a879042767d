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


#include <gtest/gtest.h>

#include "test_support.hpp"

namespace {

using namespace primsel;
using namespace test_support;

Network Synthetic(std::size_t layers, std::size_t candidates, Topology t, std::uint64_t seed = 1) {
  GeneratorOptions g;
  g.layers = layers;
  g.candidates = candidates;
  g.topology = t;
  g.seed = seed;
  return Network::Build(GenerateProfile(g));
}

TEST(AutoGrid, EvenlySpacedWithEndpoints) {
  const Network net = Synthetic(6, 4, Topology::kChain);
  const auto grid = auto_grid(net, 5);
  ASSERT_EQ(grid.size(), 5u);
  EXPECT_EQ(grid.front(), MinimumMemorySum(net));
  EXPECT_EQ(grid.back(), MaximumMemorySum(net));
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  EXPECT_EQ(auto_grid(net, 1), (std::vector<Bytes>{MaximumMemorySum(net)}));
  EXPECT_TRUE(auto_grid(net, 0).empty());
}

TEST(Sweep, TimeNeverRisesWithBudget) {
  const Network net = Synthetic(10, 5, Topology::kForkJoin);
  const auto grid = auto_grid(net, 12);
  const auto points = sweep_memory_budget(net, grid);
  ASSERT_EQ(points.size(), grid.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_EQ(points[i].budget, grid[i]);
    ASSERT_EQ(points[i].status, SolveStatus::kOptimal);
    EXPECT_LE(points[i].achieved_memory, points[i].budget);
    if (i > 0) EXPECT_LE(points[i].achieved_time, points[i - 1].achieved_time);
  }
}

TEST(Sweep, InfeasibleBudgetsAreReported) {
  const Network net = Synthetic(5, 3, Topology::kChain);
  const Bytes lo = MinimumMemorySum(net);
  const std::vector<Bytes> budgets = {lo + 10, 0, lo - 1};
  const auto points = sweep_memory_budget(net, budgets);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[0].budget, 0u);
  EXPECT_EQ(points[0].status, SolveStatus::kInfeasible);
  EXPECT_FALSE(points[1].selection.has_value());
  EXPECT_EQ(points[2].status, SolveStatus::kOptimal);
  EXPECT_THROW(sweep_memory_budget(net, std::vector<Bytes>{}), Error);
}

TEST(Sweep, HugeBudgetGivesTheFastestSelection) {
  const Network net = Synthetic(8, 4, Topology::kChain);
  const auto points = sweep_memory_budget(net, std::vector<Bytes>{~Bytes{0}});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].achieved_time, *solve_min_time(net).objective);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const Network net = Synthetic(12, 6, Topology::kForkJoin, 4);
  const auto grid = auto_grid(net, 9);
  SweepOptions one;
  SweepOptions four;
  four.threads = 4;
  const auto a = sweep_memory_budget(net, grid, one);
  const auto b = sweep_memory_budget(net, grid, four);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].selection, b[i].selection);
    EXPECT_EQ(a[i].status, b[i].status);
  }
  EXPECT_EQ(WriteFrontier(net, a).csv, WriteFrontier(net, b).csv);
}

TEST(Sweep, WorkspaceModeUsesThePeakLayer) {
  const Network net = Synthetic(6, 4, Topology::kChain);
  SweepOptions opts;
  opts.workspace = true;
  const auto grid = auto_grid(net, 6, true);
  for (const auto& p : sweep_memory_budget(net, grid, opts)) {
    ASSERT_TRUE(p.selection.has_value());
    EXPECT_EQ(p.achieved_memory, p.selection->breakdown.workspace_max);
    EXPECT_LE(p.achieved_memory, p.budget);
  }
}

TEST(Frontier, StrictlyDecreasingWithExactEndpoints) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Network net = Synthetic(10, 6, seed == 2 ? Topology::kForkJoin : Topology::kChain, seed);
    const auto points = sweep_memory_budget(net, auto_grid(net, 15));
    const auto front = extract_frontier(points);
    ASSERT_FALSE(front.empty());
    for (std::size_t i = 1; i < front.size(); ++i) {
      EXPECT_GT(front[i].achieved_memory, front[i - 1].achieved_memory);
      EXPECT_LT(front[i].achieved_time, front[i - 1].achieved_time);
    }
    EXPECT_EQ(front.back().achieved_time, *solve_min_time(net).objective);
    const SolveOutcome smallest = solve_min_memory(net);
    EXPECT_EQ(front.front().achieved_memory, *smallest.objective);
    EXPECT_EQ(front.front().achieved_time, *solve_min_time(net, *smallest.objective).objective);
  }
}

TEST(Frontier, DropsDominatedAndUnsolvedPoints) {
  std::vector<FrontierPoint> pts(4);
  pts[0] = {10, SolveStatus::kOptimal, Selection{}, 50, 7};
  pts[1] = {20, SolveStatus::kOptimal, Selection{}, 50, 7};
  pts[2] = {30, SolveStatus::kOptimal, Selection{}, 60, 9};
  pts[3] = {5, SolveStatus::kInfeasible, std::nullopt, 0, 0};
  const auto front = extract_frontier(pts);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].budget, 10u);
}

}  // namespace
