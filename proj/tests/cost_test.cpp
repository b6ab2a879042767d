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

PrimitiveCandidate Cand(Duration t, Bytes m, std::string layout = "CHW") {
  PrimitiveCandidate c;
  c.id = "c" + std::to_string(t) + "_" + std::to_string(m) + layout;
  c.time_cost = t;
  c.memory_cost = m;
  c.input_layout.name = layout;
  c.output_layout.name = layout;
  return c;
}

// One candidate per layer; times and memories given per layer.
Network Straight(const std::vector<std::pair<Duration, Bytes>>& layers) {
  NetworkProfile p;
  p.name = "straight";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    p.layers.push_back({"L" + std::to_string(i), {Cand(layers[i].first, layers[i].second)}});
    if (i > 0) p.edges.push_back({"L" + std::to_string(i - 1), "L" + std::to_string(i), {}});
  }
  return Network::Build(p);
}

TEST(ExecTime, HandSums) {
  EXPECT_EQ(exec_time(Straight({{5, 1}}), std::vector<std::size_t>{0}), 5u);
  EXPECT_EQ(exec_time(Straight({{5, 1}, {10, 1}, {2, 1}}), std::vector<std::size_t>{0, 0, 0}), 17u);
}

TEST(TransformTime, ChainLookup) {
  NetworkProfile p;
  p.name = "two";
  p.layers.push_back({"a", {Cand(1, 1, "CHW"), Cand(1, 1, "HWC")}});
  p.layers.push_back({"b", {Cand(1, 1, "CHW"), Cand(1, 1, "HWC")}});
  p.edges.push_back({"a", "b", TransitionMatrix::FromRows({{0, 7}, {5, 0}})});
  const Network net = Network::Build(p);
  EXPECT_EQ(transform_time(net, std::vector<std::size_t>{0, 1}), 7u);
  EXPECT_EQ(transform_time(net, std::vector<std::size_t>{1, 0}), 5u);
  EXPECT_EQ(transform_time(net, std::vector<std::size_t>{1, 1}), 0u);
}

TEST(TransformTime, ForkSumsBothEdges) {
  NetworkProfile p;
  p.name = "fork";
  p.layers.push_back({"A", {Cand(1, 1, "CHW")}});
  p.layers.push_back({"B", {Cand(1, 1, "HWC")}});
  p.layers.push_back({"C", {Cand(1, 1, "HWC")}});
  p.edges.push_back({"A", "B", TransitionMatrix::FromRows({{3}})});
  p.edges.push_back({"A", "C", TransitionMatrix::FromRows({{3}})});
  EXPECT_EQ(transform_time(Network::Build(p), std::vector<std::size_t>{0, 0, 0}), 6u);
}

TEST(TransformTime, ZeroMatricesGiveZero) {
  EXPECT_EQ(transform_time(Straight({{1, 1}, {2, 2}, {3, 3}}), std::vector<std::size_t>{0, 0, 0}),
            0u);
}

TEST(TotalTime, ExecPlusTransform) {
  NetworkProfile p;
  p.name = "chain";
  p.layers.push_back({"a", {Cand(5, 1, "CHW"), Cand(9, 1, "HWC")}});
  p.layers.push_back({"b", {Cand(3, 1, "CHW"), Cand(10, 1, "HWC")}});
  p.layers.push_back({"c", {Cand(2, 1, "HWC")}});
  p.edges.push_back({"a", "b", TransitionMatrix::FromRows({{0, 7}, {5, 0}})});
  p.edges.push_back({"b", "c", TransitionMatrix::FromRows({{0}, {0}})});
  const Network net = Network::Build(p);
  const std::vector<std::size_t> pick = {0, 1, 0};
  EXPECT_EQ(exec_time(net, pick), 17u);
  EXPECT_EQ(transform_time(net, pick), 7u);
  EXPECT_EQ(total_time(net, pick), 24u);
  EXPECT_EQ(total_time(Straight({{5, 1}}), std::vector<std::size_t>{0}), 5u);
}

TEST(Memory, SumAndMax) {
  const Network net = Straight({{1, 100}, {1, 50}, {1, 25}});
  const std::vector<std::size_t> pick = {0, 0, 0};
  EXPECT_EQ(memory_sum(net, pick), 175u);
  EXPECT_EQ(workspace_max(net, pick), 100u);
  EXPECT_EQ(memory_sum(Straight({{1, 100}}), std::vector<std::size_t>{0}), 100u);
  EXPECT_EQ(workspace_max(Straight({{1, 64}, {1, 64}, {1, 64}}), pick), 64u);
}

TEST(CheckSelection, RejectsBadIndicesAndLengths) {
  const Network net = Straight({{1, 1}, {1, 1}});
  EXPECT_THROW(exec_time(net, std::vector<std::size_t>{0}), Error);
  try {
    evaluate(net, std::vector<std::size_t>{0, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSelection);
  }
}

TEST(Evaluate, OverflowIsAnError) {
  const Network net = Straight({{~0ull - 1, 1}, {5, 1}});
  EXPECT_THROW(exec_time(net, std::vector<std::size_t>{0, 0}), Error);
}

class RandomProfiles : public ::testing::TestWithParam<Shape> {};

TEST_P(RandomProfiles, MatchNaiveOracles) {
  std::mt19937_64 rng(1234 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 200; ++trial) {
    RandomOptions o;
    o.layers = 8;
    o.shape = GetParam();
    o.max_time = 1'000'000;
    o.max_memory = 1'000'000'000;
    const NetworkProfile p = RandomProfile(rng, o);
    const Network net = Network::Build(p);
    const auto c = RandomChoice(rng, p);
    const ObjectiveBreakdown b = evaluate(net, c);
    EXPECT_EQ(b.exec_time, NaiveExec(p, c));
    EXPECT_EQ(b.transform_time, NaiveTransform(p, c));
    EXPECT_EQ(b.total_time, b.exec_time + b.transform_time);
    EXPECT_EQ(b.memory_sum, NaiveMemorySum(p, c));
    EXPECT_EQ(b.workspace_max, NaiveMemoryMax(p, c));
    EXPECT_LE(b.workspace_max, b.memory_sum);
  }
}

TEST_P(RandomProfiles, SlowerCandidateNeverLowersTotalTime) {
  std::mt19937_64 rng(99 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 200; ++trial) {
    RandomOptions o;
    o.layers = 6;
    o.shape = GetParam();
    NetworkProfile p = RandomProfile(rng, o);
    const auto c = RandomChoice(rng, p);
    const Duration before = total_time(Network::Build(p), c);
    const std::size_t i = Draw(rng, 0, p.layers.size() - 1);
    p.layers[i].candidates[c[i]].time_cost += 1 + Draw(rng, 0, 50);
    EXPECT_GT(total_time(Network::Build(p), c), before);
  }
}

TEST_P(RandomProfiles, MatchingLayoutsCostNothing) {
  std::mt19937_64 rng(7 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 100; ++trial) {
    RandomOptions o;
    o.layers = 6;
    o.shape = GetParam();
    o.explicit_matrices = false;
    NetworkProfile p = RandomProfile(rng, o);
    for (auto& l : p.layers) {
      for (auto& c : l.candidates) c.input_layout = c.output_layout = DataLayout{"HWC"};
    }
    const auto c = RandomChoice(rng, p);
    EXPECT_EQ(transform_time(Network::Build(p), c), 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, RandomProfiles,
                         ::testing::Values(Shape::kChain, Shape::kForkJoin, Shape::kRandomDag));

}  // namespace
