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

#include <sstream>

#include "test_support.hpp"

namespace {

using namespace primsel;
using namespace test_support;

Network Synthetic(std::size_t layers, std::size_t candidates, Topology t) {
  GeneratorOptions o;
  o.layers = layers;
  o.candidates = candidates;
  o.topology = t;
  return Network::Build(GenerateProfile(o));
}

TEST(BuildProblem, AlexNetSizedHas456PrimaryVariables) {
  const Network net = Synthetic(8, 57, Topology::kChain);
  EXPECT_EQ(build_problem(net, {}).primary_var_count(), 456u);
}

TEST(BuildProblem, GoogleNetSizedHas3990PrimaryVariables) {
  const Network net = Synthetic(70, 57, Topology::kForkJoin);
  EXPECT_EQ(build_problem(net, {}).primary_var_count(), 3990u);
}

TEST(BuildProblem, SingleLayerSingleCandidate) {
  NetworkProfile p;
  p.name = "one";
  p.layers.push_back({"a", {{"x", 3, 4, {"CHW"}, {"CHW"}, std::nullopt}}});
  const Network net = Network::Build(p);
  const IlpProblem ilp = build_problem(net, {});
  EXPECT_EQ(ilp.num_vars(), 1u);
  EXPECT_EQ(ilp.product_var_count(), 0u);
  ASSERT_EQ(ilp.constraints.size(), 1u);
  EXPECT_EQ(ilp.constraints[0].role, RowRole::kOneHot);
  EXPECT_EQ(ilp.constraints[0].relation, Relation::kEqual);
  EXPECT_EQ(ilp.constraints[0].rhs, 1);
}

TEST(BuildProblem, RejectsBudgetOnWrongSide) {
  const Network net = Synthetic(3, 2, Topology::kChain);
  SolveRequest r;
  r.mode = SolveMode::kMinTime;
  r.time_budget = 5;
  EXPECT_THROW(build_problem(net, r), Error);
  r = {};
  r.mode = SolveMode::kMinWorkspace;
  r.memory_budget = 5;
  EXPECT_THROW(build_problem(net, r), Error);
}

// Structural invariants on random instances in every mode.
TEST(BuildProblem, StructureMatchesNetwork) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    RandomOptions o;
    o.layers = 5;
    o.shape = static_cast<Shape>(trial % 3);
    const NetworkProfile prof = RandomProfile(rng, o);
    const Network net = Network::Build(prof);
    for (const SolveRequest& req : RequestsFor(net, rng)) {
      const IlpProblem p = build_problem(net, req);

      std::size_t primaries = 0;
      for (std::size_t i = 0; i < net.layer_count(); ++i) primaries += net.candidate_count(i);
      EXPECT_EQ(p.primary_var_count(), primaries);

      std::size_t nonzero = 0;
      for (const auto& e : net.edges()) {
        for (std::size_t j = 0; j < e.matrix.rows(); ++j) {
          for (std::size_t k = 0; k < e.matrix.cols(); ++k) nonzero += e.matrix.at(j, k) != 0;
        }
      }
      EXPECT_EQ(p.product_var_count(), nonzero);

      // Each primary variable sits in exactly one one-hot row.
      std::vector<int> onehot(p.num_vars(), 0);
      std::size_t links = 0;
      for (const auto& row : p.constraints) {
        if (row.role == RowRole::kOneHot) {
          for (const auto& t : row.terms) ++onehot[t.var];
        }
        if (row.role == RowRole::kProductLink) ++links;
      }
      for (std::size_t v = 0; v < p.num_vars(); ++v) {
        EXPECT_EQ(onehot[v], p.vars[v].kind == VarKind::kChoice ? 1 : 0);
      }
      EXPECT_EQ(links, nonzero);
      EXPECT_EQ(p.workspace_var.has_value(), req.mode == SolveMode::kMinWorkspace);
    }
  }
}

TEST(Linearization, EndpointCases) {
  NetworkProfile p;
  p.name = "pair";
  p.layers.push_back({"a", {{"x", 1, 1, {"CHW"}, {"CHW"}, {}}, {"y", 1, 1, {"HWC"}, {"HWC"}, {}}}});
  p.layers.push_back({"b", {{"x", 1, 1, {"CHW"}, {"CHW"}, {}}, {"y", 1, 1, {"HWC"}, {"HWC"}, {}}}});
  p.edges.push_back({"a", "b", TransitionMatrix::FromRows({{0, 7}, {5, 0}})});
  const Network net = Network::Build(p);
  const IlpProblem ilp = build_problem(net, {});
  EXPECT_EQ(linearized_transition_value(ilp, std::vector<std::size_t>{0, 1}), 7u);
  EXPECT_EQ(linearized_transition_value(ilp, std::vector<std::size_t>{1, 0}), 5u);
  EXPECT_EQ(linearized_transition_value(ilp, std::vector<std::size_t>{0, 0}), 0u);

  const auto x = CompleteAssignment(ilp, std::vector<std::size_t>{0, 1});
  for (std::size_t v = 0; v < ilp.num_vars(); ++v) {
    const VarMeta& m = ilp.vars[v];
    if (m.kind != VarKind::kProduct) continue;
    EXPECT_EQ(x[v], m.from_candidate == 0 && m.to_candidate == 1 ? 1 : 0);
  }
}

TEST(Linearization, MatchesTransformTimeOnRandomAssignments) {
  std::mt19937_64 rng(2024);
  int trials = 0;
  while (trials < 1000) {
    RandomOptions o;
    o.layers = 1 + Draw(rng, 0, 7);
    o.shape = static_cast<Shape>(Draw(rng, 0, 2));
    const NetworkProfile prof = RandomProfile(rng, o);
    const Network net = Network::Build(prof);
    const IlpProblem ilp = build_problem(net, {});
    for (int k = 0; k < 10; ++k, ++trials) {
      const auto c = RandomChoice(rng, prof);
      ASSERT_EQ(linearized_transition_value(ilp, c), transform_time(net, c));
    }
  }
}

TEST(CompleteAssignment, FeasibleAndObjectiveMatchesEvaluation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    RandomOptions o;
    o.layers = 5;
    o.shape = static_cast<Shape>(trial % 3);
    const NetworkProfile prof = RandomProfile(rng, o);
    const Network net = Network::Build(prof);
    const auto c = RandomChoice(rng, prof);
    const auto b = evaluate(net, c);

    SolveRequest req;
    const IlpProblem time_ilp = build_problem(net, req);
    const auto x = CompleteAssignment(time_ilp, c);
    EXPECT_TRUE(IsFeasible(time_ilp, x));
    EXPECT_EQ(static_cast<std::uint64_t>(ObjectiveValue(time_ilp, x)), b.total_time);

    req.mode = SolveMode::kMinMemorySum;
    const IlpProblem mem_ilp = build_problem(net, req);
    EXPECT_EQ(static_cast<std::uint64_t>(ObjectiveValue(mem_ilp, CompleteAssignment(mem_ilp, c))),
              b.memory_sum);

    req.mode = SolveMode::kMinWorkspace;
    req.time_budget = b.total_time;
    const IlpProblem ws_ilp = build_problem(net, req);
    const auto xw = CompleteAssignment(ws_ilp, c);
    EXPECT_TRUE(IsFeasible(ws_ilp, xw));
    EXPECT_EQ(static_cast<std::uint64_t>(ObjectiveValue(ws_ilp, xw)), b.workspace_max);
    req.time_budget = b.total_time == 0 ? 0 : b.total_time - 1;
    if (b.total_time > 0) {
      const IlpProblem tight = build_problem(net, req);
      EXPECT_FALSE(IsFeasible(tight, CompleteAssignment(tight, c)));
    }
  }
}

TEST(WriteLp, ContainsAllSections) {
  const Network net = Synthetic(3, 2, Topology::kChain);
  SolveRequest req;
  req.memory_budget = 1'000'000'000;
  std::ostringstream out;
  WriteLp(build_problem(net, req), out);
  const std::string lp = out.str();
  for (const char* token : {"Minimize", "Subject To", "Bounds", "Binaries", "End", "x_0_0"}) {
    EXPECT_NE(lp.find(token), std::string::npos) << token;
  }
  EXPECT_NE(lp.find("<= 1000000000"), std::string::npos);
}

}  // namespace
