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

#include <numeric>

#include "test_support.hpp"

namespace {

using namespace primsel;
using test_support::RandomOptions;
using test_support::RandomProfile;

PrimitiveCandidate Cand(std::string id, std::string in, std::string out, Duration t = 1,
                        Bytes m = 1) {
  PrimitiveCandidate c;
  c.id = std::move(id);
  c.time_cost = t;
  c.memory_cost = m;
  c.input_layout.name = std::move(in);
  c.output_layout.name = std::move(out);
  return c;
}

LayerProfile Layer(std::string id, std::vector<PrimitiveCandidate> cands) {
  return LayerProfile{std::move(id), std::move(cands)};
}

bool HasViolation(const std::vector<Violation>& vs, std::string_view prefix) {
  for (const auto& v : vs) {
    if (v.message.starts_with(prefix)) return true;
  }
  return false;
}

TEST(ValidateProfile, MinimalProfileIsClean) {
  NetworkProfile p{"one", {Layer("a", {Cand("x", "CHW", "CHW")})}, {}, {}};
  EXPECT_TRUE(validate_profile(p).empty());
}

TEST(ValidateProfile, MatrixDimensionMismatch) {
  auto three = [](std::string id) {
    return Layer(std::move(id), {Cand("p", "CHW", "CHW"), Cand("q", "HWC", "HWC"),
                                 Cand("r", "CHW", "HWC")});
  };
  NetworkProfile p{"n", {three("a"), three("b")}, {}, {}};
  p.edges.push_back({"a", "b", TransitionMatrix(3, 2)});
  const auto vs = validate_profile(p);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_TRUE(vs[0].message.starts_with("dimension mismatch"));
  EXPECT_NE(vs[0].where.find("a->b"), std::string::npos);
}

TEST(ValidateProfile, IdentityTransformMustBeFree) {
  NetworkProfile p{"n",
                   {Layer("a", {Cand("p", "CHW", "CHW")}), Layer("b", {Cand("q", "CHW", "CHW")})},
                   {},
                   {}};
  p.edges.push_back({"a", "b", TransitionMatrix::FromRows({{4}})});
  EXPECT_TRUE(HasViolation(validate_profile(p), "identity transform must cost 0"));
}

TEST(ValidateProfile, StructuralProblemsAreReported) {
  NetworkProfile p{"n",
                   {Layer("a", {Cand("p", "CHW", "CHW"), Cand("p", "CHW", "CHW")}),
                    Layer("a", {}), Layer("c", {Cand("q", "CHW", "CHW")})},
                   {},
                   {}};
  p.edges.push_back({"c", "a", std::nullopt});
  p.edges.push_back({"a", "zzz", std::nullopt});
  const auto vs = validate_profile(p);
  EXPECT_TRUE(HasViolation(vs, "duplicate layer id"));
  EXPECT_TRUE(HasViolation(vs, "duplicate candidate id"));
  EXPECT_TRUE(HasViolation(vs, "layer has no candidates"));
  EXPECT_TRUE(HasViolation(vs, "edge must point forward"));
  EXPECT_TRUE(HasViolation(vs, "edge references unknown layer"));
}

TEST(ValidateProfile, BufferBreakdownMustSum) {
  auto c = Cand("p", "CHW", "CHW", 1, 10);
  c.buffers = BufferBreakdown{1, 2, 3, 5};
  NetworkProfile p{"n", {Layer("a", {c})}, {}, {}};
  EXPECT_TRUE(HasViolation(validate_profile(p), "buffer breakdown does not sum"));
  p.layers[0].candidates[0].buffers->scratch = 4;
  EXPECT_TRUE(validate_profile(p).empty());
}

TEST(ValidateProfile, MissingTransformIsAViolation) {
  NetworkProfile p{"n",
                   {Layer("a", {Cand("p", "CHW", "CHW")}), Layer("b", {Cand("q", "HWC", "HWC")})},
                   {{"a", "b", std::nullopt}},
                   {}};
  EXPECT_TRUE(HasViolation(validate_profile(p), "cannot derive transition matrix"));
  EXPECT_THROW(Network::Build(p), Error);
}

TEST(DeriveTransitionMatrix, AllSameLayoutIsZero) {
  const auto a = Layer("a", {Cand("p", "CHW", "CHW"), Cand("q", "CHW", "CHW")});
  const auto b = Layer("b", {Cand("r", "CHW", "CHW"), Cand("s", "CHW", "CHW")});
  const auto m = derive_transition_matrix(a, b, {});
  EXPECT_EQ(m, TransitionMatrix(2, 2, 0));
}

TEST(DeriveTransitionMatrix, SingleLookup) {
  const auto a = Layer("a", {Cand("p", "CHW", "CHW")});
  const auto b = Layer("b", {Cand("r", "CHW", "CHW"), Cand("s", "HWC", "HWC")});
  const std::vector<LayoutTransform> table = {{{"CHW"}, {"HWC"}, std::nullopt, 7}};
  EXPECT_EQ(derive_transition_matrix(a, b, table).ToRows(),
            (std::vector<std::vector<Duration>>{{0, 7}}));
}

TEST(DeriveTransitionMatrix, MixedLayoutsTwoByTwo) {
  const auto a = Layer("a", {Cand("p", "CHW", "CHW"), Cand("q", "HWC", "HWC")});
  const auto b = Layer("b", {Cand("r", "CHW", "CHW"), Cand("s", "HWC", "HWC")});
  const std::vector<LayoutTransform> table = {{{"CHW"}, {"HWC"}, std::nullopt, 7},
                                              {{"HWC"}, {"CHW"}, std::nullopt, 5}};
  EXPECT_EQ(derive_transition_matrix(a, b, table).ToRows(),
            (std::vector<std::vector<Duration>>{{0, 7}, {5, 0}}));
}

TEST(DeriveTransitionMatrix, MissingPairThrows) {
  const auto a = Layer("a", {Cand("p", "CHW", "CHW")});
  const auto b = Layer("b", {Cand("s", "HWC", "HWC")});
  try {
    derive_transition_matrix(a, b, {});
    FAIL() << "expected MissingTransformCost";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTransformCost);
    EXPECT_NE(std::string(e.what()).find("CHW -> HWC"), std::string::npos);
  }
}

TEST(DeriveTransitionMatrix, LayerSpecificEntryWins) {
  const auto a = Layer("a", {Cand("p", "CHW", "CHW")});
  const auto b = Layer("b", {Cand("s", "HWC", "HWC")});
  const auto c = Layer("c", {Cand("t", "HWC", "HWC")});
  const std::vector<LayoutTransform> table = {{{"CHW"}, {"HWC"}, std::nullopt, 7},
                                              {{"CHW"}, {"HWC"}, std::string("b"), 11}};
  EXPECT_EQ(derive_transition_matrix(a, b, table).at(0, 0), 11u);
  EXPECT_EQ(derive_transition_matrix(a, c, table).at(0, 0), 7u);
}

TEST(DeriveTransitionMatrix, PermutingCandidatesPermutesMatrix) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    RandomOptions o;
    o.layers = 2;
    o.min_candidates = 2;
    o.max_candidates = 5;
    o.explicit_matrices = false;
    NetworkProfile p = RandomProfile(rng, o);
    const auto base = derive_transition_matrix(p.layers[0], p.layers[1], p.layout_transforms);

    std::vector<std::size_t> pr(p.layers[0].candidates.size());
    std::vector<std::size_t> pc(p.layers[1].candidates.size());
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    std::shuffle(pr.begin(), pr.end(), rng);
    std::shuffle(pc.begin(), pc.end(), rng);
    LayerProfile a = p.layers[0];
    LayerProfile b = p.layers[1];
    for (std::size_t j = 0; j < pr.size(); ++j) a.candidates[j] = p.layers[0].candidates[pr[j]];
    for (std::size_t k = 0; k < pc.size(); ++k) b.candidates[k] = p.layers[1].candidates[pc[k]];
    const auto permuted = derive_transition_matrix(a, b, p.layout_transforms);
    for (std::size_t j = 0; j < pr.size(); ++j) {
      for (std::size_t k = 0; k < pc.size(); ++k) {
        EXPECT_EQ(permuted.at(j, k), base.at(pr[j], pc[k]));
      }
    }
  }
}

TEST(Network, ExplicitMatrixOverridesDerived) {
  NetworkProfile p{"n",
                   {Layer("a", {Cand("p", "CHW", "CHW")}), Layer("b", {Cand("s", "HWC", "HWC")})},
                   {{"a", "b", TransitionMatrix::FromRows({{3}})}},
                   {{{"CHW"}, {"HWC"}, std::nullopt, 7}}};
  const Network net = Network::Build(p);
  ASSERT_EQ(net.edges().size(), 1u);
  EXPECT_EQ(net.edges()[0].matrix.at(0, 0), 3u);
}

TEST(Network, BuildRejectsInvalidProfile) {
  NetworkProfile p;
  try {
    Network::Build(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidProfile);
  }
}

TEST(Network, ChainDetection) {
  std::mt19937_64 rng(3);
  RandomOptions o;
  o.layers = 5;
  EXPECT_TRUE(Network::Build(RandomProfile(rng, o)).is_chain());
  o.shape = test_support::Shape::kForkJoin;
  EXPECT_FALSE(Network::Build(RandomProfile(rng, o)).is_chain());
}

TEST(Network, AssignmentCountSaturatesAtCap) {
  std::mt19937_64 rng(5);
  RandomOptions o;
  o.layers = 30;
  o.min_candidates = 4;
  const Network net = Network::Build(RandomProfile(rng, o));
  EXPECT_GT(net.assignment_count(1000), 1000u);
}

TEST(CheckedArithmetic, OverflowThrows) {
  EXPECT_THROW(CheckedAdd(~0ull, 1), Error);
  EXPECT_THROW(CheckedMul(1ull << 40, 1ull << 40), Error);
  EXPECT_EQ(CheckedMul(3, 4), 12u);
}

}  // namespace
