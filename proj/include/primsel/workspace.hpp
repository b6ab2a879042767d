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

// Layer-by-layer execution in a fixed workspace. Two activation buffers A and
// B swap input/output roles after every layer; the weights buffer is restaged
// per layer. Roles only, no addresses.

#ifndef PRIMSEL_WORKSPACE_HPP_
#define PRIMSEL_WORKSPACE_HPP_

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "primsel/core.hpp"
#include "primsel/cost.hpp"

namespace primsel {

enum class BufferSlot { kA, kB };

inline char SlotName(BufferSlot s) { return s == BufferSlot::kA ? 'A' : 'B'; }

struct PlanStep {
  std::string layer_id;
  std::size_t candidate = 0;
  std::string candidate_id;
  BufferSlot input_buffer = BufferSlot::kA;
  BufferSlot output_buffer = BufferSlot::kB;
  BufferBreakdown buffers;
  Bytes step_bytes = 0;
};

struct ExecutionPlan {
  std::vector<PlanStep> steps;
  Bytes peak_workspace = 0;
};

// Without a profiled breakdown the whole footprint is scratch.
inline BufferBreakdown EffectiveBuffers(const PrimitiveCandidate& c) {
  if (c.buffers.has_value()) return *c.buffers;
  return BufferBreakdown{0, 0, 0, c.memory_cost};
}

inline ExecutionPlan plan_execution(const Network& net, std::span<const std::size_t> choice) {
  if (!net.is_chain()) {
    throw Error(ErrorCode::kNotAChain, "buffer flipping plans need a chain of layers");
  }
  CheckSelection(net, choice);
  ExecutionPlan plan;
  BufferSlot in = BufferSlot::kA;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const auto& c = net.candidate(i, choice[i]);
    PlanStep step;
    step.layer_id = net.layer(i).layer_id;
    step.candidate = choice[i];
    step.candidate_id = c.id;
    step.input_buffer = in;
    step.output_buffer = in == BufferSlot::kA ? BufferSlot::kB : BufferSlot::kA;
    step.buffers = EffectiveBuffers(c);
    step.step_bytes = step.buffers.Total();
    plan.peak_workspace = std::max(plan.peak_workspace, step.step_bytes);
    in = step.output_buffer;
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

inline bool fits(const Network& net, std::span<const std::size_t> choice, Bytes workspace_bytes) {
  return plan_execution(net, choice).peak_workspace <= workspace_bytes;
}

}  // namespace primsel

#endif  // PRIMSEL_WORKSPACE_HPP_
