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

// Solver-independent evaluation of a concrete selection. Every accumulation
// is checked; overflow throws instead of wrapping.

#ifndef PRIMSEL_COST_HPP_
#define PRIMSEL_COST_HPP_

#include <algorithm>
#include <span>
#include <string>

#include "primsel/core.hpp"

namespace primsel {

inline void CheckSelection(const Network& net, std::span<const std::size_t> choice) {
  if (choice.size() != net.layer_count()) {
    throw Error(ErrorCode::kInvalidSelection,
                "selection covers " + std::to_string(choice.size()) + " layers, network has " +
                    std::to_string(net.layer_count()));
  }
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (choice[i] >= net.candidate_count(i)) {
      throw Error(ErrorCode::kInvalidSelection,
                  "candidate index " + std::to_string(choice[i]) + " out of range for layer '" +
                      net.layer(i).layer_id + "'");
    }
  }
}

inline Duration exec_time(const Network& net, std::span<const std::size_t> choice) {
  CheckSelection(net, choice);
  Duration total = 0;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    total = CheckedAdd(total, net.candidate(i, choice[i]).time_cost);
  }
  return total;
}

// Summed over every DAG edge, so forks and joins each pay their own transform.
inline Duration transform_time(const Network& net, std::span<const std::size_t> choice) {
  CheckSelection(net, choice);
  Duration total = 0;
  for (const auto& e : net.edges()) {
    total = CheckedAdd(total, e.matrix.at(choice[e.from], choice[e.to]));
  }
  return total;
}

inline Duration total_time(const Network& net, std::span<const std::size_t> choice) {
  return CheckedAdd(exec_time(net, choice), transform_time(net, choice));
}

inline Bytes memory_sum(const Network& net, std::span<const std::size_t> choice) {
  CheckSelection(net, choice);
  Bytes total = 0;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    total = CheckedAdd(total, net.candidate(i, choice[i]).memory_cost);
  }
  return total;
}

inline Bytes workspace_max(const Network& net, std::span<const std::size_t> choice) {
  CheckSelection(net, choice);
  Bytes peak = 0;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    peak = std::max(peak, net.candidate(i, choice[i]).memory_cost);
  }
  return peak;
}

inline ObjectiveBreakdown evaluate(const Network& net, std::span<const std::size_t> choice) {
  ObjectiveBreakdown b;
  b.exec_time = exec_time(net, choice);
  b.transform_time = transform_time(net, choice);
  b.total_time = CheckedAdd(b.exec_time, b.transform_time);
  b.memory_sum = memory_sum(net, choice);
  b.workspace_max = workspace_max(net, choice);
  return b;
}

inline Selection MakeSelection(const Network& net, std::vector<std::size_t> choice) {
  Selection s;
  s.breakdown = evaluate(net, choice);
  s.choice = std::move(choice);
  return s;
}

}  // namespace primsel

#endif  // PRIMSEL_COST_HPP_
