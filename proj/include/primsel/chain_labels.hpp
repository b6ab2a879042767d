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

// Resource-constrained shortest path over a chain of layers. Works straight
// from the network, not from the ILP, so it can cross-check the
// branch-and-bound solver.

#ifndef PRIMSEL_CHAIN_LABELS_HPP_
#define PRIMSEL_CHAIN_LABELS_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "primsel/core.hpp"
#include "primsel/cost.hpp"
#include "primsel/ilp_problem.hpp"

namespace primsel {

namespace chain_internal {

// One partial path ending at a given (layer, candidate).
struct Label {
  Duration time = 0;
  Bytes memory = 0;  // sum or running max, depending on the request
  std::uint32_t prev_candidate = 0;
  std::uint32_t prev_label = 0;
};

// Keeps only labels not dominated in (time, memory). Ties keep the earlier.
inline void Prune(std::vector<Label>& labels) {
  std::stable_sort(labels.begin(), labels.end(), [](const Label& a, const Label& b) {
    return a.time != b.time ? a.time < b.time : a.memory < b.memory;
  });
  std::vector<Label> kept;
  for (const Label& l : labels) {
    if (kept.empty() || l.memory < kept.back().memory) kept.push_back(l);
  }
  labels = std::move(kept);
}

}  // namespace chain_internal

inline SolveOutcome solve_chain_labels(const Network& net, const SolveRequest& request) {
  using chain_internal::Label;
  validate_request(request);
  if (!net.is_chain()) {
    throw Error(ErrorCode::kNotAChain, "label solver needs a chain of layers");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = net.layer_count();
  const bool peak_memory = request.mode == SolveMode::kMinWorkspace ||
                           (request.mode == SolveMode::kMinTime &&
                            request.memory_measure == MemoryMeasure::kPeakLayer);

  // Lower bounds on what layers > i still add, for eager budget pruning.
  std::vector<Duration> time_after(m + 1, 0);
  std::vector<Bytes> mem_after(m + 1, 0);
  for (std::size_t i = m; i-- > 0;) {
    Duration t = std::numeric_limits<Duration>::max();
    Bytes b = std::numeric_limits<Bytes>::max();
    for (const auto& c : net.layer(i).candidates) {
      t = std::min(t, c.time_cost);
      b = std::min(b, c.memory_cost);
    }
    if (i + 1 < m) {
      // Edge (i, i+1) is the only edge leaving layer i on a chain.
      const auto& mat = net.edges()[net.out_edges(i).front()].matrix;
      Duration cheapest = std::numeric_limits<Duration>::max();
      for (std::size_t j = 0; j < mat.rows(); ++j) {
        for (std::size_t k = 0; k < mat.cols(); ++k) cheapest = std::min(cheapest, mat.at(j, k));
      }
      t = CheckedAdd(t, cheapest);
    }
    time_after[i] = CheckedAdd(time_after[i + 1], t);
    mem_after[i] = peak_memory ? std::max(mem_after[i + 1], b) : CheckedAdd(mem_after[i + 1], b);
  }

  auto admissible = [&](const Label& l, std::size_t layer) {
    if (request.memory_budget.has_value()) {
      const Bytes floor = peak_memory ? std::max(l.memory, mem_after[layer + 1])
                                      : CheckedAdd(l.memory, mem_after[layer + 1]);
      if (floor > *request.memory_budget) return false;
    }
    if (request.time_budget.has_value() &&
        CheckedAdd(l.time, time_after[layer + 1]) > *request.time_budget) {
      return false;
    }
    return true;
  };
  auto combine = [&](Bytes acc, Bytes add) {
    return peak_memory ? std::max(acc, add) : CheckedAdd(acc, add);
  };

  std::vector<std::vector<std::vector<Label>>> labels(m);
  std::uint64_t created = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t n = net.candidate_count(i);
    labels[i].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& c = net.candidate(i, k);
      std::vector<Label>& bucket = labels[i][k];
      if (i == 0) {
        Label l{c.time_cost, c.memory_cost, 0, 0};
        if (admissible(l, i)) bucket.push_back(l);
      } else {
        const auto& mat = net.edges()[net.in_edges(i).front()].matrix;
        for (std::size_t j = 0; j < labels[i - 1].size(); ++j) {
          const auto& prev = labels[i - 1][j];
          for (std::size_t q = 0; q < prev.size(); ++q) {
            Label l;
            l.time = CheckedAdd(CheckedAdd(prev[q].time, mat.at(j, k)), c.time_cost);
            l.memory = combine(prev[q].memory, c.memory_cost);
            l.prev_candidate = static_cast<std::uint32_t>(j);
            l.prev_label = static_cast<std::uint32_t>(q);
            if (admissible(l, i)) bucket.push_back(l);
          }
        }
      }
      created += bucket.size();
      chain_internal::Prune(bucket);
    }
  }

  // Best final label; objective ties go to the lowest candidate index.
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::uint64_t best_value = 0;
  for (std::size_t k = 0; k < labels[m - 1].size(); ++k) {
    for (std::size_t q = 0; q < labels[m - 1][k].size(); ++q) {
      const Label& l = labels[m - 1][k][q];
      const std::uint64_t value = request.mode == SolveMode::kMinTime ? l.time : l.memory;
      if (!best.has_value() || value < best_value) {
        best = {k, q};
        best_value = value;
      }
    }
  }

  SolveOutcome out;
  out.stats.nodes = created;
  if (best.has_value()) {
    std::vector<std::size_t> choice(m);
    auto [k, q] = *best;
    for (std::size_t i = m; i-- > 0;) {
      choice[i] = k;
      const Label& l = labels[i][k][q];
      k = l.prev_candidate;
      q = l.prev_label;
    }
    out.status = SolveStatus::kOptimal;
    out.objective = best_value;
    out.lower_bound = best_value;
    out.selection = MakeSelection(net, std::move(choice));
  }
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace primsel

#endif  // PRIMSEL_CHAIN_LABELS_HPP_
