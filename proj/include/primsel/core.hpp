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

// Domain model for per-layer primitive selection: layers, candidate
// primitives with profiled costs, layout transition matrices on the edges of
// the layer DAG, and the validated, immutable `Network` every solver consumes.

#ifndef PRIMSEL_CORE_HPP_
#define PRIMSEL_CORE_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "primsel/error.hpp"

namespace primsel {

// Memory ordering of a tensor, e.g. "CHW" or "HWC". Compared by name.
struct DataLayout {
  std::string name;

  friend bool operator==(const DataLayout&, const DataLayout&) = default;
  friend auto operator<=>(const DataLayout&, const DataLayout&) = default;
};

// Optional decomposition of a candidate's footprint, used by the workspace
// planner. When present the four parts sum to memory_cost.
struct BufferBreakdown {
  Bytes input = 0;
  Bytes output = 0;
  Bytes weights = 0;
  Bytes scratch = 0;

  Bytes Total() const {
    return CheckedAdd(CheckedAdd(input, output), CheckedAdd(weights, scratch));
  }
  friend bool operator==(const BufferBreakdown&, const BufferBreakdown&) = default;
};

struct PrimitiveCandidate {
  std::string id;
  Duration time_cost = 0;
  Bytes memory_cost = 0;
  DataLayout input_layout;
  DataLayout output_layout;
  std::optional<BufferBreakdown> buffers;

  friend bool operator==(const PrimitiveCandidate&, const PrimitiveCandidate&) = default;
};

// Candidate order is stable and defines the one-hot index space of the layer.
struct LayerProfile {
  std::string layer_id;
  std::vector<PrimitiveCandidate> candidates;

  friend bool operator==(const LayerProfile&, const LayerProfile&) = default;
};

// Dense rows x cols matrix of layout transformation times. Row = candidate of
// the producing layer, column = candidate of the consuming layer.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(std::size_t rows, std::size_t cols, Duration fill = 0)
      : rows_(rows), cols_(cols), cost_(rows * cols, fill) {}

  static TransitionMatrix FromRows(const std::vector<std::vector<Duration>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    TransitionMatrix m(rows.size(), cols);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[j].size() != cols) {
        throw Error(ErrorCode::kInvalidProfile, "ragged transition matrix");
      }
      std::copy(rows[j].begin(), rows[j].end(), m.cost_.begin() + j * cols);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Duration at(std::size_t j, std::size_t k) const { return cost_[j * cols_ + k]; }
  Duration& at(std::size_t j, std::size_t k) { return cost_[j * cols_ + k]; }

  std::vector<std::vector<Duration>> ToRows() const {
    std::vector<std::vector<Duration>> out(rows_);
    for (std::size_t j = 0; j < rows_; ++j) {
      out[j].assign(cost_.begin() + j * cols_, cost_.begin() + (j + 1) * cols_);
    }
    return out;
  }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Duration> cost_;
};

struct Edge {
  std::string from;
  std::string to;
  // Explicit matrices take precedence over ones derived from the layout table.
  std::optional<TransitionMatrix> matrix;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// One entry of the layout transformation table. An absent `layer` applies to
// every consuming layer; a layer-specific entry wins over a wildcard one.
struct LayoutTransform {
  DataLayout from_layout;
  DataLayout to_layout;
  std::optional<std::string> layer;
  Duration cost = 0;

  friend bool operator==(const LayoutTransform&, const LayoutTransform&) = default;
};

struct NetworkProfile {
  std::string name;
  std::vector<LayerProfile> layers;  // topological order
  std::vector<Edge> edges;
  std::vector<LayoutTransform> layout_transforms;

  friend bool operator==(const NetworkProfile&, const NetworkProfile&) = default;
};

struct ObjectiveBreakdown {
  Duration exec_time = 0;
  Duration transform_time = 0;
  Duration total_time = 0;
  Bytes memory_sum = 0;
  Bytes workspace_max = 0;

  friend bool operator==(const ObjectiveBreakdown&, const ObjectiveBreakdown&) = default;
};

// One candidate index per layer, indexed by the layer's topological position.
struct Selection {
  std::vector<std::size_t> choice;
  ObjectiveBreakdown breakdown;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct Violation {
  std::string where;
  std::string message;
};

// Cost of turning `from_layout` into `to_layout` in front of `layer_id`.
inline std::optional<Duration> LookupTransform(std::span<const LayoutTransform> table,
                                               const DataLayout& from_layout,
                                               const DataLayout& to_layout,
                                               std::string_view layer_id) {
  std::optional<Duration> wildcard;
  for (const auto& entry : table) {
    if (entry.from_layout != from_layout || entry.to_layout != to_layout) continue;
    if (entry.layer.has_value()) {
      if (*entry.layer == layer_id) return entry.cost;
    } else if (!wildcard.has_value()) {
      wildcard = entry.cost;
    }
  }
  return wildcard;
}

inline TransitionMatrix derive_transition_matrix(const LayerProfile& from,
                                                 const LayerProfile& to,
                                                 std::span<const LayoutTransform> table) {
  TransitionMatrix m(from.candidates.size(), to.candidates.size());
  for (std::size_t j = 0; j < from.candidates.size(); ++j) {
    const DataLayout& out = from.candidates[j].output_layout;
    for (std::size_t k = 0; k < to.candidates.size(); ++k) {
      const DataLayout& in = to.candidates[k].input_layout;
      if (out == in) continue;
      auto cost = LookupTransform(table, out, in, to.layer_id);
      if (!cost.has_value()) {
        throw Error(ErrorCode::kMissingTransformCost,
                    out.name + " -> " + in.name + " (layer " + to.layer_id + ")");
      }
      m.at(j, k) = *cost;
    }
  }
  return m;
}

inline std::vector<Violation> validate_profile(const NetworkProfile& profile) {
  std::vector<Violation> out;
  auto add = [&out](std::string where, std::string message) {
    out.push_back({std::move(where), std::move(message)});
  };

  if (profile.layers.empty()) add("network", "profile has no layers");

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < profile.layers.size(); ++i) {
    const LayerProfile& layer = profile.layers[i];
    const std::string where = "layer '" + layer.layer_id + "'";
    if (layer.layer_id.empty()) add("layer #" + std::to_string(i), "empty layer id");
    if (!position.emplace(layer.layer_id, i).second) add(where, "duplicate layer id");
    if (layer.candidates.empty()) add(where, "layer has no candidates");
    std::set<std::string> ids;
    for (const auto& c : layer.candidates) {
      const std::string cwhere = where + " candidate '" + c.id + "'";
      if (c.id.empty()) add(where, "empty candidate id");
      if (!ids.insert(c.id).second) add(cwhere, "duplicate candidate id within layer");
      if (c.input_layout.name.empty() || c.output_layout.name.empty()) {
        add(cwhere, "empty layout name");
      }
      if (c.buffers.has_value()) {
        const BufferBreakdown& b = *c.buffers;
        const unsigned __int128 sum = static_cast<unsigned __int128>(b.input) + b.output +
                                      b.weights + b.scratch;
        if (sum != c.memory_cost) {
          add(cwhere, "buffer breakdown does not sum to memory_cost");
        }
      }
    }
  }

  for (const auto& t : profile.layout_transforms) {
    if (t.from_layout.name.empty() || t.to_layout.name.empty()) {
      add("layout_transforms", "empty layout name");
    }
    if (t.layer.has_value() && !position.contains(*t.layer)) {
      add("layout_transforms", "unknown layer '" + *t.layer + "'");
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : profile.edges) {
    const std::string where = "edge " + e.from + "->" + e.to;
    auto from = position.find(e.from);
    auto to = position.find(e.to);
    if (from == position.end() || to == position.end()) {
      add(where, "edge references unknown layer");
      continue;
    }
    if (from->second >= to->second) {
      add(where, "edge must point forward in topological order");
      continue;
    }
    if (!seen.emplace(e.from, e.to).second) add(where, "duplicate edge");
    const LayerProfile& a = profile.layers[from->second];
    const LayerProfile& b = profile.layers[to->second];
    if (e.matrix.has_value()) {
      const TransitionMatrix& m = *e.matrix;
      if (m.rows() != a.candidates.size() || m.cols() != b.candidates.size()) {
        add(where, "dimension mismatch: matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", layers have " +
                       std::to_string(a.candidates.size()) + " and " +
                       std::to_string(b.candidates.size()) + " candidates");
        continue;
      }
      for (std::size_t j = 0; j < m.rows(); ++j) {
        for (std::size_t k = 0; k < m.cols(); ++k) {
          if (a.candidates[j].output_layout == b.candidates[k].input_layout &&
              m.at(j, k) != 0) {
            add(where, "identity transform must cost 0 at [" + std::to_string(j) + "][" +
                           std::to_string(k) + "]");
          }
        }
      }
    } else {
      try {
        derive_transition_matrix(a, b, profile.layout_transforms);
      } catch (const Error& err) {
        add(where, std::string("cannot derive transition matrix: ") + err.what());
      }
    }
  }
  return out;
}

// Validated profile with every edge resolved to a matrix and layer names
// resolved to positions. Immutable once built; safe to share between threads.
class Network {
 public:
  struct EdgeRef {
    std::size_t from = 0;
    std::size_t to = 0;
    TransitionMatrix matrix;
  };

  static Network Build(NetworkProfile profile) {
    auto violations = validate_profile(profile);
    if (!violations.empty()) {
      std::string message;
      for (const auto& v : violations) message += "\n  " + v.where + ": " + v.message;
      throw Error(ErrorCode::kInvalidProfile, "profile failed validation:" + message);
    }
    Network net;
    for (std::size_t i = 0; i < profile.layers.size(); ++i) {
      net.position_.emplace(profile.layers[i].layer_id, i);
    }
    net.in_edges_.resize(profile.layers.size());
    net.out_edges_.resize(profile.layers.size());
    for (const auto& e : profile.edges) {
      EdgeRef ref;
      ref.from = net.position_.at(e.from);
      ref.to = net.position_.at(e.to);
      ref.matrix = e.matrix.has_value()
                       ? *e.matrix
                       : derive_transition_matrix(profile.layers[ref.from],
                                                  profile.layers[ref.to],
                                                  profile.layout_transforms);
      net.in_edges_[ref.to].push_back(net.edges_.size());
      net.out_edges_[ref.from].push_back(net.edges_.size());
      net.edges_.push_back(std::move(ref));
    }
    net.profile_ = std::move(profile);
    return net;
  }

  const NetworkProfile& profile() const { return profile_; }
  std::size_t layer_count() const { return profile_.layers.size(); }
  const LayerProfile& layer(std::size_t i) const { return profile_.layers[i]; }
  std::size_t candidate_count(std::size_t i) const { return profile_.layers[i].candidates.size(); }
  const PrimitiveCandidate& candidate(std::size_t i, std::size_t j) const {
    return profile_.layers[i].candidates[j];
  }
  const std::vector<EdgeRef>& edges() const { return edges_; }
  const std::vector<std::size_t>& in_edges(std::size_t layer) const { return in_edges_[layer]; }
  const std::vector<std::size_t>& out_edges(std::size_t layer) const { return out_edges_[layer]; }

  std::optional<std::size_t> find_layer(std::string_view id) const {
    auto it = position_.find(std::string(id));
    if (it == position_.end()) return std::nullopt;
    return it->second;
  }

  // True when the edges are exactly (i, i+1) for every consecutive pair.
  bool is_chain() const {
    if (edges_.size() + 1 != layer_count()) return false;
    std::vector<bool> linked(layer_count(), false);
    for (const auto& e : edges_) {
      if (e.to != e.from + 1 || linked[e.from]) return false;
      linked[e.from] = true;
    }
    return true;
  }

  // Number of complete assignments, saturating at `cap + 1`.
  std::uint64_t assignment_count(std::uint64_t cap) const {
    std::uint64_t total = 1;
    for (const auto& layer : profile_.layers) {
      std::uint64_t next = 0;
      if (__builtin_mul_overflow(total, layer.candidates.size(), &next) || next > cap) {
        return cap + 1;
      }
      total = next;
    }
    return total;
  }

 private:
  NetworkProfile profile_;
  std::unordered_map<std::string, std::size_t> position_;
  std::vector<EdgeRef> edges_;
  std::vector<std::vector<std::size_t>> in_edges_;
  std::vector<std::vector<std::size_t>> out_edges_;
};

}  // namespace primsel

#endif  // PRIMSEL_CORE_HPP_
