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

// Exact depth-first branch and bound for the selection ILP.
//
// The solver reads the one-hot groups, the product-variable blocks and the
// budget rows back out of an `IlpProblem` and searches over layers in
// topological order, one child per candidate, in candidate-index order. Only
// strictly improving incumbents are accepted and a node is cut when its bound
// reaches the incumbent, so the returned selection is the lexicographically
// first optimal one.
//
// Node bounds are all admissible:
//   * sum of per-layer minima plus per-edge minimum transition entries;
//   * a forest relaxation of the layer DAG (one incoming edge kept per layer)
//     solved exactly by dynamic programming; exact cost-to-go on chains;
//   * with a budget row, the LP relaxation of the remaining multiple-choice
//     knapsack, rounded up to the next integer.
// Min-workspace requests branch on the epigraph variable W last: W is swept
// over its domain (the distinct candidate footprints) by bisection, each
// value answered by a feasibility search with every footprint above W fixed
// to zero.

#ifndef PRIMSEL_BRANCH_AND_BOUND_HPP_
#define PRIMSEL_BRANCH_AND_BOUND_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "primsel/core.hpp"
#include "primsel/cost.hpp"
#include "primsel/ilp_problem.hpp"

namespace primsel {
namespace bnb_internal {

using Value = std::int64_t;
inline constexpr Value kInf = std::numeric_limits<Value>::max() / 4;

inline Value SatAdd(Value a, Value b) {
  if (a >= kInf || b >= kInf) return kInf;
  const Value s = a + b;
  return s >= kInf ? kInf : s;
}

// The selection ILP viewed as one-hot groups with pairwise edge terms:
//   minimize  sum_i obj_i[j_i] + sum_e pobj_e[j][k]
//   s.t.      sum_i res_i[j_i] + sum_e pres_e[j][k] <= capacity
// plus per-candidate exclusions (layer caps, workspace cut).
struct GroupedModel {
  struct Block {
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t cols = 0;
    std::vector<Value> obj;
    std::vector<Value> res;
  };

  std::size_t layers = 0;
  std::vector<std::vector<Value>> obj;
  std::vector<std::vector<Value>> res;
  std::vector<std::vector<Value>> peak;  // workspace-link coefficients
  std::vector<std::vector<char>> allowed;
  std::vector<Block> blocks;
  std::vector<std::vector<std::size_t>> in_blocks;
  std::vector<std::vector<std::size_t>> out_blocks;
  std::optional<Value> capacity;
  bool minimize_peak = false;
};

inline GroupedModel Compile(const IlpProblem& p) {
  const Network& net = *p.network;
  GroupedModel g;
  g.layers = net.layer_count();
  g.obj.resize(g.layers);
  g.res.resize(g.layers);
  g.peak.resize(g.layers);
  g.allowed.resize(g.layers);
  for (std::size_t i = 0; i < g.layers; ++i) {
    const std::size_t n = net.candidate_count(i);
    g.obj[i].assign(n, 0);
    g.res[i].assign(n, 0);
    g.peak[i].assign(n, 0);
    g.allowed[i].assign(n, 1);
  }
  g.in_blocks.resize(g.layers);
  g.out_blocks.resize(g.layers);
  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    const auto& edge = net.edges()[e];
    GroupedModel::Block b;
    b.from = edge.from;
    b.to = edge.to;
    b.cols = edge.matrix.cols();
    b.obj.assign(edge.matrix.rows() * b.cols, 0);
    b.res.assign(edge.matrix.rows() * b.cols, 0);
    g.in_blocks[b.to].push_back(e);
    g.out_blocks[b.from].push_back(e);
    g.blocks.push_back(std::move(b));
  }

  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    const VarMeta& m = p.vars[v];
    if (m.kind == VarKind::kChoice) {
      g.obj[m.layer][m.candidate] = p.objective[v];
    } else if (m.kind == VarKind::kProduct) {
      auto& b = g.blocks[m.edge];
      b.obj[m.from_candidate * b.cols + m.to_candidate] = p.objective[v];
    } else {
      g.minimize_peak = p.objective[v] != 0;
    }
  }

  for (const auto& row : p.constraints) {
    switch (row.role) {
      case RowRole::kOneHot:
      case RowRole::kProductLink:
        break;
      case RowRole::kMemoryBudget:
      case RowRole::kTimeBudget:
        g.capacity = row.rhs;
        for (const auto& t : row.terms) {
          const VarMeta& m = p.vars[t.var];
          if (m.kind == VarKind::kChoice) {
            g.res[m.layer][m.candidate] = t.coef;
          } else if (m.kind == VarKind::kProduct) {
            auto& b = g.blocks[m.edge];
            b.res[m.from_candidate * b.cols + m.to_candidate] = t.coef;
          }
        }
        break;
      case RowRole::kLayerCap:
        for (const auto& t : row.terms) {
          const VarMeta& m = p.vars[t.var];
          if (m.kind == VarKind::kChoice && t.coef > row.rhs) g.allowed[m.layer][m.candidate] = 0;
        }
        break;
      case RowRole::kWorkspaceLink:
        for (const auto& t : row.terms) {
          const VarMeta& m = p.vars[t.var];
          if (m.kind == VarKind::kChoice) g.peak[m.layer][m.candidate] = t.coef;
        }
        break;
    }
  }
  return g;
}

// LP relaxation of  min sum obj  s.t.  sum res <= R  over layers d..m-1,
// ignoring edge terms. Precomputed per suffix as the merged list of convex
// hull segments sorted by marginal cost.
class KnapsackBound {
 public:
  struct Segment {
    Value dres = 0;  // resource released
    Value dobj = 0;  // objective paid
    std::size_t layer = 0;
    std::size_t to_candidate = 0;
  };

  KnapsackBound() = default;

  explicit KnapsackBound(const GroupedModel& g) {
    const std::size_t m = g.layers;
    base_.resize(m);
    hulls_.resize(m);
    for (std::size_t i = 0; i < m; ++i) BuildHull(g, i);
    suffix_.resize(m + 1);
    base_obj_.assign(m + 1, 0);
    base_res_.assign(m + 1, 0);
    for (std::size_t d = m; d-- > 0;) {
      base_obj_[d] = SatAdd(base_obj_[d + 1], g.obj[d][base_[d]]);
      base_res_[d] = SatAdd(base_res_[d + 1], g.res[d][base_[d]]);
      Suffix& out = suffix_[d];
      const Suffix& next = suffix_[d + 1];
      const auto& mine = hulls_[d];
      out.segments.reserve(next.segments.size() + mine.size());
      std::merge(next.segments.begin(), next.segments.end(), mine.begin(), mine.end(),
                 std::back_inserter(out.segments), CheaperFirst);
      out.cum_res.resize(out.segments.size());
      out.cum_obj.resize(out.segments.size());
      Value r = 0;
      Value o = 0;
      for (std::size_t s = 0; s < out.segments.size(); ++s) {
        r = SatAdd(r, out.segments[s].dres);
        o = SatAdd(o, out.segments[s].dobj);
        out.cum_res[s] = r;
        out.cum_obj[s] = o;
      }
    }
  }

  // Smallest objective over layers >= d with resource use <= `room`, rounded
  // up; kInf when even the lightest candidates overflow `room`.
  Value Bound(std::size_t d, Value room) const {
    if (room < 0) return kInf;
    const Value need = base_res_[d] - room;
    if (need <= 0) return base_obj_[d];
    const Suffix& s = suffix_[d];
    if (s.cum_res.empty() || s.cum_res.back() < need) return kInf;
    const std::size_t p = static_cast<std::size_t>(
        std::lower_bound(s.cum_res.begin(), s.cum_res.end(), need) - s.cum_res.begin());
    const Value before_res = p == 0 ? 0 : s.cum_res[p - 1];
    const Value before_obj = p == 0 ? 0 : s.cum_obj[p - 1];
    const Segment& seg = s.segments[p];
    const __int128 num = static_cast<__int128>(seg.dobj) * (need - before_res);
    const Value frac = static_cast<Value>((num + seg.dres - 1) / seg.dres);
    return SatAdd(SatAdd(base_obj_[d], before_obj), frac);
  }

  // Marginal cost (dobj, dres) of the segment the LP solution splits, or
  // nothing when the budget does not bind or cannot be met.
  std::optional<std::pair<Value, Value>> CriticalSlope(std::size_t d, Value room) const {
    if (room < 0) return std::nullopt;
    const Value need = base_res_[d] - room;
    const Suffix& s = suffix_[d];
    if (need <= 0 || s.cum_res.empty() || s.cum_res.back() < need) return std::nullopt;
    const std::size_t p = static_cast<std::size_t>(
        std::lower_bound(s.cum_res.begin(), s.cum_res.end(), need) - s.cum_res.begin());
    return std::make_pair(s.segments[p].dobj, s.segments[p].dres);
  }

  // Integral rounding of the root LP: apply whole segments until the budget
  // holds. Returns per-layer candidates, or nothing if no rounding fits.
  std::optional<std::vector<std::size_t>> RoundedRoot(Value room) const {
    if (base_.empty()) return std::vector<std::size_t>{};
    std::vector<std::size_t> choice = base_;
    Value need = base_res_[0] - room;
    for (const auto& seg : suffix_[0].segments) {
      if (need <= 0) break;
      choice[seg.layer] = seg.to_candidate;
      need -= seg.dres;
    }
    if (need > 0) return std::nullopt;
    return choice;
  }

 private:
  struct Suffix {
    std::vector<Segment> segments;
    std::vector<Value> cum_res;
    std::vector<Value> cum_obj;
  };

  static bool CheaperFirst(const Segment& a, const Segment& b) {
    return static_cast<__int128>(a.dobj) * b.dres < static_cast<__int128>(b.dobj) * a.dres;
  }

  void BuildHull(const GroupedModel& g, std::size_t i) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < g.obj[i].size(); ++j) {
      if (g.allowed[i][j]) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (g.res[i][a] != g.res[i][b]) return g.res[i][a] < g.res[i][b];
      if (g.obj[i][a] != g.obj[i][b]) return g.obj[i][a] < g.obj[i][b];
      return a < b;
    });
    // Pareto front: resource ascending, objective strictly descending.
    std::vector<std::size_t> front;
    for (std::size_t j : idx) {
      if (front.empty() || g.obj[i][j] < g.obj[i][front.back()]) front.push_back(j);
    }
    // Lower convex hull.
    std::vector<std::size_t> hull;
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
      const __int128 ax = g.res[i][a] - g.res[i][o], ay = g.obj[i][a] - g.obj[i][o];
      const __int128 bx = g.res[i][b] - g.res[i][o], by = g.obj[i][b] - g.obj[i][o];
      return ax * by - ay * bx;
    };
    for (std::size_t j : front) {
      while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), j) <= 0) {
        hull.pop_back();
      }
      hull.push_back(j);
    }
    base_[i] = hull.back();
    for (std::size_t q = hull.size() - 1; q > 0; --q) {
      Segment s;
      s.dres = g.res[i][hull[q]] - g.res[i][hull[q - 1]];
      s.dobj = g.obj[i][hull[q - 1]] - g.obj[i][hull[q]];
      s.layer = i;
      s.to_candidate = hull[q - 1];
      hulls_[i].push_back(s);
    }
  }

  std::vector<std::size_t> base_;
  std::vector<std::vector<Segment>> hulls_;
  std::vector<Suffix> suffix_;
  std::vector<Value> base_obj_;
  std::vector<Value> base_res_;
};

// Costs of one channel of the grouped model: per-candidate terms and per-edge
// pair terms. The objective, the budget row, or a weighted mix of the two.
struct Channel {
  std::vector<std::vector<Value>> own;
  std::vector<std::vector<Value>> pair;  // per block, row-major
};

inline Channel ObjectiveChannel(const GroupedModel& g) {
  Channel c{g.obj, {}};
  for (const auto& b : g.blocks) c.pair.push_back(b.obj);
  return c;
}

inline Channel ResourceChannel(const GroupedModel& g) {
  Channel c{g.res, {}};
  for (const auto& b : g.blocks) c.pair.push_back(b.res);
  return c;
}

// q * objective + p * resource; nothing if the mix could overflow.
inline std::optional<Channel> MixedChannel(const GroupedModel& g, Value q, Value p) {
  constexpr Value kLimit = Value{1} << 60;
  auto mix = [&](Value o, Value r) -> std::optional<Value> {
    const __int128 v = static_cast<__int128>(q) * o + static_cast<__int128>(p) * r;
    if (v > kLimit) return std::nullopt;
    return static_cast<Value>(v);
  };
  Channel c;
  c.own.resize(g.layers);
  for (std::size_t i = 0; i < g.layers; ++i) {
    for (std::size_t j = 0; j < g.obj[i].size(); ++j) {
      auto v = mix(g.obj[i][j], g.res[i][j]);
      if (!v.has_value()) return std::nullopt;
      c.own[i].push_back(*v);
    }
  }
  for (const auto& b : g.blocks) {
    std::vector<Value> row;
    for (std::size_t x = 0; x < b.obj.size(); ++x) {
      auto v = mix(b.obj[x], b.res[x]);
      if (!v.has_value()) return std::nullopt;
      row.push_back(*v);
    }
    c.pair.push_back(std::move(row));
  }
  return c;
}

// Forest relaxation of one channel: every layer keeps at most one incoming
// edge and the forest is solved exactly by dynamic programming (exact
// cost-to-go on chains). Dropped edges contribute their cheapest admissible
// entry.
class ForestBound {
 public:
  ForestBound() = default;

  ForestBound(const GroupedModel& g, Channel channel) : c_(std::move(channel)), g_(&g) {
    const std::size_t m = g.layers;
    parent_.assign(m, kNone);
    kept_.assign(g.blocks.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      Value best = -1;
      for (std::size_t e : g.in_blocks[i]) {
        const Value w = EdgeWeight(e);
        if (w > best) {
          best = w;
          parent_[i] = e;
        }
      }
      if (parent_[i] != kNone) kept_[parent_[i]] = 1;
    }

    row_min_.resize(g.blocks.size());
    edge_min_.assign(g.blocks.size(), kInf);
    for (std::size_t e = 0; e < g.blocks.size(); ++e) {
      const auto& b = g.blocks[e];
      const std::size_t rows = g.obj[b.from].size();
      row_min_[e].assign(rows, kInf);
      for (std::size_t j = 0; j < rows; ++j) {
        if (!g.allowed[b.from][j]) continue;
        for (std::size_t k = 0; k < b.cols; ++k) {
          if (!g.allowed[b.to][k]) continue;
          row_min_[e][j] = std::min(row_min_[e][j], Pair(e, j, k));
        }
        edge_min_[e] = std::min(edge_min_[e], row_min_[e][j]);
      }
    }

    value_.resize(m);
    min_value_.assign(m, kInf);
    for (std::size_t i = m; i-- > 0;) {
      const std::size_t n = g.obj[i].size();
      value_[i].assign(n, kInf);
      for (std::size_t j = 0; j < n; ++j) {
        if (!g.allowed[i][j]) continue;
        Value v = c_.own[i][j];
        for (std::size_t e : g.out_blocks[i]) {
          if (kept_[e]) v = SatAdd(v, EnterCost(e, j));
        }
        value_[i][j] = v;
        min_value_[i] = std::min(min_value_[i], v);
      }
    }

    // Bookkeeping for nodes at depth d (layers < d decided).
    const_part_.assign(m + 1, 0);
    const_edges_.assign(m + 1, 0);
    cross_roots_.resize(m + 1);
    cross_dropped_.resize(m + 1);
    cross_edges_.resize(m + 1);
    for (std::size_t d = 0; d <= m; ++d) {
      Value c = 0;
      for (std::size_t r = d; r < m; ++r) {
        if (parent_[r] == kNone) {
          c = SatAdd(c, min_value_[r]);
        } else if (g.blocks[parent_[r]].from < d) {
          cross_roots_[d].push_back(r);
        }
      }
      Value edges = 0;
      for (std::size_t e = 0; e < g.blocks.size(); ++e) {
        if (g.blocks[e].to < d) continue;
        if (g.blocks[e].from >= d) {
          edges = SatAdd(edges, edge_min_[e]);
          if (!kept_[e]) c = SatAdd(c, edge_min_[e]);
        } else {
          cross_edges_[d].push_back(e);
          if (!kept_[e]) cross_dropped_[d].push_back(e);
        }
      }
      const_part_[d] = c;
      const_edges_[d] = edges;
    }
    BuildRegions();
  }

  // Lower bound on the channel cost still to be paid once layers < d are
  // fixed to `choice`.
  Value Remaining(std::size_t d, const std::vector<std::size_t>& choice) const {
    if (exact_) return ExactRemaining(d, choice);
    Value total = const_part_[d];
    for (std::size_t r : cross_roots_[d]) {
      total = SatAdd(total, EnterCost(parent_[r], choice[g_->blocks[parent_[r]].from]));
    }
    for (std::size_t e : cross_dropped_[d]) {
      total = SatAdd(total, row_min_[e][choice[g_->blocks[e].from]]);
    }
    return total;
  }

  // Lower bound on the pair terms alone for edges whose head is >= d.
  Value EdgeTerms(std::size_t d, const std::vector<std::size_t>& choice) const {
    Value total = const_edges_[d];
    for (std::size_t e : cross_edges_[d]) {
      total = SatAdd(total, row_min_[e][choice[g_->blocks[e].from]]);
    }
    return total;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  Value Pair(std::size_t e, std::size_t j, std::size_t k) const {
    return c_.pair[e][j * g_->blocks[e].cols + k];
  }
  Value EdgeWeight(std::size_t e) const {
    const auto& b = g_->blocks[e];
    Value total = 0;
    const std::size_t rows = g_->obj[b.from].size();
    for (std::size_t j = 0; j < rows; ++j) {
      Value row = kInf;
      for (std::size_t k = 0; k < b.cols; ++k) row = std::min(row, Pair(e, j, k));
      total = SatAdd(total, row);
    }
    return total;
  }
  // min_k  pair(j, k) + value(child, k)
  Value EnterCost(std::size_t e, std::size_t j) const {
    const auto& b = g_->blocks[e];
    Value best = kInf;
    for (std::size_t k = 0; k < b.cols; ++k) {
      best = std::min(best, SatAdd(Pair(e, j, k), value_[b.to][k]));
    }
    return best;
  }

  // A cut is a layer no edge jumps over. When every layer between two
  // consecutive cuts lies on a simple path from the first cut to the second
  // (chains and fork-join blocks), the cost-to-go is computed exactly by
  // conditioning on the next cut.
  using Table = std::vector<Value>;  // rows x cols, row-major

  // starts_[region][index] when `start`, otherwise next_[index].
  struct Term {
    bool start;
    std::size_t region;
    std::size_t index;
    std::size_t row_layer;
  };

  void BuildRegions() {
    const GroupedModel& g = *g_;
    const std::size_t m = g.layers;
    if (m == 0) return;
    std::vector<int> jump(m + 1, 0);
    for (const auto& b : g.blocks) {
      if (b.to > b.from + 1) {
        ++jump[b.from + 1];
        --jump[b.to];
      }
    }
    std::vector<char> is_cut(m, 0);
    int open = 0;
    for (std::size_t i = 0; i < m; ++i) {
      open += jump[i];
      if (open == 0) {
        is_cut[i] = 1;
        cuts_.push_back(i);
      }
    }
    region_.assign(m, 0);
    for (std::size_t k = 0, i = 0; i < m; ++i) {
      if (k + 1 < cuts_.size() && i >= cuts_[k + 1]) ++k;
      region_[i] = k;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (is_cut[i]) continue;
      if (g.in_blocks[i].size() > 1 || g.out_blocks[i].size() > 1) return;
    }

    own_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      own_[i] = c_.own[i];
      for (std::size_t j = 0; j < own_[i].size(); ++j) {
        if (!g.allowed[i][j]) own_[i][j] = kInf;
      }
    }

    // down_[v][a][u]: cost of v = a and the rest of its path, given the next
    // cut takes u. next_[v] is the same without v's own cost.
    down_.assign(m, {});
    next_.assign(m, {});
    for (std::size_t v = m; v-- > 0;) {
      if (is_cut[v]) continue;
      const std::size_t nc = Width(NextCut(v));
      const std::size_t nv = Width(v);
      Table& nx = next_[v];
      nx.assign(nv * nc, 0);
      if (!g.out_blocks[v].empty()) {
        const std::size_t e = g.out_blocks[v].front();
        const std::size_t w = g.blocks[e].to;
        const std::size_t nw = Width(w);
        for (std::size_t a = 0; a < nv; ++a) {
          for (std::size_t u = 0; u < nc; ++u) {
            Value best = kInf;
            if (is_cut[w]) {
              best = Pair(e, a, u);
            } else {
              for (std::size_t b = 0; b < nw; ++b) {
                best = std::min(best, SatAdd(Pair(e, a, b), down_[w][b * nc + u]));
              }
            }
            nx[a * nc + u] = best;
          }
        }
      }
      Table& dn = down_[v];
      dn.resize(nv * nc);
      for (std::size_t a = 0; a < nv; ++a) {
        for (std::size_t u = 0; u < nc; ++u) dn[a * nc + u] = SatAdd(own_[v][a], nx[a * nc + u]);
      }
    }

    // start_ tables join a region's first cut to its next one, one per path.
    const std::size_t regions = cuts_.size();
    starts_.assign(regions, {});
    for (std::size_t e = 0; e < g.blocks.size(); ++e) {
      const auto& b = g.blocks[e];
      if (is_cut[b.from] && is_cut[b.to]) {
        Table t(Width(b.from) * Width(b.to));
        for (std::size_t a = 0; a < Width(b.from); ++a) {
          for (std::size_t u = 0; u < Width(b.to); ++u) t[a * Width(b.to) + u] = Pair(e, a, u);
        }
        starts_[region_[b.from]].push_back(std::move(t));
      }
    }
    for (std::size_t h = 0; h < m; ++h) {
      if (is_cut[h]) continue;
      const std::size_t k = region_[h];
      const std::size_t nt = Width(cuts_[k]);
      const std::size_t nc = Width(NextCut(h));
      const std::size_t nh = Width(h);
      if (!g.in_blocks[h].empty() && !is_cut[g.blocks[g.in_blocks[h].front()].from]) continue;
      head_start_.emplace(h, starts_[k].size());
      Table t(nt * nc, kInf);
      for (std::size_t a0 = 0; a0 < nt; ++a0) {
        for (std::size_t u = 0; u < nc; ++u) {
          Value best = kInf;
          for (std::size_t a = 0; a < nh; ++a) {
            const Value enter = g.in_blocks[h].empty() ? 0 : Pair(g.in_blocks[h].front(), a0, a);
            best = std::min(best, SatAdd(enter, down_[h][a * nc + u]));
          }
          t[a0 * nc + u] = best;
        }
      }
      starts_[k].push_back(std::move(t));
    }

    suffix_.assign(regions, {});
    for (std::size_t k = regions; k-- > 0;) {
      const std::size_t c = cuts_[k];
      const std::size_t nt = Width(c);
      suffix_[k].assign(nt, kInf);
      for (std::size_t t = 0; t < nt; ++t) {
        Value rest = 0;
        if (k + 1 < regions) {
          const std::size_t nu = Width(cuts_[k + 1]);
          rest = kInf;
          for (std::size_t u = 0; u < nu; ++u) {
            Value v = suffix_[k + 1][u];
            for (const Table& st : starts_[k]) v = SatAdd(v, st[t * nu + u]);
            rest = std::min(rest, v);
          }
        }
        suffix_[k][t] = SatAdd(own_[c][t], rest);
      }
    }

    // Terms for interior depths: each path contributes through its last
    // decided layer, or through its start table when nothing is decided.
    terms_.assign(m, {});
    for (std::size_t d = 0; d < m; ++d) {
      if (is_cut[d]) continue;
      const std::size_t k = region_[d];
      std::size_t path = 0;
      for (std::size_t e = 0; e < g.blocks.size(); ++e) {
        const auto& b = g.blocks[e];
        if (is_cut[b.from] && is_cut[b.to] && region_[b.from] == k) {
          terms_[d].push_back({true, k, path++, cuts_[k]});
        }
      }
      for (std::size_t h = cuts_[k] + 1; h < NextCutIndex(k); ++h) {
        auto it = head_start_.find(h);
        if (it == head_start_.end()) continue;
        std::size_t last = h;
        if (h >= d) {
          terms_[d].push_back({true, k, it->second, cuts_[k]});
          continue;
        }
        while (!g.out_blocks[last].empty()) {
          const std::size_t w = g.blocks[g.out_blocks[last].front()].to;
          if (is_cut[w] || w >= d) break;
          last = w;
        }
        terms_[d].push_back({false, 0, last, last});
      }
    }
    exact_ = true;
  }

  std::size_t Width(std::size_t layer) const { return g_->obj[layer].size(); }

  std::size_t NextCutIndex(std::size_t k) const {
    return k + 1 < cuts_.size() ? cuts_[k + 1] : g_->layers;
  }

  // Interior layers always have a following cut: the last layer is a cut.
  std::size_t NextCut(std::size_t v) const { return cuts_[region_[v] + 1]; }

  Value ExactRemaining(std::size_t d, const std::vector<std::size_t>& choice) const {
    const GroupedModel& g = *g_;
    if (d >= g.layers) return 0;
    const std::size_t k = region_[d];
    if (cuts_[k] == d) {
      Value best = kInf;
      for (std::size_t t = 0; t < Width(d); ++t) {
        Value v = suffix_[k][t];
        for (std::size_t e : g.in_blocks[d]) v = SatAdd(v, Pair(e, choice[g.blocks[e].from], t));
        best = std::min(best, v);
      }
      return best;
    }
    const std::size_t nu = Width(cuts_[k + 1]);
    Value best = kInf;
    for (std::size_t u = 0; u < nu; ++u) {
      Value v = suffix_[k + 1][u];
      for (const Term& term : terms_[d]) {
        const Table& table = term.start ? starts_[term.region][term.index] : next_[term.index];
        v = SatAdd(v, table[choice[term.row_layer] * nu + u]);
      }
      best = std::min(best, v);
    }
    return best;
  }

  Channel c_;
  const GroupedModel* g_ = nullptr;
  bool exact_ = false;
  std::vector<std::size_t> cuts_;
  std::vector<std::size_t> region_;
  std::vector<std::vector<Value>> own_;
  std::vector<Table> down_;
  std::vector<Table> next_;
  std::vector<std::vector<Table>> starts_;
  std::unordered_map<std::size_t, std::size_t> head_start_;
  std::vector<std::vector<Value>> suffix_;
  std::vector<std::vector<Term>> terms_;
  std::vector<std::size_t> parent_;
  std::vector<char> kept_;
  std::vector<std::vector<Value>> row_min_;
  std::vector<Value> edge_min_;
  std::vector<std::vector<Value>> value_;
  std::vector<Value> min_value_;
  std::vector<Value> const_part_;
  std::vector<Value> const_edges_;
  std::vector<std::vector<std::size_t>> cross_roots_;
  std::vector<std::vector<std::size_t>> cross_dropped_;
  std::vector<std::vector<std::size_t>> cross_edges_;
};

// Pareto set of (objective, resource) pairs already reached by some earlier
// node; sorted by objective ascending, resource strictly descending.
class ParetoSet {
 public:
  bool Dominates(Value o, Value r) const {
    auto it = std::upper_bound(items_.begin(), items_.end(), o,
                               [](Value v, const std::pair<Value, Value>& e) { return v < e.first; });
    return it != items_.begin() && std::prev(it)->second <= r;
  }

  // Returns the change in stored entries.
  std::ptrdiff_t Insert(Value o, Value r) {
    auto pos = std::upper_bound(items_.begin(), items_.end(), o,
                                [](Value v, const std::pair<Value, Value>& e) { return v < e.first; });
    auto last = pos;
    while (last != items_.end() && last->second >= r) ++last;
    const std::ptrdiff_t removed = last - pos;
    pos = items_.erase(pos, last);
    items_.insert(pos, {o, r});
    return 1 - removed;
  }

 private:
  std::vector<std::pair<Value, Value>> items_;
};

class Search {
 public:
  using Clock = std::chrono::steady_clock;

  struct Result {
    bool aborted = false;
    std::optional<std::vector<std::size_t>> best;
    Value best_value = kInf;
    Value root_bound = 0;
    std::uint64_t nodes = 0;
  };

  Search(const GroupedModel& g, std::optional<Clock::time_point> deadline)
      : g_(g), deadline_(deadline) {}

  // Lexicographically first minimizer of the grouped objective.
  Result Run() {
    Result r;
    const std::size_t m = g_.layers;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::none_of(g_.allowed[i].begin(), g_.allowed[i].end(), [](char a) { return a; })) {
        return r;
      }
    }
    if (m == 0) {
      r.best = std::vector<std::size_t>{};
      r.best_value = 0;
      return r;
    }
    obj_bound_ = ForestBound(g_, ObjectiveChannel(g_));
    if (g_.capacity.has_value()) {
      res_bound_ = ForestBound(g_, ResourceChannel(g_));
      knapsack_ = KnapsackBound(g_);
      BuildLagrangian();
    }
    BuildBranchLists();
    BuildMemo();

    choice_.assign(m, 0);
    const Value root = Bound(0, 0, 0);
    r.root_bound = root >= kInf ? 0 : root;
    if (root >= kInf) return r;

    cutoff_ = kInf;
    Seed();
    Dive(0, 0, 0);
    r.aborted = aborted_;
    r.nodes = nodes_;
    if (best_.has_value()) {
      r.best = best_;
      r.best_value = best_value_;
    } else if (aborted_ && seed_.has_value()) {
      r.best = seed_;
      r.best_value = seed_value_;
    }
    return r;
  }

 private:
  struct Lagrangian {
    ForestBound forest;
    Value p = 0;  // multiplier numerator
    Value q = 1;  // multiplier denominator
  };

  // Candidate j is skipped when an earlier allowed candidate is no worse in
  // every coefficient it touches; such j never hosts the first optimum.
  void BuildBranchLists() {
    branch_.assign(g_.layers, {});
    for (std::size_t i = 0; i < g_.layers; ++i) {
      const std::size_t n = g_.obj[i].size();
      for (std::size_t j = 0; j < n; ++j) {
        if (!g_.allowed[i][j]) continue;
        bool dominated = false;
        for (std::size_t k : branch_[i]) {
          if (NoWorse(i, k, j)) {
            dominated = true;
            break;
          }
        }
        if (!dominated) branch_[i].push_back(j);
      }
    }
  }

  bool NoWorse(std::size_t i, std::size_t k, std::size_t j) const {
    if (g_.obj[i][k] > g_.obj[i][j] || g_.res[i][k] > g_.res[i][j]) return false;
    for (std::size_t e : g_.in_blocks[i]) {
      const auto& b = g_.blocks[e];
      const std::size_t rows = g_.obj[b.from].size();
      for (std::size_t q = 0; q < rows; ++q) {
        if (b.obj[q * b.cols + k] > b.obj[q * b.cols + j]) return false;
        if (b.res[q * b.cols + k] > b.res[q * b.cols + j]) return false;
      }
    }
    for (std::size_t e : g_.out_blocks[i]) {
      const auto& b = g_.blocks[e];
      for (std::size_t q = 0; q < b.cols; ++q) {
        if (b.obj[k * b.cols + q] > b.obj[j * b.cols + q]) return false;
        if (b.res[k * b.cols + q] > b.res[j * b.cols + q]) return false;
      }
    }
    return true;
  }

  // Relax the budget row with multipliers around the root LP's marginal
  // cost and keep the forest bound of each weighted channel.
  void BuildLagrangian() {
    const Value room = *g_.capacity - res_bound_.EdgeTerms(0, std::vector<std::size_t>(g_.layers));
    auto slope = knapsack_.CriticalSlope(0, room);
    if (!slope.has_value() || slope->first <= 0 || slope->second <= 0) return;
    const double center = static_cast<double>(slope->first) / static_cast<double>(slope->second);

    auto make = [&](double lambda) -> std::optional<Lagrangian> {
      constexpr Value kScale = Value{1} << 20;
      Value q = kScale;
      double p = lambda * static_cast<double>(q);
      while (p > 1e15 && q > 1) {
        q /= 2;
        p /= 2;
      }
      const Value pi = static_cast<Value>(std::llround(p));
      if (pi <= 0) return std::nullopt;
      auto mixed = MixedChannel(g_, q, pi);
      if (!mixed.has_value()) return std::nullopt;
      return Lagrangian{ForestBound(g_, std::move(*mixed)), pi, q};
    };
    const std::vector<std::size_t> none(g_.layers, 0);
    auto dual = [&](const Lagrangian& lag) {
      const Value f = lag.forest.Remaining(0, none);
      if (f >= kInf) return -std::numeric_limits<double>::infinity();
      return (static_cast<double>(f) - static_cast<double>(lag.p) * static_cast<double>(*g_.capacity)) /
             static_cast<double>(lag.q);
    };
    auto value_at = [&](double log_lambda) {
      auto lag = make(std::exp(log_lambda));
      return lag.has_value() ? dual(*lag) : -std::numeric_limits<double>::infinity();
    };

    // The dual is concave in the multiplier; golden-section search on its log.
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double lo = std::log(center) - 5.0;
    double hi = std::log(center) + 5.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = value_at(x1);
    double f2 = value_at(x2);
    for (int it = 0; it < 28; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = value_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = value_at(x1);
      }
    }
    const double best = std::exp(f1 >= f2 ? x1 : x2);
    for (double factor : {1.0, 0.7, 1.4}) {
      if (auto lag = make(best * factor); lag.has_value()) lagrangian_.push_back(std::move(*lag));
    }
  }

  // Nodes with the same choices on the decided layers that still feed
  // undecided ones have identical completions; only Pareto-better
  // (objective, resource) pairs are worth expanding.
  void BuildMemo() {
    const std::size_t m = g_.layers;
    frontier_.assign(m + 1, {});
    radix_.assign(m + 1, {});
    memo_.assign(m + 1, {});
    memo_enabled_.assign(m + 1, 0);
    for (std::size_t d = 1; d < m; ++d) {
      std::vector<char> feeds(d, 0);
      for (const auto& b : g_.blocks) {
        if (b.from < d && b.to >= d) feeds[b.from] = 1;
      }
      unsigned __int128 span = 1;
      bool fits = true;
      for (std::size_t u = 0; u < d; ++u) {
        if (!feeds[u]) continue;
        frontier_[d].push_back(u);
        radix_[d].push_back(static_cast<std::uint64_t>(span));
        span *= g_.obj[u].size();
        if (span > (static_cast<unsigned __int128>(1) << 62)) fits = false;
      }
      memo_enabled_[d] = fits;
    }
  }

  // True when an earlier node with the same frontier was at least as good.
  bool Dominated(std::size_t d, Value o, Value r) {
    if (!memo_enabled_[d]) return false;
    std::uint64_t key = 0;
    for (std::size_t x = 0; x < frontier_[d].size(); ++x) {
      key += radix_[d][x] * choice_[frontier_[d][x]];
    }
    auto [it, inserted] = memo_[d].try_emplace(key);
    if (!inserted && it->second.Dominates(o, r)) return true;
    if (memo_entries_ < kMemoLimit) {
      memo_entries_ += static_cast<std::uint64_t>(it->second.Insert(o, r));
    }
    return false;
  }

  static Value CeilDiv(__int128 num, Value den) {
    if (num >= 0) return static_cast<Value>((num + den - 1) / den);
    return static_cast<Value>(num / den);
  }

  // Objective bound for the node with layers < d fixed, or kInf if the node
  // cannot be completed within the budget.
  Value Bound(std::size_t d, Value obj_so_far, Value res_so_far) const {
    Value rest = obj_bound_.Remaining(d, choice_);
    if (g_.capacity.has_value()) {
      const Value cap = *g_.capacity;
      if (SatAdd(res_so_far, res_bound_.Remaining(d, choice_)) > cap) return kInf;
      const Value room = cap - res_so_far - res_bound_.EdgeTerms(d, choice_);
      const Value lp = knapsack_.Bound(d, room);
      if (lp >= kInf) return kInf;
      rest = std::max(rest, SatAdd(lp, obj_bound_.EdgeTerms(d, choice_)));
      for (const auto& lag : lagrangian_) {
        const Value f = lag.forest.Remaining(d, choice_);
        if (f >= kInf) continue;
        const __int128 num = static_cast<__int128>(f) -
                             static_cast<__int128>(lag.p) * (cap - res_so_far);
        rest = std::max(rest, CeilDiv(num, lag.q));
      }
    }
    return SatAdd(obj_so_far, rest);
  }

  std::pair<Value, Value> Step(std::size_t d, std::size_t j, Value o, Value r) const {
    o = SatAdd(o, g_.obj[d][j]);
    r = SatAdd(r, g_.res[d][j]);
    for (std::size_t e : g_.in_blocks[d]) {
      const auto& b = g_.blocks[e];
      o = SatAdd(o, b.obj[choice_[b.from] * b.cols + j]);
      r = SatAdd(r, b.res[choice_[b.from] * b.cols + j]);
    }
    return {o, r};
  }

  bool WithinCapacity(Value r) const { return !g_.capacity.has_value() || r <= *g_.capacity; }

  // Upper bounds from a best-bound dive and from rounding the root LP. They
  // cap the search at their value without becoming the incumbent, so
  // tie-breaking stays with the depth-first order.
  void Seed() {
    auto offer = [&](const std::vector<std::size_t>& c, Value value) {
      if (value < seed_value_) {
        seed_ = c;
        seed_value_ = value;
        cutoff_ = value + 1;
      }
    };

    Value o = 0;
    Value r = 0;
    bool complete = true;
    for (std::size_t d = 0; d < g_.layers && complete; ++d) {
      const bool last = d + 1 == g_.layers;
      std::optional<std::size_t> pick;
      Value pick_bound = kInf;
      std::pair<Value, Value> pick_step;
      for (std::size_t j : branch_[d]) {
        choice_[d] = j;
        const auto step = Step(d, j, o, r);
        const Value b = last ? (WithinCapacity(step.second) ? step.first : kInf)
                             : Bound(d + 1, step.first, step.second);
        if (b < pick_bound) {
          pick = j;
          pick_bound = b;
          pick_step = step;
        }
      }
      if (!pick.has_value()) {
        complete = false;
        break;
      }
      choice_[d] = *pick;
      std::tie(o, r) = pick_step;
    }
    if (complete && WithinCapacity(r)) offer(choice_, o);

    if (g_.capacity.has_value()) {
      auto rounded = knapsack_.RoundedRoot(*g_.capacity);
      if (rounded.has_value()) {
        bool ok = true;
        Value ro = 0;
        Value rr = 0;
        for (std::size_t d = 0; d < g_.layers && ok; ++d) {
          ok = g_.allowed[d][(*rounded)[d]];
          choice_[d] = (*rounded)[d];
          std::tie(ro, rr) = Step(d, choice_[d], ro, rr);
        }
        if (ok && WithinCapacity(rr)) offer(choice_, ro);
      }
    }
  }

  void Dive(std::size_t d, Value obj_so_far, Value res_so_far) {
    const bool last = d + 1 == g_.layers;
    for (std::size_t j : branch_[d]) {
      if (aborted_) return;
      if ((++nodes_ & 1023) == 0 && deadline_.has_value() && Clock::now() > *deadline_) {
        aborted_ = true;
        return;
      }
      choice_[d] = j;
      const auto [o, r] = Step(d, j, obj_so_far, res_so_far);
      if (last) {
        if (WithinCapacity(r) && o < cutoff_) {
          best_ = choice_;
          best_value_ = o;
          cutoff_ = o;
        }
        continue;
      }
      if (Bound(d + 1, o, r) >= cutoff_) continue;
      if (Dominated(d + 1, o, r)) continue;
      Dive(d + 1, o, r);
    }
  }

  static constexpr std::uint64_t kMemoLimit = 8'000'000;

  const GroupedModel& g_;
  std::optional<Clock::time_point> deadline_;
  ForestBound obj_bound_;
  ForestBound res_bound_;
  KnapsackBound knapsack_;
  std::vector<Lagrangian> lagrangian_;
  std::vector<std::vector<std::size_t>> branch_;
  std::vector<std::vector<std::size_t>> frontier_;
  std::vector<std::vector<std::uint64_t>> radix_;
  std::vector<std::unordered_map<std::uint64_t, ParetoSet>> memo_;
  std::vector<char> memo_enabled_;
  std::uint64_t memo_entries_ = 0;
  std::vector<std::size_t> choice_;
  std::optional<std::vector<std::size_t>> best_;
  Value best_value_ = kInf;
  std::optional<std::vector<std::size_t>> seed_;
  Value seed_value_ = kInf;
  Value cutoff_ = kInf;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

inline SolveOutcome Finish(const IlpProblem& p, SolveStatus status,
                           std::optional<std::vector<std::size_t>> choice,
                           std::uint64_t lower_bound, std::uint64_t nodes,
                           Search::Clock::time_point start) {
  SolveOutcome out;
  out.status = status;
  out.lower_bound = lower_bound;
  out.stats.nodes = nodes;
  if (choice.has_value()) {
    const auto x = CompleteAssignment(p, *choice);
    if (!IsFeasible(p, x)) {
      throw Error(ErrorCode::kInvalidSelection, "solver produced an assignment violating the ILP");
    }
    out.objective = static_cast<std::uint64_t>(ObjectiveValue(p, x));
    out.selection = MakeSelection(*p.network, std::move(*choice));
    if (status == SolveStatus::kOptimal) out.lower_bound = *out.objective;
  }
  out.stats.wall_seconds =
      std::chrono::duration<double>(Search::Clock::now() - start).count();
  return out;
}

inline SolveOutcome SolveWorkspace(const IlpProblem& p, GroupedModel g,
                                   std::optional<Search::Clock::time_point> deadline,
                                   Search::Clock::time_point start) {
  // Domain of W: distinct footprints, from the smallest value every layer can meet.
  Value floor = 0;
  std::vector<Value> domain;
  for (std::size_t i = 0; i < g.layers; ++i) {
    Value layer_min = kInf;
    for (std::size_t j = 0; j < g.peak[i].size(); ++j) {
      if (!g.allowed[i][j]) continue;
      layer_min = std::min(layer_min, g.peak[i][j]);
      domain.push_back(g.peak[i][j]);
    }
    floor = std::max(floor, layer_min);
  }
  if (floor >= kInf) return Finish(p, SolveStatus::kInfeasible, std::nullopt, 0, 0, start);
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  domain.erase(domain.begin(), std::lower_bound(domain.begin(), domain.end(), floor));

  const auto base_allowed = g.allowed;
  for (auto& row : g.obj) std::fill(row.begin(), row.end(), 0);
  for (auto& b : g.blocks) std::fill(b.obj.begin(), b.obj.end(), 0);

  std::uint64_t nodes = 0;
  // Smallest W in domain[lo, hi) admitting a feasible selection.
  std::size_t lo = 0;
  std::size_t hi = domain.size();
  std::optional<std::vector<std::size_t>> witness;
  bool aborted = false;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    for (std::size_t i = 0; i < g.layers; ++i) {
      for (std::size_t j = 0; j < g.peak[i].size(); ++j) {
        g.allowed[i][j] = base_allowed[i][j] && g.peak[i][j] <= domain[mid];
      }
    }
    Search search(g, deadline);
    auto r = search.Run();
    nodes += r.nodes;
    if (r.aborted) {
      aborted = true;
      break;
    }
    if (r.best.has_value()) {
      witness = std::move(r.best);
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::uint64_t proven = lo < domain.size() ? static_cast<std::uint64_t>(domain[lo])
                                                  : static_cast<std::uint64_t>(domain.back());
  if (aborted) return Finish(p, SolveStatus::kTimedOut, std::move(witness), proven, nodes, start);
  if (!witness.has_value()) {
    return Finish(p, SolveStatus::kInfeasible, std::nullopt, 0, nodes, start);
  }
  return Finish(p, SolveStatus::kOptimal, std::move(witness), proven, nodes, start);
}

}  // namespace bnb_internal

inline SolveOutcome solve_bnb(const IlpProblem& problem,
                              std::optional<std::chrono::milliseconds> time_limit = std::nullopt) {
  using bnb_internal::Search;
  if (problem.network == nullptr) {
    throw Error(ErrorCode::kInvalidRequest, "problem is not bound to a network");
  }
  const auto start = Search::Clock::now();
  if (!time_limit.has_value()) time_limit = problem.request.time_limit;
  std::optional<Search::Clock::time_point> deadline;
  if (time_limit.has_value()) deadline = start + *time_limit;

  auto g = bnb_internal::Compile(problem);
  if (g.minimize_peak) return bnb_internal::SolveWorkspace(problem, std::move(g), deadline, start);

  Search search(g, deadline);
  auto r = search.Run();
  const auto bound = static_cast<std::uint64_t>(r.root_bound);
  if (r.aborted) {
    return bnb_internal::Finish(problem, SolveStatus::kTimedOut, std::move(r.best), bound,
                                r.nodes, start);
  }
  if (!r.best.has_value()) {
    return bnb_internal::Finish(problem, SolveStatus::kInfeasible, std::nullopt, bound, r.nodes,
                                start);
  }
  return bnb_internal::Finish(problem, SolveStatus::kOptimal, std::move(r.best), bound, r.nodes,
                              start);
}

}  // namespace primsel

#endif  // PRIMSEL_BRANCH_AND_BOUND_HPP_
