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

// File formats: profile, selection and plan JSON, frontier and comparison
// CSV. JSON keys are written in a fixed order so equal inputs give equal bytes.

#ifndef PRIMSEL_IO_HPP_
#define PRIMSEL_IO_HPP_

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "primsel/core.hpp"
#include "primsel/cost.hpp"
#include "primsel/pareto.hpp"
#include "primsel/strategies.hpp"
#include "primsel/workspace.hpp"

namespace primsel {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace io_internal {

[[noreturn]] inline void Fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

inline void ExpectObject(const Json& j, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) Fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) Fail(where, "unknown field '" + key + "'");
  }
}

inline const Json& Field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) Fail(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::uint64_t U64(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned()) Fail(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::string Str(const Json& j, const std::string& where) {
  if (!j.is_string()) Fail(where, "expected a string");
  return j.get<std::string>();
}

inline void CheckSchema(const Json& j, const std::string& where) {
  auto it = j.find("schema");
  if (it != j.end() && (!it->is_number_unsigned() || it->get<int>() != kSchemaVersion)) {
    Fail(where, "unsupported schema version");
  }
}

inline Json Parse(std::istream& in, const std::string& where) {
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(where, e.what());
  }
}

inline std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace io_internal

// ---- profile -------------------------------------------------------------

inline NetworkProfile ProfileFromJson(const Json& j) {
  using namespace io_internal;
  ExpectObject(j, "profile", {"schema", "name", "layers", "edges", "layout_transforms"});
  CheckSchema(j, "profile");
  NetworkProfile p;
  p.name = Str(Field(j, "name", "profile"), "profile.name");

  const Json& layers = Field(j, "layers", "profile");
  if (!layers.is_array()) Fail("profile.layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    ExpectObject(layers[i], where, {"layer_id", "candidates"});
    LayerProfile layer;
    layer.layer_id = Str(Field(layers[i], "layer_id", where), where + ".layer_id");
    const Json& cands = Field(layers[i], "candidates", where);
    if (!cands.is_array()) Fail(where + ".candidates", "expected an array");
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const std::string cw = where + ".candidates[" + std::to_string(k) + "]";
      const Json& c = cands[k];
      ExpectObject(c, cw, {"id", "time_us", "memory_bytes", "input_layout", "output_layout",
                           "buffer_breakdown"});
      PrimitiveCandidate cand;
      cand.id = Str(Field(c, "id", cw), cw + ".id");
      cand.time_cost = U64(Field(c, "time_us", cw), cw + ".time_us");
      cand.memory_cost = U64(Field(c, "memory_bytes", cw), cw + ".memory_bytes");
      cand.input_layout.name = Str(Field(c, "input_layout", cw), cw + ".input_layout");
      cand.output_layout.name = Str(Field(c, "output_layout", cw), cw + ".output_layout");
      if (auto it = c.find("buffer_breakdown"); it != c.end()) {
        const std::string bw = cw + ".buffer_breakdown";
        ExpectObject(*it, bw, {"input", "output", "weights", "scratch"});
        BufferBreakdown b;
        b.input = U64(Field(*it, "input", bw), bw + ".input");
        b.output = U64(Field(*it, "output", bw), bw + ".output");
        b.weights = U64(Field(*it, "weights", bw), bw + ".weights");
        b.scratch = U64(Field(*it, "scratch", bw), bw + ".scratch");
        cand.buffers = b;
      }
      layer.candidates.push_back(std::move(cand));
    }
    p.layers.push_back(std::move(layer));
  }

  if (auto it = j.find("edges"); it != j.end()) {
    if (!it->is_array()) Fail("profile.edges", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "edges[" + std::to_string(i) + "]";
      const Json& e = (*it)[i];
      ExpectObject(e, where, {"from", "to", "matrix"});
      Edge edge;
      edge.from = Str(Field(e, "from", where), where + ".from");
      edge.to = Str(Field(e, "to", where), where + ".to");
      if (auto m = e.find("matrix"); m != e.end()) {
        if (!m->is_array()) Fail(where + ".matrix", "expected an array of rows");
        std::vector<std::vector<Duration>> rows;
        for (std::size_t r = 0; r < m->size(); ++r) {
          const std::string rw = where + ".matrix[" + std::to_string(r) + "]";
          if (!(*m)[r].is_array()) Fail(rw, "expected an array");
          std::vector<Duration> row;
          for (const auto& v : (*m)[r]) row.push_back(U64(v, rw));
          rows.push_back(std::move(row));
        }
        try {
          edge.matrix = TransitionMatrix::FromRows(rows);
        } catch (const Error& err) {
          Fail(where + ".matrix", err.what());
        }
      }
      p.edges.push_back(std::move(edge));
    }
  }

  if (auto it = j.find("layout_transforms"); it != j.end()) {
    if (!it->is_array()) Fail("profile.layout_transforms", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "layout_transforms[" + std::to_string(i) + "]";
      const Json& t = (*it)[i];
      ExpectObject(t, where, {"from_layout", "to_layout", "layer", "cost_us"});
      LayoutTransform lt;
      lt.from_layout.name = Str(Field(t, "from_layout", where), where + ".from_layout");
      lt.to_layout.name = Str(Field(t, "to_layout", where), where + ".to_layout");
      if (auto l = t.find("layer"); l != t.end()) lt.layer = Str(*l, where + ".layer");
      lt.cost = U64(Field(t, "cost_us", where), where + ".cost_us");
      p.layout_transforms.push_back(std::move(lt));
    }
  }
  return p;
}

inline Json ProfileToJson(const NetworkProfile& p) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["name"] = p.name;
  j["layers"] = Json::array();
  for (const auto& layer : p.layers) {
    Json l;
    l["layer_id"] = layer.layer_id;
    l["candidates"] = Json::array();
    for (const auto& c : layer.candidates) {
      Json cj;
      cj["id"] = c.id;
      cj["time_us"] = c.time_cost;
      cj["memory_bytes"] = c.memory_cost;
      cj["input_layout"] = c.input_layout.name;
      cj["output_layout"] = c.output_layout.name;
      if (c.buffers.has_value()) {
        cj["buffer_breakdown"] = {{"input", c.buffers->input},
                                  {"output", c.buffers->output},
                                  {"weights", c.buffers->weights},
                                  {"scratch", c.buffers->scratch}};
      }
      l["candidates"].push_back(std::move(cj));
    }
    j["layers"].push_back(std::move(l));
  }
  j["edges"] = Json::array();
  for (const auto& e : p.edges) {
    Json ej;
    ej["from"] = e.from;
    ej["to"] = e.to;
    if (e.matrix.has_value()) ej["matrix"] = e.matrix->ToRows();
    j["edges"].push_back(std::move(ej));
  }
  if (!p.layout_transforms.empty()) {
    j["layout_transforms"] = Json::array();
    for (const auto& t : p.layout_transforms) {
      Json tj;
      tj["from_layout"] = t.from_layout.name;
      tj["to_layout"] = t.to_layout.name;
      if (t.layer.has_value()) tj["layer"] = *t.layer;
      tj["cost_us"] = t.cost;
      j["layout_transforms"].push_back(std::move(tj));
    }
  }
  return j;
}

inline NetworkProfile ParseProfile(std::istream& in) {
  return ProfileFromJson(io_internal::Parse(in, "profile"));
}

inline NetworkProfile ParseProfile(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseProfile(in);
}

inline std::string SerializeProfile(const NetworkProfile& p) {
  return io_internal::Dump(ProfileToJson(p));
}

// ---- selection -----------------------------------------------------------

inline Json BreakdownToJson(const ObjectiveBreakdown& b) {
  Json j;
  j["exec_time_us"] = b.exec_time;
  j["transform_time_us"] = b.transform_time;
  j["total_time_us"] = b.total_time;
  j["memory_sum_bytes"] = b.memory_sum;
  j["workspace_max_bytes"] = b.workspace_max;
  return j;
}

inline Json SelectionToJson(const Network& net, const Selection& s) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["profile"] = net.profile().name;
  j["assignment"] = Json::array();
  for (std::size_t i = 0; i < s.choice.size(); ++i) {
    Json a;
    a["layer"] = net.layer(i).layer_id;
    a["index"] = s.choice[i];
    a["candidate"] = net.candidate(i, s.choice[i]).id;
    j["assignment"].push_back(std::move(a));
  }
  j["breakdown"] = BreakdownToJson(s.breakdown);
  return j;
}

inline std::string SerializeSelection(const Network& net, const Selection& s) {
  return io_internal::Dump(SelectionToJson(net, s));
}

// Candidate indices of a selection document, checked against `net`. Any
// recorded breakdown is ignored; callers re-evaluate.
inline std::vector<std::size_t> ChoiceFromJson(const Network& net, const Json& j) {
  using namespace io_internal;
  ExpectObject(j, "selection", {"schema", "profile", "assignment", "breakdown", "status"});
  CheckSchema(j, "selection");
  const Json& assignment = Field(j, "assignment", "selection");
  if (!assignment.is_array()) Fail("selection.assignment", "expected an array");
  if (assignment.size() != net.layer_count()) {
    Fail("selection.assignment", "expected " + std::to_string(net.layer_count()) + " entries");
  }
  std::vector<std::size_t> choice(net.layer_count());
  std::vector<char> seen(net.layer_count(), 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const std::string where = "assignment[" + std::to_string(i) + "]";
    const Json& a = assignment[i];
    ExpectObject(a, where, {"layer", "index", "candidate"});
    const std::string layer = Str(Field(a, "layer", where), where + ".layer");
    auto pos = net.find_layer(layer);
    if (!pos.has_value()) Fail(where, "unknown layer '" + layer + "'");
    if (seen[*pos]) Fail(where, "layer '" + layer + "' assigned twice");
    seen[*pos] = 1;
    const std::uint64_t index = U64(Field(a, "index", where), where + ".index");
    if (index >= net.candidate_count(*pos)) Fail(where, "candidate index out of range");
    if (auto c = a.find("candidate"); c != a.end()) {
      if (Str(*c, where + ".candidate") != net.candidate(*pos, index).id) {
        Fail(where, "candidate id does not match index");
      }
    }
    choice[*pos] = static_cast<std::size_t>(index);
  }
  return choice;
}

inline std::vector<std::size_t> ParseChoice(const Network& net, std::istream& in) {
  return ChoiceFromJson(net, io_internal::Parse(in, "selection"));
}

// ---- plan ----------------------------------------------------------------

inline std::string SerializePlan(const Network& net, const ExecutionPlan& plan) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["profile"] = net.profile().name;
  j["peak_workspace_bytes"] = plan.peak_workspace;
  j["steps"] = Json::array();
  for (const auto& s : plan.steps) {
    Json sj;
    sj["layer"] = s.layer_id;
    sj["index"] = s.candidate;
    sj["candidate"] = s.candidate_id;
    sj["input_buffer"] = std::string(1, SlotName(s.input_buffer));
    sj["output_buffer"] = std::string(1, SlotName(s.output_buffer));
    sj["input_bytes"] = s.buffers.input;
    sj["output_bytes"] = s.buffers.output;
    sj["weights_bytes"] = s.buffers.weights;
    sj["scratch_bytes"] = s.buffers.scratch;
    sj["step_bytes"] = s.step_bytes;
    j["steps"].push_back(std::move(sj));
  }
  return io_internal::Dump(j);
}

// ---- CSV -----------------------------------------------------------------

inline constexpr std::string_view kMissingCell = "NA";

// Frontier CSV plus the sidecar holding each referenced selection.
struct FrontierFiles {
  std::string csv;
  std::string sidecar;
};

inline FrontierFiles WriteFrontier(const Network& net, std::span<const FrontierPoint> points) {
  std::ostringstream csv;
  csv << "budget,achieved_memory_bytes,achieved_time_us,status,selection_id\n";
  Json side;
  side["schema"] = kSchemaVersion;
  side["profile"] = net.profile().name;
  side["selections"] = Json::object();
  std::size_t next = 0;
  for (const auto& p : points) {
    csv << p.budget << ',';
    if (p.selection.has_value()) {
      const std::string id = "s" + std::to_string(next++);
      Json sel = SelectionToJson(net, *p.selection);
      sel.erase("schema");
      sel.erase("profile");
      side["selections"][id] = std::move(sel);
      csv << p.achieved_memory << ',' << p.achieved_time << ',' << SolveStatusName(p.status) << ','
          << id << '\n';
    } else {
      csv << kMissingCell << ',' << kMissingCell << ',' << SolveStatusName(p.status) << ','
          << kMissingCell << '\n';
    }
  }
  return {csv.str(), io_internal::Dump(side)};
}

inline std::string FormatRatio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string WriteComparison(const ComparisonReport& report) {
  std::ostringstream csv;
  csv << "budget,ilp_time,greedy_time,speedup\n";
  auto time_cell = [](const MethodResult* m) {
    return m != nullptr && m->feasible ? std::to_string(m->selection->breakdown.total_time)
                                       : std::string(kMissingCell);
  };
  for (const auto& row : report.rows) {
    auto speedup = report.speedup(row, "ilp");
    csv << row.budget << ',' << time_cell(row.find("ilp")) << ',' << time_cell(row.find("greedy"))
        << ',' << (speedup.has_value() ? FormatRatio(*speedup) : std::string(kMissingCell))
        << '\n';
  }
  return csv.str();
}

}  // namespace primsel

#endif  // PRIMSEL_IO_HPP_
