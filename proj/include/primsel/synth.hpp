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

// Seeded synthetic profiles standing in for on-device measurements.
//
// Each candidate index is a primitive family shared by every layer, so
// uniform selections are meaningful. A family has a fixed speed factor and a
// scratch-memory factor that grows as the family gets faster (the usual
// im2col-versus-direct trade). Layers differ in work, activation and weight
// sizes. Layout conversions are priced per consuming layer from its input
// activation size.

#ifndef PRIMSEL_SYNTH_HPP_
#define PRIMSEL_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "primsel/core.hpp"

namespace primsel {

enum class Topology { kChain, kForkJoin };

struct GeneratorOptions {
  std::size_t layers = 8;
  std::size_t candidates = 4;
  std::uint64_t seed = 1;
  Topology topology = Topology::kChain;
  std::string name;
};

namespace synth_internal {

// Engine output mapped by hand: the std distributions are not specified
// bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Unit(); }
  double LogUniform(double lo, double hi) {
    return std::exp(Uniform(std::log(lo), std::log(hi)));
  }
  bool Coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

inline std::string FamilyName(std::size_t f) {
  static const char* const kKinds[] = {"direct", "im2col", "im2row", "kn2row",
                                       "kn2col", "winograd", "mec", "fft"};
  constexpr std::size_t kCount = sizeof(kKinds) / sizeof(kKinds[0]);
  std::string name = kKinds[f % kCount];
  if (f >= kCount) name += "-v" + std::to_string(f / kCount);
  return name;
}

inline std::uint64_t Round(double v) { return static_cast<std::uint64_t>(std::llround(std::max(v, 1.0))); }

}  // namespace synth_internal

inline NetworkProfile GenerateProfile(const GeneratorOptions& opts) {
  using synth_internal::Rng;
  if (opts.layers == 0 || opts.candidates == 0) {
    throw Error(ErrorCode::kInvalidRequest, "generator needs at least one layer and candidate");
  }
  Rng rng(opts.seed);
  const DataLayout chw{"CHW"};
  const DataLayout hwc{"HWC"};

  struct Family {
    double speed;    // time multiplier; larger is slower
    double scratch;  // scratch bytes per input activation byte
    DataLayout in;
    DataLayout out;
  };
  std::vector<Family> families(opts.candidates);
  for (std::size_t f = 0; f < opts.candidates; ++f) {
    Family& fam = families[f];
    if (f == 0) {
      fam.speed = 8.0;
      fam.scratch = 0.0;
      fam.in = chw;
      fam.out = chw;
      continue;
    }
    fam.speed = rng.LogUniform(1.0, 7.0);
    fam.scratch = std::pow(8.0 / fam.speed, 1.6) * rng.Uniform(0.3, 0.9);
    fam.in = rng.Coin() ? chw : hwc;
    fam.out = rng.Coin() ? chw : hwc;
  }

  NetworkProfile profile;
  profile.name = opts.name.empty() ? "synthetic-" + std::to_string(opts.layers) + "x" +
                                         std::to_string(opts.candidates) + "-s" +
                                         std::to_string(opts.seed)
                                   : opts.name;

  std::vector<double> activation(opts.layers + 1);
  for (auto& a : activation) a = rng.LogUniform(32.0 * 1024, 2.0 * 1024 * 1024);

  for (std::size_t i = 0; i < opts.layers; ++i) {
    LayerProfile layer;
    layer.layer_id = "conv" + std::to_string(i);
    const double work = rng.LogUniform(200.0, 20000.0);
    const auto weights = synth_internal::Round(rng.LogUniform(4.0 * 1024, 1024.0 * 1024));
    const auto in_bytes = synth_internal::Round(activation[i]);
    const auto out_bytes = synth_internal::Round(activation[i + 1]);
    for (std::size_t f = 0; f < opts.candidates; ++f) {
      const Family& fam = families[f];
      PrimitiveCandidate c;
      c.id = synth_internal::FamilyName(f);
      c.time_cost = synth_internal::Round(work * fam.speed * rng.Uniform(0.85, 1.2));
      const std::uint64_t scratch =
          fam.scratch == 0.0 ? 0
                             : synth_internal::Round(activation[i] * fam.scratch *
                                                     rng.Uniform(0.8, 1.25));
      c.buffers = BufferBreakdown{in_bytes, out_bytes, weights, scratch};
      c.memory_cost = c.buffers->Total();
      c.input_layout = fam.in;
      c.output_layout = fam.out;
      layer.candidates.push_back(std::move(c));
    }
    profile.layers.push_back(std::move(layer));

    // Converting the input activation costs about a microsecond per KiB.
    const double per_kib = rng.Uniform(0.6, 1.4);
    const auto cost = synth_internal::Round(activation[i] / 1024.0 * per_kib);
    profile.layout_transforms.push_back({chw, hwc, profile.layers.back().layer_id, cost});
    profile.layout_transforms.push_back(
        {hwc, chw, profile.layers.back().layer_id, synth_internal::Round(cost * 0.9)});
  }

  auto link = [&](std::size_t from, std::size_t to) {
    profile.edges.push_back({profile.layers[from].layer_id, profile.layers[to].layer_id, {}});
  };
  // Fork-join follows an inception-style block: a stem layer fans out into
  // four branches (1, 2, 2 and 1 layers deep) that all join the next layer.
  std::vector<std::size_t> frontier = {0};
  std::size_t next = 1;
  auto add_after = [&](const std::vector<std::size_t>& preds) {
    const std::size_t id = next++;
    for (std::size_t p : preds) link(p, id);
    return id;
  };
  while (next < opts.layers) {
    const std::size_t remaining = opts.layers - next;
    if (opts.topology == Topology::kForkJoin && next >= 3 && remaining >= 8) {
      const std::size_t stem = add_after(frontier);
      const std::size_t b1 = add_after({stem});
      const std::size_t b2 = add_after({add_after({stem})});
      const std::size_t b3 = add_after({add_after({stem})});
      const std::size_t b4 = add_after({stem});
      frontier = {b1, b2, b3, b4};
    } else {
      frontier = {add_after(frontier)};
    }
  }
  return profile;
}

}  // namespace primsel

#endif  // PRIMSEL_SYNTH_HPP_
