// Copyright 2026 The wrapipe Authors.
//
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

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/profiler.hpp"

namespace wrapipe {

struct PackPlan {
  std::vector<LayerRange> packs;
  std::vector<Nanos> times;
  std::vector<Bytes> memories;

  int pack_count() const { return static_cast<int>(packs.size()); }
};

// Extra per-pack memory charged on top of the summed layer footprints,
// given the pack's layer interval in the packed range's coordinates.
using PackOverhead = std::function<Bytes(LayerRange)>;

// Balanced-time packing over explicit per-layer times and footprints.
// Tries S = ceil(sum(m) / capacity), S+1, ... and returns the first split
// whose packs all fit. Split points are the first prefix sums reaching each
// accumulated target k * sum(t) / S (ties keep the boundary layer in the
// earlier pack). Degenerate empty packs merge into their left neighbour.
PackPlan balanced_time_pack(std::span<const Nanos> times, std::span<const Bytes> mems,
                            Bytes capacity, const PackOverhead& overhead = {});

// Cost-model form. For the forward pass with `backward` given, packs the
// layers before the last backward pack and then appends that pack verbatim.
// Forward packs are charged their checkpointed input activation.
PackPlan balanced_time_pack(Pass pass, int u, const ProfileSet& profiles, Bytes capacity,
                            const std::optional<PackPlan>& backward = std::nullopt);

// Left-to-right greedy: grow the current pack until the next layer would
// overflow the capacity.
PackPlan greedy_maxpack(std::span<const Bytes> mems, Bytes capacity);
PackPlan greedy_maxpack(Pass pass, int u, const ProfileSet& profiles, Bytes capacity,
                        const std::optional<PackPlan>& backward = std::nullopt);

// Recomputes pack times/memories from the cost model.
PackPlan describe_packs(Pass pass, int u, const ProfileSet& profiles, std::vector<LayerRange> packs);

}  // namespace wrapipe
