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

// Shared vocabulary: machine description, layer graphs, configurations and
// the tensor taxonomy. All byte counts are int64 bytes and all times are
// int64 nanoseconds.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wrapipe {

using Nanos = std::int64_t;
using Bytes = std::int64_t;

inline constexpr Bytes kKiB = 1024;
inline constexpr Bytes kMiB = 1024 * kKiB;
inline constexpr Bytes kGiB = 1024 * kMiB;
inline constexpr Nanos kMicrosecond = 1000;
inline constexpr Nanos kMillisecond = 1000 * kMicrosecond;
inline constexpr Nanos kSecond = 1000 * kMillisecond;

// Time to move `bytes` over a link of `bytes_per_second`, rounded up to the
// next nanosecond.
Nanos transfer_time(Bytes bytes, std::int64_t bytes_per_second);

struct MachineModel {
  int gpu_count = 1;
  Bytes gpu_mem_capacity = 0;
  std::int64_t pcie_bandwidth = 0;       // bytes/s, per direction per link
  std::int64_t root_link_bandwidth = 0;  // bytes/s, shared CPU uplink
  // Switch groups; p2p inside a group bypasses the root link.
  std::vector<std::vector<int>> p2p_groups;
  bool cpu_offload_update = false;
  std::int64_t update_cpu_rate = 0;  // bytes/s

  // Fills defaults (root link = PCIe, one group per GPU) and checks
  // invariants. Throws kInvalidArgument.
  void validate();
  int group_of(int gpu) const;
};

struct LayerNode {
  int id = 0;
  std::string kind;
  std::vector<int> predecessors;
};

// An identity relay chain carrying `source`'s output to `destination`
// through every intermediate chain position.
struct Relay {
  int source = 0;       // chain position
  int destination = 0;  // chain position
  std::vector<int> positions;
};

struct LayerChain {
  // Node ids in execution order; position p runs node layers[p]. Synthetic
  // join nodes get ids past the original range.
  std::vector<int> layers;
  std::vector<std::string> kinds;
  std::vector<Relay> relays;
  std::vector<std::string> diagnostics;
  // Original edges in chain positions (u < v).
  std::vector<std::pair<int, int>> edges;

  int size() const { return static_cast<int>(layers.size()); }
  // Chain positions whose output crosses the boundary after `position`
  // through a relay (excludes `position` itself).
  std::vector<int> relayed_across(int position) const;
  // Bytes moved along all relay hops given per-position output sizes.
  Bytes relay_traffic(const std::vector<Bytes>& output_bytes) const;
};

LayerChain serialize_graph(const std::vector<LayerNode>& dag);

enum class Mode {
  kGroupedDP,       // data parallel with input-batch grouping and jit update
  kWrapAroundPP,    // wrap-around pipeline with grouping and jit update
  kPerGpuSwapDP,    // baseline: data parallel with per-GPU swapping
  kPerGpuSwapPP,    // baseline: stage-pinned pipeline with per-GPU swapping
};

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);
bool is_data_parallel(Mode mode);
bool is_baseline(Mode mode);

// Inclusive contiguous layer interval.
struct LayerRange {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  bool contains(int layer) const { return first <= layer && layer <= last; }
  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

// "L0-3" style notation; singletons print as "L5".
std::string pack_label(const LayerRange& range);
std::string pack_list_label(const std::vector<LayerRange>& packs);

struct Configuration {
  int u_f = 1;
  std::vector<LayerRange> p_f;
  int u_b = 1;
  std::vector<LayerRange> p_b;
  int minibatch = 1;
  Mode mode = Mode::kWrapAroundPP;
};

// Packs are contiguous, disjoint, ordered and cover [0, layer_count).
bool covers_contiguously(const std::vector<LayerRange>& packs, int layer_count);
bool shares_last_pack(const Configuration& cfg);
// Throws kInvalidConfiguration describing the first violated invariant.
void validate_configuration(const Configuration& cfg, int layer_count);

enum class TensorKind { kX, kY, kDX, kDY, kW, kDW, kK, kSX };
inline constexpr int kTensorKindCount = 8;
std::string_view tensor_kind_name(TensorKind kind);
TensorKind parse_tensor_kind(std::string_view name);

enum class ChannelKind { kCpuGpuSwap, kPeer2Peer, kMessagePassing, kSharedMemory };
inline constexpr int kChannelKindCount = 4;
std::string_view channel_kind_name(ChannelKind kind);
ChannelKind parse_channel_kind(std::string_view name);

// Per-GPU minibatch shares for data-parallel modes: ceil(D/N) for the first
// D mod N GPUs, floor(D/N) for the rest.
std::vector<int> data_parallel_shares(int minibatch, int gpus);
// Splits `samples` into microbatches of `u`, the remainder forming a final
// smaller microbatch.
std::vector<int> microbatch_group(int samples, int u);

}  // namespace wrapipe
