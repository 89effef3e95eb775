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

#include <array>
#include <string>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/profiler.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {

enum class Stream { kCompute, kSwapIn, kSwapOut, kP2PIn, kP2POut };
inline constexpr int kStreamsPerGpu = 5;
std::string_view stream_name(Stream stream);

// Flat resource numbering: five streams per GPU, then the host root link
// (in, out), then one update lane per CPU process.
struct ResourceLayout {
  int gpu_count = 1;

  int gpu_stream(int gpu, Stream s) const { return gpu * kStreamsPerGpu + static_cast<int>(s); }
  int root_in() const { return gpu_count * kStreamsPerGpu; }
  int root_out() const { return root_in() + 1; }
  int cpu_update(int cpu) const { return root_out() + 1 + cpu; }
  int count() const { return cpu_update(gpu_count); }
  std::string name(int resource) const;
};

enum class OpKind { kCompute, kTransfer, kMarker };

struct Op {
  OpKind kind = OpKind::kMarker;
  int task = 0;
  int microbatch = -1;  // -1 for task-level ops
  int seq = 0;          // creation order, final tie-break
  std::vector<int> resources;
  Nanos duration = 0;
  Bytes bytes = 0;
  TensorKind tensor = TensorKind::kW;
  ChannelKind channel = ChannelKind::kCpuGpuSwap;
  int gpu = -1;  // GPU whose volume bucket is charged
  std::vector<int> deps;
  std::string label;
};

struct OpGraph {
  ResourceLayout layout;
  std::vector<Op> ops;
};

// Expands a task graph into stream-level operations with explicit
// dependencies, including double-buffered prefetch gating.
OpGraph lower_task_graph(const TaskGraph& graph, const MachineModel& machine, const ProfileSet& profiles);

struct TraceEvent {
  std::string resource;
  int task = 0;
  std::string kind;  // tensor kind for transfers, task type for compute
  std::string label;
  Nanos start = 0;
  Nanos end = 0;
  Bytes bytes = 0;
};

using ChannelVolumes = std::array<Bytes, kChannelKindCount>;

struct SimReport {
  Nanos makespan = 0;
  std::vector<Nanos> gpu_busy;
  std::vector<Nanos> gpu_idle;
  std::vector<ChannelVolumes> gpu_volume;  // per GPU, per channel kind
  ChannelVolumes volume{};                 // global, per channel kind
  // Global bytes per tensor kind and channel kind.
  std::array<ChannelVolumes, kTensorKindCount> tensor_volume{};
  std::vector<TraceEvent> trace;
  std::vector<std::string> lanes;  // resource names in lane order
  std::vector<std::string> notes;

  // Bytes crossing CPU-GPU links for one tensor kind (swaps plus both
  // message-passing legs).
  Bytes swap_volume(TensorKind kind) const;
  Bytes total_swap_volume() const;
};

// Deterministic event-driven run of an op graph. Throws kDeadlockDetected.
SimReport run_op_graph(const OpGraph& ops, const MachineModel& machine);

SimReport simulate(const TaskGraph& graph, const MachineModel& machine, const ProfileSet& profiles);

enum class GanttFormat { kText, kSvg };

struct GanttOptions {
  std::string title;
  // Optional highlighted windows drawn as braces under a lane.
  struct Brace {
    std::string lane;
    Nanos start = 0;
    Nanos end = 0;
    std::string label;
  };
  std::vector<Brace> braces;
  int text_width = 100;
};

std::string render_gantt(const SimReport& report, GanttFormat format, const GanttOptions& options = {});
std::string trace_csv(const SimReport& report);

}  // namespace wrapipe
