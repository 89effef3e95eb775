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

// Per-iteration task graphs: forward tasks over P_F, backward and jit-update
// pairs over Reverse(P_B), device binding and channel-annotated tensor
// routes between tasks.

#pragma once

#include <string>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/profiler.hpp"

namespace wrapipe {

enum class TaskType { kForward, kBackward, kUpdate };
std::string_view task_type_name(TaskType type);
TaskType parse_task_type(std::string_view name);

struct Device {
  enum class Kind { kGpu, kCpu };
  Kind kind = Kind::kGpu;
  int id = 0;

  friend auto operator<=>(const Device&, const Device&) = default;
  std::string label() const;  // "GPU#0" / "CPU#0"
};

inline constexpr int kHost = -1;

// One tensor edge of a task. `peer` is the producing task for inputs and
// the consuming task for outputs, or kHost for CPU memory.
struct Route {
  TensorKind kind = TensorKind::kW;
  ChannelKind channel = ChannelKind::kCpuGpuSwap;
  int peer = kHost;
  std::vector<int> layers;  // per-layer entries carried on this channel
};

struct Task {
  int index = 0;
  LayerRange pack;
  TaskType type = TaskType::kForward;
  std::vector<int> microbatches;  // group of microbatch sizes
  int first_sample = 0;           // sample offset of the group in the minibatch
  Device device;
  int gpu = 0;  // GPU whose links carry this task's transfers
  bool recompute = false;
  std::vector<Route> inputs;
  std::vector<Route> outputs;
  std::vector<int> after;  // extra completion dependencies

  int samples() const;
};

struct TaskGraph {
  Mode mode = Mode::kWrapAroundPP;
  int gpu_count = 1;
  int layer_count = 0;
  std::vector<Task> tasks;
  std::vector<std::string> notes;

  // Producer -> consumer pairs from routes and `after` lists.
  std::vector<std::pair<int, int>> edges() const;
};

TaskGraph generate_task_graph(const Configuration& cfg, const MachineModel& machine,
                              const ProfileSet& profiles);

struct DeviceSchedule {
  Device device;
  std::vector<int> tasks;
};

// Per-device execution order by task index: GPUs first, then CPU processes.
std::vector<DeviceSchedule> unroll_schedule(const TaskGraph& graph);

// Structural checks shared by tests and the CLI; returns violations.
std::vector<std::string> check_task_graph(const TaskGraph& graph);

}  // namespace wrapipe
