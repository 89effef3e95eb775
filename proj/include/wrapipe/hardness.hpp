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

#include <cstdint>
#include <optional>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/profiler.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {

struct ReductionLayer {
  Nanos time = 0;  // p_i
  Bytes size = 0;  // m_i
};

struct ReductionInstance {
  int microbatches = 3;  // B
  int gpus = 2;          // G
  Bytes capacity = 7;    // M
  std::vector<ReductionLayer> layers;
  std::int64_t scale = 0;            // A
  std::vector<std::int64_t> source;  // Partition numbers a_1..a_n

  int layer_count() const { return static_cast<int>(layers.size()); }
};

// Sentinels (8A, 6) x2, then per number a triplet (5A, 4), (a, 2), (5A, 4),
// then sentinels (8A, 6) x2. A defaults to 6 * sum(a).
ReductionInstance build_reduction(const std::vector<std::int64_t>& numbers,
                                  std::optional<std::int64_t> scale = std::nullopt);

// Exact value numerator / denominator.
struct Rational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  bool integral() const { return numerator % denominator == 0; }
  // Throws kNonIntegralT when the value is not an integer.
  std::int64_t value() const;
  double approx() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  bool equals(std::int64_t x) const { return x * denominator == numerator; }
};

// T = (B * sum p + p_first + p_last) / G, kept exact.
Rational target_T(const ReductionInstance& inst);

struct ScheduledItem {
  int pack = 0;
  int microbatch = 0;
  int gpu = 0;
  Nanos start = 0;
  Nanos end = 0;
};

struct SimpleSchedule {
  std::vector<LayerRange> packs;
  std::vector<ScheduledItem> items;  // in (pack, microbatch) order
  Nanos makespan = 0;
};

struct IdleWindow {
  int gpu = 0;
  Nanos start = 0;
  Nanos end = 0;
  bool forced = false;  // before a GPU's first item or after its last
};

// Round-robin evaluation: pack j runs on GPU j mod G; item (j, b) starts
// once its GPU is free and (j-1, b) has finished. Throws
// kCapacityViolation or kInvalidConfiguration.
SimpleSchedule eval_schedule(const ReductionInstance& inst, const std::vector<LayerRange>& packs);
Nanos eval_makespan(const ReductionInstance& inst, const std::vector<LayerRange>& packs);
std::vector<IdleWindow> idle_windows(const ReductionInstance& inst, const SimpleSchedule& schedule);

inline constexpr int kMaxEnumerationLayers = 22;

struct EnumerationResult {
  std::vector<LayerRange> best_packs;
  Nanos best_makespan = 0;
  std::int64_t feasible_partitions = 0;
};

// Exhaustive search over capacity-feasible contiguous partitions. Ties keep
// the lexicographically first witness. Throws kTooLarge past 22 layers.
EnumerationResult enumerate_optimal(const ReductionInstance& inst, int jobs = 1);

struct VerifyResult {
  bool partition_yes = false;
  bool t_achievable = false;
  Rational target;
  Nanos best_makespan = 0;
  std::vector<LayerRange> witness;
  std::vector<int> subset;  // indices of one half when partition_yes
};

// Subset search for an equal split. Throws kTooLarge past 18 numbers.
std::optional<std::vector<int>> find_partition(const std::vector<std::int64_t>& numbers);

VerifyResult verify_reduction(const std::vector<std::int64_t>& numbers,
                              std::optional<std::int64_t> scale = std::nullopt, int jobs = 1);

// Packs realizing a YES split: layer (a_i) joins its left triplet neighbor
// when i is in `subset`, its right neighbor otherwise.
std::vector<LayerRange> packs_for_subset(const ReductionInstance& inst, const std::vector<int>& subset);

struct LiftedInstance {
  TaskGraph graph;
  ProfileSet profiles;
  MachineModel machine;
};

// Zero-transfer task graph whose simulated makespan equals eval_makespan.
LiftedInstance lift_to_task_graph(const ReductionInstance& inst, const std::vector<LayerRange>& packs);

std::string render_reduction_gantt(const ReductionInstance& inst, const std::vector<LayerRange>& packs,
                                   GanttFormat format);

}  // namespace wrapipe
