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

#include <string>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/profiler.hpp"

namespace wrapipe {

// Two readings of the baseline weight-gradient closed form. Per GPU: each
// GPU swaps dW in and out once per microbatch and once more around the
// update. Global: the (4m+2)N weight pattern with 2m deducted once.
enum class DwReading { kPerGpu, kGlobal };
std::string_view dw_reading_name(DwReading r);
DwReading parse_dw_reading(std::string_view name);

// Uniform-layer model: R identical layers, m microbatches per GPU (data
// parallel) or per pipeline (pipeline parallel), all of size 1.
struct IdealModel {
  int layers = 1;
  Bytes weight_bytes = 0;    // per layer
  Bytes wgrad_bytes = 0;     // per layer
  Bytes optstate_bytes = 0;  // per layer
  Bytes stash_bytes = 0;     // per layer activation at microbatch 1
  int microbatches = 1;      // m
  int gpus = 1;              // N
  Mode strategy = Mode::kWrapAroundPP;

  void validate() const;
};

// Closed-form CPU-GPU swap bytes per iteration. Throws kNonUniformModel for
// inputs violating the uniform-model assumptions.
Bytes closed_form_swap(const IdealModel& model, TensorKind tensor, DwReading reading = DwReading::kPerGpu);

// True when the formula for (strategy, tensor) is stated in closed form by
// the source analysis; false for cells derived from simulator semantics.
bool closed_form_is_verbatim(Mode strategy, TensorKind tensor);

// Rejects per-layer profiles that are not identical.
void require_uniform(const ProfileSet& profiles);

// Materializes the ideal model as a profile set, machine and configuration.
ProfileSet ideal_profiles(const IdealModel& model);
MachineModel ideal_machine(const IdealModel& model);
Configuration ideal_configuration(const IdealModel& model);

struct SwapComparison {
  TensorKind tensor = TensorKind::kW;
  Bytes analytic = 0;
  Bytes simulated = 0;
  bool verbatim = false;

  Bytes delta() const { return simulated - analytic; }
};

std::vector<SwapComparison> compare_sim_to_closed_form(const IdealModel& model,
                                                       DwReading reading = DwReading::kPerGpu);

}  // namespace wrapipe
