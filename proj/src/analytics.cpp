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

#include "wrapipe/analytics.hpp"

#include "wrapipe/errors.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {

std::string_view dw_reading_name(DwReading r) { return r == DwReading::kGlobal ? "global" : "per_gpu"; }

DwReading parse_dw_reading(std::string_view name) {
  if (name == "per_gpu") return DwReading::kPerGpu;
  if (name == "global") return DwReading::kGlobal;
  fail(ErrorCode::kSchema, "unknown dW reading '" + std::string(name) + "'");
}

void IdealModel::validate() const {
  require(layers >= 1 && microbatches >= 1 && gpus >= 1, ErrorCode::kNonUniformModel,
          "layers, microbatches and gpus must be >= 1");
  require(weight_bytes >= 0 && wgrad_bytes >= 0 && optstate_bytes >= 0 && stash_bytes >= 0,
          ErrorCode::kNonUniformModel, "tensor sizes must be >= 0");
}

Bytes closed_form_swap(const IdealModel& model, TensorKind tensor, DwReading reading) {
  model.validate();
  const Bytes r = model.layers, m = model.microbatches, n = model.gpus;
  const Bytes w = r * model.weight_bytes;
  const Bytes dw = r * model.wgrad_bytes;
  const Bytes k = r * model.optstate_bytes;
  const bool dp = is_data_parallel(model.strategy);
  const Bytes copies = dp ? n : 1;
  switch (tensor) {
    case TensorKind::kW:
      return is_baseline(model.strategy) ? (4 * m + 2) * copies * w : 3 * copies * w;
    case TensorKind::kDW:
      if (!is_baseline(model.strategy)) return 0;
      if (reading == DwReading::kGlobal) return (4 * m + 2) * copies * dw - 2 * m * dw;
      return (2 * m + 2) * copies * dw;
    case TensorKind::kK: return 2 * copies * k;
    case TensorKind::kSX: return 2 * m * copies * (r - 1) * model.stash_bytes;
    case TensorKind::kDX:
      // A single-GPU stage-pinned pipeline hands the last stage's gradient
      // through host memory once per microbatch, unless one microbatch
      // keeps every backward hand-off adjacent.
      if (model.strategy == Mode::kPerGpuSwapPP && n == 1 && r >= 2 && m >= 2) return 2 * m * model.stash_bytes;
      return 0;
    case TensorKind::kX:
    case TensorKind::kY:
    case TensorKind::kDY: return 0;
  }
  return 0;
}

bool closed_form_is_verbatim(Mode strategy, TensorKind tensor) {
  switch (tensor) {
    case TensorKind::kW: return true;
    case TensorKind::kDW: return !is_baseline(strategy);
    case TensorKind::kK: return true;
    case TensorKind::kSX: return false;
    default: return strategy == Mode::kWrapAroundPP;
  }
}

void require_uniform(const ProfileSet& profiles) {
  require(profiles.layer_count() >= 1, ErrorCode::kNonUniformModel, "no layers");
  const auto& a = profiles.layer(0);
  for (int l = 1; l < profiles.layer_count(); ++l) {
    const auto& b = profiles.layer(l);
    const bool same = a.weight_bytes == b.weight_bytes && a.wgrad_bytes == b.wgrad_bytes &&
                      a.optstate_bytes == b.optstate_bytes && a.output_bytes.eval(1) == b.output_bytes.eval(1) &&
                      a.f_time.eval(1) == b.f_time.eval(1) && a.b_time.eval(1) == b.b_time.eval(1);
    require(same, ErrorCode::kNonUniformModel, "layer " + std::to_string(l) + " differs from layer 0");
  }
}

ProfileSet ideal_profiles(const IdealModel& model) {
  model.validate();
  LayerProfile lp;
  lp.f_time = AffineModel::linear(kMillisecond, 0);
  lp.b_time = AffineModel::linear(2 * kMillisecond, 0);
  lp.input_bytes = AffineModel::linear(model.stash_bytes, 0);
  lp.output_bytes = AffineModel::linear(model.stash_bytes, 0);
  lp.f_mem = AffineModel::linear(2 * model.stash_bytes, model.weight_bytes);
  lp.b_mem = AffineModel::linear(4 * model.stash_bytes, model.weight_bytes + model.wgrad_bytes);
  lp.update_time = kMillisecond;
  lp.weight_bytes = model.weight_bytes;
  lp.wgrad_bytes = model.wgrad_bytes;
  lp.optstate_bytes = model.optstate_bytes;
  return ProfileSet(std::vector<LayerProfile>(model.layers, lp), 1, 1);
}

MachineModel ideal_machine(const IdealModel& model) {
  MachineModel m;
  m.gpu_count = model.gpus;
  m.gpu_mem_capacity = 1LL << 60;
  m.pcie_bandwidth = 16 * kGiB;
  m.validate();
  return m;
}

Configuration ideal_configuration(const IdealModel& model) {
  Configuration cfg;
  cfg.mode = model.strategy;
  cfg.u_f = cfg.u_b = 1;
  for (int l = 0; l < model.layers; ++l) cfg.p_f.push_back({l, l});
  cfg.p_b = cfg.p_f;
  // Data parallel: m microbatches on each GPU; pipeline: m in flight.
  cfg.minibatch = model.microbatches * (is_data_parallel(model.strategy) ? model.gpus : 1);
  return cfg;
}

std::vector<SwapComparison> compare_sim_to_closed_form(const IdealModel& model, DwReading reading) {
  const ProfileSet phi = ideal_profiles(model);
  const MachineModel machine = ideal_machine(model);
  const TaskGraph g = generate_task_graph(ideal_configuration(model), machine, phi);
  const SimReport rep = simulate(g, machine, phi);
  std::vector<SwapComparison> out;
  for (int k = 0; k < kTensorKindCount; ++k) {
    const auto kind = static_cast<TensorKind>(k);
    out.push_back({kind, closed_form_swap(model, kind, reading), rep.swap_volume(kind),
                   closed_form_is_verbatim(model.strategy, kind)});
  }
  return out;
}

}  // namespace wrapipe
