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

// Per-layer cost models: affine regressions over microbatch size, the
// slow-start probe for the largest feasible microbatch, and synthetic
// generators for GPU-free experiments.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wrapipe/core_model.hpp"

namespace wrapipe {

enum class Pass { kForward, kBackward, kUpdate };
std::string_view pass_name(Pass pass);
Pass parse_pass(std::string_view name);

struct ProfileSample {
  int layer = 0;
  Pass pass = Pass::kForward;
  int microbatch = 1;
  Nanos compute_time = 0;
  Bytes mem_footprint = 0;
  Bytes input_bytes = 0;   // X
  Bytes output_bytes = 0;  // Y
  Bytes weight_bytes = 0;  // W
  Bytes wgrad_bytes = 0;   // dW
  Bytes optstate_bytes = 0;  // K
};

// value(u) = slope * u + intercept, clamped at zero and rounded to an
// integer.
struct AffineModel {
  double slope = 0.0;
  double intercept = 0.0;

  std::int64_t eval(int u) const;
  static AffineModel constant(std::int64_t value) { return {0.0, static_cast<double>(value)}; }
  static AffineModel linear(std::int64_t per_unit, std::int64_t fixed) {
    return {static_cast<double>(per_unit), static_cast<double>(fixed)};
  }
};

struct LayerProfile {
  AffineModel f_time, f_mem;
  AffineModel b_time, b_mem;
  AffineModel input_bytes, output_bytes;
  Nanos update_time = 0;
  Bytes weight_bytes = 0;
  Bytes wgrad_bytes = 0;
  Bytes optstate_bytes = 0;
  double max_rel_residual = 0.0;
};

// The cost model phi. Immutable once built.
class ProfileSet {
 public:
  ProfileSet() = default;
  ProfileSet(std::vector<LayerProfile> layers, int u_max_f, int u_max_b);

  int layer_count() const { return static_cast<int>(layers_.size()); }
  const LayerProfile& layer(int id) const { return layers_.at(id); }
  const std::vector<LayerProfile>& layers() const { return layers_; }
  int u_max_f() const { return u_max_f_; }
  int u_max_b() const { return u_max_b_; }
  int stride() const { return stride_; }
  void set_stride(int stride) { stride_ = stride; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  // Throws kOutOfProfileRange when u lies outside [1, u_max] for the pass.
  Nanos time(Pass pass, int layer, int u) const;
  Bytes mem(Pass pass, int layer, int u) const;
  Bytes input_bytes(int layer, int u) const;
  Bytes output_bytes(int layer, int u) const;
  Nanos update_time(int layer, const MachineModel& machine) const;

  // Activation bytes crossing the boundary after `layer`: its own output
  // plus every relayed branch output passing through.
  Bytes boundary_bytes(int layer, int u) const;
  // Input activation checkpointed for a pack starting at `layer`.
  Bytes pack_input_bytes(int layer, int u) const;

  Nanos range_time(Pass pass, LayerRange range, int u) const;
  Bytes range_mem(Pass pass, LayerRange range, int u) const;
  Bytes range_weight(LayerRange range) const;
  Bytes range_wgrad(LayerRange range) const;
  Bytes range_optstate(LayerRange range) const;

  // Attaches relay crossings from a serialized chain (positions must match
  // layer ids). Throws kUnroutableBranch for relays leaving the chain.
  void attach_relays(const LayerChain& chain);
  const std::vector<std::vector<int>>& relayed() const { return relayed_; }
  void set_relayed(std::vector<std::vector<int>> relayed) { relayed_ = std::move(relayed); }

 private:
  void check_u(Pass pass, int u) const;

  std::vector<LayerProfile> layers_;
  int u_max_f_ = 1;
  int u_max_b_ = 1;
  int stride_ = 4;
  std::vector<std::vector<int>> relayed_;  // per boundary
  std::vector<std::string> warnings_;
};

struct SlowStartResult {
  int max_u = 0;
  std::vector<int> probes;
};

// Multiplicative increase from 1, halve at the first out-of-memory probe,
// then additive increase until the next failure or the cap.
SlowStartResult slow_start_max_u(const std::function<bool(int)>& fits, int u_cap);

ProfileSet fit_profiles(const std::vector<ProfileSample>& samples, int stride = 4);

enum class SynthPreset { kUniform, kIrregular };

struct SynthSpec {
  SynthPreset preset = SynthPreset::kUniform;
  int layers = 24;
  double backward_ratio = 2.0;
  std::uint64_t seed = 0;
  Nanos forward_time_per_sample = 1 * kMillisecond;
  Nanos forward_time_fixed = 200 * kMicrosecond;
  Bytes weight_bytes = 64 * kMiB;
  Bytes activation_bytes_per_sample = 8 * kMiB;
  Bytes input_bytes_per_sample = 8 * kMiB;
  double optimizer_state_factor = 2.0;
  Nanos update_time = 2 * kMillisecond;
  int u_max = 64;
  int stride = 4;
};

// Deterministic for a fixed spec. The irregular preset draws a seeded
// permutation `perm` of 0..R-1 per attribute and scales layer k by
// 0.5 + perm[k] / R, so distinct layers never share a time scale; the
// backward ratio of layer k is backward_ratio + perm_b[k] / R. Activations
// shrink and weights grow 16x with depth, as in convolutional networks.
ProfileSet synth_profiles(const SynthSpec& spec);

// Samples phi at u in {1, stride, 2*stride, ..., u_max}, one record per
// (layer, pass F/B/U).
std::vector<int> sampled_microbatches(int stride, int u_max);
std::vector<ProfileSample> sample_profiles(const ProfileSet& profiles, int stride, int u_max);

}  // namespace wrapipe
