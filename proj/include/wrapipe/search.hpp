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

#include <optional>
#include <string>
#include <vector>

#include "wrapipe/core_model.hpp"
#include "wrapipe/packing.hpp"
#include "wrapipe/profiler.hpp"

namespace wrapipe {

enum class Strategy { kDistinctFB, kEquiFB };
std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

enum class Packer { kBalanced, kGreedyMax };
std::string_view packer_name(Packer p);
Packer parse_packer(std::string_view name);

struct SearchSpec {
  int minibatch = 1;
  std::optional<int> u_fmax;  // default: profile maximum, clamped to D
  std::optional<int> u_bmax;
  Mode mode = Mode::kWrapAroundPP;
  Strategy strategy = Strategy::kDistinctFB;
  Packer packer = Packer::kBalanced;
  int stride = 1;
  int jobs = 1;
};

struct Candidate {
  int u_f = 0;
  int u_b = 0;
  int p_f_count = 0;
  int p_b_count = 0;
  bool shared_packs = false;  // P_F taken verbatim from P_B
  Nanos time = 0;
  bool feasible = false;
  std::string reason;  // why an infeasible candidate was skipped
};

struct SearchResult {
  Configuration best;
  Nanos best_time = 0;
  int explored = 0;
  std::vector<Candidate> log;  // feasible and skipped candidates, in sweep order
  double wall_seconds = 0.0;
  int u_fmax = 0;
  int u_bmax = 0;
};

// Sweep bounds after applying defaults and the per-GPU share for data
// parallel modes.
std::pair<int, int> sweep_bounds(const SearchSpec& spec, const MachineModel& machine, const ProfileSet& profiles);

SearchResult search(const SearchSpec& spec, const MachineModel& machine, const ProfileSet& profiles);

// Builds the configuration for one (U_F, U_B) point with the chosen packer.
// With `equal_packs`, P_F is P_B and U_F must equal U_B.
Configuration make_configuration(Mode mode, int minibatch, int u_f, int u_b, Packer packer,
                                 const MachineModel& machine, const ProfileSet& profiles, bool equal_packs = false);

}  // namespace wrapipe
