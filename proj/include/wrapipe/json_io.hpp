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

#include "json.hpp"
#include "wrapipe/analytics.hpp"
#include "wrapipe/core_model.hpp"
#include "wrapipe/hardness.hpp"
#include "wrapipe/packing.hpp"
#include "wrapipe/profiler.hpp"
#include "wrapipe/search.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Readers throw kSchema with the offending field path.
Json machine_to_json(const MachineModel& m);
MachineModel machine_from_json(const Json& j);

Json layer_graph_to_json(const std::vector<LayerNode>& nodes);
std::vector<LayerNode> layer_graph_from_json(const Json& j);
Json chain_to_json(const LayerChain& chain);

Json synth_spec_to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const Json& j);

Json profiles_to_json(const ProfileSet& p);
ProfileSet profiles_from_json(const Json& j);

Json samples_to_json(const std::vector<ProfileSample>& samples);
std::vector<ProfileSample> samples_from_json(const Json& j);

Json configuration_to_json(const Configuration& c);
Configuration configuration_from_json(const Json& j);

Json pack_plan_to_json(const PackPlan& plan, Pass pass, int u);

Json task_graph_to_json(const TaskGraph& g);
TaskGraph task_graph_from_json(const Json& j);

Json sim_report_to_json(const SimReport& r, bool include_trace = true);

Json search_spec_to_json(const SearchSpec& s);
SearchSpec search_spec_from_json(const Json& j);
Json search_result_to_json(const SearchResult& r, const SearchSpec& spec);

Json ideal_model_to_json(const IdealModel& m);
IdealModel ideal_model_from_json(const Json& j);
Json swap_comparison_to_json(const IdealModel& m, DwReading reading, const std::vector<SwapComparison>& rows);

Json reduction_to_json(const ReductionInstance& inst);
ReductionInstance reduction_from_json(const Json& j);
Json packs_to_json(const std::vector<LayerRange>& packs);
std::vector<LayerRange> packs_from_json(const Json& j, const std::string& path);
Json schedule_to_json(const ReductionInstance& inst, const SimpleSchedule& s);
Json verify_to_json(const std::vector<std::int64_t>& numbers, const VerifyResult& v);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wrapipe
