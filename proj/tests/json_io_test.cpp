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

#include <gtest/gtest.h>

#include "wrapipe/errors.hpp"
#include "wrapipe/json_io.hpp"
#include "wrapipe/search.hpp"

namespace wrapipe {
namespace {

std::string schema_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    return e.what();
  }
  ADD_FAILURE() << "no schema error";
  return {};
}

MachineModel sample_machine() {
  MachineModel m;
  m.gpu_count = 4;
  m.gpu_mem_capacity = 6 * kGiB;
  m.pcie_bandwidth = 12 * kGiB;
  m.root_link_bandwidth = 10 * kGiB;
  m.p2p_groups = {{0, 1}, {2, 3}};
  m.cpu_offload_update = true;
  m.update_cpu_rate = 4 * kGiB;
  m.validate();
  return m;
}

TEST(JsonIo, MachineRoundTrip) {
  const Json j = machine_to_json(sample_machine());
  EXPECT_EQ(j["format_version"], kFormatVersion);
  EXPECT_EQ(j["gpu_mem_capacity_bytes"], 6 * kGiB);
  const MachineModel back = machine_from_json(j);
  EXPECT_EQ(machine_to_json(back), j);
  EXPECT_EQ(back.p2p_groups, sample_machine().p2p_groups);
}

TEST(JsonIo, ErrorsNameTheField) {
  Json j = machine_to_json(sample_machine());
  j["gpu_count"] = "four";
  EXPECT_NE(schema_message([&] { machine_from_json(j); }).find("machine.gpu_count"), std::string::npos);
  j = machine_to_json(sample_machine());
  j["format_version"] = 99;
  EXPECT_NE(schema_message([&] { machine_from_json(j); }).find("format_version"), std::string::npos);
  j.erase("format_version");
  schema_message([&] { machine_from_json(j); });
  Json g = layer_graph_to_json({{0, "a", {}}});
  g["nodes"][0].erase("id");
  EXPECT_NE(schema_message([&] { layer_graph_from_json(g); }).find("nodes[0].id"), std::string::npos);
  EXPECT_EQ(exit_code_for(ErrorCode::kSchema), 2);
}

TEST(JsonIo, ProfilesRoundTripPreservesEvaluation) {
  SynthSpec s;
  s.preset = SynthPreset::kIrregular;
  s.layers = 5;
  s.u_max = 8;
  const ProfileSet p = synth_profiles(s);
  const ProfileSet back = profiles_from_json(profiles_to_json(p));
  ASSERT_EQ(back.layer_count(), 5);
  for (int l = 0; l < 5; ++l) {
    for (int u = 1; u <= 8; ++u) {
      EXPECT_EQ(back.time(Pass::kBackward, l, u), p.time(Pass::kBackward, l, u));
      EXPECT_EQ(back.mem(Pass::kForward, l, u), p.mem(Pass::kForward, l, u));
    }
  }
  EXPECT_EQ(profiles_to_json(back), profiles_to_json(p));
  const SynthSpec s2 = synth_spec_from_json(synth_spec_to_json(s));
  EXPECT_EQ(synth_spec_to_json(s2), synth_spec_to_json(s));
}

TEST(JsonIo, SamplesRoundTrip) {
  SynthSpec s;
  s.layers = 2;
  s.u_max = 8;
  const auto samples = sample_profiles(synth_profiles(s), 4, 8);
  const auto back = samples_from_json(samples_to_json(samples));
  ASSERT_EQ(back.size(), samples.size());
  EXPECT_EQ(samples_to_json(back), samples_to_json(samples));
}

TEST(JsonIo, ConfigurationAndTaskGraphRoundTrip) {
  Configuration c;
  c.mode = Mode::kWrapAroundPP;
  c.minibatch = 8;
  c.u_f = 4;
  c.u_b = 2;
  c.p_f = {{0, 1}, {2, 3}};
  c.p_b = {{0, 0}, {1, 1}, {2, 3}};
  const Json cj = configuration_to_json(c);
  EXPECT_EQ(cj["p_f_label"], "L0-1, L2-3");
  const Configuration back = configuration_from_json(cj);
  EXPECT_EQ(back.p_b, c.p_b);
  EXPECT_EQ(back.u_f, 4);

  SynthSpec s;
  s.layers = 4;
  const ProfileSet p = synth_profiles(s);
  const TaskGraph g = generate_task_graph(c, sample_machine(), p);
  const Json gj = task_graph_to_json(g);
  EXPECT_EQ(task_graph_to_json(task_graph_from_json(gj)), gj);
}

TEST(JsonIo, SimReportCarriesUnitsInNames) {
  Configuration c;
  c.minibatch = 2;
  c.p_f = c.p_b = {{0, 1}};
  SynthSpec s;
  s.layers = 2;
  const ProfileSet p = synth_profiles(s);
  MachineModel m = sample_machine();
  const SimReport r = simulate(generate_task_graph(c, m, p), m, p);
  const Json j = sim_report_to_json(r);
  EXPECT_EQ(j["makespan_ns"], r.makespan);
  EXPECT_TRUE(j.contains("swap_volume_bytes"));
  EXPECT_EQ(j["trace"].size(), r.trace.size());
  EXPECT_FALSE(sim_report_to_json(r, false).contains("trace"));
}

TEST(JsonIo, SearchSpecAndIdealModelRoundTrip) {
  SearchSpec spec;
  spec.minibatch = 32;
  spec.u_fmax = 4;
  spec.mode = Mode::kGroupedDP;
  spec.strategy = Strategy::kEquiFB;
  spec.packer = Packer::kGreedyMax;
  const SearchSpec back = search_spec_from_json(search_spec_to_json(spec));
  EXPECT_EQ(back.u_fmax, 4);
  EXPECT_FALSE(back.u_bmax.has_value());
  EXPECT_EQ(back.packer, Packer::kGreedyMax);
  EXPECT_EQ(search_spec_to_json(back), search_spec_to_json(spec));

  IdealModel im;
  im.layers = 3;
  im.weight_bytes = 7;
  im.microbatches = 2;
  im.gpus = 4;
  EXPECT_EQ(ideal_model_to_json(ideal_model_from_json(ideal_model_to_json(im))), ideal_model_to_json(im));
}

TEST(JsonIo, ReductionRoundTrip) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  const ReductionInstance back = reduction_from_json(reduction_to_json(inst));
  EXPECT_EQ(back.layer_count(), 13);
  EXPECT_EQ(back.source, inst.source);
  EXPECT_EQ(reduction_to_json(back), reduction_to_json(inst));
  const Json pj = packs_to_json({{0, 0}, {1, 3}});
  EXPECT_EQ(packs_from_json(pj, "packs"), (std::vector<LayerRange>{{0, 0}, {1, 3}}));
  EXPECT_NE(schema_message([] { packs_from_json(Json::array({Json::array({1})}), "packs"); }).find("packs[0]"),
            std::string::npos);
}

TEST(JsonIo, MissingFileIsAnError) {
  EXPECT_THROW(read_json_file("/nonexistent/file.json"), Error);
}

}  // namespace
}  // namespace wrapipe
