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

#include <random>

#include "wrapipe/errors.hpp"
#include "wrapipe/simulator.hpp"

namespace wrapipe {
namespace {

MachineModel machine(int gpus) {
  MachineModel m;
  m.gpu_count = gpus;
  m.gpu_mem_capacity = 64 * kGiB;
  m.pcie_bandwidth = 16 * kGiB;
  m.validate();
  return m;
}

ProfileSet one_layer(Bytes weight, Nanos f_time) {
  LayerProfile lp;
  lp.f_time = AffineModel::constant(f_time);
  lp.b_time = AffineModel::constant(2 * f_time);
  lp.weight_bytes = weight;
  return ProfileSet({lp}, 4, 4);
}

TEST(Simulate, SingleForwardTaskIsSwapThenCompute) {
  TaskGraph g;
  g.gpu_count = 1;
  g.layer_count = 1;
  Task t;
  t.pack = {0, 0};
  t.microbatches = {1};
  t.inputs.push_back({TensorKind::kW, ChannelKind::kCpuGpuSwap, kHost, {0}});
  g.tasks.push_back(t);
  const SimReport r = simulate(g, machine(1), one_layer(4 * kGiB, 10 * kMillisecond));
  EXPECT_EQ(r.makespan, 260 * kMillisecond);
  EXPECT_EQ(r.swap_volume(TensorKind::kW), 4 * kGiB);
  EXPECT_EQ(r.gpu_busy[0], 10 * kMillisecond);
  EXPECT_EQ(r.gpu_idle[0], 250 * kMillisecond);
}

TEST(Simulate, ZeroSizedTensorsGiveThePureComputeChain) {
  Configuration cfg;
  cfg.minibatch = 4;
  cfg.u_f = cfg.u_b = 2;
  cfg.p_f = cfg.p_b = {{0, 0}};
  const ProfileSet p = one_layer(0, 3 * kMillisecond);
  const SimReport r = simulate(generate_task_graph(cfg, machine(1), p), machine(1), p);
  // Two forward microbatches then two backward ones; update time is zero.
  EXPECT_EQ(r.makespan, 2 * 3 * kMillisecond + 2 * 6 * kMillisecond);
  EXPECT_EQ(r.total_swap_volume(), 0);
}

TEST(RunOpGraph, RootLinkSerializesSwapsFromTwoGpus) {
  OpGraph g;
  g.layout.gpu_count = 2;
  for (int gpu = 0; gpu < 2; ++gpu) {
    Op op;
    op.kind = OpKind::kTransfer;
    op.task = gpu;
    op.seq = gpu;
    op.resources = {g.layout.gpu_stream(gpu, Stream::kSwapIn), g.layout.root_in()};
    op.duration = 5;
    op.bytes = 80;
    op.gpu = gpu;
    g.ops.push_back(op);
  }
  const SimReport r = run_op_graph(g, machine(2));
  EXPECT_EQ(r.makespan, 10);
  EXPECT_EQ(r.volume[static_cast<int>(ChannelKind::kCpuGpuSwap)], 160);
  // Swap-out uses the other direction and overlaps.
  g.ops[1].resources = {g.layout.gpu_stream(1, Stream::kSwapOut), g.layout.root_out()};
  EXPECT_EQ(run_op_graph(g, machine(2)).makespan, 5);
}

TEST(RunOpGraph, DependencyCycleIsADeadlock) {
  OpGraph g;
  g.layout.gpu_count = 1;
  Op a;
  a.kind = OpKind::kCompute;
  a.resources = {g.layout.gpu_stream(0, Stream::kCompute)};
  a.duration = 1;
  a.deps = {1};
  Op b = a;
  b.seq = 1;
  b.deps = {0};
  g.ops = {a, b};
  try {
    run_op_graph(g, machine(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDeadlockDetected);
  }
}

class RandomConfigs : public ::testing::Test {
 protected:
  struct Case {
    Configuration cfg;
    MachineModel machine;
  };
  std::vector<Case> cases() {
    std::vector<Case> out;
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
      Case c;
      const int n = 1 + static_cast<int>(rng() % 4);
      c.machine = machine(n);
      c.machine.gpu_mem_capacity = 2 * kGiB;
      c.cfg.mode = static_cast<Mode>(rng() % 4);
      c.cfg.minibatch = n * (1 + static_cast<int>(rng() % 4));
      const bool dp = c.cfg.mode == Mode::kGroupedDP || c.cfg.mode == Mode::kPerGpuSwapDP;
      const int share = dp ? c.cfg.minibatch / n : c.cfg.minibatch;
      c.cfg.u_b = 1 + static_cast<int>(rng() % share);
      c.cfg.u_f = (c.cfg.mode == Mode::kPerGpuSwapDP || c.cfg.mode == Mode::kPerGpuSwapPP)
                      ? c.cfg.u_b
                      : 1 + static_cast<int>(rng() % share);
      c.cfg.p_b = {{0, 2}, {3, 4}, {5, 7}};
      c.cfg.p_f = c.cfg.mode == Mode::kPerGpuSwapDP || c.cfg.mode == Mode::kPerGpuSwapPP
                      ? c.cfg.p_b
                      : std::vector<LayerRange>{{0, 1}, {2, 4}, {5, 7}};
      out.push_back(c);
    }
    return out;
  }
  ProfileSet profiles_ = [] {
    SynthSpec s;
    s.preset = SynthPreset::kIrregular;
    s.layers = 8;
    s.weight_bytes = 16 * kMiB;
    s.u_max = 16;
    return synth_profiles(s);
  }();
};

TEST_F(RandomConfigs, MakespanRespectsLowerBoundsAndConservesVolume) {
  for (const auto& c : cases()) {
    const TaskGraph g = generate_task_graph(c.cfg, c.machine, profiles_);
    const SimReport r = simulate(g, c.machine, profiles_);
    for (int gpu = 0; gpu < c.machine.gpu_count; ++gpu) {
      EXPECT_GE(r.makespan, r.gpu_busy[gpu]);
      EXPECT_EQ(r.gpu_busy[gpu] + r.gpu_idle[gpu], r.makespan);
    }
    for (int ch = 0; ch < kChannelKindCount; ++ch) {
      Bytes by_tensor = 0, by_gpu = 0;
      for (const auto& tv : r.tensor_volume) by_tensor += tv[ch];
      for (const auto& gv : r.gpu_volume) by_gpu += gv[ch];
      EXPECT_EQ(by_tensor, r.volume[ch]);
      EXPECT_EQ(by_gpu, r.volume[ch]);
    }
    Nanos last = 0;
    for (const auto& e : r.trace) {
      EXPECT_LE(e.start, e.end);
      last = std::max(last, e.end);
    }
    EXPECT_EQ(last, r.makespan);
  }
}

TEST_F(RandomConfigs, OutputIsDeterministic) {
  for (const auto& c : cases()) {
    const TaskGraph g = generate_task_graph(c.cfg, c.machine, profiles_);
    const SimReport a = simulate(g, c.machine, profiles_);
    const SimReport b = simulate(g, c.machine, profiles_);
    EXPECT_EQ(trace_csv(a), trace_csv(b));
    EXPECT_EQ(render_gantt(a, GanttFormat::kSvg), render_gantt(b, GanttFormat::kSvg));
  }
}

TEST(Gantt, EmptyTraceIsHeaderOnly) {
  SimReport r;
  const std::string text = render_gantt(r, GanttFormat::kText, {"empty", {}, 80});
  EXPECT_NE(text.find("empty"), std::string::npos);
  const std::string svg = render_gantt(r, GanttFormat::kSvg);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(trace_csv(r), "resource,task,kind,start_ns,end_ns\n");
}

TEST(Gantt, ComputeLabelsNameMicrobatchAndPack) {
  Configuration cfg;
  cfg.minibatch = 2;
  cfg.u_f = cfg.u_b = 1;
  cfg.p_f = cfg.p_b = {{0, 0}};
  const ProfileSet p = one_layer(kMiB, kMillisecond);
  const SimReport r = simulate(generate_task_graph(cfg, machine(1), p), machine(1), p);
  bool found = false;
  for (const auto& e : r.trace) found |= e.label == "2 P1";
  EXPECT_TRUE(found);
  GanttOptions opt;
  opt.braces.push_back({r.lanes.front(), 0, r.makespan / 2, "window"});
  EXPECT_NE(render_gantt(r, GanttFormat::kSvg, opt).find("window"), std::string::npos);
}

}  // namespace
}  // namespace wrapipe
