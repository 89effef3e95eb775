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

#include "wrapipe/taskgraph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "wrapipe/errors.hpp"

namespace wrapipe {

std::string_view task_type_name(TaskType type) {
  switch (type) {
    case TaskType::kForward: return "F";
    case TaskType::kBackward: return "B";
    case TaskType::kUpdate: return "U";
  }
  return "?";
}

TaskType parse_task_type(std::string_view name) {
  if (name == "F") return TaskType::kForward;
  if (name == "B") return TaskType::kBackward;
  if (name == "U") return TaskType::kUpdate;
  fail(ErrorCode::kSchema, "unknown task type '" + std::string(name) + "'");
}

std::string Device::label() const {
  return (kind == Kind::kGpu ? "GPU#" : "CPU#") + std::to_string(id);
}

int Task::samples() const { return std::accumulate(microbatches.begin(), microbatches.end(), 0); }

std::vector<std::pair<int, int>> TaskGraph::edges() const {
  std::set<std::pair<int, int>> out;
  for (const auto& t : tasks) {
    for (const auto& r : t.inputs) {
      if (r.peer != kHost) out.insert({r.peer, t.index});
    }
    for (const auto& r : t.outputs) {
      if (r.peer != kHost) out.insert({t.index, r.peer});
    }
    for (int a : t.after) out.insert({a, t.index});
  }
  return {out.begin(), out.end()};
}

namespace {

std::vector<int> layers_of(LayerRange r) {
  std::vector<int> v(r.size());
  std::iota(v.begin(), v.end(), r.first);
  return v;
}

class Builder {
 public:
  Builder(const Configuration& cfg, const MachineModel& machine) : cfg_(cfg), machine_(machine) {
    graph_.mode = cfg.mode;
    graph_.gpu_count = machine.gpu_count;
  }

  int add(LayerRange pack, TaskType type, std::vector<int> group, int first_sample, Device device,
          int gpu) {
    Task t;
    t.index = static_cast<int>(graph_.tasks.size());
    t.pack = pack;
    t.type = type;
    t.microbatches = std::move(group);
    t.first_sample = first_sample;
    t.device = device;
    t.gpu = gpu;
    graph_.tasks.push_back(std::move(t));
    return graph_.tasks.back().index;
  }

  Task& at(int i) { return graph_.tasks.at(i); }

  // Next task on the same GPU stream (F/B tasks only), by index.
  void index_gpu_order() {
    next_on_gpu_.assign(graph_.tasks.size(), -1);
    std::map<int, int> last;
    for (const auto& t : graph_.tasks) {
      if (t.device.kind != Device::Kind::kGpu) continue;
      if (auto it = last.find(t.gpu); it != last.end()) next_on_gpu_[it->second] = t.index;
      last[t.gpu] = t.index;
    }
  }

  ChannelKind activation_channel(int producer, int consumer) const {
    const auto& p = graph_.tasks[producer];
    const auto& c = graph_.tasks[consumer];
    if (p.gpu != c.gpu) return ChannelKind::kPeer2Peer;
    if (next_on_gpu_[producer] == consumer) return ChannelKind::kSharedMemory;
    return ChannelKind::kMessagePassing;
  }

  void link(int producer, int consumer, TensorKind out_kind, TensorKind in_kind, ChannelKind channel,
            std::vector<int> layers) {
    at(producer).outputs.push_back({out_kind, channel, consumer, layers});
    at(consumer).inputs.push_back({in_kind, channel, producer, std::move(layers)});
  }

  void host_in(int task, TensorKind kind, LayerRange pack) {
    at(task).inputs.push_back({kind, ChannelKind::kCpuGpuSwap, kHost, layers_of(pack)});
  }

  void host_out(int task, TensorKind kind, LayerRange pack) {
    at(task).outputs.push_back({kind, ChannelKind::kCpuGpuSwap, kHost, layers_of(pack)});
  }

  // Wires one sample-range lane: forward tasks in pack order followed by
  // backward tasks in reverse pack order (shared last pack first).
  void wire_lane(const std::vector<int>& fwd, const std::vector<int>& bwd) {
    for (std::size_t i = 0; i + 1 < fwd.size(); ++i) {
      link(fwd[i], fwd[i + 1], TensorKind::kY, TensorKind::kX, activation_channel(fwd[i], fwd[i + 1]),
           {at(fwd[i]).pack.last});
    }
    if (!fwd.empty() && !bwd.empty()) {
      link(fwd.back(), bwd.front(), TensorKind::kY, TensorKind::kY,
           activation_channel(fwd.back(), bwd.front()), {at(fwd.back()).pack.last});
    }
    for (std::size_t i = 0; i + 1 < bwd.size(); ++i) {
      link(bwd[i], bwd[i + 1], TensorKind::kDX, TensorKind::kDY, activation_channel(bwd[i], bwd[i + 1]),
           {at(bwd[i]).pack.first});
    }
    // Stash: each backward pack except the shared last one receives its
    // checkpointed input from the forward task holding its head layer.
    for (std::size_t i = 1; i < bwd.size(); ++i) {
      const int head = at(bwd[i]).pack.first;
      const auto holder = std::find_if(fwd.begin(), fwd.end(), [&](int f) { return at(f).pack.contains(head); });
      if (holder == fwd.end()) fail(ErrorCode::kInternal, "no forward task holds layer " + std::to_string(head));
      link(*holder, bwd[i], TensorKind::kSX, TensorKind::kSX, ChannelKind::kMessagePassing, {head});
      at(bwd[i]).recompute = true;
    }
  }

  // Weight and update routing for grouped modes (jit update).
  void wire_grouped_state(const std::vector<int>& fwd, const std::vector<std::pair<int, int>>& bwd_upd) {
    for (int f : fwd) host_in(f, TensorKind::kW, at(f).pack);
    for (const auto& [b, u] : bwd_upd) {
      const LayerRange pack = at(b).pack;
      host_in(b, TensorKind::kW, pack);
      if (machine_.cpu_offload_update) {
        link(b, u, TensorKind::kDW, TensorKind::kDW, ChannelKind::kCpuGpuSwap, layers_of(pack));
      } else {
        link(b, u, TensorKind::kDW, TensorKind::kDW, ChannelKind::kSharedMemory, layers_of(pack));
        host_in(u, TensorKind::kK, pack);
        host_out(u, TensorKind::kW, pack);
        host_out(u, TensorKind::kK, pack);
      }
    }
  }

  TaskGraph take() { return std::move(graph_); }

  const Configuration& cfg_;
  const MachineModel& machine_;
  TaskGraph graph_;
  std::vector<int> next_on_gpu_;
};

int pp_backward_gpu(int index, int pf, int n) { return (pf + (index - pf) / 2) % n; }
int pp_update_cpu(int index, int pf, int n) { return (pf + (index - 1 - pf) / 2) % n; }

TaskGraph build_wraparound(const Configuration& cfg, const MachineModel& machine) {
  Builder b(cfg, machine);
  const int n = machine.gpu_count;
  const int pf = static_cast<int>(cfg.p_f.size());
  const auto uf = microbatch_group(cfg.minibatch, cfg.u_f);
  const auto ub = microbatch_group(cfg.minibatch, cfg.u_b);
  std::vector<int> fwd;
  for (int i = 0; i < pf; ++i) {
    fwd.push_back(b.add(cfg.p_f[i], TaskType::kForward, uf, 0, {Device::Kind::kGpu, i % n}, i % n));
  }
  std::vector<int> bwd;
  std::vector<std::pair<int, int>> pairs;
  for (auto it = cfg.p_b.rbegin(); it != cfg.p_b.rend(); ++it) {
    const int idx = static_cast<int>(b.graph_.tasks.size());
    const int g = pp_backward_gpu(idx, pf, n);
    const int bt = b.add(*it, TaskType::kBackward, ub, 0, {Device::Kind::kGpu, g}, g);
    const int c = pp_update_cpu(idx + 1, pf, n);
    const int ut = b.add(*it, TaskType::kUpdate, {}, 0, {Device::Kind::kCpu, c}, c);
    bwd.push_back(bt);
    pairs.emplace_back(bt, ut);
  }
  b.index_gpu_order();
  b.wire_lane(fwd, bwd);
  b.wire_grouped_state(fwd, pairs);
  return b.take();
}

TaskGraph build_grouped_dp(const Configuration& cfg, const MachineModel& machine) {
  Builder b(cfg, machine);
  const auto shares = data_parallel_shares(cfg.minibatch, machine.gpu_count);
  require(shares.back() > 0, ErrorCode::kInvalidConfiguration,
          "data parallel modes need minibatch >= gpu count");
  std::vector<std::vector<int>> fwd(machine.gpu_count), bwd(machine.gpu_count);
  std::vector<std::vector<std::pair<int, int>>> pairs(machine.gpu_count);
  int offset = 0;
  for (int g = 0; g < machine.gpu_count; ++g) {
    const Device gpu{Device::Kind::kGpu, g};
    const Device cpu{Device::Kind::kCpu, g};
    for (const auto& p : cfg.p_f) {
      fwd[g].push_back(b.add(p, TaskType::kForward, microbatch_group(shares[g], cfg.u_f), offset, gpu, g));
    }
    for (auto it = cfg.p_b.rbegin(); it != cfg.p_b.rend(); ++it) {
      const int bt = b.add(*it, TaskType::kBackward, microbatch_group(shares[g], cfg.u_b), offset, gpu, g);
      const int ut = b.add(*it, TaskType::kUpdate, {}, offset, cpu, g);
      bwd[g].push_back(bt);
      pairs[g].emplace_back(bt, ut);
    }
    offset += shares[g];
  }
  b.index_gpu_order();
  for (int g = 0; g < machine.gpu_count; ++g) {
    b.wire_lane(fwd[g], bwd[g]);
    b.wire_grouped_state(fwd[g], pairs[g]);
  }
  b.graph_.notes.push_back(
      "data-parallel gradient synchronization is modeled as a zero-cost CPU-side reduction");
  return b.take();
}

// Per-GPU swap baselines: one microbatch per task, weights evicted after
// every task, gradients accumulated through host memory, a single update per
// pack at the end of the iteration.
void wire_baseline_state(Builder& b, const std::vector<std::vector<int>>& fwd_lanes,
                         const std::vector<std::vector<int>>& bwd_lanes) {
  for (const auto& lane : fwd_lanes) {
    for (int f : lane) {
      b.host_in(f, TensorKind::kW, b.at(f).pack);
      b.host_out(f, TensorKind::kW, b.at(f).pack);
    }
  }
  for (const auto& lane : bwd_lanes) {
    for (int t : lane) {
      const LayerRange pack = b.at(t).pack;
      b.host_in(t, TensorKind::kW, pack);
      b.host_in(t, TensorKind::kDW, pack);
      b.host_out(t, TensorKind::kW, pack);
      b.host_out(t, TensorKind::kDW, pack);
    }
  }
}

void add_baseline_updates(Builder& b, const std::vector<LayerRange>& p_b,
                          const std::map<int, std::vector<int>>& backward_by_pack,
                          const std::function<int(int)>& gpu_for_pack, int first_sample) {
  for (auto it = p_b.rbegin(); it != p_b.rend(); ++it) {
    const int g = gpu_for_pack(it->first);
    const int ut = b.add(*it, TaskType::kUpdate, {}, first_sample, {Device::Kind::kCpu, g}, g);
    b.at(ut).after = backward_by_pack.at(it->first);
    b.host_in(ut, TensorKind::kW, *it);
    b.host_in(ut, TensorKind::kDW, *it);
    b.host_in(ut, TensorKind::kK, *it);
    b.host_out(ut, TensorKind::kW, *it);
    b.host_out(ut, TensorKind::kDW, *it);
    b.host_out(ut, TensorKind::kK, *it);
  }
}

void chain_gradient_accumulation(Builder& b, const std::map<int, std::vector<int>>& backward_by_pack) {
  for (const auto& [first, tasks] : backward_by_pack) {
    for (std::size_t j = 1; j < tasks.size(); ++j) b.at(tasks[j]).after.push_back(tasks[j - 1]);
  }
}

TaskGraph build_swap_dp(const Configuration& cfg, const MachineModel& machine) {
  Builder b(cfg, machine);
  const auto shares = data_parallel_shares(cfg.minibatch, machine.gpu_count);
  require(shares.back() > 0, ErrorCode::kInvalidConfiguration,
          "data parallel modes need minibatch >= gpu count");
  std::vector<std::vector<int>> fwd_lanes, bwd_lanes;
  std::vector<std::map<int, std::vector<int>>> by_pack(machine.gpu_count);
  std::vector<int> gpu_offset(machine.gpu_count);
  int offset = 0;
  for (int g = 0; g < machine.gpu_count; ++g) {
    gpu_offset[g] = offset;
    const Device gpu{Device::Kind::kGpu, g};
    for (int u : microbatch_group(shares[g], cfg.u_f)) {
      std::vector<int> fwd, bwd;
      for (const auto& p : cfg.p_f) fwd.push_back(b.add(p, TaskType::kForward, {u}, offset, gpu, g));
      for (auto it = cfg.p_b.rbegin(); it != cfg.p_b.rend(); ++it) {
        const int t = b.add(*it, TaskType::kBackward, {u}, offset, gpu, g);
        bwd.push_back(t);
        by_pack[g][it->first].push_back(t);
      }
      fwd_lanes.push_back(std::move(fwd));
      bwd_lanes.push_back(std::move(bwd));
      offset += u;
    }
    add_baseline_updates(b, cfg.p_b, by_pack[g], [g](int) { return g; }, gpu_offset[g]);
  }
  b.index_gpu_order();
  for (std::size_t i = 0; i < fwd_lanes.size(); ++i) b.wire_lane(fwd_lanes[i], bwd_lanes[i]);
  wire_baseline_state(b, fwd_lanes, bwd_lanes);
  for (const auto& m : by_pack) chain_gradient_accumulation(b, m);
  b.graph_.notes.push_back(
      "data-parallel gradient synchronization is modeled as a zero-cost CPU-side reduction");
  return b.take();
}

TaskGraph build_swap_pp(const Configuration& cfg, const MachineModel& machine) {
  Builder b(cfg, machine);
  const int n = machine.gpu_count;
  const int pf = static_cast<int>(cfg.p_f.size());
  const int pb = static_cast<int>(cfg.p_b.size());
  std::map<int, int> b_stage;  // pack first layer -> stage index in P_B
  for (int k = 0; k < pb; ++k) b_stage[cfg.p_b[k].first] = k;
  auto b_gpu = [&](int first) { return b_stage.at(first) % n; };

  const auto group = microbatch_group(cfg.minibatch, cfg.u_f);
  std::vector<std::vector<int>> fwd_lanes(group.size()), bwd_lanes(group.size());
  std::map<int, std::vector<int>> by_pack;
  std::vector<int> offsets;
  int offset = 0;
  for (std::size_t j = 0; j < group.size(); ++j) {
    offsets.push_back(offset);
    for (int k = 0; k < pf; ++k) {
      const int g = k % n;
      fwd_lanes[j].push_back(b.add(cfg.p_f[k], TaskType::kForward, {group[j]}, offset, {Device::Kind::kGpu, g}, g));
    }
    // The last stage runs its backward right behind its forward.
    const LayerRange last = cfg.p_b.back();
    const int t = b.add(last, TaskType::kBackward, {group[j]}, offset, {Device::Kind::kGpu, b_gpu(last.first)},
                        b_gpu(last.first));
    bwd_lanes[j].push_back(t);
    by_pack[last.first].push_back(t);
    offset += group[j];
  }
  for (std::size_t j = 0; j < group.size(); ++j) {
    for (int k = pb - 2; k >= 0; --k) {
      const int g = b_gpu(cfg.p_b[k].first);
      const int t = b.add(cfg.p_b[k], TaskType::kBackward, {group[j]}, offsets[j], {Device::Kind::kGpu, g}, g);
      bwd_lanes[j].push_back(t);
      by_pack[cfg.p_b[k].first].push_back(t);
    }
  }
  add_baseline_updates(b, cfg.p_b, by_pack, b_gpu, 0);
  b.index_gpu_order();
  for (std::size_t j = 0; j < group.size(); ++j) b.wire_lane(fwd_lanes[j], bwd_lanes[j]);
  wire_baseline_state(b, fwd_lanes, bwd_lanes);
  chain_gradient_accumulation(b, by_pack);
  return b.take();
}

}  // namespace

TaskGraph generate_task_graph(const Configuration& cfg, const MachineModel& machine, const ProfileSet& profiles) {
  validate_configuration(cfg, profiles.layer_count());
  require(machine.gpu_count >= 1, ErrorCode::kInvalidArgument, "gpu_count must be >= 1");
  for (const auto& crossing : profiles.relayed()) {
    for (int src : crossing) {
      require(src >= 0 && src < profiles.layer_count(), ErrorCode::kUnroutableBranch,
              "relay source " + std::to_string(src) + " is outside the layer chain");
    }
  }
  TaskGraph g;
  switch (cfg.mode) {
    case Mode::kWrapAroundPP: g = build_wraparound(cfg, machine); break;
    case Mode::kGroupedDP: g = build_grouped_dp(cfg, machine); break;
    case Mode::kPerGpuSwapDP: g = build_swap_dp(cfg, machine); break;
    case Mode::kPerGpuSwapPP: g = build_swap_pp(cfg, machine); break;
  }
  g.layer_count = profiles.layer_count();
  return g;
}

std::vector<DeviceSchedule> unroll_schedule(const TaskGraph& graph) {
  std::map<std::pair<int, int>, std::vector<int>> lists;  // (kind, id)
  for (const auto& t : graph.tasks) {
    lists[{static_cast<int>(t.device.kind), t.device.id}].push_back(t.index);
  }
  std::vector<DeviceSchedule> out;
  for (auto& [key, tasks] : lists) {
    out.push_back({Device{static_cast<Device::Kind>(key.first), key.second}, std::move(tasks)});
  }
  return out;
}

std::vector<std::string> check_task_graph(const TaskGraph& graph) {
  std::vector<std::string> bad;
  auto complain = [&](const Task& t, const std::string& what) {
    bad.push_back("task " + std::to_string(t.index) + " (" + std::string(task_type_name(t.type)) + " " +
                  pack_label(t.pack) + "): " + what);
  };
  for (const auto& [p, c] : graph.edges()) {
    if (p >= c) bad.push_back("edge " + std::to_string(p) + "->" + std::to_string(c) + " is not forward in index");
  }
  const bool grouped = !is_baseline(graph.mode);
  for (const auto& t : graph.tasks) {
    if (t.type != TaskType::kUpdate) {
      int w_routes = 0;
      std::vector<int> seen;
      for (const auto& r : t.inputs) {
        if (r.kind != TensorKind::kW) continue;
        ++w_routes;
        seen.insert(seen.end(), r.layers.begin(), r.layers.end());
      }
      std::sort(seen.begin(), seen.end());
      if (w_routes != 1 || seen != [&] {
            std::vector<int> v(t.pack.size());
            std::iota(v.begin(), v.end(), t.pack.first);
            return v;
          }()) {
        complain(t, "weights must arrive exactly once per pack layer");
      }
      if (t.samples() <= 0) complain(t, "empty microbatch group");
    }
    if (graph.mode == Mode::kWrapAroundPP && t.type == TaskType::kForward &&
        t.device != Device{Device::Kind::kGpu, t.index % graph.gpu_count}) {
      complain(t, "forward task not bound to GPU(i mod N)");
    }
    if (grouped && t.type == TaskType::kUpdate) {
      if (t.index == 0 || graph.tasks[t.index - 1].type != TaskType::kBackward ||
          graph.tasks[t.index - 1].pack != t.pack) {
        complain(t, "update must directly follow its backward task");
      } else if (t.device != Device{Device::Kind::kCpu, graph.tasks[t.index - 1].gpu}) {
        complain(t, "update must run on the CPU process of its backward GPU");
      }
    }
    if (grouped && t.type == TaskType::kBackward) {
      int stash = 0;
      for (const auto& r : t.inputs) {
        if (r.kind != TensorKind::kSX) continue;
        ++stash;
        const auto& src = graph.tasks.at(r.peer);
        if (r.channel != ChannelKind::kMessagePassing || src.type != TaskType::kForward ||
            !src.pack.contains(t.pack.first)) {
          complain(t, "stash edge must come over message passing from the forward task holding its head");
        }
      }
      const bool shared_last = t.pack.last == graph.layer_count - 1;
      if (stash != (shared_last ? 0 : 1)) complain(t, "expected " + std::to_string(shared_last ? 0 : 1) +
                                                          " stash edges, found " + std::to_string(stash));
      if (t.recompute == shared_last) complain(t, "recompute flag mismatch");
    }
  }
  return bad;
}

}  // namespace wrapipe
