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

#include "wrapipe/core_model.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "wrapipe/errors.hpp"

namespace wrapipe {

Nanos transfer_time(Bytes bytes, std::int64_t bytes_per_second) {
  if (bytes <= 0) return 0;
  require(bytes_per_second > 0, ErrorCode::kInvalidArgument, "bandwidth must be positive");
  const __int128 num = static_cast<__int128>(bytes) * kSecond;
  return static_cast<Nanos>((num + bytes_per_second - 1) / bytes_per_second);
}

void MachineModel::validate() {
  require(gpu_count >= 1, ErrorCode::kInvalidArgument, "gpu_count must be >= 1");
  require(gpu_mem_capacity > 0, ErrorCode::kInvalidArgument, "gpu_mem_capacity must be > 0");
  require(pcie_bandwidth > 0, ErrorCode::kInvalidArgument, "pcie_bandwidth must be > 0");
  if (root_link_bandwidth <= 0) root_link_bandwidth = pcie_bandwidth;
  if (p2p_groups.empty()) {
    for (int g = 0; g < gpu_count; ++g) p2p_groups.push_back({g});
  }
  std::vector<int> seen(gpu_count, 0);
  for (const auto& group : p2p_groups) {
    for (int g : group) {
      require(g >= 0 && g < gpu_count, ErrorCode::kInvalidArgument,
              "p2p group references unknown GPU " + std::to_string(g));
      ++seen[g];
    }
  }
  for (int g = 0; g < gpu_count; ++g) {
    require(seen[g] == 1, ErrorCode::kInvalidArgument,
            "p2p_groups must partition the GPUs; GPU " + std::to_string(g) + " appears " +
                std::to_string(seen[g]) + " times");
  }
  if (cpu_offload_update) {
    require(update_cpu_rate > 0, ErrorCode::kInvalidArgument,
            "update_cpu_rate must be > 0 when cpu_offload_update is set");
  }
}

int MachineModel::group_of(int gpu) const {
  for (std::size_t i = 0; i < p2p_groups.size(); ++i) {
    if (std::find(p2p_groups[i].begin(), p2p_groups[i].end(), gpu) != p2p_groups[i].end()) {
      return static_cast<int>(i);
    }
  }
  return gpu;
}

std::vector<int> LayerChain::relayed_across(int position) const {
  std::set<int> sources;
  for (const auto& r : relays) {
    if (r.source < position && position < r.destination) sources.insert(r.source);
  }
  return {sources.begin(), sources.end()};
}

Bytes LayerChain::relay_traffic(const std::vector<Bytes>& output_bytes) const {
  Bytes total = 0;
  for (const auto& r : relays) {
    total += static_cast<Bytes>(r.positions.size()) * output_bytes.at(r.source);
  }
  return total;
}

LayerChain serialize_graph(const std::vector<LayerNode>& dag) {
  require(!dag.empty(), ErrorCode::kEmptyInput, "layer graph has no nodes");
  const int n = static_cast<int>(dag.size());
  std::vector<const LayerNode*> by_id(n, nullptr);
  for (const auto& node : dag) {
    require(node.id >= 0 && node.id < n && by_id[node.id] == nullptr,
            ErrorCode::kInvalidArgument, "layer ids must be dense and unique");
    by_id[node.id] = &node;
  }

  // Working adjacency including synthetic join nodes.
  std::vector<std::vector<int>> preds(n), succs(n);
  std::vector<std::string> kinds(n);
  for (int v = 0; v < n; ++v) {
    kinds[v] = by_id[v]->kind;
    std::set<int> unique(by_id[v]->predecessors.begin(), by_id[v]->predecessors.end());
    for (int u : unique) {
      require(u >= 0 && u < n, ErrorCode::kInvalidArgument,
              "layer " + std::to_string(v) + " has unknown predecessor " + std::to_string(u));
      require(u != v, ErrorCode::kCyclicGraph, "self loop at layer " + std::to_string(v));
      preds[v].push_back(u);
      succs[u].push_back(v);
    }
  }

  LayerChain chain;
  std::vector<int> sources, sinks;
  for (int v = 0; v < n; ++v) {
    if (preds[v].empty()) sources.push_back(v);
    if (succs[v].empty()) sinks.push_back(v);
  }
  auto add_node = [&](std::string kind) {
    preds.emplace_back();
    succs.emplace_back();
    kinds.push_back(std::move(kind));
    return static_cast<int>(preds.size()) - 1;
  };
  if (sinks.size() > 1) {
    const int join = add_node("join");
    for (int s : sinks) {
      preds[join].push_back(s);
      succs[s].push_back(join);
    }
    chain.diagnostics.push_back("MultiSink: joined " + std::to_string(sinks.size()) +
                                " outputs into synthetic node " + std::to_string(join));
  }
  if (sources.size() > 1) {
    const int root = add_node("source");
    for (int s : sources) {
      preds[s].push_back(root);
      succs[root].push_back(s);
    }
    chain.diagnostics.push_back("MultiSource: fed " + std::to_string(sources.size()) +
                                " inputs from synthetic node " + std::to_string(root));
  }

  // Kahn's algorithm; lowest id first among ready nodes, except that a
  // synthetic source always leads.
  const int total = static_cast<int>(preds.size());
  std::vector<int> indegree(total);
  for (int v = 0; v < total; ++v) indegree[v] = static_cast<int>(preds[v].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < total; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> position(total, -1);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    position[v] = static_cast<int>(chain.layers.size());
    chain.layers.push_back(v);
    chain.kinds.push_back(kinds[v]);
    for (int w : succs[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  require(static_cast<int>(chain.layers.size()) == total, ErrorCode::kCyclicGraph,
          "layer graph contains a cycle");

  for (int v = 0; v < total; ++v) {
    for (int u : preds[v]) chain.edges.emplace_back(position[u], position[v]);
  }
  std::sort(chain.edges.begin(), chain.edges.end());
  for (const auto& [pu, pv] : chain.edges) {
    if (pv - pu <= 1) continue;
    Relay relay{pu, pv, {}};
    for (int p = pu + 1; p < pv; ++p) relay.positions.push_back(p);
    chain.relays.push_back(std::move(relay));
  }
  return chain;
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kGroupedDP: return "grouped_dp";
    case Mode::kWrapAroundPP: return "wraparound_pp";
    case Mode::kPerGpuSwapDP: return "swap_dp";
    case Mode::kPerGpuSwapPP: return "swap_pp";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kGroupedDP, Mode::kWrapAroundPP, Mode::kPerGpuSwapDP, Mode::kPerGpuSwapPP}) {
    if (mode_name(m) == name) return m;
  }
  fail(ErrorCode::kSchema, "unknown mode '" + std::string(name) + "'");
}

bool is_data_parallel(Mode mode) {
  return mode == Mode::kGroupedDP || mode == Mode::kPerGpuSwapDP;
}

bool is_baseline(Mode mode) {
  return mode == Mode::kPerGpuSwapDP || mode == Mode::kPerGpuSwapPP;
}

std::string pack_label(const LayerRange& range) {
  if (range.first == range.last) return "L" + std::to_string(range.first);
  return "L" + std::to_string(range.first) + "-" + std::to_string(range.last);
}

std::string pack_list_label(const std::vector<LayerRange>& packs) {
  std::string out;
  for (std::size_t i = 0; i < packs.size(); ++i) {
    if (i) out += ", ";
    out += pack_label(packs[i]);
  }
  return out;
}

bool covers_contiguously(const std::vector<LayerRange>& packs, int layer_count) {
  if (packs.empty() || layer_count < 1) return false;
  int next = 0;
  for (const auto& p : packs) {
    if (p.first != next || p.last < p.first) return false;
    next = p.last + 1;
  }
  return next == layer_count;
}

bool shares_last_pack(const Configuration& cfg) {
  return !cfg.p_f.empty() && !cfg.p_b.empty() && cfg.p_f.back() == cfg.p_b.back();
}

void validate_configuration(const Configuration& cfg, int layer_count) {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::kInvalidConfiguration, what);
  };
  check(cfg.minibatch >= 1, "minibatch must be >= 1");
  check(cfg.u_f >= 1 && cfg.u_f <= cfg.minibatch, "u_f must lie in [1, minibatch]");
  check(cfg.u_b >= 1 && cfg.u_b <= cfg.minibatch, "u_b must lie in [1, minibatch]");
  check(covers_contiguously(cfg.p_f, layer_count),
        "forward packs must be contiguous and cover all " + std::to_string(layer_count) + " layers");
  check(covers_contiguously(cfg.p_b, layer_count),
        "backward packs must be contiguous and cover all " + std::to_string(layer_count) + " layers");
  check(shares_last_pack(cfg), "last forward pack must equal last backward pack");
  if (is_baseline(cfg.mode)) {
    check(cfg.u_f == cfg.u_b, "per-GPU swap baselines need u_f == u_b");
  }
}

std::string_view tensor_kind_name(TensorKind kind) {
  switch (kind) {
    case TensorKind::kX: return "X";
    case TensorKind::kY: return "Y";
    case TensorKind::kDX: return "dX";
    case TensorKind::kDY: return "dY";
    case TensorKind::kW: return "W";
    case TensorKind::kDW: return "dW";
    case TensorKind::kK: return "K";
    case TensorKind::kSX: return "sX";
  }
  return "?";
}

TensorKind parse_tensor_kind(std::string_view name) {
  for (int i = 0; i < kTensorKindCount; ++i) {
    const auto k = static_cast<TensorKind>(i);
    if (tensor_kind_name(k) == name) return k;
  }
  fail(ErrorCode::kSchema, "unknown tensor kind '" + std::string(name) + "'");
}

std::string_view channel_kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kCpuGpuSwap: return "cpu_gpu_swap";
    case ChannelKind::kPeer2Peer: return "peer2peer";
    case ChannelKind::kMessagePassing: return "message_passing";
    case ChannelKind::kSharedMemory: return "shared_memory";
  }
  return "?";
}

ChannelKind parse_channel_kind(std::string_view name) {
  for (int i = 0; i < kChannelKindCount; ++i) {
    const auto k = static_cast<ChannelKind>(i);
    if (channel_kind_name(k) == name) return k;
  }
  fail(ErrorCode::kSchema, "unknown channel kind '" + std::string(name) + "'");
}

std::vector<int> data_parallel_shares(int minibatch, int gpus) {
  std::vector<int> shares(gpus, minibatch / gpus);
  for (int g = 0; g < minibatch % gpus; ++g) ++shares[g];
  return shares;
}

std::vector<int> microbatch_group(int samples, int u) {
  std::vector<int> group(samples / u, u);
  if (samples % u) group.push_back(samples % u);
  return group;
}

}  // namespace wrapipe
