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

#include "wrapipe/simulator.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "wrapipe/errors.hpp"

namespace wrapipe {

std::string_view stream_name(Stream stream) {
  switch (stream) {
    case Stream::kCompute: return "compute";
    case Stream::kSwapIn: return "swap_in";
    case Stream::kSwapOut: return "swap_out";
    case Stream::kP2PIn: return "p2p_in";
    case Stream::kP2POut: return "p2p_out";
  }
  return "?";
}

std::string ResourceLayout::name(int resource) const {
  if (resource < root_in()) {
    return "GPU#" + std::to_string(resource / kStreamsPerGpu) + "." +
           std::string(stream_name(static_cast<Stream>(resource % kStreamsPerGpu)));
  }
  if (resource == root_in()) return "host.root_in";
  if (resource == root_out()) return "host.root_out";
  return "CPU#" + std::to_string(resource - cpu_update(0)) + ".update";
}

Bytes SimReport::swap_volume(TensorKind kind) const {
  const auto& v = tensor_volume[static_cast<int>(kind)];
  return v[static_cast<int>(ChannelKind::kCpuGpuSwap)] + v[static_cast<int>(ChannelKind::kMessagePassing)];
}

Bytes SimReport::total_swap_volume() const {
  Bytes total = 0;
  for (int k = 0; k < kTensorKindCount; ++k) total += swap_volume(static_cast<TensorKind>(k));
  return total;
}

namespace {

bool is_activation(TensorKind kind) {
  return kind == TensorKind::kX || kind == TensorKind::kY || kind == TensorKind::kDX || kind == TensorKind::kDY ||
         kind == TensorKind::kSX;
}

// Producer-side name of a tensor arriving as `kind`.
TensorKind produced_as(TensorKind kind) {
  if (kind == TensorKind::kX) return TensorKind::kY;
  if (kind == TensorKind::kDY) return TensorKind::kDX;
  return kind;
}

LayerRange span_of(const Route& r) { return {r.layers.front(), r.layers.back()}; }

class Lowering {
 public:
  Lowering(const TaskGraph& graph, const MachineModel& machine, const ProfileSet& profiles)
      : g_(graph), machine_(machine), phi_(profiles) {
    out_.layout.gpu_count = machine.gpu_count;
  }

  OpGraph run() {
    require(g_.gpu_count == machine_.gpu_count, ErrorCode::kInvalidArgument,
            "task graph was generated for a different gpu count");
    require(g_.layer_count == phi_.layer_count(), ErrorCode::kMissingProfile,
            "profile layer count does not match the task graph");
    const int n = static_cast<int>(g_.tasks.size());
    steps_.resize(n);
    done_.resize(n);
    gate_.assign(n, -1);
    prev_compute_.assign(n, -1);

    // Compute ops first so prefetch gates can reference later tasks.
    std::map<std::pair<int, int>, std::vector<int>> device_order;
    for (const auto& t : g_.tasks) {
      device_order[{static_cast<int>(t.device.kind), t.device.id}].push_back(t.index);
      make_compute_steps(t);
    }
    for (const auto& [dev, order] : device_order) {
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i >= 1) prev_compute_[order[i]] = steps_[order[i - 1]].back();
        if (i >= 2) gate_[order[i]] = steps_[order[i - 2]].back();
      }
    }
    for (const auto& t : g_.tasks) {
      wire_task(t);
    }
    return std::move(out_);
  }

 private:
  int add(Op op) {
    op.seq = static_cast<int>(out_.ops.size());
    out_.ops.push_back(std::move(op));
    return out_.ops.back().seq;
  }

  Op& op(int id) { return out_.ops[id]; }

  std::string step_label(const Task& t, int mb) const {
    if (t.type == TaskType::kUpdate) return "U P" + std::to_string(t.index + 1);
    return std::to_string(mb + 1) + " P" + std::to_string(t.index + 1);
  }

  void make_compute_steps(const Task& t) {
    const auto& layout = out_.layout;
    if (t.type == TaskType::kUpdate) {
      Op c;
      c.kind = OpKind::kCompute;
      c.task = t.index;
      c.resources = {layout.cpu_update(t.device.id)};
      for (int l = t.pack.first; l <= t.pack.last; ++l) c.duration += phi_.update_time(l, machine_);
      c.label = step_label(t, -1);
      c.gpu = t.gpu;
      steps_[t.index].push_back(add(std::move(c)));
      return;
    }
    for (std::size_t k = 0; k < t.microbatches.size(); ++k) {
      const int u = t.microbatches[k];
      Op c;
      c.kind = OpKind::kCompute;
      c.task = t.index;
      c.microbatch = static_cast<int>(k);
      c.resources = {layout.gpu_stream(t.gpu, Stream::kCompute)};
      if (t.type == TaskType::kForward) {
        c.duration = phi_.range_time(Pass::kForward, t.pack, u);
      } else {
        c.duration = phi_.range_time(Pass::kBackward, t.pack, u);
        if (t.recompute) c.duration += phi_.range_time(Pass::kForward, t.pack, u);
      }
      c.label = step_label(t, static_cast<int>(k));
      c.gpu = t.gpu;
      steps_[t.index].push_back(add(std::move(c)));
    }
    require(!steps_[t.index].empty(), ErrorCode::kInvalidArgument,
            "task " + std::to_string(t.index) + " has an empty microbatch group");
  }

  Bytes route_bytes(TensorKind kind, const Route& r, int u) const {
    const LayerRange span = span_of(r);
    switch (kind) {
      case TensorKind::kW: return phi_.range_weight(span);
      case TensorKind::kDW: return phi_.range_wgrad(span);
      case TensorKind::kK: return phi_.range_optstate(span);
      case TensorKind::kX:
      case TensorKind::kY: return phi_.boundary_bytes(span.first, u);
      case TensorKind::kDX:
      case TensorKind::kDY:
      case TensorKind::kSX: return phi_.pack_input_bytes(span.first, u);
    }
    return 0;
  }

  // Creates a transfer (or a marker when nothing moves) and returns its id.
  int transfer(const Task& owner, int microbatch, TensorKind kind, ChannelKind channel, Bytes bytes,
               std::vector<int> resources, int gpu, std::vector<int> deps, const std::string& tag) {
    Op o;
    o.task = owner.index;
    o.microbatch = microbatch;
    o.tensor = kind;
    o.channel = channel;
    o.gpu = gpu;
    o.deps = std::move(deps);
    o.label = std::string(tensor_kind_name(kind)) + tag + " P" + std::to_string(owner.index + 1);
    if (bytes > 0 && !resources.empty()) {
      o.kind = OpKind::kTransfer;
      o.bytes = bytes;
      o.resources = std::move(resources);
      std::int64_t bw = 0;
      for (int res : o.resources) {
        const std::int64_t b = res == out_.layout.root_in() || res == out_.layout.root_out()
                                   ? machine_.root_link_bandwidth
                                   : machine_.pcie_bandwidth;
        bw = bw == 0 ? b : std::min(bw, b);
      }
      o.duration = transfer_time(bytes, bw);
    }
    return add(std::move(o));
  }

  std::vector<int> swap_in_res(int gpu) const {
    return {out_.layout.gpu_stream(gpu, Stream::kSwapIn), out_.layout.root_in()};
  }
  std::vector<int> swap_out_res(int gpu) const {
    return {out_.layout.gpu_stream(gpu, Stream::kSwapOut), out_.layout.root_out()};
  }
  std::vector<int> p2p_res(int src, int dst) const {
    std::vector<int> r{out_.layout.gpu_stream(src, Stream::kP2POut), out_.layout.gpu_stream(dst, Stream::kP2PIn)};
    if (machine_.group_of(src) != machine_.group_of(dst)) {
      r.push_back(out_.layout.root_out());
      r.push_back(out_.layout.root_in());
    }
    return r;
  }

  // Sample ranges of each microbatch in a task's group.
  static std::vector<std::pair<int, int>> sample_ranges(const Task& t) {
    std::vector<std::pair<int, int>> out;
    int s = t.first_sample;
    for (int u : t.microbatches) {
      out.emplace_back(s, s + u);
      s += u;
    }
    return out;
  }

  void wire_task(const Task& t) {
    auto& my_steps = steps_[t.index];
    std::vector<int> owned(my_steps.begin(), my_steps.end());

    // Completion of explicitly ordered tasks gates both inputs and compute.
    std::vector<int> after_deps;
    for (int a : t.after) {
      require(a < t.index, ErrorCode::kInvalidArgument, "ordering dependency must point backwards");
      after_deps.push_back(done_[a]);
    }

    // Host inputs, gated by double buffering.
    int input_gate = gate_[t.index];
    if (t.type == TaskType::kUpdate) {
      input_gate = -1;
      for (const auto& r : t.inputs) {
        if (r.peer != kHost) input_gate = std::max(input_gate, gate_[r.peer]);
      }
    }
    std::vector<int> host_inputs;
    for (const auto& r : t.inputs) {
      if (r.peer != kHost) continue;
      std::vector<int> deps = after_deps;
      if (input_gate >= 0) deps.push_back(input_gate);
      const int id = transfer(t, -1, r.kind, r.channel, route_bytes(r.kind, r, 0), swap_in_res(t.gpu), t.gpu,
                              std::move(deps), " in");
      host_inputs.push_back(id);
      owned.push_back(id);
    }

    // First step waits for the device predecessor, inputs and ordering.
    auto& first = op(my_steps.front());
    if (prev_compute_[t.index] >= 0) first.deps.push_back(prev_compute_[t.index]);
    first.deps.insert(first.deps.end(), host_inputs.begin(), host_inputs.end());
    first.deps.insert(first.deps.end(), after_deps.begin(), after_deps.end());
    for (std::size_t k = 1; k < my_steps.size(); ++k) op(my_steps[k]).deps.push_back(my_steps[k - 1]);

    // Inputs produced by earlier tasks.
    const auto my_ranges = sample_ranges(t);
    for (const auto& r : t.inputs) {
      if (r.peer == kHost) continue;
      const Task& p = g_.tasks.at(r.peer);
      require(p.index < t.index, ErrorCode::kInvalidArgument, "producer must precede consumer");
      const TensorKind kind = produced_as(r.kind);
      const bool per_microbatch = is_activation(r.kind) && t.type != TaskType::kUpdate;
      const auto prod_ranges = sample_ranges(p);
      const std::size_t count = is_activation(r.kind) ? p.microbatches.size() : 1;
      for (std::size_t k = 0; k < count; ++k) {
        const int src = is_activation(r.kind) ? steps_[p.index][k] : steps_[p.index].back();
        const Bytes bytes = route_bytes(kind, r, is_activation(r.kind) ? p.microbatches[k] : 0);
        const int mb = is_activation(r.kind) ? static_cast<int>(k) : -1;
        int arrival = -1;
        switch (r.channel) {
          case ChannelKind::kSharedMemory:
            arrival = transfer(p, mb, kind, r.channel, 0, {}, p.gpu, {src}, "");
            extra_done_[p.index].push_back(arrival);
            break;
          case ChannelKind::kPeer2Peer:
            arrival = transfer(p, mb, kind, r.channel, bytes, p2p_res(p.gpu, t.gpu), p.gpu, {src}, "");
            extra_done_[p.index].push_back(arrival);
            break;
          case ChannelKind::kCpuGpuSwap:
            arrival = transfer(p, mb, kind, r.channel, bytes, swap_out_res(p.gpu), p.gpu, {src}, " out");
            extra_done_[p.index].push_back(arrival);
            break;
          case ChannelKind::kMessagePassing: {
            const int leg = transfer(p, mb, kind, r.channel, bytes, swap_out_res(p.gpu), p.gpu, {src}, " out");
            extra_done_[p.index].push_back(leg);
            std::vector<int> deps{leg};
            if (gate_[t.index] >= 0) deps.push_back(gate_[t.index]);
            arrival = transfer(t, mb, kind, r.channel, bytes, swap_in_res(t.gpu), t.gpu, std::move(deps), " in");
            owned.push_back(arrival);
            break;
          }
        }
        // Attach the arrival to every consumer step whose samples overlap.
        if (!per_microbatch) {
          op(my_steps.front()).deps.push_back(arrival);
          continue;
        }
        for (std::size_t j = 0; j < my_ranges.size(); ++j) {
          if (my_ranges[j].first < prod_ranges[k].second && prod_ranges[k].first < my_ranges[j].second) {
            op(my_steps[j]).deps.push_back(arrival);
          }
        }
      }
    }

    // Task-level outputs to the host leave after the last step.
    for (const auto& r : t.outputs) {
      if (r.peer != kHost) continue;
      owned.push_back(transfer(t, -1, r.kind, r.channel, route_bytes(r.kind, r, 0), swap_out_res(t.gpu), t.gpu,
                               {my_steps.back()}, " out"));
    }

    Op marker;
    marker.task = t.index;
    marker.deps = owned;
    marker.label = "done P" + std::to_string(t.index + 1);
    done_[t.index] = add(std::move(marker));
    pending_done_.push_back(t.index);
    // Producer-side legs created while wiring later consumers join the
    // marker lazily; they are appended below once every task is wired.
    if (t.index + 1 == static_cast<int>(g_.tasks.size())) {
      for (int i : pending_done_) {
        auto& d = op(done_[i]).deps;
        d.insert(d.end(), extra_done_[i].begin(), extra_done_[i].end());
      }
    }
  }

  const TaskGraph& g_;
  const MachineModel& machine_;
  const ProfileSet& phi_;
  OpGraph out_;
  std::vector<std::vector<int>> steps_;
  std::vector<int> done_;
  std::vector<int> gate_;
  std::vector<int> prev_compute_;
  std::map<int, std::vector<int>> extra_done_;
  std::vector<int> pending_done_;
};

struct Key {
  Nanos ready = 0;
  int task = 0;
  int seq = 0;
  friend auto operator<=>(const Key&, const Key&) = default;
};

}  // namespace

OpGraph lower_task_graph(const TaskGraph& graph, const MachineModel& machine, const ProfileSet& profiles) {
  MachineModel m = machine;
  m.validate();
  return Lowering(graph, m, profiles).run();
}

SimReport run_op_graph(const OpGraph& graph, const MachineModel& machine) {
  const auto& ops = graph.ops;
  const auto& layout = graph.layout;
  const int n = static_cast<int>(ops.size());
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> dependents(n);
  for (int i = 0; i < n; ++i) {
    for (int d : ops[i].deps) {
      require(d >= 0 && d < n, ErrorCode::kInternal, "dangling op dependency");
      ++indeg[i];
      dependents[d].push_back(i);
    }
  }

  std::vector<std::set<std::pair<Key, int>>> queues(layout.count());
  std::vector<Nanos> free_at(layout.count(), 0);
  std::vector<Key> key(n);
  std::vector<Nanos> start(n, -1), finish(n, -1);
  using Event = std::tuple<Nanos, int, int, int>;  // time, task, seq, op
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;

  auto make_ready = [&](int i, Nanos t) {
    key[i] = {t, ops[i].task, ops[i].seq};
    if (ops[i].resources.empty()) {
      start[i] = t;
      events.emplace(t + ops[i].duration, ops[i].task, ops[i].seq, i);
      return;
    }
    for (int r : ops[i].resources) queues[r].insert({key[i], i});
  };

  auto dispatch = [&](Nanos t) {
    bool progress = true;
    while (progress) {
      progress = false;
      std::vector<std::pair<Key, int>> heads;
      for (int r = 0; r < layout.count(); ++r) {
        if (!queues[r].empty() && free_at[r] <= t) heads.push_back(*queues[r].begin());
      }
      std::sort(heads.begin(), heads.end());
      heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
      for (const auto& [k, i] : heads) {
        bool ok = true;
        for (int r : ops[i].resources) {
          if (free_at[r] > t || queues[r].begin()->second != i) ok = false;
        }
        if (!ok) continue;
        for (int r : ops[i].resources) {
          queues[r].erase(queues[r].begin());
          free_at[r] = t + ops[i].duration;
        }
        start[i] = t;
        events.emplace(t + ops[i].duration, ops[i].task, ops[i].seq, i);
        progress = true;
      }
    }
  };

  for (int i = 0; i < n; ++i) {
    if (indeg[i] == 0) make_ready(i, 0);
  }
  Nanos now = 0;
  int finished = 0;
  while (true) {
    dispatch(now);
    if (events.empty()) break;
    now = std::get<0>(events.top());
    while (!events.empty() && std::get<0>(events.top()) == now) {
      const int i = std::get<3>(events.top());
      events.pop();
      finish[i] = now;
      ++finished;
      for (int d : dependents[i]) {
        if (--indeg[d] == 0) make_ready(d, now);
      }
    }
  }
  if (finished != n) {
    fail(ErrorCode::kDeadlockDetected,
         std::to_string(n - finished) + " operations never became runnable; the task graph is inconsistent");
  }

  SimReport rep;
  const int gpus = layout.gpu_count;
  rep.gpu_busy.assign(gpus, 0);
  rep.gpu_volume.assign(gpus, ChannelVolumes{});
  for (int r = 0; r < layout.count(); ++r) rep.lanes.push_back(layout.name(r));
  for (int i = 0; i < n; ++i) {
    const Op& o = ops[i];
    rep.makespan = std::max(rep.makespan, finish[i]);
    if (o.kind == OpKind::kMarker) continue;
    if (o.kind == OpKind::kCompute && o.resources.front() < layout.root_in()) {
      rep.gpu_busy[o.resources.front() / kStreamsPerGpu] += o.duration;
    }
    if (o.kind == OpKind::kTransfer) {
      const int c = static_cast<int>(o.channel);
      rep.volume[c] += o.bytes;
      rep.tensor_volume[static_cast<int>(o.tensor)][c] += o.bytes;
      if (o.gpu >= 0) rep.gpu_volume[o.gpu][c] += o.bytes;
    }
    for (int r : o.resources) {
      TraceEvent e;
      e.resource = layout.name(r);
      e.task = o.task;
      e.kind = o.kind == OpKind::kCompute ? "compute" : std::string(tensor_kind_name(o.tensor));
      e.label = o.label;
      e.start = start[i];
      e.end = finish[i];
      e.bytes = o.bytes;
      rep.trace.push_back(std::move(e));
    }
  }
  std::stable_sort(rep.trace.begin(), rep.trace.end(), [&](const TraceEvent& a, const TraceEvent& b) {
    return std::tie(a.start, a.task) < std::tie(b.start, b.task);
  });
  for (int gi = 0; gi < gpus; ++gi) rep.gpu_idle.push_back(rep.makespan - rep.gpu_busy[gi]);
  (void)machine;
  return rep;
}

SimReport simulate(const TaskGraph& graph, const MachineModel& machine, const ProfileSet& profiles) {
  MachineModel m = machine;
  m.validate();
  SimReport rep = run_op_graph(lower_task_graph(graph, m, profiles), m);
  rep.notes = graph.notes;
  rep.notes.push_back("message-passing stash traffic rides the swap streams and the root link");
  return rep;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> used_lanes(const SimReport& report) {
  std::set<std::string> used;
  for (const auto& e : report.trace) used.insert(e.resource);
  std::vector<std::string> lanes;
  for (const auto& l : report.lanes) {
    if (used.count(l)) lanes.push_back(l);
  }
  for (const auto& l : used) {
    if (std::find(lanes.begin(), lanes.end(), l) == lanes.end()) lanes.push_back(l);
  }
  return lanes;
}

const char* fill_for(const std::string& kind) {
  if (kind == "compute") return "#4e79a7";
  if (kind == "W" || kind == "dW" || kind == "K") return "#f28e2b";
  if (kind == "sX") return "#59a14f";
  return "#b07aa1";
}

std::string render_text(const SimReport& report, const GanttOptions& opt) {
  std::ostringstream os;
  os << "# gantt";
  if (!opt.title.empty()) os << ": " << opt.title;
  os << "\n# makespan_ns " << report.makespan << "\n";
  const auto lanes = used_lanes(report);
  if (lanes.empty() || report.makespan == 0) return os.str();
  std::size_t name_w = 0;
  for (const auto& l : lanes) name_w = std::max(name_w, l.size());
  const int width = std::max(10, opt.text_width);
  auto col = [&](Nanos t) {
    return static_cast<int>(static_cast<__int128>(t) * width / report.makespan);
  };
  for (const auto& lane : lanes) {
    std::string bar(width, '.');
    for (const auto& e : report.trace) {
      if (e.resource != lane) continue;
      const int a = col(e.start);
      const int b = std::max(a + 1, col(e.end));
      const char ch = e.kind == "compute" ? '#' : '=';
      for (int c = a; c < b && c < width; ++c) bar[c] = ch;
      // Stamp the label when it fits inside the bar.
      if (static_cast<int>(e.label.size()) + 2 <= b - a) {
        for (std::size_t k = 0; k < e.label.size(); ++k) bar[a + 1 + k] = e.label[k];
      }
    }
    os << lane << std::string(name_w - lane.size(), ' ') << " |" << bar << "|\n";
    for (const auto& br : opt.braces) {
      if (br.lane != lane) continue;
      std::string under(width, ' ');
      const int a = col(br.start);
      const int b = std::max(a + 1, col(br.end));
      for (int c = a; c < b && c < width; ++c) under[c] = '~';
      under[a] = '\\';
      if (b - 1 < width) under[b - 1] = '/';
      os << std::string(name_w, ' ') << "  " << under << " " << br.label << "\n";
    }
  }
  os << "# events\n";
  for (const auto& e : report.trace) {
    os << e.resource << " " << e.start << " " << e.end << " " << e.kind << " " << e.label << "\n";
  }
  return os.str();
}

std::string render_svg(const SimReport& report, const GanttOptions& opt) {
  const auto lanes = used_lanes(report);
  const int label_w = 140, plot_w = 900, lane_h = 28, brace_h = 26, top = 40;
  std::map<std::string, int> lane_y;
  int y = top;
  for (const auto& l : lanes) {
    lane_y[l] = y;
    y += lane_h;
    for (const auto& br : opt.braces) {
      if (br.lane == l) {
        y += brace_h;
        break;
      }
    }
  }
  const int height = y + 20;
  const int width = label_w + plot_w + 20;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "<text x=\"8\" y=\"20\" font-size=\"14\">" << xml_escape(opt.title.empty() ? "gantt" : opt.title)
     << " (makespan " << report.makespan << " ns)</text>\n";
  if (lanes.empty() || report.makespan == 0) {
    os << "</svg>\n";
    return os.str();
  }
  auto x_of = [&](Nanos t) {
    return label_w + static_cast<double>(t) * plot_w / static_cast<double>(report.makespan);
  };
  for (const auto& l : lanes) {
    os << "<text x=\"8\" y=\"" << lane_y[l] + 17 << "\">" << xml_escape(l) << "</text>\n";
    os << "<line x1=\"" << label_w << "\" y1=\"" << lane_y[l] + lane_h - 2 << "\" x2=\"" << label_w + plot_w
       << "\" y2=\"" << lane_y[l] + lane_h - 2 << "\" stroke=\"#ccc\"/>\n";
  }
  for (const auto& e : report.trace) {
    const double x0 = x_of(e.start), x1 = x_of(e.end);
    const int ly = lane_y[e.resource];
    os << "<rect x=\"" << x0 << "\" y=\"" << ly + 3 << "\" width=\"" << std::max(0.5, x1 - x0) << "\" height=\""
       << lane_h - 8 << "\" fill=\"" << fill_for(e.kind) << "\" stroke=\"#222\" stroke-width=\"0.5\"><title>"
       << xml_escape(e.label) << " [" << e.start << ", " << e.end << ")</title></rect>\n";
    if ((x1 - x0) > 7.0 * static_cast<double>(e.label.size())) {
      os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << ly + 17 << "\" text-anchor=\"middle\" fill=\"#fff\">"
         << xml_escape(e.label) << "</text>\n";
    }
  }
  for (const auto& br : opt.braces) {
    if (!lane_y.count(br.lane)) continue;
    const double x0 = x_of(br.start), x1 = x_of(br.end), xm = (x0 + x1) / 2;
    const int by = lane_y[br.lane] + lane_h;
    os << "<path class=\"brace\" d=\"M" << x0 << " " << by << " Q" << x0 << " " << by + 8 << " " << xm << " "
       << by + 8 << " Q" << x1 << " " << by + 8 << " " << x1 << " " << by << "\" fill=\"none\" stroke=\"#c00\"/>\n";
    os << "<text x=\"" << xm << "\" y=\"" << by + 21 << "\" text-anchor=\"middle\" fill=\"#c00\">"
       << xml_escape(br.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render_gantt(const SimReport& report, GanttFormat format, const GanttOptions& options) {
  return format == GanttFormat::kSvg ? render_svg(report, options) : render_text(report, options);
}

std::string trace_csv(const SimReport& report) {
  std::ostringstream os;
  os << "resource,task,kind,start_ns,end_ns\n";
  for (const auto& e : report.trace) {
    os << e.resource << "," << e.task << "," << e.kind << "," << e.start << "," << e.end << "\n";
  }
  return os.str();
}

}  // namespace wrapipe
