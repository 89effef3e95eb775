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

#include "wrapipe/hardness.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "wrapipe/errors.hpp"

namespace wrapipe {

ReductionInstance build_reduction(const std::vector<std::int64_t>& numbers, std::optional<std::int64_t> scale) {
  require(!numbers.empty(), ErrorCode::kEmptyInput, "the Partition instance needs at least one number");
  for (auto a : numbers) require(a > 0, ErrorCode::kInvalidArgument, "Partition numbers must be positive");
  ReductionInstance inst;
  inst.source = numbers;
  inst.scale = scale.value_or(6 * std::accumulate(numbers.begin(), numbers.end(), std::int64_t{0}));
  require(inst.scale > 0, ErrorCode::kInvalidArgument, "A must be positive");
  const std::int64_t a = inst.scale;
  inst.layers.push_back({8 * a, 6});
  inst.layers.push_back({8 * a, 6});
  for (auto x : numbers) {
    inst.layers.push_back({5 * a, 4});
    inst.layers.push_back({x, 2});
    inst.layers.push_back({5 * a, 4});
  }
  inst.layers.push_back({8 * a, 6});
  inst.layers.push_back({8 * a, 6});
  return inst;
}

std::int64_t Rational::value() const {
  if (!integral()) {
    fail(ErrorCode::kNonIntegralT, "T = " + std::to_string(numerator) + "/" + std::to_string(denominator) +
                                       " is not an integer");
  }
  return numerator / denominator;
}

Rational target_T(const ReductionInstance& inst) {
  require(!inst.layers.empty() && inst.gpus >= 1, ErrorCode::kInvalidArgument, "empty reduction instance");
  std::int64_t sum = 0;
  for (const auto& l : inst.layers) sum += l.time;
  return {inst.microbatches * sum + inst.layers.front().time + inst.layers.back().time, inst.gpus};
}

namespace {

void check_packs(const ReductionInstance& inst, const std::vector<LayerRange>& packs) {
  require(covers_contiguously(packs, inst.layer_count()), ErrorCode::kInvalidConfiguration,
          "packs must be contiguous and cover every layer");
  for (const auto& p : packs) {
    Bytes m = 0;
    for (int i = p.first; i <= p.last; ++i) m += inst.layers[i].size;
    if (m > inst.capacity) {
      fail(ErrorCode::kCapacityViolation, "pack " + pack_label(p) + " holds " + std::to_string(m) +
                                              " > M = " + std::to_string(inst.capacity));
    }
  }
}

// Incremental evaluation state shared by the evaluator and the enumerator.
struct RunState {
  std::vector<Nanos> gpu_free;
  std::vector<Nanos> finish;  // per microbatch, on the latest pack

  RunState(int gpus, int microbatches) : gpu_free(gpus, 0), finish(microbatches, 0) {}

  template <typename Emit>
  void apply(int pack, Nanos time, int gpus, Emit&& emit) {
    Nanos& free = gpu_free[pack % gpus];
    for (std::size_t b = 0; b < finish.size(); ++b) {
      const Nanos s = std::max(free, finish[b]);
      finish[b] = s + time;
      free = finish[b];
      emit(static_cast<int>(b), s, finish[b]);
    }
  }

  Nanos makespan() const {
    return std::max(*std::max_element(gpu_free.begin(), gpu_free.end()),
                    *std::max_element(finish.begin(), finish.end()));
  }
};

}  // namespace

SimpleSchedule eval_schedule(const ReductionInstance& inst, const std::vector<LayerRange>& packs) {
  check_packs(inst, packs);
  SimpleSchedule sched;
  sched.packs = packs;
  RunState st(inst.gpus, inst.microbatches);
  for (int j = 0; j < static_cast<int>(packs.size()); ++j) {
    Nanos t = 0;
    for (int i = packs[j].first; i <= packs[j].last; ++i) t += inst.layers[i].time;
    st.apply(j, t, inst.gpus, [&](int b, Nanos s, Nanos e) {
      sched.items.push_back({j, b, j % inst.gpus, s, e});
    });
  }
  sched.makespan = st.makespan();
  return sched;
}

Nanos eval_makespan(const ReductionInstance& inst, const std::vector<LayerRange>& packs) {
  return eval_schedule(inst, packs).makespan;
}

std::vector<IdleWindow> idle_windows(const ReductionInstance& inst, const SimpleSchedule& schedule) {
  std::vector<IdleWindow> out;
  for (int g = 0; g < inst.gpus; ++g) {
    std::vector<std::pair<Nanos, Nanos>> busy;
    for (const auto& it : schedule.items) {
      if (it.gpu == g && it.end > it.start) busy.emplace_back(it.start, it.end);
    }
    std::sort(busy.begin(), busy.end());
    if (busy.empty()) {
      if (schedule.makespan > 0) out.push_back({g, 0, schedule.makespan, true});
      continue;
    }
    if (busy.front().first > 0) out.push_back({g, 0, busy.front().first, true});
    for (std::size_t i = 1; i < busy.size(); ++i) {
      if (busy[i].first > busy[i - 1].second) out.push_back({g, busy[i - 1].second, busy[i].first, false});
    }
    if (busy.back().second < schedule.makespan) out.push_back({g, busy.back().second, schedule.makespan, true});
  }
  return out;
}

namespace {

struct Enumerator {
  const ReductionInstance& inst;
  std::vector<Nanos> prefix_time;
  std::vector<Bytes> prefix_size;
  EnumerationResult best;
  bool found = false;
  std::vector<LayerRange> current;

  explicit Enumerator(const ReductionInstance& in) : inst(in) {
    const int n = inst.layer_count();
    prefix_time.assign(n + 1, 0);
    prefix_size.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      prefix_time[i + 1] = prefix_time[i] + inst.layers[i].time;
      prefix_size[i + 1] = prefix_size[i] + inst.layers[i].size;
    }
  }

  bool fits(int first, int last) const { return prefix_size[last + 1] - prefix_size[first] <= inst.capacity; }

  void dfs(int next, const RunState& st) {
    const int n = inst.layer_count();
    if (next == n) {
      ++best.feasible_partitions;
      const Nanos ms = st.makespan();
      if (!found || ms < best.best_makespan) {
        found = true;
        best.best_makespan = ms;
        best.best_packs = current;
      }
      return;
    }
    for (int last = next; last < n && fits(next, last); ++last) {
      RunState child = st;
      child.apply(static_cast<int>(current.size()), prefix_time[last + 1] - prefix_time[next], inst.gpus,
                  [](int, Nanos, Nanos) {});
      current.push_back({next, last});
      dfs(last + 1, child);
      current.pop_back();
    }
  }
};

}  // namespace

EnumerationResult enumerate_optimal(const ReductionInstance& inst, int jobs) {
  require(inst.layer_count() >= 1, ErrorCode::kEmptyInput, "no layers to enumerate");
  if (inst.layer_count() > kMaxEnumerationLayers) {
    fail(ErrorCode::kTooLarge, std::to_string(inst.layer_count()) + " layers exceed the enumeration limit of " +
                                   std::to_string(kMaxEnumerationLayers));
  }
  for (const auto& l : inst.layers) {
    if (l.size > inst.capacity) fail(ErrorCode::kCapacityViolation, "a single layer exceeds M");
  }
  // One subtree per choice of the first pack, merged in DFS order.
  std::vector<int> firsts;
  {
    Enumerator probe(inst);
    for (int last = 0; last < inst.layer_count() && probe.fits(0, last); ++last) firsts.push_back(last);
  }
  std::vector<EnumerationResult> parts(firsts.size());
  std::vector<bool> found(firsts.size(), false);
  auto run = [&](std::size_t k) {
    Enumerator e(inst);
    RunState st(inst.gpus, inst.microbatches);
    st.apply(0, e.prefix_time[firsts[k] + 1], inst.gpus, [](int, Nanos, Nanos) {});
    e.current.push_back({0, firsts[k]});
    e.dfs(firsts[k] + 1, st);
    parts[k] = std::move(e.best);
    found[k] = e.found;
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(firsts.size())));
  if (jobs == 1) {
    for (std::size_t k = 0; k < firsts.size(); ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < firsts.size(); k += jobs) run(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  EnumerationResult out;
  bool any = false;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    out.feasible_partitions += parts[k].feasible_partitions;
    if (found[k] && (!any || parts[k].best_makespan < out.best_makespan)) {
      any = true;
      out.best_makespan = parts[k].best_makespan;
      out.best_packs = parts[k].best_packs;
    }
  }
  return out;
}

std::optional<std::vector<int>> find_partition(const std::vector<std::int64_t>& numbers) {
  const int n = static_cast<int>(numbers.size());
  require(n >= 1, ErrorCode::kEmptyInput, "the Partition instance needs at least one number");
  if (n > 18) fail(ErrorCode::kTooLarge, "subset search is limited to 18 numbers");
  const std::int64_t total = std::accumulate(numbers.begin(), numbers.end(), std::int64_t{0});
  if (total % 2 != 0) return std::nullopt;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::int64_t s = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += numbers[i];
    }
    if (2 * s == total) {
      std::vector<int> subset;
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) subset.push_back(i);
      }
      return subset;
    }
  }
  return std::nullopt;
}

VerifyResult verify_reduction(const std::vector<std::int64_t>& numbers, std::optional<std::int64_t> scale,
                              int jobs) {
  VerifyResult v;
  const auto split = find_partition(numbers);
  v.partition_yes = split.has_value();
  if (split) v.subset = *split;
  const ReductionInstance inst = build_reduction(numbers, scale);
  v.target = target_T(inst);
  const EnumerationResult best = enumerate_optimal(inst, jobs);
  v.best_makespan = best.best_makespan;
  v.witness = best.best_packs;
  v.t_achievable = v.target.equals(best.best_makespan);
  return v;
}

std::vector<LayerRange> packs_for_subset(const ReductionInstance& inst, const std::vector<int>& subset) {
  const int n = static_cast<int>(inst.source.size());
  require(inst.layer_count() == 3 * n + 4, ErrorCode::kInvalidArgument, "instance is not a reduction output");
  std::vector<LayerRange> packs{{0, 0}, {1, 1}};
  for (int i = 0; i < n; ++i) {
    const int base = 2 + 3 * i;
    if (std::find(subset.begin(), subset.end(), i) != subset.end()) {
      packs.push_back({base, base + 1});
      packs.push_back({base + 2, base + 2});
    } else {
      packs.push_back({base, base});
      packs.push_back({base + 1, base + 2});
    }
  }
  packs.push_back({3 * n + 2, 3 * n + 2});
  packs.push_back({3 * n + 3, 3 * n + 3});
  return packs;
}

LiftedInstance lift_to_task_graph(const ReductionInstance& inst, const std::vector<LayerRange>& packs) {
  check_packs(inst, packs);
  LiftedInstance out;
  std::vector<LayerProfile> layers;
  for (const auto& l : inst.layers) {
    LayerProfile lp;
    lp.f_time = AffineModel::constant(l.time);
    lp.f_mem = AffineModel::constant(l.size);
    lp.b_time = AffineModel::constant(0);
    lp.b_mem = AffineModel::constant(l.size);
    layers.push_back(lp);
  }
  out.profiles = ProfileSet(std::move(layers), 1, 1);
  out.machine.gpu_count = inst.gpus;
  out.machine.gpu_mem_capacity = inst.capacity;
  out.machine.pcie_bandwidth = 1;
  out.machine.validate();

  TaskGraph& g = out.graph;
  g.mode = Mode::kWrapAroundPP;
  g.gpu_count = inst.gpus;
  g.layer_count = inst.layer_count();
  for (int j = 0; j < static_cast<int>(packs.size()); ++j) {
    Task t;
    t.index = j;
    t.pack = packs[j];
    t.type = TaskType::kForward;
    t.microbatches.assign(inst.microbatches, 1);
    t.gpu = j % inst.gpus;
    t.device = {Device::Kind::kGpu, t.gpu};
    std::vector<int> ls(t.pack.size());
    std::iota(ls.begin(), ls.end(), t.pack.first);
    t.inputs.push_back({TensorKind::kW, ChannelKind::kCpuGpuSwap, kHost, ls});
    g.tasks.push_back(std::move(t));
  }
  for (int j = 1; j < static_cast<int>(packs.size()); ++j) {
    const ChannelKind ch = inst.gpus == 1 ? ChannelKind::kSharedMemory : ChannelKind::kPeer2Peer;
    g.tasks[j - 1].outputs.push_back({TensorKind::kY, ch, j, {packs[j - 1].last}});
    g.tasks[j].inputs.push_back({TensorKind::kX, ch, j - 1, {packs[j - 1].last}});
  }
  g.notes.push_back("lifted reduction instance: zero-byte tensors, forward tasks only");
  return out;
}

std::string render_reduction_gantt(const ReductionInstance& inst, const std::vector<LayerRange>& packs,
                                   GanttFormat format) {
  const LiftedInstance lifted = lift_to_task_graph(inst, packs);
  const SimReport rep = simulate(lifted.graph, lifted.machine, lifted.profiles);
  const SimpleSchedule sched = eval_schedule(inst, packs);
  GanttOptions opt;
  const Rational t = target_T(inst);
  opt.title = "makespan " + std::to_string(sched.makespan) + ", T = " +
              (t.integral() ? std::to_string(t.value()) : std::to_string(t.approx()));
  for (const auto& w : idle_windows(inst, sched)) {
    opt.braces.push_back({"GPU#" + std::to_string(w.gpu) + ".compute", w.start, w.end,
                          std::string(w.forced ? "forced idle " : "unforced idle ") + std::to_string(w.end - w.start)});
  }
  return render_gantt(rep, format, opt);
}

}  // namespace wrapipe
