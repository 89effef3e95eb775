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

#include "wrapipe/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "wrapipe/errors.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {

std::string_view strategy_name(Strategy s) { return s == Strategy::kEquiFB ? "equi_fb" : "distinct_fb"; }

Strategy parse_strategy(std::string_view name) {
  if (name == "distinct_fb") return Strategy::kDistinctFB;
  if (name == "equi_fb") return Strategy::kEquiFB;
  fail(ErrorCode::kSchema, "unknown strategy '" + std::string(name) + "'");
}

std::string_view packer_name(Packer p) { return p == Packer::kGreedyMax ? "greedy_max" : "balanced"; }

Packer parse_packer(std::string_view name) {
  if (name == "balanced") return Packer::kBalanced;
  if (name == "greedy_max") return Packer::kGreedyMax;
  fail(ErrorCode::kSchema, "unknown packer '" + std::string(name) + "'");
}

std::pair<int, int> sweep_bounds(const SearchSpec& spec, const MachineModel& machine, const ProfileSet& profiles) {
  require(spec.minibatch >= 1, ErrorCode::kInvalidArgument, "minibatch must be >= 1");
  int d = spec.minibatch;
  if (is_data_parallel(spec.mode)) {
    require(d >= machine.gpu_count, ErrorCode::kInvalidConfiguration,
            "data parallel modes need minibatch >= gpu count");
    d /= machine.gpu_count;
  }
  const int uf = std::min({spec.u_fmax.value_or(profiles.u_max_f()), profiles.u_max_f(), d});
  const int ub = std::min({spec.u_bmax.value_or(profiles.u_max_b()), profiles.u_max_b(), d});
  require(uf >= 1 && ub >= 1, ErrorCode::kInvalidArgument, "sweep bounds must be >= 1");
  return {uf, ub};
}

namespace {

PackPlan pack_backward(Packer packer, int u, const MachineModel& m, const ProfileSet& phi) {
  return packer == Packer::kGreedyMax ? greedy_maxpack(Pass::kBackward, u, phi, m.gpu_mem_capacity)
                                      : balanced_time_pack(Pass::kBackward, u, phi, m.gpu_mem_capacity);
}

PackPlan pack_forward(Packer packer, int u, const MachineModel& m, const ProfileSet& phi, const PackPlan& back) {
  return packer == Packer::kGreedyMax ? greedy_maxpack(Pass::kForward, u, phi, m.gpu_mem_capacity, back)
                                      : balanced_time_pack(Pass::kForward, u, phi, m.gpu_mem_capacity, back);
}

// Forward reuse of backward packs must also fit at the forward footprint.
void check_forward_fit(const std::vector<LayerRange>& packs, int u, const MachineModel& m, const ProfileSet& phi) {
  const PackPlan f = describe_packs(Pass::kForward, u, phi, packs);
  for (std::size_t i = 0; i < f.packs.size(); ++i) {
    if (f.memories[i] > m.gpu_mem_capacity) {
      fail(ErrorCode::kUnpackable, "backward pack " + pack_label(f.packs[i]) + " exceeds capacity in forward");
    }
  }
}

struct Point {
  int u_f = 0;
  int u_b = 0;
  bool equal_packs = false;
};

}  // namespace

Configuration make_configuration(Mode mode, int minibatch, int u_f, int u_b, Packer packer,
                                 const MachineModel& machine, const ProfileSet& profiles, bool equal_packs) {
  Configuration cfg;
  cfg.mode = mode;
  cfg.minibatch = minibatch;
  cfg.u_f = u_f;
  cfg.u_b = u_b;
  const PackPlan back = pack_backward(packer, u_b, machine, profiles);
  cfg.p_b = back.packs;
  if (equal_packs) {
    require(u_f == u_b, ErrorCode::kInvalidArgument, "shared packs need U_F == U_B");
    check_forward_fit(back.packs, u_f, machine, profiles);
    cfg.p_f = back.packs;
  } else {
    cfg.p_f = pack_forward(packer, u_f, machine, profiles, back).packs;
  }
  return cfg;
}

SearchResult search(const SearchSpec& spec, const MachineModel& machine_in, const ProfileSet& profiles) {
  const auto t0 = std::chrono::steady_clock::now();
  MachineModel machine = machine_in;
  machine.validate();
  require(spec.stride >= 1, ErrorCode::kInvalidArgument, "stride must be >= 1");
  const auto [uf_max, ub_max] = sweep_bounds(spec, machine, profiles);
  const bool equi_only = spec.strategy == Strategy::kEquiFB || is_baseline(spec.mode);

  auto sweep = [&](int hi) {
    std::vector<int> v;
    for (int u = 1; u <= hi; u += spec.stride) v.push_back(u);
    if (v.back() != hi) v.push_back(hi);
    return v;
  };
  std::vector<Point> points;
  for (int ub : sweep(ub_max)) {
    if (equi_only) {
      if (ub <= uf_max) points.push_back({ub, ub, true});
      continue;
    }
    for (int uf : sweep(uf_max)) {
      points.push_back({uf, ub, false});
      // The equal-pack point keeps the Equi-FB space inside this sweep.
      if (uf == ub) points.push_back({uf, ub, true});
    }
  }

  std::vector<Candidate> log(points.size());
  std::vector<Configuration> configs(points.size());
  auto evaluate = [&](std::size_t i) {
    const Point& p = points[i];
    Candidate& c = log[i];
    c.u_f = p.u_f;
    c.u_b = p.u_b;
    c.shared_packs = p.equal_packs;
    try {
      Configuration cfg = make_configuration(spec.mode, spec.minibatch, p.u_f, p.u_b, spec.packer, machine,
                                             profiles, p.equal_packs);
      c.p_f_count = static_cast<int>(cfg.p_f.size());
      c.p_b_count = static_cast<int>(cfg.p_b.size());
      const TaskGraph g = generate_task_graph(cfg, machine, profiles);
      c.time = simulate(g, machine, profiles).makespan;
      c.feasible = true;
      configs[i] = std::move(cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDeadlockDetected || e.code() == ErrorCode::kInternal) throw;
      c.reason = std::string(error_code_name(e.code())) + ": " + e.what();
    }
  };

  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(points.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
          try {
            evaluate(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  SearchResult res;
  res.u_fmax = uf_max;
  res.u_bmax = ub_max;
  int best = -1;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (!log[i].feasible) continue;
    ++res.explored;
    if (best < 0 || log[i].time < log[best].time) best = static_cast<int>(i);
  }
  res.log = std::move(log);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best < 0) {
    fail(ErrorCode::kNoFeasibleConfiguration,
         "no candidate configuration fits in " + std::to_string(machine.gpu_mem_capacity) + " bytes of GPU memory");
  }
  res.best = std::move(configs[best]);
  res.best_time = res.log[best].time;
  return res;
}

}  // namespace wrapipe
