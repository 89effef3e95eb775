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

#include <limits>

#include "wrapipe/errors.hpp"
#include "wrapipe/search.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace wrapipe {
namespace {

MachineModel machine(int gpus, Bytes capacity) {
  MachineModel m;
  m.gpu_count = gpus;
  m.gpu_mem_capacity = capacity;
  m.pcie_bandwidth = 12 * kGiB;
  m.validate();
  return m;
}

ProfileSet irregular(int layers, std::uint64_t seed) {
  SynthSpec s;
  s.preset = SynthPreset::kIrregular;
  s.layers = layers;
  s.seed = seed;
  s.u_max = 8;
  s.stride = 1;
  return synth_profiles(s);
}

// Exhaustive evaluation of every (U_F, U_B) point, both pack choices.
Nanos oracle_best(Mode mode, int d, const MachineModel& mm, const ProfileSet& p, int ufmax, int ubmax, bool equal_only) {
  Nanos best = std::numeric_limits<Nanos>::max();
  for (int ub = 1; ub <= ubmax; ++ub) {
    for (int uf = 1; uf <= ufmax; ++uf) {
      for (bool equal : {false, true}) {
        if (equal && uf != ub) continue;
        if (equal_only && !equal) continue;
        try {
          const Configuration cfg = make_configuration(mode, d, uf, ub, Packer::kBalanced, mm, p, equal);
          best = std::min(best, simulate(generate_task_graph(cfg, mm, p), mm, p).makespan);
        } catch (const Error&) {
        }
      }
    }
  }
  return best;
}

TEST(Search, MatchesExhaustiveSweep) {
  const MachineModel mm = machine(2, 3 * kGiB / 2);
  const ProfileSet p = irregular(10, 1);
  for (Strategy strategy : {Strategy::kDistinctFB, Strategy::kEquiFB}) {
    SearchSpec spec;
    spec.minibatch = 8;
    spec.strategy = strategy;
    const SearchResult r = search(spec, mm, p);
    EXPECT_EQ(r.best_time, oracle_best(spec.mode, 8, mm, p, r.u_fmax, r.u_bmax, strategy == Strategy::kEquiFB));
    Nanos logged = std::numeric_limits<Nanos>::max();
    int feasible = 0;
    for (const auto& c : r.log) {
      if (!c.feasible) {
        EXPECT_FALSE(c.reason.empty());
        continue;
      }
      ++feasible;
      logged = std::min(logged, c.time);
      if (strategy == Strategy::kEquiFB) EXPECT_EQ(c.u_f, c.u_b);
    }
    EXPECT_EQ(logged, r.best_time);
    EXPECT_EQ(feasible, r.explored);
    EXPECT_TRUE(covers_contiguously(r.best.p_f, 10));
    EXPECT_TRUE(shares_last_pack(r.best));
  }
}

TEST(Search, DistinctNeverLosesToEqui) {
  for (std::uint64_t seed : {0, 2, 5}) {
    const MachineModel mm = machine(2, kGiB);
    const ProfileSet p = irregular(12, seed);
    SearchSpec spec;
    spec.minibatch = 8;
    const Nanos distinct = search(spec, mm, p).best_time;
    spec.strategy = Strategy::kEquiFB;
    EXPECT_LE(distinct, search(spec, mm, p).best_time) << "seed " << seed;
  }
}

TEST(Search, ParallelJobsGiveIdenticalResults) {
  const MachineModel mm = machine(4, 2 * kGiB);
  const ProfileSet p = irregular(12, 3);
  SearchSpec spec;
  spec.minibatch = 16;
  spec.mode = Mode::kGroupedDP;
  const SearchResult a = search(spec, mm, p);
  spec.jobs = 3;
  const SearchResult b = search(spec, mm, p);
  EXPECT_EQ(a.best_time, b.best_time);
  EXPECT_EQ(a.best.p_f, b.best.p_f);
  EXPECT_EQ(a.best.p_b, b.best.p_b);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].u_f, b.log[i].u_f);
    EXPECT_EQ(a.log[i].time, b.log[i].time);
  }
}

TEST(Search, BoundsFollowProfilesAndMinibatch) {
  const MachineModel mm = machine(4, 2 * kGiB);
  const ProfileSet p = irregular(6, 0);
  SearchSpec spec;
  spec.minibatch = 6;
  EXPECT_EQ(sweep_bounds(spec, mm, p), (std::pair<int, int>{6, 6}));
  spec.mode = Mode::kGroupedDP;
  spec.minibatch = 20;
  EXPECT_EQ(sweep_bounds(spec, mm, p), (std::pair<int, int>{5, 5}));
  spec.u_fmax = 2;
  EXPECT_EQ(sweep_bounds(spec, mm, p).first, 2);
}

TEST(Search, NothingFitsIsInfeasible) {
  const MachineModel mm = machine(2, kMiB);
  SearchSpec spec;
  spec.minibatch = 4;
  try {
    search(spec, mm, irregular(4, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFeasibleConfiguration);
    EXPECT_EQ(exit_code_for(e.code()), 3);
  }
}

TEST(Search, GreedyPackerIsAvailableAsBaseline) {
  const MachineModel mm = machine(2, kGiB);
  const ProfileSet p = irregular(12, 0);
  const Configuration bal = make_configuration(Mode::kWrapAroundPP, 8, 2, 2, Packer::kBalanced, mm, p);
  const Configuration gr = make_configuration(Mode::kWrapAroundPP, 8, 2, 2, Packer::kGreedyMax, mm, p);
  EXPECT_TRUE(shares_last_pack(gr));
  EXPECT_LE(gr.p_b.size(), bal.p_b.size());
}

}  // namespace
}  // namespace wrapipe
