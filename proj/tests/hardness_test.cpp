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

#include <numeric>

#include "wrapipe/errors.hpp"
#include "wrapipe/hardness.hpp"

namespace wrapipe {
namespace {

using Packs = std::vector<LayerRange>;

// Direct restatement of the round-robin recurrence.
Nanos oracle_makespan(const ReductionInstance& inst, const Packs& packs) {
  std::vector<Nanos> gpu_free(inst.gpus, 0);
  std::vector<Nanos> prev(inst.microbatches, 0);
  Nanos end = 0;
  for (std::size_t j = 0; j < packs.size(); ++j) {
    Nanos p = 0;
    for (int l = packs[j].first; l <= packs[j].last; ++l) p += inst.layers[l].time;
    const int g = static_cast<int>(j) % inst.gpus;
    for (int b = 0; b < inst.microbatches; ++b) {
      const Nanos start = std::max(gpu_free[g], prev[b]);
      prev[b] = gpu_free[g] = start + p;
      end = std::max(end, prev[b]);
    }
  }
  return end;
}

// Every contiguous partition via cut bitmasks; skips capacity violations.
Nanos oracle_optimum(const ReductionInstance& inst) {
  const int n = inst.layer_count();
  Nanos best = -1;
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    Packs packs;
    int first = 0;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (i == n - 1 || (mask >> i & 1u)) {
        Bytes size = 0;
        for (int l = first; l <= i; ++l) size += inst.layers[l].size;
        ok = size <= inst.capacity;
        packs.push_back({first, i});
        first = i + 1;
      }
    }
    if (!ok) continue;
    const Nanos t = oracle_makespan(inst, packs);
    if (best < 0 || t < best) best = t;
  }
  return best;
}

TEST(BuildReduction, LayersForSixTwoFour) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  ASSERT_EQ(inst.layer_count(), 13);
  const std::vector<std::pair<Nanos, Bytes>> expected{{80, 6}, {80, 6}, {50, 4}, {6, 2}, {50, 4}, {50, 4}, {2, 2},
                                                       {50, 4}, {50, 4}, {4, 2}, {50, 4}, {80, 6}, {80, 6}};
  for (int i = 0; i < 13; ++i) {
    EXPECT_EQ(inst.layers[i].time, expected[i].first);
    EXPECT_EQ(inst.layers[i].size, expected[i].second);
  }
  EXPECT_EQ(inst.microbatches, 3);
  EXPECT_EQ(inst.gpus, 2);
  EXPECT_EQ(inst.capacity, 7);
}

TEST(BuildReduction, DefaultScaleAndLayerCount) {
  const ReductionInstance one = build_reduction({1});
  EXPECT_EQ(one.layer_count(), 7);
  EXPECT_EQ(one.scale, 6);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_EQ(build_reduction(std::vector<std::int64_t>(n, 2)).layer_count(), 3 * n + 4);
  }
  EXPECT_THROW(build_reduction({}), Error);
  EXPECT_THROW(build_reduction({0, 1}), Error);
}

TEST(TargetT, ExactArithmetic) {
  const Rational t = target_T(build_reduction({6, 2, 4}, 10));
  EXPECT_TRUE(t.equals(1028));
  EXPECT_EQ(t.value(), 1028);
  const ReductionInstance odd = build_reduction({1, 1, 3});
  const Rational to = target_T(odd);
  EXPECT_FALSE(to.integral());
  EXPECT_DOUBLE_EQ(to.approx(), 3037.5);
  try {
    to.value();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonIntegralT);
  }
  // Scaling all times by k scales T by k.
  ReductionInstance scaled = build_reduction({6, 2, 4}, 10);
  for (auto& l : scaled.layers) l.time *= 3;
  EXPECT_TRUE(target_T(scaled).equals(3 * 1028));
}

TEST(EvalSchedule, SerialMicrobatches) {
  ReductionInstance inst;
  inst.gpus = 1;
  inst.microbatches = 2;
  inst.layers = {{5, 1}};
  EXPECT_EQ(eval_makespan(inst, {{0, 0}}), 10);
}

TEST(EvalSchedule, BalancedSplitHitsTargetWithForcedIdleOnly) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  const Packs packs = packs_for_subset(inst, {0});
  EXPECT_EQ(packs, (Packs{{0, 0}, {1, 1}, {2, 3}, {4, 4}, {5, 5}, {6, 7}, {8, 8}, {9, 10}, {11, 11}, {12, 12}}));
  const SimpleSchedule s = eval_schedule(inst, packs);
  EXPECT_EQ(s.makespan, 1028);
  EXPECT_EQ(s.makespan, oracle_makespan(inst, packs));
  for (const auto& w : idle_windows(inst, s)) EXPECT_TRUE(w.forced) << w.gpu << " " << w.start;
}

TEST(EvalSchedule, LoneNumberLayerCausesUnforcedIdle) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  const Packs packs{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 7}, {8, 8}, {9, 10}, {11, 11}, {12, 12}};
  const SimpleSchedule s = eval_schedule(inst, packs);
  EXPECT_GT(s.makespan, 1028);
  EXPECT_EQ(s.makespan, oracle_makespan(inst, packs));
  bool unforced = false;
  for (const auto& w : idle_windows(inst, s)) unforced |= !w.forced;
  EXPECT_TRUE(unforced);
}

TEST(EvalSchedule, CapacityIsEnforced) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  try {
    eval_makespan(inst, {{0, 1}, {2, 12}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacityViolation);
  }
}

TEST(Enumerate, MatchesBruteForce) {
  for (const auto& nums : std::vector<std::vector<std::int64_t>>{{1}, {1, 1}, {2, 3}, {1, 1, 2}, {1, 2, 4}}) {
    const ReductionInstance inst = build_reduction(nums);
    const EnumerationResult r = enumerate_optimal(inst);
    EXPECT_EQ(r.best_makespan, oracle_optimum(inst));
    EXPECT_EQ(eval_makespan(inst, r.best_packs), r.best_makespan);
  }
}

TEST(Enumerate, ForcedSingletons) {
  ReductionInstance inst;
  inst.capacity = 7;
  inst.layers = {{3, 4}, {5, 4}, {2, 4}};
  const EnumerationResult r = enumerate_optimal(inst);
  EXPECT_EQ(r.feasible_partitions, 1);
  EXPECT_EQ(r.best_packs, (Packs{{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(r.best_makespan, oracle_makespan(inst, r.best_packs));
}

TEST(Enumerate, ParallelJobsAgree) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  const EnumerationResult a = enumerate_optimal(inst, 1);
  const EnumerationResult b = enumerate_optimal(inst, 3);
  EXPECT_EQ(a.best_makespan, 1028);
  EXPECT_EQ(a.best_packs, b.best_packs);
  EXPECT_EQ(a.feasible_partitions, b.feasible_partitions);
}

TEST(Enumerate, LargeInstancesAreRefused) {
  try {
    enumerate_optimal(build_reduction(std::vector<std::int64_t>(7, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(Verify, YesAndNoInstances) {
  const VerifyResult yes = verify_reduction({6, 2, 4}, 10);
  EXPECT_TRUE(yes.partition_yes);
  EXPECT_TRUE(yes.t_achievable);
  EXPECT_EQ(yes.best_makespan, 1028);
  const VerifyResult no = verify_reduction({1, 1, 3});
  EXPECT_FALSE(no.partition_yes);
  EXPECT_FALSE(no.t_achievable);
  for (std::int64_t k : {1, 4, 9}) {
    const VerifyResult kk = verify_reduction({k, k});
    EXPECT_TRUE(kk.partition_yes && kk.t_achievable);
  }
}

TEST(Verify, PartitionSearch) {
  const auto s = find_partition({3, 1, 1, 2, 2, 1});
  ASSERT_TRUE(s.has_value());
  std::int64_t half = 0;
  const std::vector<std::int64_t> nums{3, 1, 1, 2, 2, 1};
  for (int i : *s) half += nums[i];
  EXPECT_EQ(half, 5);
  EXPECT_FALSE(find_partition({1, 2, 4}).has_value());
}

TEST(Lift, SimulatedMakespanEqualsRecurrence) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  for (const Packs& packs : {packs_for_subset(inst, {0}), packs_for_subset(inst, {1, 2}),
                             Packs{{0, 0}, {1, 1}, {2, 2}, {3, 4}, {5, 6}, {7, 7}, {8, 9}, {10, 10}, {11, 11}, {12, 12}}}) {
    const LiftedInstance lifted = lift_to_task_graph(inst, packs);
    EXPECT_EQ(simulate(lifted.graph, lifted.machine, lifted.profiles).makespan, eval_makespan(inst, packs));
  }
}

TEST(Lift, GanttMarksIdleWindows) {
  const ReductionInstance inst = build_reduction({6, 2, 4}, 10);
  const std::string text = render_reduction_gantt(inst, packs_for_subset(inst, {0}), GanttFormat::kText);
  EXPECT_NE(text.find("forced idle"), std::string::npos);
  EXPECT_EQ(text.find("unforced idle"), std::string::npos);
}

}  // namespace
}  // namespace wrapipe
