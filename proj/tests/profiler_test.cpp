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

#include <cmath>
#include <set>

#include "wrapipe/errors.hpp"
#include "wrapipe/profiler.hpp"

namespace wrapipe {
namespace {

std::vector<ProfileSample> two_pass_samples(const std::vector<std::pair<int, Nanos>>& pts) {
  std::vector<ProfileSample> out;
  for (Pass pass : {Pass::kForward, Pass::kBackward}) {
    for (auto [u, t] : pts) {
      ProfileSample s;
      s.pass = pass;
      s.microbatch = u;
      s.compute_time = t;
      s.mem_footprint = 100 * u;
      s.weight_bytes = 4096;
      s.wgrad_bytes = 4096;
      s.optstate_bytes = 8192;
      out.push_back(s);
    }
  }
  return out;
}

// Brute-force least squares: scan slopes on a fine grid, take the best
// intercept for each, keep the minimum squared error.
std::pair<double, double> brute_force_fit(const std::vector<std::pair<int, double>>& pts) {
  double best_err = 1e300, best_a = 0, best_b = 0;
  for (double a = 0; a <= 20e6; a += 1000) {
    double mean = 0;
    for (auto [u, t] : pts) mean += t - a * u;
    const double b = mean / pts.size();
    double err = 0;
    for (auto [u, t] : pts) err += (t - a * u - b) * (t - a * u - b);
    if (err < best_err) best_err = err, best_a = a, best_b = b;
  }
  return {best_a, best_b};
}

TEST(SlowStart, ProbesDoubleThenHalveThenStep) {
  const auto r = slow_start_max_u([](int u) { return u <= 13; }, 64);
  EXPECT_EQ(r.max_u, 13);
  EXPECT_EQ(r.probes, (std::vector<int>{1, 2, 4, 8, 16, 8, 9, 10, 11, 12, 13, 14}));
}

TEST(SlowStart, SingletonAndInfeasible) {
  EXPECT_EQ(slow_start_max_u([](int u) { return u <= 1; }, 64).max_u, 1);
  EXPECT_EQ(slow_start_max_u([](int) { return true; }, 37).max_u, 37);
  try {
    slow_start_max_u([](int) { return false; }, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFeasibleMicrobatch);
  }
}

TEST(SlowStart, MatchesLinearScanForEveryThreshold) {
  for (int cap = 1; cap <= 70; ++cap) {
    for (int limit = 1; limit <= 80; ++limit) {
      int expected = 0;
      for (int u = 1; u <= cap; ++u) {
        if (u <= limit) expected = u;
      }
      EXPECT_EQ(slow_start_max_u([limit](int u) { return u <= limit; }, cap).max_u, expected)
          << "cap " << cap << " limit " << limit;
    }
  }
}

TEST(FitProfiles, TwoPointsPassThroughExactly) {
  const ProfileSet p = fit_profiles(two_pass_samples({{1, 10 * kMillisecond}, {2, 20 * kMillisecond}}));
  EXPECT_EQ(p.u_max_f(), 2);
  // Extrapolation beyond u_max is rejected; the model itself is affine.
  EXPECT_EQ(p.layer(0).f_time.eval(4), 40 * kMillisecond);
  EXPECT_THROW(p.time(Pass::kForward, 0, 4), Error);
  EXPECT_EQ(p.time(Pass::kForward, 0, 2), 20 * kMillisecond);
}

TEST(FitProfiles, ThreePointsMatchBruteForceLeastSquares) {
  const std::vector<std::pair<int, Nanos>> pts{{1, 12 * kMillisecond}, {2, 20 * kMillisecond}, {4, 38 * kMillisecond}};
  const ProfileSet p = fit_profiles(two_pass_samples(pts));
  std::vector<std::pair<int, double>> dpts;
  for (auto [u, t] : pts) dpts.emplace_back(u, static_cast<double>(t));
  const auto [a, b] = brute_force_fit(dpts);
  const double oracle = a * 3 + b;
  EXPECT_NEAR(static_cast<double>(p.time(Pass::kForward, 0, 3)), oracle, 2000.0);
  // Residual bound holds at every sampled point.
  for (auto [u, t] : pts) {
    const double pred = static_cast<double>(p.time(Pass::kForward, 0, u));
    EXPECT_LE(std::abs(pred - t) / t, p.layer(0).max_rel_residual + 1e-9);
  }
}

TEST(FitProfiles, StaticSizesAreConstant) {
  const ProfileSet p = fit_profiles(two_pass_samples({{1, 5}, {4, 9}, {8, 13}}));
  EXPECT_EQ(p.layer(0).weight_bytes, 4096);
  EXPECT_EQ(p.layer(0).optstate_bytes, 8192);
  EXPECT_EQ(p.mem(Pass::kBackward, 0, 8), 800);
}

TEST(FitProfiles, NegativeSlopeIsClampedWithWarning) {
  const ProfileSet p = fit_profiles(two_pass_samples({{1, 30}, {2, 20}, {3, 10}}));
  EXPECT_FALSE(p.warnings().empty());
  EXPECT_EQ(p.layer(0).f_time.slope, 0.0);
}

TEST(FitProfiles, SingleSampleIsInsufficient) {
  try {
    fit_profiles(two_pass_samples({{1, 10}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}

TEST(Sampling, StrideGrid) {
  EXPECT_EQ(sampled_microbatches(4, 16), (std::vector<int>{1, 4, 8, 12, 16}));
  EXPECT_EQ(sampled_microbatches(4, 10), (std::vector<int>{1, 4, 8, 10}));
  EXPECT_EQ(sampled_microbatches(1, 3), (std::vector<int>{1, 2, 3}));
}

TEST(Synth, RoundTripThroughSamplesIsExact) {
  SynthSpec spec;
  spec.layers = 6;
  spec.u_max = 16;
  const ProfileSet a = synth_profiles(spec);
  const ProfileSet b = fit_profiles(sample_profiles(a, 4, 16));
  for (int l = 0; l < 6; ++l) {
    for (int u : {1, 3, 7, 16}) {
      EXPECT_NEAR(a.time(Pass::kForward, l, u), b.time(Pass::kForward, l, u), 2);
      EXPECT_NEAR(a.mem(Pass::kBackward, l, u), b.mem(Pass::kBackward, l, u), 2);
    }
    EXPECT_EQ(a.layer(l).weight_bytes, b.layer(l).weight_bytes);
  }
}

TEST(Synth, IrregularIsDeterministicAndDistinct) {
  SynthSpec spec;
  spec.preset = SynthPreset::kIrregular;
  spec.layers = 16;
  spec.seed = 3;
  const ProfileSet a = synth_profiles(spec);
  const ProfileSet b = synth_profiles(spec);
  std::set<Nanos> times;
  for (int l = 0; l < 16; ++l) {
    EXPECT_EQ(a.time(Pass::kForward, l, 4), b.time(Pass::kForward, l, 4));
    EXPECT_GT(a.time(Pass::kBackward, l, 4), a.time(Pass::kForward, l, 4));
    times.insert(a.time(Pass::kForward, l, 1));
  }
  EXPECT_EQ(times.size(), 16u);
  spec.seed = 4;
  const ProfileSet c = synth_profiles(spec);
  bool differs = false;
  for (int l = 0; l < 16; ++l) differs |= c.time(Pass::kForward, l, 1) != a.time(Pass::kForward, l, 1);
  EXPECT_TRUE(differs);
}

TEST(Synth, UniformLayersAreIdentical) {
  SynthSpec spec;
  spec.layers = 5;
  const ProfileSet p = synth_profiles(spec);
  for (int l = 1; l < 5; ++l) {
    EXPECT_EQ(p.time(Pass::kForward, l, 2), p.time(Pass::kForward, 0, 2));
    EXPECT_EQ(p.layer(l).weight_bytes, spec.weight_bytes);
  }
  EXPECT_EQ(p.time(Pass::kForward, 0, 2), 2 * spec.forward_time_per_sample + spec.forward_time_fixed);
}

TEST(ProfileSet, RangesSumLayers) {
  SynthSpec spec;
  spec.preset = SynthPreset::kIrregular;
  spec.layers = 8;
  const ProfileSet p = synth_profiles(spec);
  Nanos t = 0;
  Bytes w = 0;
  for (int l = 2; l <= 5; ++l) {
    t += p.time(Pass::kBackward, l, 3);
    w += p.layer(l).weight_bytes;
  }
  EXPECT_EQ(p.range_time(Pass::kBackward, {2, 5}, 3), t);
  EXPECT_EQ(p.range_weight({2, 5}), w);
}

}  // namespace
}  // namespace wrapipe
