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

#include "wrapipe/packing.hpp"

#include <algorithm>
#include <string>

#include "wrapipe/errors.hpp"

namespace wrapipe {
namespace {

Bytes pack_memory(const std::vector<Bytes>& mem_prefix, LayerRange r, const PackOverhead& overhead) {
  const Bytes base = mem_prefix[r.last + 1] - mem_prefix[r.first];
  return overhead ? base + overhead(r) : base;
}

// First index i in [lo, n) with pred(i) true, pred monotone. Gallops from lo
// so a sweep over increasing targets costs O(log gap) per lookup.
template <typename Pred>
int gallop(int lo, int n, Pred pred) {
  int step = 1;
  int hi = lo;
  while (hi < n && !pred(hi)) {
    lo = hi + 1;
    hi = std::min(n, hi + step);
    step *= 2;
  }
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

PackPlan finish(std::vector<LayerRange> packs, const std::vector<Nanos>& time_prefix,
                const std::vector<Bytes>& mem_prefix, const PackOverhead& overhead) {
  PackPlan plan;
  for (const auto& p : packs) {
    plan.times.push_back(time_prefix[p.last + 1] - time_prefix[p.first]);
    plan.memories.push_back(pack_memory(mem_prefix, p, overhead));
  }
  plan.packs = std::move(packs);
  return plan;
}

}  // namespace

PackPlan balanced_time_pack(std::span<const Nanos> times, std::span<const Bytes> mems, Bytes capacity,
                            const PackOverhead& overhead) {
  const int n = static_cast<int>(times.size());
  require(n >= 1, ErrorCode::kEmptyInput, "nothing to pack");
  require(mems.size() == times.size(), ErrorCode::kInvalidArgument, "times and memories differ in length");
  require(capacity > 0, ErrorCode::kInvalidArgument, "capacity must be positive");

  std::vector<Nanos> tp(n + 1, 0);
  std::vector<Bytes> mp(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    tp[i + 1] = tp[i] + times[i];
    mp[i + 1] = mp[i] + mems[i];
  }
  for (int i = 0; i < n; ++i) {
    if (pack_memory(mp, {i, i}, overhead) > capacity) {
      fail(ErrorCode::kLayerTooLarge, "layer " + std::to_string(i) + " needs " +
                                          std::to_string(pack_memory(mp, {i, i}, overhead)) +
                                          " bytes, capacity is " + std::to_string(capacity));
    }
  }

  const Nanos total = tp[n];
  const int s_min = static_cast<int>(std::max<Bytes>(1, (mp[n] + capacity - 1) / capacity));
  std::vector<int> ends;
  for (int s = std::min(s_min, n); s <= n; ++s) {
    ends.clear();
    int pos = 0;
    bool fits = true;
    for (int k = 1; k < s && fits; ++k) {
      // Prefix index i (layer i inclusive) with tp[i+1] * s >= k * total.
      const __int128 target = static_cast<__int128>(k) * total;
      const int i = gallop(pos, n, [&](int j) { return static_cast<__int128>(tp[j + 1]) * s >= target; });
      if (i >= n - 1) break;
      if (!ends.empty() && ends.back() == i) continue;
      // Reject this S at the first pack that overflows.
      fits = pack_memory(mp, {ends.empty() ? 0 : ends.back() + 1, i}, overhead) <= capacity;
      ends.push_back(i);
      pos = i;
    }
    if (!fits || pack_memory(mp, {ends.empty() ? 0 : ends.back() + 1, n - 1}, overhead) > capacity) continue;
    std::vector<LayerRange> packs;
    int first = 0;
    for (int e : ends) {
      packs.push_back({first, e});
      first = e + 1;
    }
    packs.push_back({first, n - 1});
    return finish(std::move(packs), tp, mp, overhead);
  }

  // Zero-time plateaus can keep the balanced split from reaching singletons
  // even at S = R; singletons are the finest packing available.
  std::vector<LayerRange> singles;
  for (int i = 0; i < n; ++i) singles.push_back({i, i});
  for (const auto& p : singles) {
    require(pack_memory(mp, p, overhead) <= capacity, ErrorCode::kUnpackable,
            "no capacity-feasible packing exists");
  }
  return finish(std::move(singles), tp, mp, overhead);
}

PackPlan greedy_maxpack(std::span<const Bytes> mems, Bytes capacity) {
  const int n = static_cast<int>(mems.size());
  require(n >= 1, ErrorCode::kEmptyInput, "nothing to pack");
  PackPlan plan;
  int first = 0;
  Bytes used = 0;
  for (int i = 0; i < n; ++i) {
    if (mems[i] > capacity) {
      fail(ErrorCode::kLayerTooLarge, "layer " + std::to_string(i) + " needs " + std::to_string(mems[i]) +
                                          " bytes, capacity is " + std::to_string(capacity));
    }
    if (i > first && used + mems[i] > capacity) {
      plan.packs.push_back({first, i - 1});
      plan.memories.push_back(used);
      first = i;
      used = 0;
    }
    used += mems[i];
  }
  plan.packs.push_back({first, n - 1});
  plan.memories.push_back(used);
  plan.times.assign(plan.packs.size(), 0);
  return plan;
}

PackPlan describe_packs(Pass pass, int u, const ProfileSet& profiles, std::vector<LayerRange> packs) {
  PackPlan plan;
  for (const auto& p : packs) {
    plan.times.push_back(profiles.range_time(pass, p, u));
    Bytes m = profiles.range_mem(pass, p, u);
    if (pass == Pass::kForward) m += profiles.pack_input_bytes(p.first, u);
    plan.memories.push_back(m);
  }
  plan.packs = std::move(packs);
  return plan;
}

namespace {

// Range to pack for the pass: everything, or the forward prefix before the
// shared last backward pack.
struct PackTarget {
  int count = 0;
  std::optional<LayerRange> shared;
};

PackTarget target_for(Pass pass, const ProfileSet& profiles, const std::optional<PackPlan>& backward) {
  require(pass != Pass::kUpdate, ErrorCode::kInvalidArgument, "update tasks are not packed");
  PackTarget t{profiles.layer_count(), std::nullopt};
  if (pass == Pass::kForward && backward) {
    require(!backward->packs.empty() && backward->packs.back().last == profiles.layer_count() - 1,
            ErrorCode::kInvalidArgument, "backward packs must end at the last layer");
    t.shared = backward->packs.back();
    t.count = t.shared->first;
  }
  return t;
}

PackPlan append_shared(PackPlan plan, const PackTarget& target, Pass pass, int u, const ProfileSet& profiles,
                       Bytes capacity) {
  std::vector<LayerRange> packs = std::move(plan.packs);
  if (target.shared) {
    packs.push_back(*target.shared);
  }
  PackPlan out = describe_packs(pass, u, profiles, std::move(packs));
  if (target.shared && out.memories.back() > capacity) {
    fail(ErrorCode::kUnpackable, "shared last pack " + pack_label(*target.shared) + " needs " +
                                     std::to_string(out.memories.back()) + " bytes at forward microbatch " +
                                     std::to_string(u));
  }
  return out;
}

}  // namespace

PackPlan balanced_time_pack(Pass pass, int u, const ProfileSet& profiles, Bytes capacity,
                            const std::optional<PackPlan>& backward) {
  const PackTarget target = target_for(pass, profiles, backward);
  PackPlan plan;
  if (target.count > 0) {
    std::vector<Nanos> t(target.count);
    std::vector<Bytes> m(target.count);
    for (int l = 0; l < target.count; ++l) {
      t[l] = profiles.time(pass, l, u);
      m[l] = profiles.mem(pass, l, u);
    }
    PackOverhead overhead;
    if (pass == Pass::kForward) {
      overhead = [&profiles, u](LayerRange r) { return profiles.pack_input_bytes(r.first, u); };
    }
    plan = balanced_time_pack(t, m, capacity, overhead);
  }
  return append_shared(std::move(plan), target, pass, u, profiles, capacity);
}

PackPlan greedy_maxpack(Pass pass, int u, const ProfileSet& profiles, Bytes capacity,
                        const std::optional<PackPlan>& backward) {
  const PackTarget target = target_for(pass, profiles, backward);
  PackPlan plan;
  if (target.count > 0) {
    // Charge the checkpointed input to each layer so the greedy respects the
    // same forward accounting as the balanced packer.
    std::vector<Bytes> m(target.count);
    for (int l = 0; l < target.count; ++l) m[l] = profiles.mem(pass, l, u);
    if (pass == Pass::kForward) {
      // Greedy with a per-pack overhead: extend while the pack plus its head
      // input fits.
      int first = 0;
      Bytes used = 0;
      for (int l = 0; l < target.count; ++l) {
        const Bytes head = profiles.pack_input_bytes(first, u);
        if (l > first && used + m[l] + head > capacity) {
          plan.packs.push_back({first, l - 1});
          first = l;
          used = 0;
        }
        if (m[l] + profiles.pack_input_bytes(first, u) > capacity) {
          fail(ErrorCode::kLayerTooLarge, "layer " + std::to_string(l) + " does not fit at microbatch " +
                                              std::to_string(u));
        }
        used += m[l];
      }
      plan.packs.push_back({first, target.count - 1});
    } else {
      plan = greedy_maxpack(m, capacity);
    }
  }
  return append_shared(std::move(plan), target, pass, u, profiles, capacity);
}

}  // namespace wrapipe
