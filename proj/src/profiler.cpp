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

#include "wrapipe/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "wrapipe/errors.hpp"

namespace wrapipe {

std::string_view pass_name(Pass pass) {
  switch (pass) {
    case Pass::kForward: return "F";
    case Pass::kBackward: return "B";
    case Pass::kUpdate: return "U";
  }
  return "?";
}

Pass parse_pass(std::string_view name) {
  if (name == "F") return Pass::kForward;
  if (name == "B") return Pass::kBackward;
  if (name == "U") return Pass::kUpdate;
  fail(ErrorCode::kSchema, "unknown pass '" + std::string(name) + "'");
}

std::int64_t AffineModel::eval(int u) const {
  const double v = slope * u + intercept;
  return v <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(v));
}

ProfileSet::ProfileSet(std::vector<LayerProfile> layers, int u_max_f, int u_max_b)
    : layers_(std::move(layers)), u_max_f_(u_max_f), u_max_b_(u_max_b) {
  require(!layers_.empty(), ErrorCode::kEmptyInput, "profile set has no layers");
  require(u_max_f_ >= 1 && u_max_b_ >= 1, ErrorCode::kInvalidArgument, "u_max must be >= 1");
  relayed_.assign(layers_.size(), {});
}

void ProfileSet::check_u(Pass pass, int u) const {
  const int cap = pass == Pass::kBackward ? u_max_b_ : u_max_f_;
  if (u < 1 || u > cap) {
    fail(ErrorCode::kOutOfProfileRange, "microbatch " + std::to_string(u) + " outside profiled range [1, " +
                                            std::to_string(cap) + "] for pass " +
                                            std::string(pass_name(pass)));
  }
}

Nanos ProfileSet::time(Pass pass, int layer, int u) const {
  const auto& l = layers_.at(layer);
  switch (pass) {
    case Pass::kForward: check_u(pass, u); return l.f_time.eval(u);
    case Pass::kBackward: check_u(pass, u); return l.b_time.eval(u);
    case Pass::kUpdate: return l.update_time;
  }
  return 0;
}

Bytes ProfileSet::mem(Pass pass, int layer, int u) const {
  const auto& l = layers_.at(layer);
  switch (pass) {
    case Pass::kForward: check_u(pass, u); return l.f_mem.eval(u);
    case Pass::kBackward: check_u(pass, u); return l.b_mem.eval(u);
    case Pass::kUpdate: return l.weight_bytes + l.wgrad_bytes + l.optstate_bytes;
  }
  return 0;
}

Bytes ProfileSet::input_bytes(int layer, int u) const { return layers_.at(layer).input_bytes.eval(u); }
Bytes ProfileSet::output_bytes(int layer, int u) const { return layers_.at(layer).output_bytes.eval(u); }

Nanos ProfileSet::update_time(int layer, const MachineModel& machine) const {
  const auto& l = layers_.at(layer);
  if (machine.cpu_offload_update) return transfer_time(l.weight_bytes, machine.update_cpu_rate);
  return l.update_time;
}

Bytes ProfileSet::boundary_bytes(int layer, int u) const {
  Bytes total = output_bytes(layer, u);
  if (layer < static_cast<int>(relayed_.size())) {
    for (int src : relayed_[layer]) total += output_bytes(src, u);
  }
  return total;
}

Bytes ProfileSet::pack_input_bytes(int layer, int u) const {
  return layer == 0 ? input_bytes(0, u) : boundary_bytes(layer - 1, u);
}

Nanos ProfileSet::range_time(Pass pass, LayerRange range, int u) const {
  Nanos t = 0;
  for (int l = range.first; l <= range.last; ++l) t += time(pass, l, u);
  return t;
}

Bytes ProfileSet::range_mem(Pass pass, LayerRange range, int u) const {
  Bytes m = 0;
  for (int l = range.first; l <= range.last; ++l) m += mem(pass, l, u);
  return m;
}

Bytes ProfileSet::range_weight(LayerRange range) const {
  Bytes b = 0;
  for (int l = range.first; l <= range.last; ++l) b += layers_.at(l).weight_bytes;
  return b;
}

Bytes ProfileSet::range_wgrad(LayerRange range) const {
  Bytes b = 0;
  for (int l = range.first; l <= range.last; ++l) b += layers_.at(l).wgrad_bytes;
  return b;
}

Bytes ProfileSet::range_optstate(LayerRange range) const {
  Bytes b = 0;
  for (int l = range.first; l <= range.last; ++l) b += layers_.at(l).optstate_bytes;
  return b;
}

void ProfileSet::attach_relays(const LayerChain& chain) {
  require(chain.size() == layer_count(), ErrorCode::kInvalidArgument,
          "layer chain has " + std::to_string(chain.size()) + " positions but profiles cover " +
              std::to_string(layer_count()) + " layers");
  for (const auto& r : chain.relays) {
    require(r.destination < layer_count() && r.source >= 0 && r.source < r.destination,
            ErrorCode::kUnroutableBranch,
            "relay from position " + std::to_string(r.source) + " has no downstream consumer");
  }
  relayed_.assign(layers_.size(), {});
  for (int k = 0; k < layer_count(); ++k) relayed_[k] = chain.relayed_across(k);
}

SlowStartResult slow_start_max_u(const std::function<bool(int)>& fits, int u_cap) {
  require(u_cap >= 1, ErrorCode::kInvalidArgument, "u_cap must be >= 1");
  SlowStartResult r;
  auto probe = [&](int u) {
    r.probes.push_back(u);
    return fits(u);
  };
  if (!probe(1)) fail(ErrorCode::kNoFeasibleMicrobatch, "microbatch 1 does not fit");
  int best = 1;
  int failed = 0;
  while (best < u_cap) {
    const int next = std::min(best * 2, u_cap);
    if (!probe(next)) {
      failed = next;
      break;
    }
    best = next;
  }
  if (failed == 0) {
    r.max_u = best;
    return r;
  }
  int u = std::max(failed / 2, 1);
  if (!probe(u)) {
    r.max_u = best;
    return r;
  }
  while (u < u_cap && probe(u + 1)) ++u;
  r.max_u = std::max(u, best);
  return r;
}

namespace {

struct Fit {
  AffineModel model;
  bool clamped = false;
};

Fit least_squares(const std::vector<std::pair<int, double>>& pts) {
  double mu = 0, my = 0;
  for (const auto& [u, y] : pts) {
    mu += u;
    my += y;
  }
  mu /= pts.size();
  my /= pts.size();
  double sxx = 0, sxy = 0;
  for (const auto& [u, y] : pts) {
    sxx += (u - mu) * (u - mu);
    sxy += (u - mu) * (y - my);
  }
  Fit f;
  f.model.slope = sxx > 0 ? sxy / sxx : 0.0;
  if (f.model.slope < 0) {
    f.model.slope = 0;
    f.clamped = true;
  }
  f.model.intercept = my - f.model.slope * mu;
  return f;
}

double rel_residual(const AffineModel& m, const std::vector<std::pair<int, double>>& pts) {
  double worst = 0;
  for (const auto& [u, y] : pts) {
    const double pred = static_cast<double>(m.eval(u));
    worst = std::max(worst, std::abs(pred - y) / std::max(std::abs(y), 1.0));
  }
  return worst;
}

}  // namespace

ProfileSet fit_profiles(const std::vector<ProfileSample>& samples, int stride) {
  require(!samples.empty(), ErrorCode::kInsufficientSamples, "no profile samples");
  int layer_count = 0;
  for (const auto& s : samples) {
    require(s.layer >= 0, ErrorCode::kSchema, "negative layer id in samples");
    require(s.microbatch >= 1, ErrorCode::kSchema, "microbatch must be >= 1 in samples");
    layer_count = std::max(layer_count, s.layer + 1);
  }
  // (layer, pass) -> samples ordered by u.
  std::map<std::pair<int, int>, std::vector<const ProfileSample*>> groups;
  for (const auto& s : samples) groups[{s.layer, static_cast<int>(s.pass)}].push_back(&s);

  std::vector<LayerProfile> layers(layer_count);
  std::vector<std::string> warnings;
  int u_max_f = std::numeric_limits<int>::max();
  int u_max_b = std::numeric_limits<int>::max();

  for (int l = 0; l < layer_count; ++l) {
    auto& lp = layers[l];
    double residual = 0;
    auto fit_named = [&](const std::vector<std::pair<int, double>>& pts, const char* what) {
      Fit f = least_squares(pts);
      if (f.clamped) {
        warnings.push_back("NegativeSlope: layer " + std::to_string(l) + " " + what + " clamped to slope 0");
      }
      residual = std::max(residual, rel_residual(f.model, pts));
      return f.model;
    };
    Bytes w = -1, dw = -1, k = -1;
    bool inconsistent = false;
    auto note_static = [&](const ProfileSample& s) {
      if (w >= 0 && (w != s.weight_bytes || dw != s.wgrad_bytes || k != s.optstate_bytes)) inconsistent = true;
      w = std::max(w, s.weight_bytes);
      dw = std::max(dw, s.wgrad_bytes);
      k = std::max(k, s.optstate_bytes);
    };

    for (Pass pass : {Pass::kForward, Pass::kBackward}) {
      auto it = groups.find({l, static_cast<int>(pass)});
      std::vector<std::pair<int, double>> t, m, x, y;
      std::vector<int> us;
      if (it != groups.end()) {
        for (const auto* s : it->second) {
          t.emplace_back(s->microbatch, static_cast<double>(s->compute_time));
          m.emplace_back(s->microbatch, static_cast<double>(s->mem_footprint));
          x.emplace_back(s->microbatch, static_cast<double>(s->input_bytes));
          y.emplace_back(s->microbatch, static_cast<double>(s->output_bytes));
          us.push_back(s->microbatch);
          note_static(*s);
        }
      }
      std::sort(us.begin(), us.end());
      us.erase(std::unique(us.begin(), us.end()), us.end());
      require(us.size() >= 2, ErrorCode::kInsufficientSamples,
              "layer " + std::to_string(l) + " pass " + std::string(pass_name(pass)) +
                  " needs samples at two or more distinct microbatch sizes");
      if (pass == Pass::kForward) {
        lp.f_time = fit_named(t, "F time");
        lp.f_mem = fit_named(m, "F mem");
        lp.input_bytes = fit_named(x, "X size");
        lp.output_bytes = fit_named(y, "Y size");
        u_max_f = std::min(u_max_f, us.back());
      } else {
        lp.b_time = fit_named(t, "B time");
        lp.b_mem = fit_named(m, "B mem");
        u_max_b = std::min(u_max_b, us.back());
      }
    }
    if (auto it = groups.find({l, static_cast<int>(Pass::kUpdate)}); it != groups.end()) {
      double sum = 0;
      for (const auto* s : it->second) {
        sum += static_cast<double>(s->compute_time);
        note_static(*s);
      }
      lp.update_time = std::llround(sum / it->second.size());
    }
    if (inconsistent) {
      warnings.push_back("layer " + std::to_string(l) + ": W/dW/K sizes vary with u; using the maximum");
    }
    lp.weight_bytes = std::max<Bytes>(w, 0);
    lp.wgrad_bytes = std::max<Bytes>(dw, 0);
    lp.optstate_bytes = std::max<Bytes>(k, 0);
    lp.max_rel_residual = residual;
  }

  ProfileSet set(std::move(layers), u_max_f, u_max_b);
  set.set_stride(stride);
  for (auto& w : warnings) set.add_warning(std::move(w));
  return set;
}

namespace {

std::vector<int> seeded_permutation(int n, std::uint64_t seed, std::uint64_t salt) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 eng(seed * 0x9E3779B97F4A7C15ULL + salt);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

std::int64_t scaled(std::int64_t v, double s) { return std::llround(static_cast<double>(v) * s); }

}  // namespace

ProfileSet synth_profiles(const SynthSpec& spec) {
  require(spec.layers >= 1, ErrorCode::kInvalidArgument, "synthetic spec needs >= 1 layer");
  require(spec.backward_ratio > 0, ErrorCode::kInvalidArgument, "backward_ratio must be > 0");
  require(spec.u_max >= 1, ErrorCode::kInvalidArgument, "u_max must be >= 1");
  const int r = spec.layers;
  const bool irregular = spec.preset == SynthPreset::kIrregular;
  const auto perm_t = seeded_permutation(r, spec.seed, 1);
  const auto perm_a = seeded_permutation(r, spec.seed, 2);
  const auto perm_w = seeded_permutation(r, spec.seed, 3);
  const auto perm_b = seeded_permutation(r, spec.seed, 4);
  const double depth_den = std::max(1, r - 1);

  std::vector<LayerProfile> layers(r);
  std::vector<std::int64_t> act(r);
  for (int k = 0; k < r; ++k) {
    double time_scale = 1.0, act_scale = 1.0, weight_scale = 1.0, ratio = spec.backward_ratio;
    if (irregular) {
      const double depth = k / depth_den;
      time_scale = 0.5 + static_cast<double>(perm_t[k]) / r;
      // Convolutional profile: activations shrink and weights grow 16x
      // from the first layer to the last.
      act_scale = (0.5 + static_cast<double>(perm_a[k]) / r) * std::pow(4.0, 1.0 - 2.0 * depth);
      weight_scale = (0.5 + static_cast<double>(perm_w[k]) / r) * std::pow(4.0, 2.0 * depth - 1.0);
      ratio = spec.backward_ratio + static_cast<double>(perm_b[k]) / r;
    }
    act[k] = scaled(spec.activation_bytes_per_sample, act_scale);
    const std::int64_t in = k == 0 ? spec.input_bytes_per_sample : act[k - 1];
    auto& lp = layers[k];
    lp.f_time = AffineModel::linear(scaled(spec.forward_time_per_sample, time_scale),
                                    scaled(spec.forward_time_fixed, time_scale));
    lp.b_time = {lp.f_time.slope * ratio, lp.f_time.intercept * ratio};
    lp.weight_bytes = scaled(spec.weight_bytes, weight_scale);
    lp.wgrad_bytes = lp.weight_bytes;
    lp.optstate_bytes = scaled(lp.weight_bytes, spec.optimizer_state_factor);
    lp.input_bytes = AffineModel::linear(in, 0);
    lp.output_bytes = AffineModel::linear(act[k], 0);
    lp.f_mem = AffineModel::linear(in + act[k], lp.weight_bytes);
    lp.b_mem = {ratio * static_cast<double>(in + act[k]),
                static_cast<double>(lp.weight_bytes + lp.wgrad_bytes)};
    lp.update_time = irregular ? scaled(spec.update_time, weight_scale) : spec.update_time;
  }
  ProfileSet set(std::move(layers), spec.u_max, spec.u_max);
  set.set_stride(spec.stride);
  return set;
}

std::vector<int> sampled_microbatches(int stride, int u_max) {
  require(stride >= 1 && u_max >= 1, ErrorCode::kInvalidArgument, "stride and u_max must be >= 1");
  std::vector<int> us{1};
  for (int u = stride; u <= u_max; u += stride) {
    if (u != us.back()) us.push_back(u);
  }
  if (us.back() != u_max) us.push_back(u_max);
  return us;
}

std::vector<ProfileSample> sample_profiles(const ProfileSet& profiles, int stride, int u_max) {
  std::vector<ProfileSample> out;
  const auto us = sampled_microbatches(stride, u_max);
  for (int l = 0; l < profiles.layer_count(); ++l) {
    const auto& lp = profiles.layer(l);
    for (int u : us) {
      ProfileSample base;
      base.layer = l;
      base.microbatch = u;
      base.input_bytes = lp.input_bytes.eval(u);
      base.output_bytes = lp.output_bytes.eval(u);
      base.weight_bytes = lp.weight_bytes;
      base.wgrad_bytes = lp.wgrad_bytes;
      base.optstate_bytes = lp.optstate_bytes;

      ProfileSample f = base;
      f.pass = Pass::kForward;
      f.compute_time = lp.f_time.eval(u);
      f.mem_footprint = lp.f_mem.eval(u);
      out.push_back(f);

      ProfileSample b = base;
      b.pass = Pass::kBackward;
      b.compute_time = lp.b_time.eval(u);
      b.mem_footprint = lp.b_mem.eval(u);
      out.push_back(b);

      ProfileSample upd = base;
      upd.pass = Pass::kUpdate;
      upd.compute_time = lp.update_time;
      upd.mem_footprint = lp.weight_bytes + lp.wgrad_bytes + lp.optstate_bytes;
      out.push_back(upd);
    }
  }
  return out;
}

}  // namespace wrapipe
