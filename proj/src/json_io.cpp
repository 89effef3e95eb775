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

#include "wrapipe/json_io.hpp"

#include <fstream>
#include <sstream>

#include "wrapipe/errors.hpp"

namespace wrapipe {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kSchema, path + ": " + what);
}

const Json& field(const Json& j, const std::string& name, const std::string& ctx) {
  if (!j.is_object()) schema_error(ctx, "expected an object");
  auto it = j.find(name);
  if (it == j.end()) schema_error(ctx + "." + name, "missing required field");
  return *it;
}

template <typename T>
T get(const Json& j, const std::string& name, const std::string& ctx) {
  const Json& v = field(j, name, ctx);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(ctx + "." + name, "has the wrong type");
  }
}

template <typename T>
T get_or(const Json& j, const std::string& name, const std::string& ctx, T fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return get<T>(j, name, ctx);
}

void check_version(const Json& j, const std::string& ctx) {
  const int v = get<int>(j, "format_version", ctx);
  if (v != kFormatVersion) schema_error(ctx + ".format_version", "unsupported version " + std::to_string(v));
}

template <typename F>
auto wrap_enum(const std::string& path, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

Json versioned() {
  Json j;
  j["format_version"] = kFormatVersion;
  return j;
}

Json affine_to_json(const AffineModel& a) { return Json{{"per_sample", a.slope}, {"fixed", a.intercept}}; }

AffineModel affine_from_json(const Json& j, const std::string& ctx) {
  return {get<double>(j, "per_sample", ctx), get<double>(j, "fixed", ctx)};
}

Json range_to_json(const LayerRange& r) { return Json::array({r.first, r.last}); }

LayerRange range_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    schema_error(ctx, "expected [first_layer, last_layer]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

Json channel_volumes(const ChannelVolumes& v) {
  Json j = Json::object();
  for (int c = 0; c < kChannelKindCount; ++c) j[std::string(channel_kind_name(static_cast<ChannelKind>(c)))] = v[c];
  return j;
}

Json routes_to_json(const std::vector<Route>& routes) {
  Json a = Json::array();
  for (const auto& r : routes) {
    Json o;
    o["kind"] = tensor_kind_name(r.kind);
    o["channel"] = channel_kind_name(r.channel);
    o["peer"] = r.peer == kHost ? Json("host") : Json(r.peer);
    o["layers"] = r.layers;
    a.push_back(o);
  }
  return a;
}

std::vector<Route> routes_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array()) schema_error(ctx, "expected an array");
  std::vector<Route> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string c = ctx + "[" + std::to_string(i) + "]";
    Route r;
    r.kind = wrap_enum(c + ".kind", [&] { return parse_tensor_kind(get<std::string>(j[i], "kind", c)); });
    r.channel = wrap_enum(c + ".channel", [&] { return parse_channel_kind(get<std::string>(j[i], "channel", c)); });
    const Json& peer = field(j[i], "peer", c);
    if (peer.is_string() && peer.get<std::string>() == "host") {
      r.peer = kHost;
    } else if (peer.is_number_integer()) {
      r.peer = peer.get<int>();
    } else {
      schema_error(c + ".peer", "expected a task index or \"host\"");
    }
    r.layers = get<std::vector<int>>(j[i], "layers", c);
    if (r.layers.empty()) schema_error(c + ".layers", "must not be empty");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Json machine_to_json(const MachineModel& m) {
  Json j = versioned();
  j["gpu_count"] = m.gpu_count;
  j["gpu_mem_capacity_bytes"] = m.gpu_mem_capacity;
  j["pcie_bandwidth_bytes_per_s"] = m.pcie_bandwidth;
  j["root_link_bandwidth_bytes_per_s"] = m.root_link_bandwidth;
  j["p2p_groups"] = m.p2p_groups;
  j["cpu_offload_update"] = m.cpu_offload_update;
  j["update_cpu_rate_bytes_per_s"] = m.update_cpu_rate;
  return j;
}

MachineModel machine_from_json(const Json& j) {
  const std::string ctx = "machine";
  check_version(j, ctx);
  MachineModel m;
  m.gpu_count = get<int>(j, "gpu_count", ctx);
  m.gpu_mem_capacity = get<Bytes>(j, "gpu_mem_capacity_bytes", ctx);
  m.pcie_bandwidth = get<std::int64_t>(j, "pcie_bandwidth_bytes_per_s", ctx);
  m.root_link_bandwidth = get_or<std::int64_t>(j, "root_link_bandwidth_bytes_per_s", ctx, 0);
  m.p2p_groups = get_or<std::vector<std::vector<int>>>(j, "p2p_groups", ctx, {});
  m.cpu_offload_update = get_or<bool>(j, "cpu_offload_update", ctx, false);
  m.update_cpu_rate = get_or<std::int64_t>(j, "update_cpu_rate_bytes_per_s", ctx, 0);
  try {
    m.validate();
  } catch (const Error& e) {
    schema_error(ctx, e.what());
  }
  return m;
}

Json layer_graph_to_json(const std::vector<LayerNode>& nodes) {
  Json j = versioned();
  j["nodes"] = Json::array();
  for (const auto& n : nodes) {
    j["nodes"].push_back(Json{{"id", n.id}, {"kind", n.kind}, {"predecessors", n.predecessors}});
  }
  return j;
}

std::vector<LayerNode> layer_graph_from_json(const Json& j) {
  const std::string ctx = "graph";
  check_version(j, ctx);
  const Json& nodes = field(j, "nodes", ctx);
  if (!nodes.is_array()) schema_error(ctx + ".nodes", "expected an array");
  std::vector<LayerNode> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string c = ctx + ".nodes[" + std::to_string(i) + "]";
    out.push_back({get<int>(nodes[i], "id", c), get_or<std::string>(nodes[i], "kind", c, ""),
                   get_or<std::vector<int>>(nodes[i], "predecessors", c, {})});
  }
  return out;
}

Json chain_to_json(const LayerChain& chain) {
  Json j = versioned();
  j["layers"] = chain.layers;
  j["kinds"] = chain.kinds;
  j["relays"] = Json::array();
  for (const auto& r : chain.relays) {
    j["relays"].push_back(Json{{"source", r.source}, {"destination", r.destination}, {"positions", r.positions}});
  }
  j["diagnostics"] = chain.diagnostics;
  return j;
}

Json synth_spec_to_json(const SynthSpec& s) {
  Json j = versioned();
  j["preset"] = s.preset == SynthPreset::kIrregular ? "irregular" : "uniform";
  j["layers"] = s.layers;
  j["backward_ratio"] = s.backward_ratio;
  j["seed"] = s.seed;
  j["forward_time_per_sample_ns"] = s.forward_time_per_sample;
  j["forward_time_fixed_ns"] = s.forward_time_fixed;
  j["weight_bytes"] = s.weight_bytes;
  j["activation_bytes_per_sample"] = s.activation_bytes_per_sample;
  j["input_bytes_per_sample"] = s.input_bytes_per_sample;
  j["optimizer_state_factor"] = s.optimizer_state_factor;
  j["update_time_ns"] = s.update_time;
  j["u_max"] = s.u_max;
  j["stride"] = s.stride;
  return j;
}

SynthSpec synth_spec_from_json(const Json& j) {
  const std::string ctx = "synth_spec";
  check_version(j, ctx);
  SynthSpec s;
  const auto preset = get_or<std::string>(j, "preset", ctx, "uniform");
  if (preset == "uniform") {
    s.preset = SynthPreset::kUniform;
  } else if (preset == "irregular") {
    s.preset = SynthPreset::kIrregular;
  } else {
    schema_error(ctx + ".preset", "expected \"uniform\" or \"irregular\"");
  }
  s.layers = get_or<int>(j, "layers", ctx, s.layers);
  s.backward_ratio = get_or<double>(j, "backward_ratio", ctx, s.backward_ratio);
  s.seed = get_or<std::uint64_t>(j, "seed", ctx, s.seed);
  s.forward_time_per_sample = get_or<Nanos>(j, "forward_time_per_sample_ns", ctx, s.forward_time_per_sample);
  s.forward_time_fixed = get_or<Nanos>(j, "forward_time_fixed_ns", ctx, s.forward_time_fixed);
  s.weight_bytes = get_or<Bytes>(j, "weight_bytes", ctx, s.weight_bytes);
  s.activation_bytes_per_sample = get_or<Bytes>(j, "activation_bytes_per_sample", ctx, s.activation_bytes_per_sample);
  s.input_bytes_per_sample = get_or<Bytes>(j, "input_bytes_per_sample", ctx, s.input_bytes_per_sample);
  s.optimizer_state_factor = get_or<double>(j, "optimizer_state_factor", ctx, s.optimizer_state_factor);
  s.update_time = get_or<Nanos>(j, "update_time_ns", ctx, s.update_time);
  s.u_max = get_or<int>(j, "u_max", ctx, s.u_max);
  s.stride = get_or<int>(j, "stride", ctx, s.stride);
  return s;
}

Json profiles_to_json(const ProfileSet& p) {
  Json j = versioned();
  j["u_max_f"] = p.u_max_f();
  j["u_max_b"] = p.u_max_b();
  j["stride"] = p.stride();
  j["layers"] = Json::array();
  for (int l = 0; l < p.layer_count(); ++l) {
    const auto& lp = p.layer(l);
    Json o;
    o["layer"] = l;
    o["f_time_ns"] = affine_to_json(lp.f_time);
    o["f_mem_bytes"] = affine_to_json(lp.f_mem);
    o["b_time_ns"] = affine_to_json(lp.b_time);
    o["b_mem_bytes"] = affine_to_json(lp.b_mem);
    o["input_bytes"] = affine_to_json(lp.input_bytes);
    o["output_bytes"] = affine_to_json(lp.output_bytes);
    o["update_time_ns"] = lp.update_time;
    o["weight_bytes"] = lp.weight_bytes;
    o["wgrad_bytes"] = lp.wgrad_bytes;
    o["optstate_bytes"] = lp.optstate_bytes;
    o["max_rel_residual"] = lp.max_rel_residual;
    j["layers"].push_back(o);
  }
  j["relayed"] = p.relayed();
  j["warnings"] = p.warnings();
  return j;
}

ProfileSet profiles_from_json(const Json& j) {
  const std::string ctx = "profiles";
  check_version(j, ctx);
  const Json& arr = field(j, "layers", ctx);
  if (!arr.is_array() || arr.empty()) schema_error(ctx + ".layers", "expected a non-empty array");
  std::vector<LayerProfile> layers;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string c = ctx + ".layers[" + std::to_string(i) + "]";
    const Json& o = arr[i];
    LayerProfile lp;
    lp.f_time = affine_from_json(field(o, "f_time_ns", c), c + ".f_time_ns");
    lp.f_mem = affine_from_json(field(o, "f_mem_bytes", c), c + ".f_mem_bytes");
    lp.b_time = affine_from_json(field(o, "b_time_ns", c), c + ".b_time_ns");
    lp.b_mem = affine_from_json(field(o, "b_mem_bytes", c), c + ".b_mem_bytes");
    lp.input_bytes = affine_from_json(field(o, "input_bytes", c), c + ".input_bytes");
    lp.output_bytes = affine_from_json(field(o, "output_bytes", c), c + ".output_bytes");
    lp.update_time = get<Nanos>(o, "update_time_ns", c);
    lp.weight_bytes = get<Bytes>(o, "weight_bytes", c);
    lp.wgrad_bytes = get<Bytes>(o, "wgrad_bytes", c);
    lp.optstate_bytes = get<Bytes>(o, "optstate_bytes", c);
    lp.max_rel_residual = get_or<double>(o, "max_rel_residual", c, 0.0);
    if (lp.weight_bytes < 0 || lp.wgrad_bytes < 0 || lp.optstate_bytes < 0 || lp.update_time < 0) {
      schema_error(c, "sizes and times must be >= 0");
    }
    layers.push_back(lp);
  }
  const int uf = get<int>(j, "u_max_f", ctx);
  const int ub = get<int>(j, "u_max_b", ctx);
  if (uf < 1 || ub < 1) schema_error(ctx, "u_max_f and u_max_b must be >= 1");
  ProfileSet p(std::move(layers), uf, ub);
  p.set_stride(get_or<int>(j, "stride", ctx, 1));
  auto relayed = get_or<std::vector<std::vector<int>>>(j, "relayed", ctx, {});
  if (!relayed.empty()) p.set_relayed(std::move(relayed));
  for (const auto& w : get_or<std::vector<std::string>>(j, "warnings", ctx, {})) p.add_warning(w);
  return p;
}

Json samples_to_json(const std::vector<ProfileSample>& samples) {
  Json j = versioned();
  j["samples"] = Json::array();
  for (const auto& s : samples) {
    j["samples"].push_back(Json{{"layer", s.layer},
                                {"pass", pass_name(s.pass)},
                                {"microbatch", s.microbatch},
                                {"compute_time_ns", s.compute_time},
                                {"mem_footprint_bytes", s.mem_footprint},
                                {"input_bytes", s.input_bytes},
                                {"output_bytes", s.output_bytes},
                                {"weight_bytes", s.weight_bytes},
                                {"wgrad_bytes", s.wgrad_bytes},
                                {"optstate_bytes", s.optstate_bytes}});
  }
  return j;
}

std::vector<ProfileSample> samples_from_json(const Json& j) {
  const std::string ctx = "samples";
  check_version(j, ctx);
  const Json& arr = field(j, "samples", ctx);
  if (!arr.is_array()) schema_error(ctx + ".samples", "expected an array");
  std::vector<ProfileSample> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string c = ctx + ".samples[" + std::to_string(i) + "]";
    const Json& o = arr[i];
    ProfileSample s;
    s.layer = get<int>(o, "layer", c);
    s.pass = wrap_enum(c + ".pass", [&] { return parse_pass(get<std::string>(o, "pass", c)); });
    s.microbatch = get<int>(o, "microbatch", c);
    s.compute_time = get<Nanos>(o, "compute_time_ns", c);
    s.mem_footprint = get<Bytes>(o, "mem_footprint_bytes", c);
    s.input_bytes = get<Bytes>(o, "input_bytes", c);
    s.output_bytes = get<Bytes>(o, "output_bytes", c);
    s.weight_bytes = get<Bytes>(o, "weight_bytes", c);
    s.wgrad_bytes = get<Bytes>(o, "wgrad_bytes", c);
    s.optstate_bytes = get<Bytes>(o, "optstate_bytes", c);
    out.push_back(s);
  }
  return out;
}

Json packs_to_json(const std::vector<LayerRange>& packs) {
  Json a = Json::array();
  for (const auto& p : packs) a.push_back(range_to_json(p));
  return a;
}

std::vector<LayerRange> packs_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array()) schema_error(ctx, "expected an array of [first_layer, last_layer]");
  std::vector<LayerRange> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(range_from_json(j[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

Json configuration_to_json(const Configuration& c) {
  Json j = versioned();
  j["mode"] = mode_name(c.mode);
  j["minibatch"] = c.minibatch;
  j["u_f"] = c.u_f;
  j["p_f"] = packs_to_json(c.p_f);
  j["u_b"] = c.u_b;
  j["p_b"] = packs_to_json(c.p_b);
  j["p_f_label"] = pack_list_label(c.p_f);
  j["p_b_label"] = pack_list_label(c.p_b);
  return j;
}

Configuration configuration_from_json(const Json& j) {
  const std::string ctx = "configuration";
  check_version(j, ctx);
  Configuration c;
  c.mode = wrap_enum(ctx + ".mode", [&] { return parse_mode(get<std::string>(j, "mode", ctx)); });
  c.minibatch = get<int>(j, "minibatch", ctx);
  c.u_f = get<int>(j, "u_f", ctx);
  c.u_b = get<int>(j, "u_b", ctx);
  c.p_f = packs_from_json(field(j, "p_f", ctx), ctx + ".p_f");
  c.p_b = packs_from_json(field(j, "p_b", ctx), ctx + ".p_b");
  return c;
}

Json pack_plan_to_json(const PackPlan& plan, Pass pass, int u) {
  Json j = versioned();
  j["pass"] = pass_name(pass);
  j["microbatch"] = u;
  j["packs"] = packs_to_json(plan.packs);
  j["label"] = pack_list_label(plan.packs);
  j["times_ns"] = plan.times;
  j["memories_bytes"] = plan.memories;
  return j;
}

Json task_graph_to_json(const TaskGraph& g) {
  Json j = versioned();
  j["mode"] = mode_name(g.mode);
  j["gpu_count"] = g.gpu_count;
  j["layer_count"] = g.layer_count;
  j["tasks"] = Json::array();
  for (const auto& t : g.tasks) {
    Json o;
    o["index"] = t.index;
    o["type"] = task_type_name(t.type);
    o["pack"] = range_to_json(t.pack);
    o["microbatches"] = t.microbatches;
    o["first_sample"] = t.first_sample;
    o["device"] = t.device.label();
    o["gpu"] = t.gpu;
    o["recompute"] = t.recompute;
    o["after"] = t.after;
    o["inputs"] = routes_to_json(t.inputs);
    o["outputs"] = routes_to_json(t.outputs);
    j["tasks"].push_back(o);
  }
  j["notes"] = g.notes;
  return j;
}

TaskGraph task_graph_from_json(const Json& j) {
  const std::string ctx = "task_graph";
  check_version(j, ctx);
  TaskGraph g;
  g.mode = wrap_enum(ctx + ".mode", [&] { return parse_mode(get<std::string>(j, "mode", ctx)); });
  g.gpu_count = get<int>(j, "gpu_count", ctx);
  g.layer_count = get<int>(j, "layer_count", ctx);
  const Json& arr = field(j, "tasks", ctx);
  if (!arr.is_array()) schema_error(ctx + ".tasks", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string c = ctx + ".tasks[" + std::to_string(i) + "]";
    const Json& o = arr[i];
    Task t;
    t.index = get<int>(o, "index", c);
    if (t.index != static_cast<int>(i)) schema_error(c + ".index", "tasks must be listed in index order");
    t.type = wrap_enum(c + ".type", [&] { return parse_task_type(get<std::string>(o, "type", c)); });
    t.pack = range_from_json(field(o, "pack", c), c + ".pack");
    t.microbatches = get<std::vector<int>>(o, "microbatches", c);
    t.first_sample = get_or<int>(o, "first_sample", c, 0);
    const auto dev = get<std::string>(o, "device", c);
    if (dev.rfind("GPU#", 0) == 0) {
      t.device.kind = Device::Kind::kGpu;
    } else if (dev.rfind("CPU#", 0) == 0) {
      t.device.kind = Device::Kind::kCpu;
    } else {
      schema_error(c + ".device", "expected GPU#k or CPU#k");
    }
    try {
      t.device.id = std::stoi(dev.substr(4));
    } catch (const std::exception&) {
      schema_error(c + ".device", "bad device index");
    }
    t.gpu = get_or<int>(o, "gpu", c, t.device.id);
    t.recompute = get_or<bool>(o, "recompute", c, false);
    t.after = get_or<std::vector<int>>(o, "after", c, {});
    t.inputs = routes_from_json(field(o, "inputs", c), c + ".inputs");
    t.outputs = routes_from_json(field(o, "outputs", c), c + ".outputs");
    g.tasks.push_back(std::move(t));
  }
  g.notes = get_or<std::vector<std::string>>(j, "notes", ctx, {});
  return g;
}

Json sim_report_to_json(const SimReport& r, bool include_trace) {
  Json j = versioned();
  j["makespan_ns"] = r.makespan;
  j["gpus"] = Json::array();
  for (std::size_t g = 0; g < r.gpu_busy.size(); ++g) {
    j["gpus"].push_back(Json{{"gpu", g},
                             {"busy_ns", r.gpu_busy[g]},
                             {"idle_ns", r.gpu_idle[g]},
                             {"volume_bytes", channel_volumes(r.gpu_volume[g])}});
  }
  j["volume_bytes"] = channel_volumes(r.volume);
  Json tv = Json::object();
  Json sv = Json::object();
  for (int k = 0; k < kTensorKindCount; ++k) {
    const auto kind = static_cast<TensorKind>(k);
    tv[std::string(tensor_kind_name(kind))] = channel_volumes(r.tensor_volume[k]);
    sv[std::string(tensor_kind_name(kind))] = r.swap_volume(kind);
  }
  j["tensor_volume_bytes"] = tv;
  j["swap_volume_bytes"] = sv;
  j["total_swap_volume_bytes"] = r.total_swap_volume();
  if (include_trace) {
    j["trace"] = Json::array();
    for (const auto& e : r.trace) {
      j["trace"].push_back(Json{{"resource", e.resource},
                                {"task", e.task},
                                {"kind", e.kind},
                                {"label", e.label},
                                {"start_ns", e.start},
                                {"end_ns", e.end},
                                {"bytes", e.bytes}});
    }
  }
  j["notes"] = r.notes;
  return j;
}

Json search_spec_to_json(const SearchSpec& s) {
  Json j = versioned();
  j["minibatch"] = s.minibatch;
  j["u_fmax"] = s.u_fmax ? Json(*s.u_fmax) : Json(nullptr);
  j["u_bmax"] = s.u_bmax ? Json(*s.u_bmax) : Json(nullptr);
  j["mode"] = mode_name(s.mode);
  j["strategy"] = strategy_name(s.strategy);
  j["packer"] = packer_name(s.packer);
  j["stride"] = s.stride;
  j["jobs"] = s.jobs;
  return j;
}

SearchSpec search_spec_from_json(const Json& j) {
  const std::string ctx = "search_spec";
  check_version(j, ctx);
  SearchSpec s;
  s.minibatch = get<int>(j, "minibatch", ctx);
  if (j.contains("u_fmax") && !j["u_fmax"].is_null()) s.u_fmax = get<int>(j, "u_fmax", ctx);
  if (j.contains("u_bmax") && !j["u_bmax"].is_null()) s.u_bmax = get<int>(j, "u_bmax", ctx);
  s.mode = wrap_enum(ctx + ".mode", [&] { return parse_mode(get_or<std::string>(j, "mode", ctx, "wraparound_pp")); });
  s.strategy = wrap_enum(ctx + ".strategy",
                         [&] { return parse_strategy(get_or<std::string>(j, "strategy", ctx, "distinct_fb")); });
  s.packer = wrap_enum(ctx + ".packer", [&] { return parse_packer(get_or<std::string>(j, "packer", ctx, "balanced")); });
  s.stride = get_or<int>(j, "stride", ctx, 1);
  s.jobs = get_or<int>(j, "jobs", ctx, 1);
  if (s.minibatch < 1 || s.stride < 1 || s.jobs < 1) schema_error(ctx, "minibatch, stride and jobs must be >= 1");
  return s;
}

Json search_result_to_json(const SearchResult& r, const SearchSpec& spec) {
  Json j = versioned();
  j["spec"] = search_spec_to_json(spec);
  j["best"] = configuration_to_json(r.best);
  j["best_time_ns"] = r.best_time;
  j["summary"] = Json{{"u_f", r.best.u_f},
                      {"p_f_count", r.best.p_f.size()},
                      {"u_b", r.best.u_b},
                      {"p_b_count", r.best.p_b.size()},
                      {"time_ns", r.best_time}};
  j["explored"] = r.explored;
  j["u_fmax"] = r.u_fmax;
  j["u_bmax"] = r.u_bmax;
  j["wall_time_s"] = r.wall_seconds;
  j["candidates"] = Json::array();
  for (const auto& c : r.log) {
    Json o{{"u_f", c.u_f},     {"u_b", c.u_b},   {"p_f_count", c.p_f_count}, {"p_b_count", c.p_b_count},
           {"shared_packs", c.shared_packs}, {"feasible", c.feasible}};
    o["time_ns"] = c.feasible ? Json(c.time) : Json(nullptr);
    if (!c.feasible) o["reason"] = c.reason;
    j["candidates"].push_back(o);
  }
  return j;
}

Json ideal_model_to_json(const IdealModel& m) {
  Json j = versioned();
  j["layers"] = m.layers;
  j["weight_bytes"] = m.weight_bytes;
  j["wgrad_bytes"] = m.wgrad_bytes;
  j["optstate_bytes"] = m.optstate_bytes;
  j["stash_bytes"] = m.stash_bytes;
  j["microbatches"] = m.microbatches;
  j["gpus"] = m.gpus;
  j["strategy"] = mode_name(m.strategy);
  return j;
}

IdealModel ideal_model_from_json(const Json& j) {
  const std::string ctx = "ideal_model";
  check_version(j, ctx);
  IdealModel m;
  m.layers = get<int>(j, "layers", ctx);
  m.weight_bytes = get<Bytes>(j, "weight_bytes", ctx);
  m.wgrad_bytes = get_or<Bytes>(j, "wgrad_bytes", ctx, m.weight_bytes);
  m.optstate_bytes = get_or<Bytes>(j, "optstate_bytes", ctx, 2 * m.weight_bytes);
  m.stash_bytes = get_or<Bytes>(j, "stash_bytes", ctx, 0);
  m.microbatches = get<int>(j, "microbatches", ctx);
  m.gpus = get<int>(j, "gpus", ctx);
  m.strategy =
      wrap_enum(ctx + ".strategy", [&] { return parse_mode(get_or<std::string>(j, "strategy", ctx, "wraparound_pp")); });
  return m;
}

Json swap_comparison_to_json(const IdealModel& m, DwReading reading, const std::vector<SwapComparison>& rows) {
  Json j = versioned();
  j["model"] = ideal_model_to_json(m);
  j["dw_reading"] = dw_reading_name(reading);
  j["rows"] = Json::array();
  for (const auto& r : rows) {
    j["rows"].push_back(Json{{"tensor", tensor_kind_name(r.tensor)},
                             {"analytic_bytes", r.analytic},
                             {"simulated_bytes", r.simulated},
                             {"delta_bytes", r.delta()},
                             {"source", r.verbatim ? "closed_form" : "derived"}});
  }
  return j;
}

namespace {

Json rational_to_json(const Rational& r) {
  return Json{{"numerator", r.numerator}, {"denominator", r.denominator}, {"integral", r.integral()}};
}

}  // namespace

Json reduction_to_json(const ReductionInstance& inst) {
  Json j = versioned();
  j["microbatches"] = inst.microbatches;
  j["gpus"] = inst.gpus;
  j["capacity_bytes"] = inst.capacity;
  j["scale"] = inst.scale;
  j["source"] = inst.source;
  j["layers"] = Json::array();
  for (int i = 0; i < inst.layer_count(); ++i) {
    j["layers"].push_back(Json{{"layer", i + 1}, {"time_ns", inst.layers[i].time}, {"size_bytes", inst.layers[i].size}});
  }
  const Rational t = target_T(inst);
  j["target_T_ns"] = rational_to_json(t);
  return j;
}

ReductionInstance reduction_from_json(const Json& j) {
  const std::string ctx = "reduction";
  check_version(j, ctx);
  ReductionInstance inst;
  inst.microbatches = get<int>(j, "microbatches", ctx);
  inst.gpus = get<int>(j, "gpus", ctx);
  inst.capacity = get<Bytes>(j, "capacity_bytes", ctx);
  inst.scale = get_or<std::int64_t>(j, "scale", ctx, 0);
  inst.source = get_or<std::vector<std::int64_t>>(j, "source", ctx, {});
  const Json& arr = field(j, "layers", ctx);
  if (!arr.is_array()) schema_error(ctx + ".layers", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string c = ctx + ".layers[" + std::to_string(i) + "]";
    inst.layers.push_back({get<Nanos>(arr[i], "time_ns", c), get<Bytes>(arr[i], "size_bytes", c)});
  }
  if (inst.microbatches < 1 || inst.gpus < 1) schema_error(ctx, "microbatches and gpus must be >= 1");
  return inst;
}

Json schedule_to_json(const ReductionInstance& inst, const SimpleSchedule& s) {
  Json j = versioned();
  Json packs = Json::array();
  for (const auto& p : s.packs) packs.push_back(Json::array({p.first + 1, p.last + 1}));
  j["packs_1based"] = packs;
  j["makespan_ns"] = s.makespan;
  const Rational t = target_T(inst);
  j["target_T_ns"] = rational_to_json(t);
  j["achieves_T"] = t.equals(s.makespan);
  j["items"] = Json::array();
  for (const auto& it : s.items) {
    j["items"].push_back(Json{{"pack", it.pack + 1},
                              {"microbatch", it.microbatch + 1},
                              {"gpu", it.gpu + 1},
                              {"start_ns", it.start},
                              {"end_ns", it.end}});
  }
  j["idle"] = Json::array();
  for (const auto& w : idle_windows(inst, s)) {
    j["idle"].push_back(Json{{"gpu", w.gpu + 1}, {"start_ns", w.start}, {"end_ns", w.end}, {"forced", w.forced}});
  }
  return j;
}

Json verify_to_json(const std::vector<std::int64_t>& numbers, const VerifyResult& v) {
  Json j = versioned();
  j["numbers"] = numbers;
  j["partition_yes"] = v.partition_yes;
  j["t_achievable"] = v.t_achievable;
  j["agree"] = v.partition_yes == v.t_achievable;
  j["target_T_ns"] = rational_to_json(v.target);
  j["best_makespan_ns"] = v.best_makespan;
  Json packs = Json::array();
  for (const auto& p : v.witness) packs.push_back(Json::array({p.first + 1, p.last + 1}));
  j["witness_packs_1based"] = packs;
  Json subset = Json::array();
  for (int i : v.subset) subset.push_back(i + 1);
  j["subset_1based"] = subset;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kInvalidArgument, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kSchema, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
}

}  // namespace wrapipe
