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

// Python bindings. Every entry point takes and returns the same JSON
// documents as the command-line tool, passed as strings; the package
// wrapper converts them to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "wrapipe/analytics.hpp"
#include "wrapipe/errors.hpp"
#include "wrapipe/hardness.hpp"
#include "wrapipe/json_io.hpp"
#include "wrapipe/packing.hpp"
#include "wrapipe/search.hpp"
#include "wrapipe/simulator.hpp"
#include "wrapipe/taskgraph.hpp"

namespace py = pybind11;

namespace wrapipe {
namespace {

Json parse(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kSchema, std::string(what) + ": " + e.what());
  }
}

ProfileSet load_profiles(const std::string& profiles, const std::optional<std::string>& graph) {
  ProfileSet p = profiles_from_json(parse(profiles, "profiles"));
  if (graph) p.attach_relays(serialize_graph(layer_graph_from_json(parse(*graph, "graph"))));
  return p;
}

struct Inputs {
  MachineModel machine;
  ProfileSet profiles;
};

Inputs load(const std::string& machine, const std::string& profiles, const std::optional<std::string>& graph) {
  return {machine_from_json(parse(machine, "machine")), load_profiles(profiles, graph)};
}

std::string synth(const std::string& spec) {
  return profiles_to_json(synth_profiles(synth_spec_from_json(parse(spec, "spec")))).dump();
}

std::string samples(const std::string& profiles, int stride, std::optional<int> u_max) {
  const ProfileSet p = profiles_from_json(parse(profiles, "profiles"));
  const int top = u_max.value_or(std::min(p.u_max_f(), p.u_max_b()));
  return samples_to_json(sample_profiles(p, stride, top)).dump();
}

std::string fit(const std::string& samples_json, int stride) {
  ProfileSet p = fit_profiles(samples_from_json(parse(samples_json, "samples")), stride);
  p.set_stride(stride);
  return profiles_to_json(p).dump();
}

std::string pack(const std::string& machine, const std::string& profiles, const std::string& pass_name_str, int u,
                 std::optional<int> backward_u, const std::string& packer, const std::optional<std::string>& graph) {
  const Inputs in = load(machine, profiles, graph);
  const Pass pass = parse_pass(pass_name_str);
  const Packer pk = parse_packer(packer);
  auto run = [&](Pass ps, int uu, const std::optional<PackPlan>& b) {
    return pk == Packer::kBalanced ? balanced_time_pack(ps, uu, in.profiles, in.machine.gpu_mem_capacity, b)
                                   : greedy_maxpack(ps, uu, in.profiles, in.machine.gpu_mem_capacity, b);
  };
  std::optional<PackPlan> backward;
  if (pass == Pass::kForward && backward_u) backward = run(Pass::kBackward, *backward_u, std::nullopt);
  return pack_plan_to_json(run(pass, u, backward), pass, u).dump();
}

std::string run_search(const std::string& machine, const std::string& profiles, const std::string& spec_json,
                       const std::optional<std::string>& graph) {
  const Inputs in = load(machine, profiles, graph);
  const SearchSpec spec = search_spec_from_json(parse(spec_json, "spec"));
  SearchResult r;
  {
    py::gil_scoped_release release;
    r = search(spec, in.machine, in.profiles);
  }
  return search_result_to_json(r, spec).dump();
}

std::string task_graph(const std::string& machine, const std::string& profiles, const std::string& config,
                       const std::optional<std::string>& graph) {
  const Inputs in = load(machine, profiles, graph);
  return task_graph_to_json(generate_task_graph(configuration_from_json(parse(config, "config")), in.machine,
                                                in.profiles))
      .dump();
}

SimReport simulate_config(const Inputs& in, const std::string& config) {
  const Configuration cfg = configuration_from_json(parse(config, "config"));
  return simulate(generate_task_graph(cfg, in.machine, in.profiles), in.machine, in.profiles);
}

std::string run_simulate(const std::string& machine, const std::string& profiles, const std::string& config,
                         bool trace, const std::optional<std::string>& graph) {
  return sim_report_to_json(simulate_config(load(machine, profiles, graph), config), trace).dump();
}

std::string gantt(const std::string& machine, const std::string& profiles, const std::string& config,
                  const std::string& format, const std::optional<std::string>& graph) {
  const SimReport r = simulate_config(load(machine, profiles, graph), config);
  return render_gantt(r, format == "svg" ? GanttFormat::kSvg : GanttFormat::kText);
}

std::string analyze(const std::string& model, const std::string& reading) {
  const IdealModel m = ideal_model_from_json(parse(model, "model"));
  const DwReading r = parse_dw_reading(reading);
  return swap_comparison_to_json(m, r, compare_sim_to_closed_form(m, r)).dump();
}

std::string reduction_build(const std::vector<std::int64_t>& numbers, std::optional<std::int64_t> scale) {
  return reduction_to_json(build_reduction(numbers, scale)).dump();
}

std::string reduction_eval(const std::vector<std::int64_t>& numbers, const std::vector<std::pair<int, int>>& packs,
                           std::optional<std::int64_t> scale) {
  const ReductionInstance inst = build_reduction(numbers, scale);
  std::vector<LayerRange> ranges;
  for (auto [a, b] : packs) ranges.push_back({a - 1, b - 1});
  return schedule_to_json(inst, eval_schedule(inst, ranges)).dump();
}

std::string reduction_verify(const std::vector<std::int64_t>& numbers, std::optional<std::int64_t> scale, int jobs) {
  VerifyResult v;
  {
    py::gil_scoped_release release;
    v = verify_reduction(numbers, scale, jobs);
  }
  return verify_to_json(numbers, v).dump();
}

}  // namespace
}  // namespace wrapipe

PYBIND11_MODULE(_wrapipe, m) {
  using namespace wrapipe;
  m.doc() = "Pipeline training planner: profiles, packing, search, simulation and swap analysis.";
  m.attr("FORMAT_VERSION") = kFormatVersion;

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "WrapipeError", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = error_type.get_stored();
      py::object inst = cls(e.what());
      inst.attr("code") = std::string(error_code_name(e.code()));
      inst.attr("exit_code") = exit_code_for(e.code());
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  using namespace pybind11::literals;
  m.def("synth_profiles", &synth, "spec"_a);
  m.def("sample_profiles", &samples, "profiles"_a, "stride"_a = 4, "u_max"_a = std::nullopt);
  m.def("fit_profiles", &fit, "samples"_a, "stride"_a = 4);
  m.def("pack", &pack, "machine"_a, "profiles"_a, "pass_"_a, "u"_a, "backward_u"_a = std::nullopt,
        "packer"_a = "balanced", "graph"_a = std::nullopt);
  m.def("search", &run_search, "machine"_a, "profiles"_a, "spec"_a, "graph"_a = std::nullopt);
  m.def("task_graph", &task_graph, "machine"_a, "profiles"_a, "config"_a, "graph"_a = std::nullopt);
  m.def("simulate", &run_simulate, "machine"_a, "profiles"_a, "config"_a, "trace"_a = true, "graph"_a = std::nullopt);
  m.def("gantt", &gantt, "machine"_a, "profiles"_a, "config"_a, "format"_a = "text", "graph"_a = std::nullopt);
  m.def("analyze_swaps", &analyze, "model"_a, "dw_reading"_a = "per_gpu");
  m.def("reduction_build", &reduction_build, "numbers"_a, "scale"_a = std::nullopt);
  m.def("reduction_eval", &reduction_eval, "numbers"_a, "packs"_a, "scale"_a = std::nullopt);
  m.def("reduction_verify", &reduction_verify, "numbers"_a, "scale"_a = std::nullopt, "jobs"_a = 1);
}
