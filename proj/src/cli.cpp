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

#include "wrapipe/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wrapipe/errors.hpp"
#include "wrapipe/json_io.hpp"

namespace wrapipe {

namespace {

bool verbose() {
  const char* v = std::getenv("WRAPIPE_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log(const std::string& msg) {
  if (verbose()) std::cerr << "wrapipe: " << msg << "\n";
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    log("wrote " + out);
  }
}

void emit(const Json& j, const std::string& out) { emit_text(j.dump(2) + "\n", out); }

ProfileSet load_profiles(const std::string& path, const std::string& graph_path) {
  ProfileSet p = profiles_from_json(read_json_file(path));
  if (!graph_path.empty()) p.attach_relays(serialize_graph(layer_graph_from_json(read_json_file(graph_path))));
  return p;
}

// "1-4,5,6-8" in 1-based layer numbers.
std::vector<LayerRange> parse_pack_list(const std::string& text) {
  std::vector<LayerRange> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      const int a = std::stoi(item.substr(0, dash));
      const int b = dash == std::string::npos ? a : std::stoi(item.substr(dash + 1));
      out.push_back({a - 1, b - 1});
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad pack '" + item + "' (expected first-last, 1-based)");
    }
  }
  return out;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item) - 1);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad index '" + item + "'");
    }
  }
  return out;
}

std::string swap_table(const std::vector<std::pair<IdealModel, std::vector<SwapComparison>>>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(15) << "strategy" << std::setw(7) << "tensor" << std::right << std::setw(20)
     << "analytic_bytes" << std::setw(20) << "simulated_bytes" << std::setw(14) << "delta_bytes" << "  source\n";
  for (const auto& [model, comps] : rows) {
    for (const auto& c : comps) {
      os << std::left << std::setw(15) << mode_name(model.strategy) << std::setw(7) << tensor_kind_name(c.tensor)
         << std::right << std::setw(20) << c.analytic << std::setw(20) << c.simulated << std::setw(14) << c.delta()
         << "  " << (c.verbatim ? "closed_form" : "derived") << "\n";
    }
  }
  return os.str();
}

std::string table_row(const SearchResult& r) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "U_F" << std::setw(7) << "|P_F|" << std::setw(6) << "U_B" << std::setw(7)
     << "|P_B|" << std::setw(14) << "time_ms" << "wall_s\n";
  os << std::left << std::setw(6) << r.best.u_f << std::setw(7) << r.best.p_f.size() << std::setw(6) << r.best.u_b
     << std::setw(7) << r.best.p_b.size() << std::setw(14) << std::fixed << std::setprecision(3)
     << static_cast<double>(r.best_time) / static_cast<double>(kMillisecond) << std::setprecision(3)
     << r.wall_seconds << "\n";
  os << "P_F: " << pack_list_label(r.best.p_f) << "\n";
  os << "P_B: " << pack_list_label(r.best.p_b) << "\n";
  os << "explored " << r.explored << " of " << r.log.size() << " candidates\n";
  return os.str();
}

struct Inputs {
  std::string machine, profiles, graph, out;
};

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--machine", in.machine, "machine model JSON")->required();
  cmd->add_option("--profiles", in.profiles, "profile set JSON")->required();
  cmd->add_option("--graph", in.graph, "layer graph JSON whose branches are relayed");
}

struct ReductionArgs {
  std::vector<std::int64_t> numbers;
  std::int64_t scale = 0;
  std::string packs, subset, out, format = "text";
  bool optimal = false;
  int jobs = 1;

  std::optional<std::int64_t> scale_opt() const {
    return scale > 0 ? std::optional<std::int64_t>(scale) : std::nullopt;
  }
};

std::vector<LayerRange> choose_packs(const ReductionInstance& inst, const ReductionArgs& a) {
  if (!a.packs.empty()) return parse_pack_list(a.packs);
  if (!a.subset.empty()) return packs_for_subset(inst, parse_index_list(a.subset));
  if (a.optimal) return enumerate_optimal(inst, a.jobs).best_packs;
  // Default: the split found by subset search, else the optimum.
  if (auto s = find_partition(inst.source)) return packs_for_subset(inst, *s);
  return enumerate_optimal(inst, a.jobs).best_packs;
}

void run_analyze(const std::string& model_path, IdealModel base, const std::string& strategy,
                 const std::string& reading_name, const std::string& out) {
  if (!model_path.empty()) base = ideal_model_from_json(read_json_file(model_path));
  const DwReading reading = parse_dw_reading(reading_name);
  std::vector<Mode> modes;
  if (strategy == "all") {
    modes = {Mode::kPerGpuSwapDP, Mode::kGroupedDP, Mode::kPerGpuSwapPP, Mode::kWrapAroundPP};
  } else {
    modes = {parse_mode(strategy)};
  }
  std::vector<std::pair<IdealModel, std::vector<SwapComparison>>> rows;
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["comparisons"] = Json::array();
  for (Mode mode : modes) {
    IdealModel m = base;
    m.strategy = mode;
    auto comps = compare_sim_to_closed_form(m, reading);
    j["comparisons"].push_back(swap_comparison_to_json(m, reading, comps));
    rows.emplace_back(m, std::move(comps));
  }
  std::cout << swap_table(rows);
  if (!out.empty()) emit(j, out);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"wrapipe: swap-aware pipeline schedule planner"};
  app.require_subcommand(1);

  std::string gp_spec, gp_out, gp_profiles_out, gp_graph;
  auto* gen = app.add_subcommand("gen-profiles", "sample a synthetic cost model");
  gen->add_option("--spec", gp_spec, "synthetic spec JSON")->required();
  gen->add_option("--out", gp_out, "sample records JSON (default stdout)");
  gen->add_option("--profiles-out", gp_profiles_out, "also write the exact profile set");
  gen->add_option("--graph", gp_graph, "layer graph JSON; its serialized length sets the layer count");

  std::string fp_samples, fp_out, fp_graph;
  int fp_stride = 0;
  auto* fit = app.add_subcommand("fit-profiles", "fit per-layer regressions to sample records");
  fit->add_option("--samples", fp_samples, "sample records JSON")->required();
  fit->add_option("--out", fp_out, "profile JSON (default stdout)");
  fit->add_option("--graph", fp_graph, "layer graph JSON whose branches are relayed");
  fit->add_option("--stride", fp_stride, "sampling stride recorded in the output");

  Inputs pk;
  std::string pk_pass = "B", pk_packer = "balanced";
  int pk_u = 1, pk_backward_u = 0;
  auto* pack = app.add_subcommand("pack", "pack layers under the GPU memory capacity");
  add_inputs(pack, pk);
  pack->add_option("--pass", pk_pass, "F or B")->check(CLI::IsMember({"F", "B"}));
  pack->add_option("-u,--microbatch", pk_u, "microbatch size")->required();
  pack->add_option("--backward-u", pk_backward_u, "for F: pack B at this size first and share its last pack");
  pack->add_option("--packer", pk_packer, "balanced or greedy_max")->check(CLI::IsMember({"balanced", "greedy_max"}));
  pack->add_option("--out", pk.out, "pack plan JSON (default stdout)");

  Inputs se;
  std::string se_spec, se_out_dir;
  int se_jobs = 0, se_stride = 0;
  auto* srch = app.add_subcommand("search", "sweep microbatch sizes and packs for the fastest configuration");
  add_inputs(srch, se);
  srch->add_option("--spec", se_spec, "search spec JSON")->required();
  srch->add_option("--out-dir", se_out_dir, "output directory")->required();
  srch->add_option("--jobs", se_jobs, "worker threads (overrides the spec)");
  srch->add_option("--stride", se_stride, "sweep stride (overrides the spec)");

  Inputs si;
  std::string si_config, si_tg_out, si_csv;
  bool si_no_trace = false;
  auto* sim = app.add_subcommand("simulate", "estimate iteration time and swap volume of one configuration");
  add_inputs(sim, si);
  sim->add_option("--config", si_config, "configuration JSON")->required();
  sim->add_option("--out", si.out, "report JSON (default stdout)");
  sim->add_option("--task-graph-out", si_tg_out, "also write the generated task graph");
  sim->add_option("--trace-csv", si_csv, "also write the trace as CSV");
  sim->add_flag("--no-trace", si_no_trace, "omit trace events from the JSON report");

  std::string as_model, as_out, as_reading = "per_gpu", as_strategy = "all";
  IdealModel as_m;
  as_m.layers = 8;
  as_m.weight_bytes = 128 * kMiB;
  as_m.wgrad_bytes = 128 * kMiB;
  as_m.optstate_bytes = 256 * kMiB;
  as_m.stash_bytes = 16 * kMiB;
  as_m.microbatches = 2;
  as_m.gpus = 4;
  auto* ana = app.add_subcommand("analyze-swaps", "compare closed-form swap volumes to simulator accounting");
  ana->add_option("--model", as_model, "ideal model JSON (overrides the size flags)");
  ana->add_option("--layers", as_m.layers, "layer count R");
  ana->add_option("--m", as_m.microbatches, "microbatches per GPU or per pipeline");
  ana->add_option("--gpus", as_m.gpus, "GPU count N");
  ana->add_option("--weight-bytes", as_m.weight_bytes, "per-layer weight bytes");
  ana->add_option("--wgrad-bytes", as_m.wgrad_bytes, "per-layer weight-gradient bytes");
  ana->add_option("--optstate-bytes", as_m.optstate_bytes, "per-layer optimizer-state bytes");
  ana->add_option("--stash-bytes", as_m.stash_bytes, "per-layer stashed activation bytes");
  ana->add_option("--strategy", as_strategy, "one mode name or 'all'");
  ana->add_option("--dw-reading", as_reading, "per_gpu or global")->check(CLI::IsMember({"per_gpu", "global"}));
  ana->add_option("--out", as_out, "comparison JSON");

  Inputs ga;
  std::string ga_config, ga_format = "text";
  auto* gantt = app.add_subcommand("gantt", "render the simulated schedule of one configuration");
  add_inputs(gantt, ga);
  gantt->add_option("--config", ga_config, "configuration JSON")->required();
  gantt->add_option("--format", ga_format, "text or svg")->check(CLI::IsMember({"text", "svg"}));
  gantt->add_option("--out", ga.out, "output file (default stdout)");

  ReductionArgs rd;
  auto* red = app.add_subcommand("reduction", "Partition reduction tools");
  red->require_subcommand(1);
  auto numbers_opt = [&](CLI::App* c) {
    c->add_option("numbers", rd.numbers, "Partition numbers")->required();
    c->add_option("--scale", rd.scale, "override A (default 6 * sum)");
    c->add_option("--out", rd.out, "output file (default stdout)");
  };
  auto pack_choice = [&](CLI::App* c) {
    c->add_option("--packs", rd.packs, "1-based packs, e.g. 1,2,3-4");
    c->add_option("--subset", rd.subset, "1-based indices of one Partition half");
    c->add_flag("--optimal", rd.optimal, "use the enumerated optimum");
  };
  auto* rbuild = red->add_subcommand("build", "emit the scheduling instance");
  numbers_opt(rbuild);
  auto* reval = red->add_subcommand("eval", "evaluate one packing");
  numbers_opt(reval);
  pack_choice(reval);
  auto* rverify = red->add_subcommand("verify", "check Partition YES <=> makespan T achievable");
  numbers_opt(rverify);
  rverify->add_option("--jobs", rd.jobs, "enumeration workers");
  auto* rgantt = red->add_subcommand("gantt", "render a reduction schedule");
  numbers_opt(rgantt);
  pack_choice(rgantt);
  rgantt->add_option("--format", rd.format, "text or svg")->check(CLI::IsMember({"text", "svg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      SynthSpec spec = synth_spec_from_json(read_json_file(gp_spec));
      std::optional<LayerChain> chain;
      if (!gp_graph.empty()) {
        chain = serialize_graph(layer_graph_from_json(read_json_file(gp_graph)));
        spec.layers = chain->size();
        for (const auto& d : chain->diagnostics) std::cerr << "note: " << d << "\n";
      }
      ProfileSet p = synth_profiles(spec);
      if (chain) p.attach_relays(*chain);
      Json j = samples_to_json(sample_profiles(p, spec.stride, spec.u_max));
      j["seed"] = spec.seed;
      j["stride"] = spec.stride;
      j["spec"] = synth_spec_to_json(spec);
      emit(j, gp_out);
      if (!gp_profiles_out.empty()) {
        Json pj = profiles_to_json(p);
        pj["seed"] = spec.seed;
        emit(pj, gp_profiles_out);
      }
    } else if (*fit) {
      const Json sj = read_json_file(fp_samples);
      const int stride = fp_stride > 0 ? fp_stride : (sj.contains("stride") ? sj["stride"].get<int>() : 1);
      ProfileSet p = fit_profiles(samples_from_json(sj), stride);
      if (!fp_graph.empty()) p.attach_relays(serialize_graph(layer_graph_from_json(read_json_file(fp_graph))));
      for (const auto& w : p.warnings()) std::cerr << "warning: " << w << "\n";
      Json pj = profiles_to_json(p);
      if (sj.contains("seed")) pj["seed"] = sj["seed"];
      emit(pj, fp_out);
    } else if (*pack) {
      const MachineModel m = machine_from_json(read_json_file(pk.machine));
      const ProfileSet p = load_profiles(pk.profiles, pk.graph);
      const bool greedy = parse_packer(pk_packer) == Packer::kGreedyMax;
      const Pass pass = parse_pass(pk_pass);
      std::optional<PackPlan> back;
      if (pass == Pass::kForward && pk_backward_u > 0) {
        back = greedy ? greedy_maxpack(Pass::kBackward, pk_backward_u, p, m.gpu_mem_capacity)
                      : balanced_time_pack(Pass::kBackward, pk_backward_u, p, m.gpu_mem_capacity);
      }
      const PackPlan plan = greedy ? greedy_maxpack(pass, pk_u, p, m.gpu_mem_capacity, back)
                                   : balanced_time_pack(pass, pk_u, p, m.gpu_mem_capacity, back);
      emit(pack_plan_to_json(plan, pass, pk_u), pk.out);
    } else if (*srch) {
      const MachineModel m = machine_from_json(read_json_file(se.machine));
      const ProfileSet p = load_profiles(se.profiles, se.graph);
      const Json spec_json = read_json_file(se_spec);
      SearchSpec spec = search_spec_from_json(spec_json);
      if (se_jobs > 0) spec.jobs = se_jobs;
      if (se_stride > 0) spec.stride = se_stride;
      log("searching " + std::string(mode_name(spec.mode)) + " with D=" + std::to_string(spec.minibatch));
      const SearchResult r = search(spec, m, p);
      const std::filesystem::path dir(se_out_dir);
      std::filesystem::create_directories(dir);
      Json result = search_result_to_json(r, spec);
      const std::int64_t seed = spec_json.contains("seed") ? spec_json["seed"].get<std::int64_t>() : 0;
      result["seed"] = seed;
      emit(result, (dir / "search_result.json").string());
      emit(configuration_to_json(r.best), (dir / "best_config.json").string());
      Json manifest = Json::object();
      manifest["format_version"] = kFormatVersion;
      manifest["subcommand"] = "search";
      manifest["machine"] = se.machine;
      manifest["profiles"] = se.profiles;
      manifest["spec"] = se_spec;
      manifest["graph"] = se.graph;
      manifest["out_dir"] = se_out_dir;
      manifest["seed"] = seed;
      emit(manifest, (dir / "manifest.json").string());
      const std::string report = table_row(r);
      write_text_file((dir / "report.txt").string(), report);
      std::cout << report;
    } else if (*sim || *gantt) {
      const Inputs& in = *sim ? si : ga;
      const MachineModel m = machine_from_json(read_json_file(in.machine));
      const ProfileSet p = load_profiles(in.profiles, in.graph);
      const Configuration cfg = configuration_from_json(read_json_file(*sim ? si_config : ga_config));
      const TaskGraph g = generate_task_graph(cfg, m, p);
      const SimReport rep = simulate(g, m, p);
      if (*sim) {
        if (!si_tg_out.empty()) emit(task_graph_to_json(g), si_tg_out);
        if (!si_csv.empty()) write_text_file(si_csv, trace_csv(rep));
        emit(sim_report_to_json(rep, !si_no_trace), si.out);
      } else {
        GanttOptions opt;
        opt.title = std::string(mode_name(cfg.mode)) + " U_F=" + std::to_string(cfg.u_f) +
                    " U_B=" + std::to_string(cfg.u_b);
        emit_text(render_gantt(rep, ga_format == "svg" ? GanttFormat::kSvg : GanttFormat::kText, opt), ga.out);
      }
    } else if (*ana) {
      run_analyze(as_model, as_m, as_strategy, as_reading, as_out);
    } else if (*rbuild) {
      emit(reduction_to_json(build_reduction(rd.numbers, rd.scale_opt())), rd.out);
    } else if (*reval) {
      const ReductionInstance inst = build_reduction(rd.numbers, rd.scale_opt());
      emit(schedule_to_json(inst, eval_schedule(inst, choose_packs(inst, rd))), rd.out);
    } else if (*rverify) {
      const VerifyResult v = verify_reduction(rd.numbers, rd.scale_opt(), rd.jobs);
      std::ostringstream t;
      t << "T=" << (v.target.integral() ? std::to_string(v.target.value()) : std::to_string(v.target.approx()));
      std::cout << "Partition: " << (v.partition_yes ? "YES" : "NO") << ", " << t.str()
                << " achievable: " << (v.t_achievable ? "YES" : "NO") << "\n";
      if (!rd.out.empty()) emit(verify_to_json(rd.numbers, v), rd.out);
      if (v.partition_yes != v.t_achievable) {
        std::cerr << "error: reduction disagreement\n";
        return exit_code_for(ErrorCode::kInternal);
      }
    } else if (*rgantt) {
      const ReductionInstance inst = build_reduction(rd.numbers, rd.scale_opt());
      emit_text(render_reduction_gantt(inst, choose_packs(inst, rd),
                                       rd.format == "svg" ? GanttFormat::kSvg : GanttFormat::kText),
                rd.out);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_code_for(ErrorCode::kInternal);
  }
  return 0;
}

}  // namespace wrapipe
