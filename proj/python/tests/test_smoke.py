# Copyright 2026 The wrapipe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import pathlib

import jsonschema
import pytest
from referencing import Registry, Resource

import wrapipe

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = {p.name: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.schema.json")}
REGISTRY = Registry().with_resources(
    (s["$id"], Resource.from_contents(s)) for s in SCHEMAS.values()
)


def check(doc, name):
    schema = SCHEMAS[f"{name}.schema.json"]
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(doc)
    assert doc["format_version"] == wrapipe.FORMAT_VERSION


def load(name):
    return json.loads((ROOT / "data" / name).read_text())


@pytest.fixture(scope="module")
def machine():
    return load("machine_4gpu.json")


@pytest.fixture(scope="module")
def profiles():
    spec = {"format_version": 1, "preset": "irregular", "layers": 8, "u_max": 8, "stride": 2, "seed": 3}
    check(spec, "synth_spec")
    return wrapipe.synth_profiles(spec)


def test_schemas_are_valid():
    for schema in SCHEMAS.values():
        jsonschema.Draft202012Validator.check_schema(schema)


@pytest.mark.parametrize(
    "data,schema",
    [
        ("machine_4gpu.json", "machine"),
        ("machine_4gpu_4gib.json", "machine"),
        ("bert96_synth.json", "synth_spec"),
        ("irregular_cnn_synth.json", "synth_spec"),
        ("search_pp.json", "search_spec"),
    ],
)
def test_shipped_data(data, schema):
    check(load(data), schema)


def test_profiles_round_trip(profiles):
    check(profiles, "profiles")
    samples = wrapipe.sample_profiles(profiles, stride=2)
    check(samples, "samples")
    refit = wrapipe.fit_profiles(samples, stride=2)
    check(refit, "profiles")
    for a, b in zip(profiles["layers"], refit["layers"]):
        assert a["weight_bytes"] == b["weight_bytes"]
        assert b["f_time_ns"]["per_sample"] == pytest.approx(a["f_time_ns"]["per_sample"], rel=1e-6)


def test_pack(machine, profiles):
    plan = wrapipe.pack(machine, profiles, "F", 4, backward_u=2)
    check(plan, "pack_plan")
    assert plan["packs"][0][0] == 0
    assert plan["packs"][-1][1] == 7
    assert all(m <= machine["gpu_mem_capacity_bytes"] for m in plan["memories_bytes"])


def test_search_simulate_gantt(machine, profiles):
    spec = {"format_version": 1, "minibatch": 8, "mode": "wraparound_pp"}
    result = wrapipe.search(machine, profiles, spec)
    check(result, "search_result")
    best = result["best"]
    check(best, "configuration")
    graph = wrapipe.task_graph(machine, profiles, best)
    check(graph, "task_graph")
    report = wrapipe.simulate(machine, profiles, best)
    check(report, "sim_report")
    assert report["makespan_ns"] == result["best_time_ns"]
    assert "<svg" in wrapipe.gantt(machine, profiles, best, format="svg")
    assert "trace" not in wrapipe.simulate(machine, profiles, best, trace=False)


def test_analyze_swaps():
    model = {
        "format_version": 1, "layers": 4, "weight_bytes": 2**28, "wgrad_bytes": 2**28,
        "optstate_bytes": 2**29, "stash_bytes": 2**24, "microbatches": 2, "gpus": 4,
        "strategy": "wraparound_pp",
    }
    check(model, "ideal_model")
    cmp = wrapipe.analyze_swaps(model)
    check(cmp, "swap_comparison")
    rows = {r["tensor"]: r for r in cmp["rows"]}
    assert rows["W"]["simulated_bytes"] == 3 * 2**30
    assert all(r["delta_bytes"] == 0 for r in cmp["rows"])


def test_reduction():
    inst = wrapipe.reduction_build([6, 2, 4], scale=10)
    check(inst, "reduction")
    assert len(inst["layers"]) == 13
    verdict = wrapipe.reduction_verify([6, 2, 4], scale=10)
    check(verdict, "verify")
    assert verdict["partition_yes"] and verdict["t_achievable"]
    assert verdict["best_makespan_ns"] == 1028
    sched = wrapipe.reduction_eval([6, 2, 4], verdict["witness_packs_1based"], scale=10)
    check(sched, "schedule")
    assert sched["achieves_T"]
    assert wrapipe.reduction_verify([1, 1, 3])["t_achievable"] is False


def test_errors_carry_codes(machine, profiles):
    with pytest.raises(wrapipe.WrapipeError) as info:
        wrapipe.pack({"format_version": 1}, profiles, "F", 1)
    assert info.value.code == "SchemaViolation"
    assert info.value.exit_code == 2
    tiny = dict(machine, gpu_mem_capacity_bytes=1024)
    with pytest.raises(wrapipe.WrapipeError) as info:
        wrapipe.search(tiny, profiles, {"format_version": 1, "minibatch": 4})
    assert info.value.exit_code == 3
    with pytest.raises(ValueError):
        wrapipe.reduction_verify([])
