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
"""Pipeline training planner.

Documents are plain dicts in the same JSON formats the ``wrapipe`` command
line tool reads and writes. Errors raise :class:`WrapipeError`, whose
``code`` names the failure and ``exit_code`` matches the CLI status.
"""

import json
from typing import Iterable, Optional, Sequence, Tuple

from . import _wrapipe
from ._wrapipe import FORMAT_VERSION, WrapipeError

__all__ = [
    "FORMAT_VERSION",
    "WrapipeError",
    "synth_profiles",
    "sample_profiles",
    "fit_profiles",
    "pack",
    "search",
    "task_graph",
    "simulate",
    "gantt",
    "analyze_swaps",
    "reduction_build",
    "reduction_eval",
    "reduction_verify",
]


def _dump(doc):
    return None if doc is None else json.dumps(doc)


def synth_profiles(spec: dict) -> dict:
    return json.loads(_wrapipe.synth_profiles(_dump(spec)))


def sample_profiles(profiles: dict, stride: int = 4, u_max: Optional[int] = None) -> dict:
    return json.loads(_wrapipe.sample_profiles(_dump(profiles), stride, u_max))


def fit_profiles(samples: dict, stride: int = 4) -> dict:
    return json.loads(_wrapipe.fit_profiles(_dump(samples), stride))


def pack(machine: dict, profiles: dict, pass_: str, u: int, backward_u: Optional[int] = None,
         packer: str = "balanced", graph: Optional[dict] = None) -> dict:
    return json.loads(_wrapipe.pack(_dump(machine), _dump(profiles), pass_, u, backward_u, packer, _dump(graph)))


def search(machine: dict, profiles: dict, spec: dict, graph: Optional[dict] = None) -> dict:
    """Sweeps microbatch sizes and packings; returns the search result."""
    return json.loads(_wrapipe.search(_dump(machine), _dump(profiles), _dump(spec), _dump(graph)))


def task_graph(machine: dict, profiles: dict, config: dict, graph: Optional[dict] = None) -> dict:
    return json.loads(_wrapipe.task_graph(_dump(machine), _dump(profiles), _dump(config), _dump(graph)))


def simulate(machine: dict, profiles: dict, config: dict, trace: bool = True,
             graph: Optional[dict] = None) -> dict:
    return json.loads(_wrapipe.simulate(_dump(machine), _dump(profiles), _dump(config), trace, _dump(graph)))


def gantt(machine: dict, profiles: dict, config: dict, format: str = "text", graph: Optional[dict] = None) -> str:
    return _wrapipe.gantt(_dump(machine), _dump(profiles), _dump(config), format, _dump(graph))


def analyze_swaps(model: dict, dw_reading: str = "per_gpu") -> dict:
    return json.loads(_wrapipe.analyze_swaps(_dump(model), dw_reading))


def reduction_build(numbers: Iterable[int], scale: Optional[int] = None) -> dict:
    return json.loads(_wrapipe.reduction_build(list(numbers), scale))


def reduction_eval(numbers: Iterable[int], packs: Sequence[Tuple[int, int]], scale: Optional[int] = None) -> dict:
    """Evaluates 1-based inclusive packs on the built instance."""
    return json.loads(_wrapipe.reduction_eval(list(numbers), [tuple(p) for p in packs], scale))


def reduction_verify(numbers: Iterable[int], scale: Optional[int] = None, jobs: int = 1) -> dict:
    return json.loads(_wrapipe.reduction_verify(list(numbers), scale, jobs))
