# Copyright 2026 The vmgraph Authors
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
"""Video motion graphs and gesture reenactment."""

import json as _json

from . import _core
from ._core import (
    AssemblyError,
    Error,
    Graph,
    ParseError,
    SegmentUnreachableError,
    ValidationError,
    blend_alphas,
    detect_onsets,
    image_distance,
    metronome,
    write_fixture,
)

__all__ = [
    "AssemblyError",
    "Error",
    "Graph",
    "ParseError",
    "SegmentUnreachableError",
    "ValidationError",
    "analyze_audio",
    "assemble",
    "blend_alphas",
    "build_graph",
    "detect_onsets",
    "forward_kinematics",
    "image_distance",
    "load_json",
    "metronome",
    "rasterize",
    "search",
    "write_fixture",
]


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def load_json(path):
    with open(path, encoding="utf-8") as f:
        return _json.load(f)


def forward_kinematics(pose_track, frame):
    return _core.forward_kinematics(_text(pose_track), frame)


def rasterize(pose_track, frame):
    return _core.rasterize(_text(pose_track), frame)


def analyze_audio(wav_path, transcript=None, fps=30.0):
    text = "" if transcript is None else _text(transcript)
    return _json.loads(_core.analyze_audio(str(wav_path), text, fps))


def build_graph(pose_track, features, threshold_offset=4, min_jump=2, velocity_weight=1.0):
    return _core.build_graph(_text(pose_track), _text(features), threshold_offset, min_jump,
                             velocity_weight)


def search(graph, features, seed=0, beam_width=20, duration_window=(0.9, 1.1),
           duration_weight=1.0, blend_k=4, dedup=False):
    low, high = duration_window
    return _json.loads(_core.search(graph, _text(features), seed, beam_width, low, high,
                                    duration_weight, blend_k, dedup))


def assemble(search_result, graph, pose_track, blend_k=4, path_index=0):
    return _json.loads(_core.assemble(_text(search_result), graph, _text(pose_track), blend_k,
                                      path_index))
