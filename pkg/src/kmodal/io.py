"""JSON file formats for distributions, samples and hypotheses.

Floats are written with ``repr`` precision so a load/dump cycle is
byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dist import Pmf, SampleSet
from .hypothesis import Hypothesis, Piece


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False) + "\n"


def pmf_to_dict(p: Pmf) -> dict:
    return {"n": p.n, "probs": [float(v) for v in p.probs]}


def pmf_from_dict(d: dict) -> Pmf:
    probs = np.asarray(d["probs"], dtype=np.float64)
    if probs.size != int(d["n"]):
        raise ValueError(f"pmf declares n={d['n']} but lists {probs.size} probabilities")
    return Pmf(probs)


def samples_to_dict(s: SampleSet) -> dict:
    return {"n": s.n, "seed": int(s.seed), "points": [int(v) for v in s.points]}


def samples_from_dict(d: dict) -> SampleSet:
    return SampleSet(int(d["n"]), np.asarray(d["points"], dtype=np.int64), int(d["seed"]))


def hypothesis_to_dict(h: Hypothesis) -> dict:
    return {
        "n": h.n,
        "pieces": [{"lo": pc.lo, "hi": pc.hi, "mass": float(pc.mass)} for pc in h.pieces],
        "points": [{"i": int(i), "mass": float(w)} for i, w in h.points],
    }


def hypothesis_from_dict(d: dict) -> Hypothesis:
    pieces = tuple(Piece(int(p["lo"]), int(p["hi"]), float(p["mass"])) for p in d["pieces"])
    points = tuple((int(p["i"]), float(p["mass"])) for p in d.get("points", []))
    return Hypothesis(int(d["n"]), pieces, points)


def dumps(obj) -> str:
    if isinstance(obj, Pmf):
        return _dumps(pmf_to_dict(obj))
    if isinstance(obj, SampleSet):
        return _dumps(samples_to_dict(obj))
    if isinstance(obj, Hypothesis):
        return _dumps(hypothesis_to_dict(obj))
    return _dumps(obj)


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def load_pmf(path) -> Pmf:
    return pmf_from_dict(json.loads(Path(path).read_text()))


def load_samples(path) -> SampleSet:
    return samples_from_dict(json.loads(Path(path).read_text()))


def load_hypothesis(path) -> Hypothesis:
    return hypothesis_from_dict(json.loads(Path(path).read_text()))
