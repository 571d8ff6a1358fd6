"""Synthetic targets, single trials, and CSV sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .dist import Pmf, tv_distance
from .errors import KModalError
from .ironing import LP_MAX_N, oracle_distance_to_monotone
from .learners import LearnerConfig, learn_kmodal, learn_kmodal_confident, learn_kmodal_simple
from .sampling import SampleOracle, stream

FAMILIES = ("random-kmodal", "noisy-monotone", "staircase", "point-mass-mixture")
ALGOS = ("main", "simple", "confident")
CSV_COLUMNS = ("family", "n", "k", "eps", "delta", "algo", "seed", "samples", "tv", "seconds", "success")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    k: int = 1
    seed: int = 0
    noise: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if not 0.0 <= self.noise < 1.0:
            raise ValueError("noise must lie in [0, 1)")


# --------------------------------------------------------------------------
# generators


def _runs(n: int, k: int, rng):
    """Split ``[0, n)`` into ``k + 1`` runs at distinct interior cut points."""
    k = min(k, n - 1)
    cuts = np.sort(rng.choice(np.arange(1, n), size=k, replace=False)) if k > 0 else np.zeros(0, int)
    bounds = np.concatenate(([0], cuts, [n])).astype(int)
    return list(zip(bounds[:-1], bounds[1:]))


def _random_kmodal(spec, rng):
    x = np.empty(spec.n)
    up = bool(rng.random() < 0.5)
    for lo, hi in _runs(spec.n, spec.k, rng):
        seg = np.sort(rng.exponential(size=hi - lo))
        x[lo:hi] = seg if up else seg[::-1]
        up = not up
    return x


def _staircase(spec, rng):
    x = np.empty(spec.n)
    up = bool(rng.random() < 0.5)
    for lo, hi in _runs(spec.n, spec.k, rng):
        length = hi - lo
        steps = int(rng.integers(1, min(5, length) + 1))
        edges = np.sort(rng.choice(np.arange(1, length), size=steps - 1, replace=False)) if steps > 1 else []
        levels = np.sort(rng.uniform(0.1, 1.0, size=steps))
        if not up:
            levels = levels[::-1]
        x[lo:hi] = np.repeat(levels, np.diff(np.concatenate(([0], edges, [length]))).astype(int))
        up = not up
    return x


def _point_masses(spec, rng):
    n = spec.n
    if spec.k == 0 or n < 3:
        spikes = [0]
    else:
        s = min(max(1, (spec.k + 1) // 2), (n - 1) // 2)
        # interior, pairwise non-adjacent positions
        slots = np.sort(rng.choice(np.arange(1, (n - 1) // 2 + 1), size=s, replace=False))
        spikes = list(2 * slots - 1)
    x = np.full(n, spec.noise / n)
    for i in spikes:
        x[i] += (1.0 - spec.noise) / len(spikes)
    return x


def _noisy_monotone(spec, rng):
    n = spec.n
    ratio = math.exp(-5.0 / n)
    geo = ratio ** np.arange(n)
    geo /= geo.sum()
    if spec.noise == 0 or n < 2:
        return geo
    w0 = max(1, n // 10)
    bump = np.zeros(n)
    bump[n - w0 :] = 1.0 / w0

    def mix(w):
        return (1.0 - w) * geo + w * bump

    if n > LP_MAX_N:
        return mix(spec.noise)
    target = spec.noise
    if oracle_distance_to_monotone(mix(0.999), "down") < target:
        raise ValueError(f"noise level {target} is not reachable for n={n}")
    lo, hi = 0.0, 0.999
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if oracle_distance_to_monotone(mix(mid), "down") < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break
    return mix(0.5 * (lo + hi))


_GENERATORS = {
    "random-kmodal": _random_kmodal,
    "noisy-monotone": _noisy_monotone,
    "staircase": _staircase,
    "point-mass-mixture": _point_masses,
}


def gen(spec: GeneratorSpec) -> Pmf:
    """Deterministic synthetic target for ``spec``.

    ``random-kmodal`` and ``staircase`` alternate ``k + 1`` monotone runs;
    ``noisy-monotone`` mixes a decreasing geometric pmf with a bump on the
    last tenth of the domain, tuned so its distance to non-increasing is
    ``noise`` (by bisection on the exact oracle when ``n <= 500``, else the
    mixture weight is ``noise``); ``point-mass-mixture`` places
    ``max(1, (k+1)//2)`` interior spikes over a uniform floor of total mass
    ``noise``.
    """
    rng = stream(spec.seed, "gen", spec.family)
    return Pmf.from_weights(_GENERATORS[spec.family](spec, rng))


# --------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialRecord:
    spec: GeneratorSpec
    algo: str
    cfg: LearnerConfig
    samples_drawn: int
    tv_error: float
    wall_time: float
    success: bool
    error: str = ""

    def row(self) -> dict:
        return {
            "family": self.spec.family,
            "n": self.spec.n,
            "k": self.cfg.k,
            "eps": self.cfg.eps,
            "delta": self.cfg.delta,
            "algo": self.algo,
            "seed": self.cfg.seed,
            "samples": self.samples_drawn,
            "tv": self.tv_error,
            "seconds": self.wall_time,
            "success": int(self.success),
        }

    def to_dict(self) -> dict:
        d = {"spec": asdict(self.spec), "algo": self.algo, "cfg": self.cfg.to_dict()}
        d.update(samples_drawn=self.samples_drawn, tv_error=self.tv_error, wall_time=self.wall_time, success=self.success, error=self.error)
        return d


def learner_for(algo: str):
    if algo == "main":
        return learn_kmodal
    if algo == "simple":
        return learn_kmodal_simple
    if algo == "confident":
        return learn_kmodal_confident
    raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")


def run_trial(spec: GeneratorSpec, algo: str, cfg: LearnerConfig, *, timing: bool = False, target: Pmf | None = None) -> TrialRecord:
    """Generate, learn from ``cfg.seed``'s sample stream, and score.

    Learner errors give a failed record with ``tv_error = 1``.  Wall time is
    recorded only when ``timing`` is set, so records are reproducible by
    default.
    """
    learn = learner_for(algo)
    p = gen(spec) if target is None else target
    oracle = SampleOracle(p, cfg.seed)
    t0 = time.perf_counter()
    err = ""
    try:
        h = learn(oracle, spec.n, cfg)
        tv = tv_distance(p, h)
    except KModalError as exc:
        tv, err = 1.0, f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - t0 if timing else 0.0
    return TrialRecord(spec, algo, cfg, oracle.samples_drawn, tv, seconds, tv <= cfg.c_acc * cfg.eps and not err, err)


# --------------------------------------------------------------------------
# sweeps


def derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_rows(grid: dict, trials: int, seed: int, *, family: str = "random-kmodal", noise: float = 0.0, delta: float = 0.1, timing: bool = False, base: LearnerConfig | None = None):
    """Rows for every trial of every grid cell, then one aggregate per cell.

    ``grid`` maps ``n``, ``k``, ``eps``, ``budget`` and ``algo`` to lists of
    values.  The target of a cell depends on ``(seed, n, k)`` only, so cells
    differing in budget or algorithm share it.  Trial ``t`` of cell ``c``
    samples with ``derive_seed(seed, c, t)``.  Aggregates carry seed ``*``,
    the median tv and samples, and the success rate.
    """
    keys = ("n", "k", "eps", "budget", "algo")
    values = [list(grid.get(key, default)) for key, default in zip(keys, ([1000], [1], [0.2], [1.0], ["main"]))]
    rows = []
    for cell, (n, k, eps, budget, algo) in enumerate(itertools.product(*values)):
        spec = GeneratorSpec(family, int(n), int(k), seed, noise)
        target = gen(spec)
        recs = []
        for t in range(trials):
            cfg = LearnerConfig(eps=float(eps), k=int(k), delta=delta, seed=derive_seed(seed, cell, t), budget_scale=float(budget))
            if base is not None:
                cfg = replace(base, eps=cfg.eps, k=cfg.k, delta=delta, seed=cfg.seed, budget_scale=cfg.budget_scale)
            rec = run_trial(spec, str(algo), cfg, timing=timing, target=target)
            recs.append(rec)
            rows.append(rec.row())
        agg = dict(recs[0].row())
        agg.update(
            seed="*",
            samples=statistics.median(r.samples_drawn for r in recs),
            tv=statistics.median(r.tv_error for r in recs),
            seconds=statistics.median(r.wall_time for r in recs),
            success=sum(r.success for r in recs) / len(recs),
        )
        rows.append(agg)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def sweep(grid: dict, trials: int, seed: int, **kw) -> str:
    """CSV text for :func:`sweep_rows`; columns are :data:`CSV_COLUMNS`."""
    return rows_to_csv(sweep_rows(grid, trials, seed, **kw))
