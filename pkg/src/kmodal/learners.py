"""End-to-end k-modal learners.

Both learners start the same way: a large empirical sample fixes a greedy
partition of the domain into atoms of small empirical mass.  The simple
learner then learns every light atom with both monotone learners and picks
per atom.  The main learner instead uses the monotonicity tester to merge
atoms into at most ``k + 1`` monotone superintervals, dropping one light
atom at each boundary, and runs a single monotone learner per
superinterval.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import tester
from .birge import NONDECREASING, NONINCREASING, boost_runs, boosted_from_pool, fit_counts, learn_monotone_boosted
from .dist import EmpiricalPmf, Interval, dkw_sample_size
from .errors import InsufficientSamples, KModalError, ModalityExceeded, TournamentFailure
from .hypothesis import Hypothesis, combine
from .sampling import RecordedSample
from .selection import choose_hypothesis, tournament


@dataclass(frozen=True)
class LearnerConfig:
    """Accuracy targets and the constants hidden in the sample sizes.

    Parameters
    ----------
    eps, k, delta, seed
        Target accuracy, modality bound, confidence, and seed for
        front ends that build their own sample oracle.
    sample_const
        Multiplier ``C`` on the per-superinterval learning phase and on the
        simple learner's pools.
    coupon_const
        Multiplier on the tester pool.  Sized so a single atom receives the
        tester quota in each of the vote batches; raise it in proportion
        when ``tester_rep_const`` gives more than one batch.
    tester_slack, tester_rep_const
        Tester accuracy is ``eps / (tester_slack * k)``; majority votes use
        ``2 * ceil(tester_rep_const * ln(1/confidence)) + 1`` batches.
    partition_const
        Multiplier on the monotone learner's interval count.
    boost_const
        Runs per boosted monotone learner are ``ceil(boost_const * ln(1/delta))``.
    c_acc
        Accuracy multiplier used by the confidence booster and as the
        success threshold ``c_acc * eps`` in experiments.
    budget_scale
        Multiplies every phase's sample count.  Used to match budgets
        between algorithms.
    """

    eps: float
    k: int
    delta: float = 0.1
    seed: int = 0
    sample_const: float = 3.0
    coupon_const: float = 30.0
    tester_slack: float = 7.0
    tester_rep_const: float = 0.0
    partition_const: float = 1.0
    boost_const: float = 8.0
    c_acc: float = 3.0
    budget_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.budget_scale <= 0:
            raise ValueError("budget_scale must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def scaled(self, m: float) -> int:
        return max(1, math.ceil(m * self.budget_scale))


# --------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class AtomicPartition:
    atoms: tuple
    threshold: Fraction
    source: EmpiricalPmf = field(repr=False, compare=False)

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def mass(self, iv: Interval) -> float:
        return self.source.mass(iv.lo, iv.hi)


def atomic_partition(p_hat: EmpiricalPmf, eps: float, k: int) -> AtomicPartition:
    """Greedy left-to-right cut into atoms of empirical mass at least ``eps/(10k)``.

    Each atom ends at the first point where its mass reaches the threshold;
    whatever is left at the end forms a final, possibly light, atom.
    Comparisons are exact on counts.

    >>> from kmodal.dist import EmpiricalPmf
    >>> [str(a) for a in atomic_partition(EmpiricalPmf([1] * 8), 2.5, 1)]
    ['[1,2]', '[3,4]', '[5,6]', '[7,8]']
    """
    if k < 1:
        raise ValueError("atomic partition needs k >= 1")
    thr = Fraction(eps) / (10 * k)
    need = math.ceil(thr * p_hat.m)  # counts are integers
    G = p_hat._prefix
    n = p_hat.n
    atoms = []
    lo = 1
    while lo <= n:
        target = int(G[lo - 1]) + max(need, 0)
        j = int(np.searchsorted(G, target, side="left"))  # first prefix index reaching target
        if need <= 0:
            j = lo
        if j > n:
            atoms.append(Interval(lo, n))
            break
        j = max(j, lo)
        atoms.append(Interval(lo, j))
        lo = j + 1
    return AtomicPartition(tuple(atoms), thr, p_hat)


def split_light_heavy(atoms: AtomicPartition, eps: float, k: int):
    """Split off the last point of every atom heavier than ``eps/(5k)``.

    Returns ``(light, heavy)``: light intervals (empty ones dropped) and
    ``(point, empirical mass)`` pairs.
    """
    thr = Fraction(eps) / (5 * k)
    p_hat = atoms.source
    light, heavy = [], []
    for iv in atoms:
        if p_hat.fraction(iv.lo, iv.hi) >= thr:
            if iv.lo < iv.hi:
                light.append(Interval(iv.lo, iv.hi - 1))
            heavy.append((iv.hi, p_hat.mass(iv.hi, iv.hi)))
        else:
            light.append(iv)
    return light, heavy


# --------------------------------------------------------------------------
# sample sizes


def first_phase_accuracy(cfg: LearnerConfig, simple: bool = False) -> float:
    return cfg.eps**2 / (100 * cfg.k) if simple else cfg.eps / (100 * cfg.k)


def first_phase_samples(cfg: LearnerConfig, simple: bool = False) -> int:
    return cfg.scaled(dkw_sample_size(first_phase_accuracy(cfg, simple), 0.01))


def _loglog(x: float) -> float:
    return math.log(x) * max(1.0, math.log(math.log(x)))


def tester_confidence(cfg: LearnerConfig) -> float:
    return cfg.eps / (2000 * cfg.k)


def tester_pool_samples(cfg: LearnerConfig) -> int:
    tp = tester_confidence(cfg)
    return cfg.scaled(cfg.coupon_const * (cfg.k**3 / cfg.eps**3) * _loglog(1.0 / tp))


def birge_phase_samples(cfg: LearnerConfig, n: int) -> int:
    k = max(cfg.k, 1)
    return cfg.scaled(cfg.sample_const * k * math.log2(max(n / k, 2.0)) / cfg.eps**3)


def simple_confidence(cfg: LearnerConfig) -> float:
    return cfg.eps / (500 * cfg.k)


def simple_pool_samples(cfg: LearnerConfig, n: int) -> int:
    dp = simple_confidence(cfg)
    return cfg.scaled(cfg.sample_const * (cfg.k / cfg.eps**4) * math.log2(max(n, 2)) * _loglog(1.0 / dp))


def simple_select_samples(cfg: LearnerConfig) -> int:
    dp = simple_confidence(cfg)
    return cfg.scaled(cfg.sample_const * (cfg.k / cfg.eps**4) * math.log(1.0 / dp))


def main_budget(cfg: LearnerConfig, n: int) -> int:
    """Exact number of draws one run of :func:`learn_kmodal` makes."""
    R = tester.repetitions(tester_confidence(cfg), cfg.tester_rep_const)
    pool = R * max(1, math.ceil(tester_pool_samples(cfg) / R))  # as carved by _Pool
    return first_phase_samples(cfg) + pool + birge_phase_samples(cfg, n)


def simple_budget(cfg: LearnerConfig, n: int) -> int:
    """Draws one run of :func:`learn_kmodal_simple` makes without a retry."""
    return first_phase_samples(cfg, True) + simple_pool_samples(cfg, n) + simple_select_samples(cfg)


def theorem_budget(cfg: LearnerConfig, n: int) -> float:
    """Headline sample bound with the configured constants.

    ``C k log2(n/k) / eps^3 + C_cc (k^3/eps^3) ln(k/eps) lnln(k/eps)`` plus
    the first-phase empirical sample.
    """
    k, eps = max(cfg.k, 1), cfg.eps
    body = cfg.sample_const * k * math.log2(max(n / k, 2.0)) / eps**3
    body += cfg.coupon_const * (k**3 / eps**3) * _loglog(max(k / eps, math.e))
    return cfg.budget_scale * body + first_phase_samples(cfg)


# --------------------------------------------------------------------------
# decomposition


@dataclass
class Decomposition:
    superintervals: list  # (Interval, orientation)
    negligible: list
    heavy_points: list  # (point, empirical mass)
    atoms: AtomicPartition | None = None
    p_hat: EmpiricalPmf | None = None

    def check_cover(self, n: int) -> None:
        covered = np.zeros(n, dtype=np.int64)
        for iv, _ in self.superintervals:
            covered[iv.lo - 1 : iv.hi] += 1
        for iv in self.negligible:
            covered[iv.lo - 1 : iv.hi] += 1
        for i, _ in self.heavy_points:
            covered[i - 1] += 1
        if not np.all(covered == 1):
            raise AssertionError("decomposition families do not partition the domain")


class _Pool:
    """Pre-drawn tester pool held as independent batches of counts."""

    def __init__(self, source, total: int, batches: int):
        per = max(1, math.ceil(total / batches))
        self.batches = [source.child("pool", i).draw_counts(per) for i in range(batches)]
        self.prefix = [np.concatenate(([0], np.cumsum(b))) for b in self.batches]

    def restricted(self, lo: int, hi: int):
        return [b[lo - 1 : hi] for b in self.batches]


def _test_region(pool: _Pool, region: Interval, cfg: LearnerConfig, conf: float):
    batches = pool.restricted(region.lo, region.hi)
    kw = dict(slack=cfg.tester_slack, rep_const=cfg.tester_rep_const)
    up = tester.test_on_samples(batches, cfg.k, cfg.eps, conf, direction="up", **kw)
    down = tester.test_on_samples(batches, cfg.k, cfg.eps, conf, direction="down", **kw)
    return up.yes, down.yes


def decompose(source, n: int, cfg: LearnerConfig) -> Decomposition:
    """Split ``[n]`` into monotone superintervals, light gaps and heavy points.

    Scans growing unions of consecutive atoms with both testers.  When both
    reject a union, its last atom becomes a boundary: its final point is
    kept as a heavy point when the atom is heavy, the rest is dropped as
    negligible, and the union before it becomes a superinterval with the
    orientation the testers accepted (non-decreasing on ties).

    Raises
    ------
    ModalityExceeded
        More than ``k + 1`` superintervals.
    InsufficientSamples
        Some tested union received fewer pool samples than the tester needs.
    """
    if cfg.k < 1:
        raise ValueError("decompose needs k >= 1")
    p_hat = EmpiricalPmf(source.child("dkw").draw_counts(first_phase_samples(cfg)))
    atoms = atomic_partition(p_hat, cfg.eps, cfg.k)
    conf = tester_confidence(cfg)
    R = tester.repetitions(conf, cfg.tester_rep_const)
    pool = _Pool(source, tester_pool_samples(cfg), R)
    heavy_thr = 2 * atoms.threshold

    supers, negligible, heavy = [], [], []
    A = atoms.atoms
    start = 0
    orient = None  # orientation accepted for A[start .. j-1]
    j = 0
    while j < len(A):
        region = Interval(A[start].lo, A[j].hi)
        up, down = _test_region(pool, region, cfg, conf)
        if up or down:
            orient = NONDECREASING if up else NONINCREASING
            j += 1
            continue
        if j > start:
            supers.append((Interval(A[start].lo, A[j - 1].hi), orient))
        iv = A[j]
        if p_hat.fraction(iv.lo, iv.hi) >= heavy_thr:
            if iv.lo < iv.hi:
                negligible.append(Interval(iv.lo, iv.hi - 1))
            heavy.append((iv.hi, p_hat.mass(iv.hi, iv.hi)))
        else:
            negligible.append(iv)
        start = j = j + 1
        orient = None
    if start < len(A):
        supers.append((Interval(A[start].lo, A[-1].hi), orient))
    if len(supers) > cfg.k + 1:
        raise ModalityExceeded(f"{len(supers)} superintervals exceed k + 1 = {cfg.k + 1}")
    return Decomposition(supers, negligible, heavy, atoms, p_hat)


# --------------------------------------------------------------------------
# learners


def _learn_monotone_either(source, n: int, cfg: LearnerConfig) -> Hypothesis:
    kw = dict(boost_const=cfg.boost_const, partition_const=cfg.partition_const)
    down = learn_monotone_boosted(source.child("down"), n, cfg.eps, cfg.delta, NONINCREASING, **kw)
    up = learn_monotone_boosted(source.child("up"), n, cfg.eps, cfg.delta, NONDECREASING, **kw)
    chosen, _ = choose_hypothesis(source.child("choose"), down, up, cfg.eps, cfg.delta)
    return chosen


def learn_kmodal(source, n: int, cfg: LearnerConfig) -> Hypothesis:
    """Learn a k-modal distribution through the tester-driven decomposition.

    Masses come from the first-phase empirical sample; negligible intervals
    get none, so the result may carry total mass slightly below one.
    """
    if cfg.k == 0:
        return _learn_monotone_either(source, n, cfg)
    return learn_on_decomposition(source, n, cfg, decompose(source, n, cfg))


def learn_on_decomposition(source, n: int, cfg: LearnerConfig, dec: Decomposition) -> Hypothesis:
    """Fit every superinterval of ``dec`` on a fresh sample and assemble."""
    counts = source.child("birge").draw_counts(birge_phase_samples(cfg, n))
    parts = []
    for iv, orient in dec.superintervals:
        w = dec.p_hat.mass(iv.lo, iv.hi)
        if w <= 0:
            continue
        local = counts[iv.lo - 1 : iv.hi]
        h = fit_counts(local, orient, cfg.partition_const) if local.sum() > 0 else Hypothesis.uniform(len(iv))
        parts.append(_normalized(h).embedded(iv.lo - 1, n, w))
    points = tuple((i, w) for i, w in dec.heavy_points if w > 0)
    return combine(n, parts + [Hypothesis(n, (), points)])


def _normalized(h: Hypothesis) -> Hypothesis:
    t = h.total_mass
    return h if t == 1.0 or t <= 0 else h.scaled(1.0 / t)


def supported_accuracy(eps: float, m: int, delta: float, cap: float = 0.19) -> float:
    """Competition accuracy that ``m`` recorded draws can certify at confidence ``delta``.

    Never below ``eps``; capped so that distinct candidates can still be
    told apart (a draw is forced once ``5 * accuracy`` reaches 1).
    """
    if m <= 0:
        return eps
    return min(max(cap, eps), max(eps, math.sqrt(2.0 * math.log(2.0 / delta) / m)))


def _boosted_or_plain(batches, select, cfg: LearnerConfig, dp: float, orient: str) -> Hypothesis:
    try:
        h, _ = boosted_from_pool(batches, select, cfg.eps, dp, orient, cfg.partition_const)
        return h
    except TournamentFailure:
        merged = np.sum(batches, axis=0)
        return fit_counts(merged, orient, cfg.partition_const)


def _simple_once(source, n: int, cfg: LearnerConfig, pool_scale: float) -> Hypothesis:
    p_hat = EmpiricalPmf(source.child("dkw").draw_counts(first_phase_samples(cfg, True)))
    atoms = atomic_partition(p_hat, cfg.eps, cfg.k)
    light, heavy = split_light_heavy(atoms, cfg.eps, cfg.k)
    dp = simple_confidence(cfg)
    Rb = boost_runs(dp, cfg.boost_const)
    total = math.ceil(simple_pool_samples(cfg, n) * pool_scale)
    per = max(1, math.ceil(total / (Rb + 1)))
    tag = "pool" if pool_scale == 1 else ("pool", pool_scale)
    chunks = [source.child(tag, i).draw_counts(per) for i in range(Rb + 1)]
    select = source.child("select" if pool_scale == 1 else "select2").draw_counts(simple_select_samples(cfg))

    parts = []
    for iv in light:
        w = p_hat.mass(iv.lo, iv.hi)
        if w <= 0:
            continue
        batches = [c[iv.lo - 1 : iv.hi] for c in chunks[:Rb]]
        if all(b.sum() == 0 for b in batches):
            raise InsufficientSamples(f"light interval {iv} received no pool samples", have=0, need=1)
        tsel = chunks[Rb][iv.lo - 1 : iv.hi]
        h_down = _boosted_or_plain(batches, tsel, cfg, dp, NONINCREASING)
        h_up = _boosted_or_plain(batches, tsel, cfg, dp, NONDECREASING)
        local_sel = select[iv.lo - 1 : iv.hi]
        eps_c = supported_accuracy(cfg.eps, int(local_sel.sum()), dp)
        h, _ = choose_hypothesis(RecordedSample(local_sel), h_down, h_up, eps_c, dp)
        parts.append(_normalized(h).embedded(iv.lo - 1, n, w))
    points = tuple((i, w) for i, w in heavy if w > 0)
    return combine(n, parts + [Hypothesis(n, (), points)])


def learn_kmodal_simple(source, n: int, cfg: LearnerConfig) -> Hypothesis:
    """Learn a k-modal distribution by learning every light atom separately.

    Retries once with a doubled pool when some light interval receives no
    pool samples, then raises :class:`InsufficientSamples`.
    """
    if cfg.k == 0:
        return _learn_monotone_either(source, n, cfg)
    try:
        return _simple_once(source, n, cfg, 1)
    except InsufficientSamples:
        return _simple_once(source.child("retry"), n, cfg, 2)


def learn_kmodal_confident(source, n: int, cfg: LearnerConfig, algo: str = "main") -> Hypothesis:
    """Boost the success probability of a learner to ``1 - delta``.

    Runs ``ceil(8 ln(1/delta))`` independent copies, discards failed runs,
    and returns the tournament winner at accuracy ``c_acc * eps``.
    """
    learn = learn_kmodal if algo == "main" else learn_kmodal_simple
    R = boost_runs(cfg.delta, cfg.boost_const)
    runs = []
    for i in range(R):
        try:
            runs.append(learn(source.child("run", i), n, cfg))
        except KModalError:
            continue
    if not runs:
        raise KModalError("every boosted run failed")
    return tournament(source.child("select"), runs, min(cfg.c_acc * cfg.eps, 0.99), cfg.delta / 2)
