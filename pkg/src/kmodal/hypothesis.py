"""Succinct piecewise-uniform hypotheses with point masses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import Interval, Pmf


@dataclass(frozen=True)
class Piece:
    lo: int
    hi: int
    mass: float

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Hypothesis:
    """Uniform-on-interval pieces plus heavy points over ``[n]``.

    Pieces and points are pairwise disjoint.  The total mass may be below 1
    (the main learner drops negligible intervals without renormalizing).
    """

    n: int
    pieces: tuple = ()
    points: tuple = ()  # (i, mass) pairs
    _dense: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        covered = np.zeros(self.n, dtype=bool)
        for pc in self.pieces:
            if not 1 <= pc.lo <= pc.hi <= self.n:
                raise ValueError(f"piece [{pc.lo},{pc.hi}] outside [1,{self.n}]")
            if pc.mass < 0:
                raise ValueError("negative piece mass")
            if covered[pc.lo - 1 : pc.hi].any():
                raise ValueError("overlapping pieces")
            covered[pc.lo - 1 : pc.hi] = True
        for i, mass in self.points:
            if not 1 <= i <= self.n:
                raise ValueError(f"point {i} outside [1,{self.n}]")
            if mass < 0:
                raise ValueError("negative point mass")
            if covered[i - 1]:
                raise ValueError(f"point {i} overlaps another component")
            covered[i - 1] = True
        if self.total_mass > 1.0 + 1e-9:
            raise ValueError(f"total mass {self.total_mass} exceeds 1")

    @classmethod
    def from_partition(cls, partition, masses, n: int | None = None) -> "Hypothesis":
        pieces = tuple(Piece(iv.lo, iv.hi, float(w)) for iv, w in zip(partition, masses))
        return cls(n if n is not None else partition[-1].hi, pieces)

    @classmethod
    def uniform(cls, n: int, mass: float = 1.0) -> "Hypothesis":
        return cls(n, (Piece(1, n, float(mass)),))

    @property
    def total_mass(self) -> float:
        return math.fsum([pc.mass for pc in self.pieces] + [w for _, w in self.points])

    def to_array(self) -> np.ndarray:
        if self._dense is None:
            x = np.zeros(self.n)
            for pc in self.pieces:
                x[pc.lo - 1 : pc.hi] = pc.mass / pc.length
            for i, w in self.points:
                x[i - 1] = w
            x.flags.writeable = False
            object.__setattr__(self, "_dense", x)
        return self._dense

    def __call__(self, i: int) -> float:
        return float(self.to_array()[i - 1])

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.to_array())

    def to_pmf(self) -> Pmf:
        """Normalized copy, for sampling or exact comparison."""
        return Pmf.from_weights(self.to_array())

    def sample(self, m: int, seed: int):
        from .sampling import SampleOracle

        return SampleOracle(self.to_array(), seed).draw(m)

    def reversed(self) -> "Hypothesis":
        n = self.n
        pieces = tuple(Piece(n + 1 - pc.hi, n + 1 - pc.lo, pc.mass) for pc in reversed(self.pieces))
        points = tuple((n + 1 - i, w) for i, w in reversed(self.points))
        return Hypothesis(n, pieces, points)

    def scaled(self, weight: float) -> "Hypothesis":
        return Hypothesis(
            self.n,
            tuple(Piece(pc.lo, pc.hi, pc.mass * weight) for pc in self.pieces),
            tuple((i, w * weight) for i, w in self.points),
        )

    def embedded(self, offset: int, n: int, weight: float = 1.0) -> "Hypothesis":
        """Shift into a larger domain of size ``n``, scaling all masses."""
        return Hypothesis(
            n,
            tuple(Piece(pc.lo + offset, pc.hi + offset, pc.mass * weight) for pc in self.pieces),
            tuple((i + offset, w * weight) for i, w in self.points),
        )


def combine(n: int, parts) -> Hypothesis:
    """Union of disjoint hypotheses already living on ``[n]``."""
    pieces, points = [], []
    for h in parts:
        pieces.extend(h.pieces)
        points.extend(h.points)
    pieces.sort(key=lambda pc: pc.lo)
    points.sort()
    return Hypothesis(n, tuple(pieces), tuple(points))


def region_hypothesis(region: Interval, n: int, local: Hypothesis, weight: float) -> Hypothesis:
    return local.embedded(region.lo - 1, n, weight)
