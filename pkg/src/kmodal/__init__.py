"""Learning k-modal distributions over [n] with a monotonicity tester.

The main entry points are :func:`learn_kmodal` (tester-driven
decomposition), :func:`learn_kmodal_simple` (per-atom learning) and the
monotone building blocks in :mod:`kmodal.birge`, :mod:`kmodal.selection`
and :mod:`kmodal.tester`.
"""

from .birge import learn_monotone_boosted, learn_nondecreasing, learn_nonincreasing, oblivious_partition
from .dist import (
    EmpiricalPmf,
    Interval,
    Pmf,
    SampleSet,
    dkw_sample_size,
    empirical,
    kolmogorov_distance,
    modality,
    tv_distance,
)
from .errors import DomainMismatch, InsufficientSamples, KModalError, ModalityExceeded, TournamentFailure
from .harness import GeneratorSpec, gen, run_trial, sweep
from .hypothesis import Hypothesis
from .ironing import iron_to_monotone, oracle_distance_to_monotone
from .learners import LearnerConfig, decompose, learn_kmodal, learn_kmodal_confident, learn_kmodal_simple
from .sampling import SampleOracle, draw_samples
from .selection import choose_hypothesis, tournament

__version__ = "0.1.0"
