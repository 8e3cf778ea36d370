"""Singlet yields after conditioning, recurrence distillation and separability radii.

Yields in :class:`YieldReport` are per channel use (one noisy N-qubit state
sent), i.e. already multiplied by the conditioning acceptance probability.
The ``*_per_pair`` properties give the yield per accepted two-qubit pair.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bell_tests import Family
from .conditioning import acceptance_probability_w, vis_w_n_to_2
from .errors import InvalidArgumentError, NoProgressError
from .quantum_core import _check_visibility

MAX_RECURRENCE_ROUNDS = 40


class BellTarget(str, enum.Enum):
    W2_TRIPLET = "W2_triplet"
    SINGLET = "singlet"


_TARGET_VECTORS = {
    BellTarget.W2_TRIPLET: np.array([0, 1, 1, 0]) / math.sqrt(2),
    BellTarget.SINGLET: np.array([0, 1, -1, 0]) / math.sqrt(2),
}


@dataclass(frozen=True)
class WernerState:
    visibility: float
    target: BellTarget = BellTarget.W2_TRIPLET

    def __post_init__(self):
        object.__setattr__(self, "visibility", _check_visibility(self.visibility))

    @property
    def fidelity(self) -> float:
        return (1 + 3 * self.visibility) / 4

    @classmethod
    def from_fidelity(cls, f: float, target: BellTarget = BellTarget.W2_TRIPLET) -> "WernerState":
        return cls((4 * f - 1) / 3, target)

    def spectrum(self) -> np.ndarray:
        v = self.visibility
        return np.array([(1 + 3 * v) / 4, (1 - v) / 4, (1 - v) / 4, (1 - v) / 4])

    def density_matrix(self) -> np.ndarray:
        t = _TARGET_VECTORS[self.target]
        v = self.visibility
        return v * np.outer(t, t) + (1 - v) * np.eye(4) / 4


@dataclass(frozen=True)
class YieldReport:
    family: Family
    n_qubits: int
    channel_visibility: float
    acceptance_probability: float
    conditioned_visibility: float
    one_way_yield: float
    two_way_yield: float

    @property
    def one_way_yield_per_pair(self) -> float:
        return self.one_way_yield / self.acceptance_probability if self.acceptance_probability else 0.0

    @property
    def two_way_yield_per_pair(self) -> float:
        return self.two_way_yield / self.acceptance_probability if self.acceptance_probability else 0.0


def werner_entropy(v: float) -> float:
    """Von Neumann entropy in bits of the two-qubit Werner state of visibility ``v``."""
    lam = WernerState(v).spectrum()
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam)))


def hashing_yield(v: float) -> float:
    """One-way hashing yield per Werner pair, ``max(0, 1 - S)``."""
    return max(0.0, 1.0 - werner_entropy(v))


def recurrence_step(state: WernerState) -> tuple[WernerState, float]:
    """One two-copy recurrence round followed by re-twirling to Werner form.

    Returns the output state and the probability that the round succeeds.
    """
    f = state.fidelity
    if f <= 0.5:
        raise NoProgressError(f"recurrence cannot raise fidelity {f:.6g} <= 1/2")
    e = (1 - f) / 3
    success = f * f + 2 * f * e + 5 * e * e
    f_out = (f * f + e * e) / success
    return WernerState.from_fidelity(min(f_out, 1.0), state.target), success


def two_way_yield(v: float, max_rounds: int = MAX_RECURRENCE_ROUNDS) -> float:
    """Best recurrence-then-hashing yield per input pair over ``0 .. max_rounds`` rounds.

    Each round consumes two pairs per output pair and keeps it with the
    success probability, hence the ``success / 2`` factor per round.
    """
    state = WernerState(v)
    best = hashing_yield(v)
    kept = 1.0
    for _ in range(max_rounds):
        if state.fidelity <= 0.5 or state.visibility >= 1.0:
            break
        state, success = recurrence_step(state)
        kept *= success / 2
        best = max(best, kept * hashing_yield(state.visibility))
    return best


def one_way_yield_ghz(p: float) -> float:
    """GHZ_N keeps the channel visibility with unit acceptance, so N drops out."""
    return hashing_yield(_check_visibility(p, "p"))


def yield_report(family: Family | str, n: int, p: float) -> YieldReport:
    family = Family(family)
    p = _check_visibility(p, "p")
    if family is Family.W:
        acc = acceptance_probability_w(n, p)
        v = vis_w_n_to_2(n, p)
    elif family is Family.GHZ:
        if int(n) != n or n < 2:
            raise InvalidArgumentError(f"n must be an integer >= 2, got {n!r}")
        acc, v = 1.0, p
    else:
        raise InvalidArgumentError(f"no yield pipeline for family {family.value}")
    return YieldReport(family, n, p, acc, v, acc * hashing_yield(v), acc * two_way_yield(v))


def one_way_yield_w(n: int, p: float) -> YieldReport:
    return yield_report(Family.W, n, p)


def werner_separable(v: float) -> bool:
    return _check_visibility(v) <= 1 / 3 + 1e-12


def channel_visibility_for_target(n: int, v_target: float) -> float:
    """Channel visibility ``p`` with ``vis_w_n_to_2(n, p) == v_target``."""
    if int(n) != n or n < 3:
        raise InvalidArgumentError(f"n must be an integer >= 3, got {n!r}")
    v = _check_visibility(v_target, "v_target")
    c = n / 2 ** (n - 1)
    return v * c / (1 - v + v * c)


def separable_ball_radius(n: int) -> float:
    """Noise weight below which any state mixed with white noise is separable."""
    return 1 / (1 + 2 ** (n - 1))


def witness_bound_w(n: int) -> float:
    """Weight of W_n at which its conditioned pair becomes separable (visibility 1/3)."""
    return 1 / (1 + 2**n / n)


def hashing_root(tol: float = 1e-12) -> float:
    """Werner visibility where the hashing yield switches on (``S = 1``)."""
    lo, hi = 0.5, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if werner_entropy(mid) > 1:
            lo = mid
        else:
            hi = mid
    return hi
