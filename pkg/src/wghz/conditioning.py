"""Post-selection of noisy states on local measurement outcomes.

The brute-force path (:func:`condition_on_z`, :func:`condition_ghz_pm_basis`)
projects the full density matrix.  The closed-form visibility maps below it
are what the rest of the package uses at large N.  Qubit indices are 0-based
with qubit 0 the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateConditioningError, InvalidArgumentError
from .quantum_core import (
    DensityMatrix,
    NoisyState,
    PureState,
    State,
    _check_visibility,
    make_ghz_state,
)

FIT_TOLERANCE = 1e-10
MIN_PROBABILITY = 1e-14

_Z_VECTORS = {-1: np.array([1.0, 0.0]), 1: np.array([0.0, 1.0])}
_X_VECTORS = {1: np.array([1.0, 1.0]) / np.sqrt(2), -1: np.array([1.0, -1.0]) / np.sqrt(2)}


@dataclass(frozen=True, eq=False)
class ConditioningOutcome:
    remaining_state: DensityMatrix
    probability: float
    fitted_visibility: float | None
    target: PureState | None
    kept_qubits: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class GConditioning:
    """Both accepted branches of G-state conditioning and their mixture."""

    all_minus: ConditioningOutcome
    all_plus: ConditioningOutcome
    accepted: ConditioningOutcome


def _check_subset(n: int, measured: Sequence[int], results: Sequence[int]) -> tuple[int, ...]:
    measured = tuple(int(q) for q in measured)
    if not measured or len(set(measured)) != len(measured):
        raise InvalidArgumentError("measured qubits must be a nonempty set")
    if len(measured) >= n:
        raise InvalidArgumentError("cannot measure every qubit; at least one must remain")
    if any(q < 0 or q >= n for q in measured):
        raise InvalidArgumentError(f"qubit index out of range for {n} qubits: {measured}")
    if len(results) != len(measured) or any(r not in (-1, 1) for r in results):
        raise InvalidArgumentError("need one result in {-1, +1} per measured qubit")
    return measured


def _project_vector(psi: np.ndarray, n: int, measured, vectors) -> np.ndarray:
    t = psi.reshape((2,) * n)
    for q, vec in sorted(zip(measured, vectors), reverse=True):
        t = np.tensordot(vec.conj(), t, axes=([0], [q]))
    return t.ravel()


def _project_matrix(rho: np.ndarray, n: int, measured, vectors) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    # contract from the highest qubit down so lower axis numbers stay valid
    for q, vec in sorted(zip(measured, vectors), reverse=True):
        t = np.tensordot(t, vec, axes=([n + q], [0]))  # column index
        t = np.tensordot(vec.conj(), t, axes=([0], [q]))  # row index
        n -= 1
    d = 2 ** n
    return t.reshape(d, d)


def fit_visibility(rho: np.ndarray, target: np.ndarray, tol: float = FIT_TOLERANCE) -> float | None:
    """Visibility ``v`` with ``rho = v |t><t| + (1 - v) I/d``, or ``None`` if no ``v`` fits within ``tol``."""
    d = rho.shape[0]
    overlap = np.vdot(target, rho @ target).real
    v = (overlap - 1 / d) / (1 - 1 / d)
    model = v * np.outer(target, target.conj()) + (1 - v) * np.eye(d) / d
    if np.max(np.abs(rho - model)) > tol or not -tol <= v <= 1 + tol:
        return None
    return float(min(max(v, 0.0), 1.0))


def _condition(state: State, measured, results, vectors, target: PureState | None) -> ConditioningOutcome:
    rho = state.density_matrix()
    n = rho.n_qubits
    measured = _check_subset(n, measured, results)
    vecs = [vectors[r] for r in results]
    block = _project_matrix(rho.entries, n, measured, vecs)
    prob = float(np.trace(block).real)
    if prob < MIN_PROBABILITY:
        raise DegenerateConditioningError(f"outcome {tuple(results)} on qubits {measured} has probability {prob:.3g}")
    kept = tuple(q for q in range(n) if q not in measured)
    remaining = DensityMatrix(len(kept), (block + block.conj().T) / (2 * prob))

    if target is None and isinstance(state, NoisyState):
        t = _project_vector(state.pure.amplitudes, n, measured, vecs)
        norm = np.linalg.norm(t)
        if norm**2 > MIN_PROBABILITY:
            target = PureState(len(kept), t / norm)
    fitted = None
    if target is not None:
        if target.n_qubits != len(kept):
            raise InvalidArgumentError("target must live on the kept qubits")
        fitted = fit_visibility(remaining.entries, target.amplitudes)
    return ConditioningOutcome(remaining, prob, fitted, target, kept)


def condition_on_z(
    state: State,
    measured_qubits: Sequence[int],
    results: Sequence[int],
    target: PureState | None = None,
) -> ConditioningOutcome:
    """Measure ``sigma_z`` on ``measured_qubits`` and keep the branch with ``results``.

    Without an explicit ``target`` the fit uses the normalized projection of
    the noisy state's pure part, so a W state that loses its excitation is
    fitted against ``|0...0>``.
    """
    return _condition(state, measured_qubits, results, _Z_VECTORS, target)


def condition_ghz_pm_basis(
    state: NoisyState, measured_qubits: Sequence[int], results: Sequence[int]
) -> ConditioningOutcome:
    """Measure ``sigma_x`` (basis ``(|0> +- |1>)/sqrt 2``) on part of a noisy GHZ state."""
    ghz = make_ghz_state(state.n_qubits)
    if abs(abs(np.vdot(ghz.amplitudes, state.pure.amplitudes)) - 1) > 1e-12:
        raise InvalidArgumentError("pure part of the state is not a GHZ state")
    return _condition(state, measured_qubits, results, _X_VECTORS, None)


def condition_g_on_z(state: NoisyState, measured_qubits: Sequence[int]) -> GConditioning:
    """Keep both the all-(-1) and the all-(+1) branch of a z measurement."""
    k = len(measured_qubits)
    minus = condition_on_z(state, measured_qubits, [-1] * k)
    plus = condition_on_z(state, measured_qubits, [1] * k)
    prob = minus.probability + plus.probability
    mixed = (minus.probability * minus.remaining_state.entries + plus.probability * plus.remaining_state.entries) / prob
    remaining = DensityMatrix(minus.remaining_state.n_qubits, mixed)
    fitted = None if minus.target is None else fit_visibility(mixed, minus.target.amplitudes)
    accepted = ConditioningOutcome(remaining, prob, fitted, minus.target, minus.kept_qubits)
    return GConditioning(minus, plus, accepted)


def _check_n3(n: int) -> None:
    if int(n) != n or n < 3:
        raise InvalidArgumentError(f"n must be an integer >= 3, got {n!r}")


def vis_w_n_to_2(n: int, p: float) -> float:
    """Visibility of the pair left after ``n - 2`` qubits of noisy W_n all give -1."""
    _check_n3(n)
    p = _check_visibility(p, "p")
    return p / (p + (1 - p) * n / 2 ** (n - 1))


def vis_w_n_to_n_minus_1(n: int, p: float) -> float:
    """Visibility of noisy W_{n-1} after one qubit of noisy W_n gives -1."""
    _check_n3(n)
    p = _check_visibility(p, "p")
    return p / (p + (1 - p) * n / (2 * (n - 1)))


def vis_g_n_to_2(n: int, q: float) -> float:
    """Pair visibility after ``n - 2`` qubits of noisy G_n all give +1 or all give -1.

    The closed form is evaluated for any ``n >= 3``; the conditioned pair is
    actually of Werner form only for ``n >= 4`` (at ``n = 3`` the weight-2
    kets survive the projection).
    """
    _check_n3(n)
    q = _check_visibility(q, "q")
    return q / (q + (1 - q) * n / 2 ** (n - 2))


def acceptance_probability_w(n: int, p: float) -> float:
    """Probability that qubits ``2 .. n-1`` of noisy W_n all give -1 (Born rule)."""
    _check_n3(n)
    p = _check_visibility(p, "p")
    return 2 * p / n + (1 - p) / 2 ** (n - 2)


def acceptance_probability_g(n: int, q: float) -> float:
    """Probability of the all-equal branches when conditioning noisy G_n (``n >= 4``)."""
    _check_n3(n)
    q = _check_visibility(q, "q")
    return 2 * (q / n + (1 - q) * 4 / 2**n)
