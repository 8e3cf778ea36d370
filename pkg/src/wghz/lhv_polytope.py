"""Local-hidden-variable membership of full two-setting, two-outcome probability tables.

Table layout: ``probabilities[r, k]`` with the results index ``r`` and the
settings index ``k`` both read as N-bit strings, party 0 most significant.
Result bit 0 means outcome -1, bit 1 means +1; setting bit 0/1 is the
first/second setting.  In CSV files settings are labelled ``1``/``2``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import TextIO

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .bell_tests import Family, TestKind, ThresholdReport, identify_family
from .errors import InvalidArgumentError, SolverError
from .quantum_core import (
    CorrelationTensor,
    MeasurementSetting,
    NoisyState,
    PureState,
    State,
    correlation_tensor,
    sphere_points,
)
from .search import multistart_minimize, random_sphere_angles

log = logging.getLogger(__name__)

MAX_PARTIES = 6
FEASIBILITY_TOLERANCE = 1e-9
# upper bound on the visibility variable of the critical-visibility LP
_V_CAP = 1e3


@lru_cache(maxsize=None)
def enumerate_deterministic_strategies(n_parties: int) -> np.ndarray:
    """All ``4^N`` local deterministic strategies as outcome bits, shape ``(4^N, N, 2)``.

    ``out[lam, j, s]`` is party ``j``'s result bit for setting ``s``.  Party
    ``j`` contributes base-4 digit ``2 * bit(s=0) + bit(s=1)`` to ``lam``.
    """
    if int(n_parties) != n_parties or not 1 <= n_parties <= MAX_PARTIES:
        raise InvalidArgumentError(f"n_parties must be in [1, {MAX_PARTIES}], got {n_parties!r}")
    lam = np.arange(4**n_parties)
    digits = (lam[:, None] // 4 ** np.arange(n_parties - 1, -1, -1)[None, :]) % 4
    out = np.stack([digits // 2, digits % 2], axis=-1)
    out.flags.writeable = False
    return out


def deterministic_table(strategy: np.ndarray) -> np.ndarray:
    """Probability table of one strategy (shape ``(N, 2)`` of result bits)."""
    strategy = np.asarray(strategy)
    n = strategy.shape[0]
    table = np.zeros((2**n, 2**n))
    for k in range(2**n):
        bits = [(k >> (n - 1 - j)) & 1 for j in range(n)]
        r = 0
        for j in range(n):
            r = 2 * r + int(strategy[j, bits[j]])
        table[r, k] = 1.0
    return table


@lru_cache(maxsize=None)
def _strategy_matrix(n: int) -> sparse.csc_matrix:
    """Columns are flattened strategy tables (cell index ``r * 2^N + k``)."""
    strat = enumerate_deterministic_strategies(n)
    m, d = 4**n, 2**n
    k = np.arange(d)
    kbits = (k[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1  # (d, n)
    weights = 2 ** np.arange(n - 1, -1, -1)
    # result bits of strategy lam at settings k: strat[lam, j, kbits[k, j]]
    rbits = strat[:, np.arange(n)[None, :], kbits]  # (m, d, n)
    r = rbits @ weights  # (m, d)
    rows = (r * d + k[None, :]).ravel()
    cols = np.repeat(np.arange(m), d)
    return sparse.csc_matrix((np.ones(m * d), (rows, cols)), shape=(d * d, m))


@lru_cache(maxsize=None)
def _strategy_correlators(n: int) -> np.ndarray:
    """Strategies in correlator coordinates: per party ``(1, a_0, a_1)`` with ``a = +-1``, kron over parties."""
    local = np.array([[1, 1, 1, 1], [-1, -1, 1, 1], [-1, 1, -1, 1]], dtype=float)
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, local)
    return out


@lru_cache(maxsize=None)
def _table_to_correlators(n: int) -> np.ndarray:
    """Linear map from a flattened no-signaling table to its ``3^N`` correlators.

    Per party: row 0 is the marginal sum at setting 0, rows 1 and 2 are the
    signed sums ``sum_r r P`` at settings 0 and 1.
    """
    # local map acts on the interleaved cell (r_j, k_j) = 2 r_j + k_j
    local = np.array([[1, 0, 1, 0], [-1, 0, 1, 0], [0, -1, 0, 1]], dtype=float)
    g = np.ones((1, 1))
    for _ in range(n):
        g = np.kron(g, local)
    # reorder columns from interleaved (r_0, k_0, r_1, k_1, ...) to (r..., k...)
    idx = np.arange(4**n).reshape((2, 2) * n)
    perm = idx.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))).ravel()
    return g[:, perm]


@dataclass(frozen=True, eq=False)
class LocalPolytopeProblem:
    n_parties: int
    probabilities: np.ndarray
    tolerance: float = FEASIBILITY_TOLERANCE

    def __post_init__(self):
        n = self.n_parties
        if int(n) != n or not 1 <= n <= MAX_PARTIES:
            raise InvalidArgumentError(f"n_parties must be in [1, {MAX_PARTIES}]")
        p = np.array(self.probabilities, dtype=float)
        d = 2**n
        if p.shape != (d, d):
            raise InvalidArgumentError(f"expected a {d}x{d} table, got {p.shape}")
        if p.min() < -1e-12:
            raise InvalidArgumentError("probabilities must be nonnegative")
        if np.max(np.abs(p.sum(axis=0) - 1)) > 1e-10:
            raise InvalidArgumentError("each settings column must sum to 1")
        check_no_signaling(p, n)
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    def correlators(self) -> np.ndarray:
        return _table_to_correlators(self.n_parties) @ self.probabilities.ravel()


def check_no_signaling(p: np.ndarray, n: int, tol: float = 1e-10) -> None:
    t = np.asarray(p).reshape((2,) * (2 * n))
    for j in range(n):
        marg = t.sum(axis=j)  # drop r_j; k_j is now axis n - 1 + j
        a = np.take(marg, 0, axis=n - 1 + j)
        b = np.take(marg, 1, axis=n - 1 + j)
        if np.max(np.abs(a - b)) > tol:
            raise InvalidArgumentError(f"table signals: marginals depend on party {j}'s setting")


@dataclass(frozen=True, eq=False)
class LhvVerdict:
    feasible: bool
    distance: float
    witness_weights: np.ndarray | None


def _solve(c, **kw):
    res = linprog(c, method="highs", **kw)
    if res.status != 0:
        raise SolverError(f"LP solver failed (status {res.status}): {res.message}")
    return res


def lhv_feasible(problem: LocalPolytopeProblem) -> LhvVerdict:
    """Distance from the table to the local polytope.

    The distance is the total-variation distance averaged over settings
    columns, minimized over mixtures of deterministic strategies.
    """
    n = problem.n_parties
    d = 2**n
    cells, m = d * d, 4**n
    big_d = _strategy_matrix(n)
    p = problem.probabilities.ravel()
    eye = sparse.identity(cells, format="csc")
    # D w - s <= P  and  -D w - s <= -P
    a_ub = sparse.vstack([sparse.hstack([big_d, -eye]), sparse.hstack([-big_d, -eye])], format="csc")
    b_ub = np.concatenate([p, -p])
    a_eq = sparse.hstack([sparse.csc_matrix(np.ones((1, m))), sparse.csc_matrix((1, cells))], format="csc")
    c = np.concatenate([np.zeros(m), np.full(cells, 1.0 / (2 * d))])
    res = _solve(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=(0, None))
    dist = max(0.0, float(res.fun))
    feasible = dist <= problem.tolerance
    weights = None
    if feasible:
        w = np.clip(res.x[:m], 0.0, None)
        weights = w / w.sum()
    return LhvVerdict(feasible, dist, weights)


def critical_visibility_from_correlators(pure_corr: np.ndarray, n: int) -> float:
    """Largest ``v`` with ``v * pure + (1 - v) * noise`` inside the local polytope."""
    strat = _strategy_correlators(n)
    noise = np.zeros(3**n)
    noise[0] = 1.0
    m = 4**n
    # strat w - v (pure - noise) = noise
    a_eq = np.hstack([strat, -(pure_corr - noise)[:, None]])
    c = np.zeros(m + 1)
    c[-1] = -1.0
    bounds = [(0, None)] * m + [(0, _V_CAP)]
    res = _solve(c, A_eq=a_eq, b_eq=noise, bounds=bounds)
    return float(res.x[-1])


def critical_visibility(pure_table: LocalPolytopeProblem) -> float:
    """Critical white-noise visibility of a table for its fixed settings."""
    return critical_visibility_from_correlators(pure_table.correlators(), pure_table.n_parties)


def _site_matrices(directions: np.ndarray, with_identity: bool) -> list[np.ndarray]:
    mats = []
    for dirs in directions:
        if with_identity:
            m = np.zeros((3, 4))
            m[0, 0] = 1.0
            m[1, 1:] = dirs[0]
            m[2, 1:] = dirs[1]
        else:
            m = np.zeros((4, 4))
            for r, sgn in enumerate((-1.0, 1.0)):
                for s in range(2):
                    m[2 * r + s, 0] = 1.0
                    m[2 * r + s, 1:] = sgn * dirs[s]
        mats.append(m)
    return mats


def _contract(t: np.ndarray, mats) -> np.ndarray:
    for m in mats:
        t = np.tensordot(t, m, axes=([0], [1]))
    return t


def quantum_correlators(t: CorrelationTensor, settings: MeasurementSetting) -> np.ndarray:
    """The ``3^N`` correlators of the quantum table (see :func:`_table_to_correlators`)."""
    return _contract(t.values, _site_matrices(settings.directions, True)).ravel()


def _table_from_tensor(values: np.ndarray, directions: np.ndarray) -> np.ndarray:
    n = directions.shape[0]
    # P(r|k) = 2^-N sum_a T_a prod_j (1, r_j n_{j,k_j})[a_j]
    t = _contract(values, _site_matrices(directions, False)).reshape((2, 2) * n)
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    return t.reshape(2**n, 2**n) / 2**n


def quantum_probability_table(state: State, settings: MeasurementSetting) -> LocalPolytopeProblem:
    if settings.n_qubits != state.n_qubits:
        raise InvalidArgumentError("one pair of settings per observer is required")
    t = correlation_tensor(state)
    table = _table_from_tensor(t.values, settings.directions)
    return LocalPolytopeProblem(state.n_qubits, table)


def default_lp_restarts(n: int) -> int:
    return {1: 10, 2: 20, 3: 100, 4: 50}.get(n, 20)


def lhv_threshold(
    pure: PureState,
    tol: float = 1e-9,
    restarts: int | None = None,
    seed: int = 0,
    coarse_fev: int | None = None,
) -> ThresholdReport:
    """Lowest white-noise visibility at which some two-setting experiment has no local model.

    For each candidate setting the critical visibility is the optimum of a
    linear program; the settings are searched by seeded multistart simplex
    minimization.  Every other start puts the first setting of observers
    ``2 .. N-1`` on the z axis.
    """
    n = pure.n_qubits
    if n > 5:
        raise InvalidArgumentError("lhv_threshold is limited to N <= 5")
    t = correlation_tensor(pure)
    restarts = default_lp_restarts(n) if restarts is None else restarts
    rng = np.random.default_rng(seed)

    def objective(x):
        a = x.reshape(n, 2, 2)
        dirs = sphere_points(a[..., 0], a[..., 1])
        corr = _contract(t.values, _site_matrices(dirs, True)).ravel()
        return critical_visibility_from_correlators(corr, n)

    starts = []
    for i in range(restarts):
        x = random_sphere_angles(rng, 2 * n).reshape(n, 2, 2)
        if i % 2 == 0:
            x[2:, 0, 0] = 0.0
        starts.append(x.ravel())
    res = multistart_minimize(
        objective, starts, coarse_fev=coarse_fev or 400 * n, fatol=tol, n_polish=2, label=f"lhv-lp N={n}"
    )
    settings = MeasurementSetting.from_angles(res.x)
    crit = min(1.0, res.fun)
    verdict = lhv_feasible(quantum_probability_table(NoisyState(pure, crit), settings))
    family = identify_family(pure)
    return ThresholdReport(n, family, TestKind.LHV_LP, crit, settings, verdict.distance, res.converged)


def _settings_label(k: int, n: int) -> str:
    return "".join(str(((k >> (n - 1 - j)) & 1) + 1) for j in range(n))


def write_table_csv(problem: LocalPolytopeProblem, out: TextIO | str | Path) -> None:
    """Header ``results`` then one column per settings string (e.g. ``121``); 17 significant digits."""
    n = problem.n_parties
    d = 2**n
    fh = open(out, "w", newline="", encoding="utf-8") if isinstance(out, (str, Path)) else out
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["results"] + [_settings_label(k, n) for k in range(d)])
        for r in range(d):
            w.writerow([format(r, f"0{n}b")] + [f"{v:.17g}" for v in problem.probabilities[r]])
    finally:
        if fh is not out:
            fh.close()


def read_table_csv(src: TextIO | str | Path, tolerance: float = FEASIBILITY_TOLERANCE) -> LocalPolytopeProblem:
    fh = open(src, newline="", encoding="utf-8") if isinstance(src, (str, Path)) else src
    try:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    finally:
        if fh is not src:
            fh.close()
    header, body = rows[0], rows[1:]
    n = len(header[1])
    d = 2**n
    if len(header) != d + 1 or len(body) != d:
        raise InvalidArgumentError(f"table CSV must have {d} settings columns and {d} result rows")
    cols = []
    for label in header[1:]:
        if len(label) != n or set(label) - {"1", "2"}:
            raise InvalidArgumentError(f"bad settings label {label!r}")
        cols.append(int("".join(str(int(c) - 1) for c in label), 2))
    table = np.zeros((d, d))
    for row in body:
        r = int(row[0], 2)
        for k, v in zip(cols, row[1:]):
            table[r, k] = float(v)
    return LocalPolytopeProblem(n, table, tolerance)


__all__ = [
    "Family",
    "LhvVerdict",
    "LocalPolytopeProblem",
    "critical_visibility",
    "deterministic_table",
    "enumerate_deterministic_strategies",
    "lhv_feasible",
    "lhv_threshold",
    "quantum_correlators",
    "quantum_probability_table",
    "read_table_csv",
    "write_table_csv",
]
