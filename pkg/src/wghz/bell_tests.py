"""Correlation-function tests of local realism and closed-form critical visibilities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .quantum_core import (
    CorrelationTensor,
    LocalFrame,
    MeasurementSetting,
    PureState,
    correlation_tensor,
    make_g_state,
    make_ghz_state,
    make_w_state,
    sphere_points,
)
from .search import multistart_minimize, random_sphere_angles

SQRT2_MINUS_1 = math.sqrt(2) - 1
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]])


class Family(str, enum.Enum):
    W = "W"
    GHZ = "GHZ"
    G = "G"


class TestKind(str, enum.Enum):
    SUFFICIENT_CONDITION = "sufficient_condition"
    WWZB = "wwzb"
    LHV_LP = "lhv_lp"
    FUNCTIONAL = "functional"
    CONDITIONED_BELL = "conditioned_bell"


@dataclass(frozen=True, eq=False)
class ThresholdReport:
    n_qubits: int
    family: Family | None
    test: TestKind
    critical_visibility: float
    optimizer_settings_used: MeasurementSetting | LocalFrame | None
    certificate: float
    converged: bool = True


def identify_family(pure: PureState) -> Family | None:
    n = pure.n_qubits
    if n < 2:
        return None
    for fam, make in ((Family.W, make_w_state), (Family.GHZ, make_ghz_state), (Family.G, make_g_state)):
        if abs(abs(np.vdot(make(n).amplitudes, pure.amplitudes)) - 1) < 1e-12:
            return fam
    return None


# --- sufficient condition: sum of squared xy-sector components -----------------


def _contract_sites(t: np.ndarray, mats) -> np.ndarray:
    """Contract axis ``k`` of ``t`` with ``mats[k]`` (shape ``(m, 3)``) for every site.

    One matmul per site; the new axis is rotated to the back each time, so
    after the last site the axes are back in observer order.
    """
    dims = t.shape
    x = t.reshape(dims[0], -1)
    out_shape = []
    for k, m in enumerate(mats):
        x = m @ x
        out_shape.append(m.shape[0])
        x = x.T.reshape(dims[k + 1], -1) if k + 1 < len(dims) else x.T
    return x.reshape(out_shape)


def xy_sector_sum(t: CorrelationTensor, frames: LocalFrame) -> float:
    """Sum of ``T^2`` over labels drawn from the rotated ``{x, y}`` axes only."""
    if frames.n_qubits != t.n_qubits:
        raise InvalidArgumentError(f"{frames.n_qubits} frames for a {t.n_qubits}-qubit tensor")
    r = _contract_sites(t.cartesian(), frames.matrices[:, :2, :])
    return float(np.sum(r * r))


def _xy_rows(angles: np.ndarray) -> np.ndarray:
    """New x and y axes for Euler angles ``(phi, theta, 0)``; ``angles`` is flat ``(phi, theta) * n``."""
    phi, theta = angles[0::2], angles[1::2]
    rows = np.empty((phi.size, 2, 3))
    rows[:, 0, 0] = np.cos(phi)
    rows[:, 0, 1] = np.sin(phi)
    rows[:, 0, 2] = 0.0
    rows[:, 1, 0] = -np.sin(phi) * np.cos(theta)
    rows[:, 1, 1] = np.cos(phi) * np.cos(theta)
    rows[:, 1, 2] = np.sin(theta)
    return rows


def default_restarts(n: int) -> int:
    return 200 if n <= 5 else 500


def max_xy_sector_sum(
    t: CorrelationTensor, restarts: int | None = None, seed: int = 0
) -> tuple[float, LocalFrame]:
    """Maximize :func:`xy_sector_sum` over per-observer frames.

    The third Euler rotation cannot change the sum, so each observer is
    searched over two angles.  Starts are uniform on the sphere of new z axes.
    """
    n = t.n_qubits
    cart = np.ascontiguousarray(t.cartesian())
    restarts = default_restarts(n) if restarts is None else restarts
    rng = np.random.default_rng(seed)

    def neg(x):
        r = _contract_sites(cart, _xy_rows(x))
        return -float(np.sum(r * r))

    starts = []
    for _ in range(restarts):
        tp = random_sphere_angles(rng, n)
        # new z axis uniform on S^2: Euler theta is its polar angle, phi its azimuth + pi/2
        starts.append(np.column_stack([tp[:, 1] + np.pi / 2, tp[:, 0]]).ravel())
    res = multistart_minimize(neg, starts, coarse_fev=300 * n, label=f"xy-sector N={n}")
    x = res.x
    frames = LocalFrame.from_euler(np.column_stack([x[0::2], x[1::2], np.zeros(n)]))
    return -res.fun, frames


def threshold_sufficient_w(n: int) -> float:
    """Visibility below which noisy W_n satisfies every correlation-function Bell inequality."""
    _check_n(n, 3)
    return math.sqrt(n / (3 * n - 2))


# --- WWZB: complete set of two-setting correlation-function inequalities ----------


def wwzb_statistic(correlations) -> float:
    """``2^-N sum_s |sum_k prod_j s_j^(k_j - 1) E(k)|``; a local model exists iff this is <= 1.

    ``correlations`` has ``2^N`` entries indexed by setting choices with the
    first observer most significant (flat or shaped ``(2,) * N``).
    """
    e = np.asarray(correlations, dtype=float)
    size = e.size
    n = size.bit_length() - 1
    if size < 2 or 2**n != size:
        raise InvalidArgumentError(f"need 2^N correlation values, got {size}")
    if np.max(np.abs(e)) > 1 + 1e-10:
        raise InvalidArgumentError("correlation values must lie in [-1, 1]")
    h = e.reshape((2,) * n)
    for _ in range(n):
        h = np.tensordot(h, _HADAMARD, axes=([0], [1]))
    return float(np.abs(h).sum() / size)


def correlation_values(t: CorrelationTensor, settings: MeasurementSetting) -> np.ndarray:
    """``E(k) = <(n_{1,k_1}.sigma) ... (n_{N,k_N}.sigma)>``, shaped ``(2,) * N``."""
    if settings.n_qubits != t.n_qubits:
        raise InvalidArgumentError("settings and tensor disagree on the number of observers")
    return _contract_sites(t.cartesian(), settings.directions)


def max_wwzb_statistic(
    t: CorrelationTensor, restarts: int | None = None, seed: int = 0, fatol: float = 1e-9
) -> tuple[float, MeasurementSetting]:
    n = t.n_qubits
    cart = np.ascontiguousarray(t.cartesian())
    restarts = default_restarts(n) if restarts is None else restarts
    rng = np.random.default_rng(seed)
    scale = 2.0**-n

    def neg(x):
        a = x.reshape(n, 2, 2)
        dirs = sphere_points(a[..., 0], a[..., 1])
        # (n1 + s n2) per site is the Hadamard combination of the two settings
        h = _contract_sites(cart, _HADAMARD @ dirs)
        return -float(np.abs(h).sum()) * scale

    starts = [random_sphere_angles(rng, 2 * n).ravel() for _ in range(restarts)]
    res = multistart_minimize(neg, starts, coarse_fev=400 * n, fatol=fatol, label=f"wwzb N={n}")
    return -res.fun, MeasurementSetting.from_angles(res.x)


def wwzb_threshold(
    pure: PureState, tol: float = 1e-9, restarts: int | None = None, seed: int = 0
) -> ThresholdReport:
    """Critical visibility for violating some two-setting correlation-function inequality.

    The statistic scales linearly with the visibility, so the crossing of 1
    is at ``1 / max S(pure)``.
    """
    if pure.n_qubits > 10:
        raise InvalidArgumentError("settings search is limited to N <= 10")
    t = correlation_tensor(pure)
    smax, settings = max_wwzb_statistic(t, restarts=restarts, seed=seed, fatol=tol)
    crit = min(1.0, 1.0 / smax) if smax > 0 else 1.0
    cert = wwzb_statistic(crit * correlation_values(t, settings))
    return ThresholdReport(pure.n_qubits, identify_family(pure), TestKind.WWZB, crit, settings, cert)


# --- closed-form thresholds ------------------------------------------------------


def _check_n(n: int, minimum: int) -> None:
    if int(n) != n or n < minimum:
        raise InvalidArgumentError(f"n must be an integer >= {minimum}, got {n!r}")


def threshold_w_conditioned(n: int) -> float:
    """Channel visibility at which the conditioned W pair reaches the CHSH point ``1/sqrt 2``."""
    _check_n(n, 3)
    return n / (SQRT2_MINUS_1 * 2 ** (n - 1) + n)


def threshold_ghz(n: int) -> float:
    _check_n(n, 2)
    return 1 / math.sqrt(2 ** (n - 1))


def threshold_g_crit(n: int) -> float:
    _check_n(n, 3)
    return n / (n + SQRT2_MINUS_1 * 2 ** (n - 2))


def threshold_functional_ghz(n: int) -> float:
    """GHZ visibility above which a one-plane functional Bell inequality is violated."""
    _check_n(n, 2)
    return 2 * (2 / math.pi) ** n


def functional_qm_norm(n: int, p: float, quadrature_points: int = 16) -> float:
    """Normalized squared norm ``(2 pi)^-N int (p cos(sum xi))^2 d xi`` by trapezoid rule.

    The periodic trapezoid rule with ``m`` nodes per axis is exact for
    trigonometric polynomials of degree below ``m``, so ``m >= 8`` gives
    ``p^2 / 2`` to rounding.
    """
    _check_n(n, 1)
    m = int(quadrature_points)
    if m < 8:
        raise InvalidArgumentError("need at least 8 quadrature points per axis")
    if m**n > 2**24:
        raise InvalidArgumentError(f"{m}^{n} nodes exceeds the quadrature grid limit")
    xi = 2 * np.pi * np.arange(m) / m
    total = np.zeros(1)
    for _ in range(n):
        total = (total[:, None] + xi[None, :]).ravel()
    e = p * np.cos(total)
    return float(np.mean(e * e))


def find_crossover(
    test_a: Callable[[int], float], test_b: Callable[[int], float], n_max: int, n_min: int = 3
) -> int | None:
    """Smallest ``n`` in ``[n_min, n_max]`` with ``test_a(n) < test_b(n)``."""
    for n in range(n_min, n_max + 1):
        if test_a(n) < test_b(n):
            return n
    return None
