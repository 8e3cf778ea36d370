"""Dense N-qubit states, white-noise admixture and Pauli correlation tensors.

Conventions used everywhere in the package:

* Qubit 0 is the most significant bit of a basis index, so the label
  ``"100"`` is index 4 and ket ``|1>`` sits on the first qubit.
* ``sigma_z = |1><1| - |0><0|``.  The ``-1`` outcome of a z measurement is
  associated with ``|0>``.  This is the negative of the textbook convention.
  To keep the Pauli triple right-handed (``sigma_x sigma_y = i sigma_z``)
  ``sigma_y`` is flipped as well; equivalently every Pauli here is
  ``X P X`` for the textbook ``P``.
* Measurement results are ``-1`` / ``+1``; setting choices are ``0`` / ``1``.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
PAULIS = np.array([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])
PAULI_LABELS = "0xyz"

MAX_DENSE_QUBITS = 14
# 4^n tensor entries plus a 2^n x 2^n matrix are materialized up to this size;
# beyond it use tensor_component().
MAX_TENSOR_QUBITS = 10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def _check_n(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise InvalidArgumentError(f"number of qubits must be an integer >= {minimum}, got {n!r}")
    if n > MAX_DENSE_QUBITS:
        raise InvalidArgumentError(f"dense representation is capped at {MAX_DENSE_QUBITS} qubits, got {n}")


def _check_visibility(p: float, name: str = "visibility") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {p}")
    return p


def basis_label(index: int, n: int) -> str:
    return format(index, f"0{n}b")


@dataclass(frozen=True, eq=False)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_n(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != 2 ** self.n_qubits:
            raise InvalidArgumentError(
                f"expected {2 ** self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.size}"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-12:
            raise InvalidArgumentError(f"state is not normalized (squared norm {norm!r})")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.projector())

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[int(label, 2)])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        _check_n(self.n_qubits)
        rho = np.asarray(self.entries, dtype=complex)
        d = 2 ** self.n_qubits
        if rho.shape != (d, d):
            raise InvalidArgumentError(f"expected a {d}x{d} matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise InvalidArgumentError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-12:
            raise InvalidArgumentError(f"density matrix has trace {tr!r}")
        # full spectrum check is cheap up to 1024 x 1024
        if self.n_qubits <= 10:
            lam = np.linalg.eigvalsh(rho)[0]
            if lam < -1e-10:
                raise InvalidArgumentError(f"density matrix has negative eigenvalue {lam!r}")
        object.__setattr__(self, "entries", _readonly(rho))

    def density_matrix(self) -> "DensityMatrix":
        return self


@dataclass(frozen=True, eq=False)
class NoisyState:
    """``visibility * |pure><pure| + (1 - visibility) * I / 2^N``."""

    pure: PureState
    visibility: float

    def __post_init__(self):
        object.__setattr__(self, "visibility", _check_visibility(self.visibility))

    @property
    def n_qubits(self) -> int:
        return self.pure.n_qubits

    def density_matrix(self) -> DensityMatrix:
        d = 2 ** self.n_qubits
        p = self.visibility
        return DensityMatrix(self.n_qubits, p * self.pure.projector() + (1 - p) * np.eye(d) / d)


State = PureState | DensityMatrix | NoisyState


def as_density_matrix(state: State) -> DensityMatrix:
    return state.density_matrix()


def make_w_state(n: int) -> PureState:
    """Equal superposition of the ``n`` basis kets with a single ``1``."""
    _check_n(n, 2)
    amps = np.zeros(2 ** n)
    for k in range(n):
        amps[1 << (n - 1 - k)] = 1.0
    return PureState(n, amps / np.sqrt(n))


def make_w_bar_state(n: int) -> PureState:
    """Bit-flipped W state: one ``0`` and ``n - 1`` ones."""
    w = make_w_state(n)
    return PureState(n, w.amplitudes[::-1])


def make_ghz_state(n: int) -> PureState:
    _check_n(n, 2)
    amps = np.zeros(2 ** n)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def make_g_state(n: int) -> PureState:
    """``(|W_n> + |W_bar_n>) / sqrt(2)``; for ``n = 2`` this is defined as ``|W_2>``."""
    _check_n(n, 2)
    if n == 2:
        return make_w_state(2)
    amps = (make_w_state(n).amplitudes + make_w_bar_state(n).amplitudes) / np.sqrt(2)
    return PureState(n, amps)


def mix_with_white_noise(pure: PureState, p: float) -> NoisyState:
    return NoisyState(pure, _check_visibility(p, "p"))


def depolarize(pure: PureState, p: float) -> NoisyState:
    """Send ``pure`` through a global depolarizing channel of visibility ``p``.

    The channel is modeled as global white-noise admixture, so this is the
    same map as :func:`mix_with_white_noise`.
    """
    return mix_with_white_noise(pure, p)


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """All ``4^N`` Pauli expectation values, stored with shape ``(4,) * N``.

    Axis values 0, 1, 2, 3 stand for the labels ``0 x y z``.
    """

    n_qubits: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (4,) * self.n_qubits:
            raise InvalidArgumentError(f"tensor shape {v.shape} does not match {self.n_qubits} qubits")
        object.__setattr__(self, "values", _readonly(v))

    def __getitem__(self, label: str) -> float:
        return float(self.values[_label_index(label, self.n_qubits)])

    def cartesian(self) -> np.ndarray:
        """The ``(3,) * N`` block with no identity index (axes x, y, z)."""
        return self.values[(slice(1, 4),) * self.n_qubits]

    def items(self) -> Iterable[tuple[str, float]]:
        for idx in itertools.product(range(4), repeat=self.n_qubits):
            yield "".join(PAULI_LABELS[i] for i in idx), float(self.values[idx])


def _label_index(label: str, n: int) -> tuple[int, ...]:
    if len(label) != n or any(c not in PAULI_LABELS for c in label):
        raise InvalidArgumentError(f"bad tensor label {label!r} for {n} qubits")
    return tuple(PAULI_LABELS.index(c) for c in label)


def _contract_pairs(rho: np.ndarray, n: int, local: np.ndarray) -> np.ndarray:
    """Contract each (row, column) qubit pair of ``rho`` with ``local[..., j, i]``.

    ``local`` has shape ``(m, 2, 2)``; the result has shape ``(m,) * n`` and
    holds ``tr(rho  local[a_1] (x) ... (x) local[a_n])``.
    """
    t = rho.reshape((2,) * (2 * n))
    for k in range(n):
        t = np.tensordot(t, local, axes=([0, n - k], [2, 1]))
    return t


def correlation_tensor(rho: State) -> CorrelationTensor:
    """``T[a_1..a_N] = tr(rho sigma_a_1 (x) ... (x) sigma_a_N)`` for every label."""
    if isinstance(rho, NoisyState):
        pure = correlation_tensor(rho.pure).values
        t = rho.visibility * pure
        t[(0,) * rho.n_qubits] = 1.0
        return CorrelationTensor(rho.n_qubits, t)
    if rho.n_qubits > MAX_TENSOR_QUBITS:
        raise InvalidArgumentError(
            f"materialized tensors are capped at {MAX_TENSOR_QUBITS} qubits; use tensor_component()"
        )
    mat = rho.projector() if isinstance(rho, PureState) else rho.entries
    t = _contract_pairs(mat, rho.n_qubits, PAULIS)
    return CorrelationTensor(rho.n_qubits, t.real)


def tensor_component(state: PureState | NoisyState, label: str) -> float:
    """One correlation-tensor entry, computed from the state vector."""
    p = 1.0
    if isinstance(state, NoisyState):
        p = state.visibility
        state = state.pure
    n = state.n_qubits
    idx = _label_index(label, n)
    if all(i == 0 for i in idx):
        return 1.0
    psi = state.amplitudes.reshape((2,) * n)
    phi = psi
    for k, a in enumerate(idx):
        if a:
            phi = np.moveaxis(np.tensordot(PAULIS[a], phi, axes=([1], [k])), 0, k)
    return p * float(np.vdot(psi, phi).real)


def reconstruct_density_matrix(t: CorrelationTensor) -> np.ndarray:
    """Invert :func:`correlation_tensor`: ``rho = 2^-N sum_a T_a sigma_a``."""
    n = t.n_qubits
    m = t.values.astype(complex)
    # expand one index at a time into a (row, column) pair
    for _ in range(n):
        m = np.tensordot(m, PAULIS, axes=([0], [0]))
    # axes are now (r_1, c_1, r_2, c_2, ...)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    d = 2 ** n
    return m.transpose(order).reshape(d, d) / d


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """One proper rotation per observer; row ``a`` of ``matrices[k]`` is the new axis ``a``."""

    matrices: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.matrices, dtype=float)
        if r.ndim != 3 or r.shape[1:] != (3, 3):
            raise InvalidArgumentError(f"expected shape (n, 3, 3), got {r.shape}")
        eye = np.eye(3)
        for k, mat in enumerate(r):
            if np.max(np.abs(mat @ mat.T - eye)) > 1e-10 or abs(np.linalg.det(mat) - 1) > 1e-10:
                raise InvalidArgumentError(f"frame of observer {k} is not a proper rotation")
        object.__setattr__(self, "matrices", _readonly(r))

    @property
    def n_qubits(self) -> int:
        return self.matrices.shape[0]

    @classmethod
    def identity(cls, n: int) -> "LocalFrame":
        return cls(np.tile(np.eye(3), (n, 1, 1)))

    @classmethod
    def from_euler(cls, angles) -> "LocalFrame":
        """Per observer ``(phi, theta, psi)``: rotate about z, then the new x, then the new z."""
        angles = np.atleast_2d(np.asarray(angles, dtype=float))
        rot = Rotation.from_euler("ZXZ", angles).as_matrix()
        return cls(np.transpose(rot, (0, 2, 1)))

    def compose(self, first: "LocalFrame") -> "LocalFrame":
        """The frame reached by applying ``first`` and then ``self``."""
        return LocalFrame(self.matrices @ first.matrices)


def rotate_tensor(t: CorrelationTensor, frames: LocalFrame) -> CorrelationTensor:
    if frames.n_qubits != t.n_qubits:
        raise InvalidArgumentError(f"{frames.n_qubits} frames for a {t.n_qubits}-qubit tensor")
    v = t.values
    for r in frames.matrices:
        r4 = np.eye(4)
        r4[1:, 1:] = r
        v = np.tensordot(v, r4, axes=([0], [1]))
    return CorrelationTensor(t.n_qubits, v)


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    """``directions[k, s]`` is the Bloch unit vector of observer ``k`` for setting ``s``."""

    directions: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        if d.ndim != 3 or d.shape[1:] != (2, 3):
            raise InvalidArgumentError(f"expected shape (n, 2, 3), got {d.shape}")
        if np.max(np.abs(np.linalg.norm(d, axis=-1) - 1)) > 1e-12:
            raise InvalidArgumentError("measurement directions must be unit vectors")
        object.__setattr__(self, "directions", _readonly(d))

    @property
    def n_qubits(self) -> int:
        return self.directions.shape[0]

    @classmethod
    def from_angles(cls, angles) -> "MeasurementSetting":
        """Polar/azimuth pairs, either flat ``(th, ph, th, ph, ...)`` or shaped ``(n, 2, 2)``."""
        a = np.asarray(angles, dtype=float).reshape(-1, 2, 2)
        return cls(sphere_points(a[..., 0], a[..., 1]))


def sphere_points(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def bloch_projector(direction, result: int) -> np.ndarray:
    """``(I + result * n.sigma) / 2`` for a unit vector ``n``."""
    n = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(n) - 1) > 1e-12:
        raise InvalidArgumentError(f"direction {n} is not a unit vector")
    if result not in (-1, 1):
        raise InvalidArgumentError(f"results are -1 or +1, got {result!r}")
    return (SIGMA_0 + result * np.tensordot(n, PAULIS[1:], axes=1)) / 2


def outcome_probability(
    rho: State, settings: MeasurementSetting, choice: Sequence[int], results: Sequence[int]
) -> float:
    """Born-rule probability of ``results`` when observer ``k`` measures setting ``choice[k]``."""
    rho = as_density_matrix(rho)
    n = rho.n_qubits
    if settings.n_qubits != n or len(choice) != n or len(results) != n:
        raise InvalidArgumentError("need one setting choice and one result per qubit")
    vals = rho.entries.reshape((2,) * (2 * n))
    for k in range(n):
        proj = bloch_projector(settings.directions[k, choice[k]], results[k])
        vals = np.tensordot(vals, proj, axes=([0, n - k], [1, 0]))
    return float(np.real(vals))


def _open_text(target, mode):
    if isinstance(target, (str, Path)):
        return open(target, mode, newline="", encoding="utf-8")
    return target


def write_state_csv(state: PureState | DensityMatrix, out: TextIO | str | Path) -> None:
    """Rows ``label,real,imag``; density-matrix labels are ``row:column`` bitstrings."""
    fh = _open_text(out, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "real", "imag"])
        n = state.n_qubits
        if isinstance(state, PureState):
            for i, a in enumerate(state.amplitudes):
                w.writerow([basis_label(i, n), repr(float(a.real)), repr(float(a.imag))])
        else:
            for (i, j), a in np.ndenumerate(state.entries):
                w.writerow([f"{basis_label(i, n)}:{basis_label(j, n)}", repr(float(a.real)), repr(float(a.imag))])
    finally:
        if fh is not out:
            fh.close()


def read_state_csv(src: TextIO | str | Path) -> PureState | DensityMatrix:
    fh = _open_text(src, "r")
    try:
        rows = list(csv.DictReader(fh))
    finally:
        if fh is not src:
            fh.close()
    vals = [complex(float(r["real"]), float(r["imag"])) for r in rows]
    if ":" in rows[0]["index"]:
        n = len(rows[0]["index"].split(":")[0])
        m = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for r, v in zip(rows, vals):
            i, j = (int(s, 2) for s in r["index"].split(":"))
            m[i, j] = v
        return DensityMatrix(n, m)
    n = len(rows[0]["index"])
    amps = np.zeros(2 ** n, dtype=complex)
    for r, v in zip(rows, vals):
        amps[int(r["index"], 2)] = v
    return PureState(n, amps)


def write_tensor_csv(t: CorrelationTensor, out: TextIO | str | Path) -> None:
    fh = _open_text(out, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "real", "imag"])
        for label, v in t.items():
            w.writerow([label, repr(v), "0.0"])
    finally:
        if fh is not out:
            fh.close()


def read_tensor_csv(src: TextIO | str | Path) -> CorrelationTensor:
    fh = _open_text(src, "r")
    try:
        rows = list(csv.DictReader(fh))
    finally:
        if fh is not src:
            fh.close()
    n = len(rows[0]["index"])
    v = np.zeros((4,) * n)
    for r in rows:
        v[_label_index(r["index"], n)] = float(r["real"])
    return CorrelationTensor(n, v)


def tensor_to_csv_text(t: CorrelationTensor) -> str:
    buf = io.StringIO()
    write_tensor_csv(t, buf)
    return buf.getvalue()
