import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wghz.conditioning import vis_w_n_to_2
from wghz.distillation import (
    BellTarget,
    WernerState,
    channel_visibility_for_target,
    hashing_root,
    hashing_yield,
    one_way_yield_ghz,
    one_way_yield_w,
    recurrence_step,
    separable_ball_radius,
    two_way_yield,
    werner_entropy,
    werner_separable,
    witness_bound_w,
    yield_report,
)
from wghz.errors import InvalidArgumentError, NoProgressError

PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)


def werner_phi_plus(f):
    v = (4 * f - 1) / 3
    return v * np.outer(PHI_PLUS, PHI_PLUS) + (1 - v) * np.eye(4) / 4


def bilateral_cnot_oracle(f):
    """Two Werner copies, CNOT A1->A2 and B1->B2, keep coincident z results on pair 2.

    Qubit order is (A1, B1, A2, B2).  Returns (fidelity of pair 1, success probability).
    """
    rho = np.kron(werner_phi_plus(f), werner_phi_plus(f))
    u = np.zeros((16, 16))
    for i in range(16):
        a1, b1, a2, b2 = (i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1
        j = (a1 << 3) | (b1 << 2) | ((a2 ^ a1) << 1) | (b2 ^ b1)
        u[j, i] = 1.0
    rho = u @ rho @ u.T
    t = rho.reshape(4, 4, 4, 4)  # (pair1, pair2, pair1', pair2')
    kept = t[:, 0, :, 0] + t[:, 3, :, 3]  # pair-2 outcomes 00 or 11
    success = np.trace(kept)
    return float(PHI_PLUS @ kept @ PHI_PLUS / success), float(success)


def ppt_separable(rho):
    pt = rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    return np.linalg.eigvalsh(pt).min() >= -1e-12


@pytest.mark.parametrize("f", [0.55, 0.625, 0.8, 0.95, 1.0])
def test_recurrence_matches_bilateral_cnot_oracle(f):
    out, success = recurrence_step(WernerState.from_fidelity(f))
    f_ref, d_ref = bilateral_cnot_oracle(f)
    assert out.fidelity == pytest.approx(f_ref, abs=1e-12)
    assert success == pytest.approx(d_ref, abs=1e-12)


def test_recurrence_values_at_half_visibility():
    out, success = recurrence_step(WernerState(0.5))
    # oracle-frozen: F = 5/8 maps to 13/20 with success 5/8
    assert out.fidelity == pytest.approx(0.65, abs=1e-12)
    assert success == pytest.approx(0.625, abs=1e-12)


def test_recurrence_monotone_and_fixed_point():
    fs = np.linspace(0.501, 0.999, 200)
    outs = np.array([recurrence_step(WernerState.from_fidelity(f))[0].fidelity for f in fs])
    assert np.all(outs > fs)
    assert np.all(np.diff(outs) > 0)
    out, success = recurrence_step(WernerState(1.0))
    assert out.fidelity == 1.0 and success == 1.0
    with pytest.raises(NoProgressError):
        recurrence_step(WernerState.from_fidelity(0.5))


@given(st.floats(0, 1))
def test_entropy_matches_dense_spectrum(v):
    lam = np.linalg.eigvalsh(WernerState(v).density_matrix())
    lam = lam[lam > 1e-15]
    assert werner_entropy(v) == pytest.approx(float(-np.sum(lam * np.log2(lam))), abs=1e-10)


@given(st.floats(0, 1))
def test_separability_matches_ppt(v):
    for target in BellTarget:
        rho = WernerState(v, target).density_matrix()
        if abs(v - 1 / 3) > 1e-9:
            assert werner_separable(v) == ppt_separable(rho)


def test_hashing_yield_values():
    assert hashing_yield(1.0) == pytest.approx(1.0)
    assert werner_entropy(0.5) == pytest.approx(1.5487949, abs=1e-6)
    assert hashing_yield(0.5) == 0.0
    v = vis_w_n_to_2(7, 0.9)
    assert v == pytest.approx(0.987993, abs=1e-6)
    assert hashing_yield(v) == pytest.approx(0.911604, abs=1e-6)


def test_hashing_root():
    root = hashing_root()
    assert werner_entropy(root) == pytest.approx(1.0, abs=1e-9)
    assert root == pytest.approx(0.7476, abs=1e-3)
    assert hashing_yield(root - 1e-6) == 0.0 < hashing_yield(root + 1e-6)


def test_two_way_yield():
    assert two_way_yield(0.5) > 0
    assert two_way_yield(0.3) == 0.0
    for v in np.linspace(0, 1, 41):
        assert hashing_yield(v) <= two_way_yield(v) + 1e-12
        assert 0 <= two_way_yield(v) <= 1


def test_yield_pipelines():
    r = one_way_yield_w(7, 0.9)
    assert r.one_way_yield == pytest.approx(0.2373, abs=1e-4)
    assert r.one_way_yield_per_pair == pytest.approx(hashing_yield(r.conditioned_visibility))
    assert one_way_yield_w(7, 0.5).one_way_yield == pytest.approx(0.0796, abs=1e-4)
    assert one_way_yield_ghz(0.9) == pytest.approx(0.4968, abs=1e-4)
    g = yield_report("GHZ", 7, 0.9)
    assert g.acceptance_probability == 1.0 and g.one_way_yield == one_way_yield_ghz(0.9)
    with pytest.raises(InvalidArgumentError):
        yield_report("G", 5, 0.5)


def test_channel_visibility_for_target():
    p = channel_visibility_for_target(7, 0.5)
    assert p == pytest.approx(7 / 71, abs=1e-15)
    for n in range(3, 12):
        for v in (0.0, 0.2, 0.9, 1.0):
            assert vis_w_n_to_2(n, channel_visibility_for_target(n, v)) == pytest.approx(v, abs=1e-12)


def test_witness_radii():
    assert separable_ball_radius(3) == pytest.approx(1 / 5)
    assert witness_bound_w(3) == pytest.approx(3 / 11)
    assert separable_ball_radius(10) / witness_bound_w(10) == pytest.approx((1 + 102.4) / 513)
    for n in range(3, 21):
        assert vis_w_n_to_2(n, witness_bound_w(n)) == pytest.approx(1 / 3, abs=1e-12)


def test_werner_fidelity_round_trip():
    w = WernerState.from_fidelity(0.8)
    assert w.fidelity == pytest.approx(0.8)
    assert math.isclose(w.spectrum().sum(), 1.0)
