import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ecoclone.economical import niu_griffiths
from ecoclone.maps import (
    ChoiOp,
    isometry_from_unitary,
    apply_map,
    choi_from_isometry,
    choi_from_vector,
    clone_fidelities,
    is_trace_preserving,
    mean_fidelity,
    random_choi,
)
from ecoclone.merit import r_fourier, r_phase_covariant, r_universal
from ecoclone.qudit import Ket, Op, balanced_kets, haar_kets, partial_trace, random_isometry


def identity_channel(d):
    """|k> -> |k>_B |0>_E."""
    V = np.zeros((d * d, d), dtype=complex)
    for k in range(d):
        V[k * d, k] = 1
    return V


def rand_density(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    r = z @ z.conj().T
    return Op((d,), r / np.trace(r))


def test_identity_channel(rng):
    d = 3
    S = choi_from_isometry(identity_channel(d), d)
    assert S.trace() == pytest.approx(d)
    ok, res = is_trace_preserving(S)
    assert ok and res < 1e-12
    psi = Ket((d,), haar_kets(d, 1, rng)[0])
    fb, fe = clone_fidelities(S, psi)
    assert fb == pytest.approx(1.0, abs=1e-12)
    assert fe == pytest.approx(abs(psi.amps[0]) ** 2, abs=1e-12)
    rho = rand_density(rng, d)
    zero = np.zeros((d, d))
    zero[0, 0] = 1
    assert_allclose(apply_map(S, rho).mat, np.kron(rho.mat, zero), atol=1e-12)


def test_basis_input_fidelity_of_identity_channel_is_one_over_d():
    # averaged over computational-basis inputs E holds |0> so F_E = 1/d
    d = 4
    S = choi_from_isometry(identity_channel(d), d)
    fe = np.mean([clone_fidelities(S, Ket((d,), np.eye(d)[k]))[1] for k in range(d)])
    assert fe == pytest.approx(1 / d)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_random_isometry_choi_is_trace_preserving(rng, d):
    S = choi_from_isometry(random_isometry(d, d * d, rng), d)
    assert S.trace() == pytest.approx(d, abs=1e-12)
    assert is_trace_preserving(S)[1] < 1e-12


def test_non_isometry_rejected():
    V = np.zeros((4, 2))
    V[0, 0] = V[0, 1] = 1
    with pytest.raises(ValueError):
        choi_from_isometry(V, 2)


def test_depolarizing_choi_is_trace_preserving():
    d = 3
    S = ChoiOp(Op((d, d, d), np.eye(d**3) * d / d**3), d)
    assert is_trace_preserving(S)[0]


def test_non_trace_preserving_residual():
    d = 3
    v = np.zeros(d**3)
    v[0] = math.sqrt(d)
    S = choi_from_vector(v, d)
    ok, res = is_trace_preserving(S)
    expected = np.diag([d, 0, 0]) - np.eye(d)
    assert not ok
    assert res == pytest.approx(np.linalg.norm(expected), abs=1e-12)


def test_not_psd_rejected():
    d = 2
    m = np.eye(8)
    m[0, 0] = -1
    with pytest.raises(ValueError):
        ChoiOp(Op((d, d, d), m), d)


def test_ng_choi_matches_closed_form_vector():
    V = isometry_from_unitary(niu_griffiths(math.pi / 4))
    S = choi_from_isometry(V, 2)
    v = np.zeros(8)
    v[0] = 1  # |0>|00>
    v[4 + 1] = v[4 + 2] = 1 / math.sqrt(2)  # |1>(|01> + |10>)/sqrt2
    assert_allclose(S.mat, np.outer(v, v), atol=1e-15)
    out = apply_map(S, Op((2,), np.diag([1.0, 0.0])))
    assert_allclose(out.mat, np.diag([1.0, 0, 0, 0]), atol=1e-15)


def test_apply_map_unit_trace_and_linearity(rng):
    d = 3
    S = random_choi(d, rng)
    r1, r2 = rand_density(rng, d), rand_density(rng, d)
    o1, o2 = apply_map(S, r1), apply_map(S, r2)
    assert o1.trace() == pytest.approx(1.0, abs=1e-12)
    mix = Op((d,), 0.3 * r1.mat + 0.7 * r2.mat)
    assert_allclose(apply_map(S, mix).mat, 0.3 * o1.mat + 0.7 * o2.mat, atol=1e-12)


def test_apply_map_rejects_non_states():
    S = choi_from_isometry(identity_channel(2), 2)
    with pytest.raises(ValueError):
        apply_map(S, Op((2,), np.diag([2.0, 0.0])))
    with pytest.raises(ValueError):
        apply_map(S, Op((2,), np.array([[0.5, 1], [0, 0.5]])))


@pytest.mark.parametrize("d", [2, 3])
def test_fidelity_formulas_agree(rng, d):
    """Tr(psi^T (x) psi (x) 1 S) against <psi|Tr_E apply_map(S, psi)|psi>."""
    for _ in range(5):
        S = random_choi(d, rng)
        psi = Ket((d,), haar_kets(d, 1, rng)[0])
        fb, fe = clone_fidelities(S, psi)
        out = apply_map(S, psi.proj())
        rb = partial_trace(out, [0]).mat
        re = partial_trace(out, [1]).mat
        assert fb == pytest.approx(np.vdot(psi.amps, rb @ psi.amps).real, abs=1e-12)
        assert fe == pytest.approx(np.vdot(psi.amps, re @ psi.amps).real, abs=1e-12)
        assert -1e-10 <= fb <= 1 + 1e-10 and -1e-10 <= fe <= 1 + 1e-10


def test_clone_fidelities_rejects_non_unit():
    S = choi_from_isometry(identity_channel(2), 2)
    with pytest.raises(ValueError):
        clone_fidelities(S, Ket((2,), [1.0, 1.0]))


def test_mean_fidelity_dimension_mismatch():
    S = choi_from_isometry(identity_channel(2), 2)
    with pytest.raises(ValueError):
        mean_fidelity(S, r_universal(3))


@pytest.mark.parametrize("kind,draw", [("universal", haar_kets), ("phase_covariant", balanced_kets)])
def test_mean_fidelity_matches_sampled_average(rng, kind, draw):
    d = 2
    R = r_universal(d) if kind == "universal" else r_phase_covariant(d)
    S = random_choi(d, rng)
    psis = draw(d, 10_000, rng)
    vals = np.array([np.mean(clone_fidelities(S, Ket((d,), p))) for p in psis])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - mean_fidelity(S, R)) <= 3 * se


@pytest.mark.parametrize("d", [2, 3])
def test_bound_holds_for_random_channels(rng, d):
    for R in (r_universal(d), r_phase_covariant(d), r_fourier(d)):
        rmax = np.linalg.eigvalsh(R.mat)[-1]
        for _ in range(10):
            f = mean_fidelity(random_choi(d, rng, kraus_rank=int(rng.integers(1, d + 2))), R)
            assert 0 <= f <= d * rmax + 1e-9
