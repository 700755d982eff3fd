import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from ecoclone.qudit import (
    Ket,
    Op,
    basis_ket,
    bell_state,
    fourier_matrix,
    max_entangled,
    partial_trace,
    partial_transpose,
    symmetric_ket,
    tensor,
)


def rand_op(rng, dims, hermitian=False):
    n = int(np.prod(dims))
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if hermitian:
        m = m + m.conj().T
    return Op(dims, m)


def loop_partial_trace(mat, dims, keep):
    """Oracle: sum over matching traced indices with explicit loops."""
    n = len(dims)
    out_dims = [dims[i] for i in keep]
    side = int(np.prod(out_dims))
    out = np.zeros((side, side), dtype=complex)
    idx = list(itertools.product(*[range(x) for x in dims]))
    flat = {t: i for i, t in enumerate(idx)}
    sub = list(itertools.product(*[range(x) for x in out_dims]))
    sflat = {t: i for i, t in enumerate(sub)}
    for r in idx:
        for c in idx:
            if all(r[i] == c[i] for i in range(n) if i not in keep):
                out[sflat[tuple(r[i] for i in keep)], sflat[tuple(c[i] for i in keep)]] += mat[flat[r], flat[c]]
    return out


def test_basis_ket():
    assert_allclose(basis_ket(2, 0).amps, [1, 0])
    assert_allclose(basis_ket(3, 2).amps, [0, 0, 1])
    G = np.array([[basis_ket(5, i).inner(basis_ket(5, j)) for j in range(5)] for i in range(5)])
    assert_allclose(G, np.eye(5))
    with pytest.raises(IndexError):
        basis_ket(3, 3)


def test_ket_validation():
    with pytest.raises(ValueError):
        Ket((2, 2), np.ones(3))
    with pytest.raises(ValueError):
        Ket((2,), np.zeros(2))
    with pytest.raises(ValueError):
        Op((2, 3), np.eye(5))


def test_max_entangled():
    assert_allclose(max_entangled(2).amps, np.array([1, 0, 0, 1]) / np.sqrt(2))
    red = partial_trace(max_entangled(3).proj(), [0])
    assert_allclose(red.mat, np.eye(3) / 3, atol=1e-15)
    for d in range(2, 8):
        assert_allclose(max_entangled(d).amps, bell_state(d, 0, 0).amps, atol=1e-15)
    with pytest.raises(ValueError):
        max_entangled(1)


def test_bell_singlet():
    assert_allclose(bell_state(2, 1, 1).amps, np.array([0, 1, -1, 0]) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("d", range(2, 8))
def test_bell_basis_orthonormal_and_maximally_entangled(d):
    B = np.column_stack([bell_state(d, m, n).amps for m in range(d) for n in range(d)])
    assert_allclose(B.conj().T @ B, np.eye(d * d), atol=1e-12)
    for m in range(d):
        for n in range(d):
            p = bell_state(d, m, n).proj()
            assert_allclose(partial_trace(p, [0]).mat, np.eye(d) / d, atol=1e-12)
            assert_allclose(partial_trace(p, [1]).mat, np.eye(d) / d, atol=1e-12)


def test_symmetric_ket():
    assert_allclose(symmetric_ket(2, 0, 1).amps, np.array([0, 1, 1, 0]) / np.sqrt(2))
    assert_allclose(symmetric_ket(3, 1, 1).amps, tensor(basis_ket(3, 1), basis_ket(3, 1)).amps)
    for d in range(2, 6):
        for k in range(d):
            for l in range(d):
                s = symmetric_ket(d, k, l)
                assert s.is_unit()
                assert_allclose(s.permute([1, 0]).amps, s.amps)


def test_tensor(rng):
    assert_allclose(tensor(basis_ket(2, 0), basis_ket(2, 1)).amps, [0, 1, 0, 0])
    assert_allclose(tensor(Op.identity((2,)), Op.identity((3,))).mat, np.eye(6))
    a = Ket((3,), rng.standard_normal(3) + 1j * rng.standard_normal(3))
    b = Ket((4,), rng.standard_normal(4) + 1j * rng.standard_normal(4))
    t = tensor(a, b)
    assert t.dims == (3, 4)
    assert t.norm == pytest.approx(a.norm * b.norm, rel=1e-13)
    with pytest.raises(TypeError):
        tensor(a, Op.identity((2,)))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_partial_trace_matches_loops(rng, d):
    op = rand_op(rng, (d, d, d), hermitian=True)
    for keep in ([0], [1], [2], [0, 1], [0, 2], [1, 2]):
        red = partial_trace(op, keep)
        assert_allclose(red.mat, loop_partial_trace(op.mat, op.dims, keep), atol=1e-12)
        assert red.trace() == pytest.approx(op.trace(), abs=1e-10)
        assert red.is_hermitian(1e-12)


def test_partial_trace_of_product(rng):
    A, B = rand_op(rng, (3,)), rand_op(rng, (2,))
    assert_allclose(partial_trace(tensor(A, B), [0]).mat, B.trace() * A.mat, atol=1e-12)
    with pytest.raises(IndexError):
        partial_trace(A, [1])


def test_partial_trace_mixed_dims(rng):
    op = rand_op(rng, (2, 3, 2))
    assert_allclose(partial_trace(op, [1]).mat, loop_partial_trace(op.mat, op.dims, [1]), atol=1e-12)
    assert_allclose(partial_trace(op, [0, 2]).mat, loop_partial_trace(op.mat, op.dims, [0, 2]), atol=1e-12)


def test_partial_transpose(rng):
    op = rand_op(rng, (3, 2, 2), hermitian=True)
    for f in range(3):
        twice = partial_transpose(partial_transpose(op, f), f)
        assert_allclose(twice.mat, op.mat)
        assert partial_transpose(op, f).is_hermitian(1e-12)
    ident = Op.identity((2, 3))
    assert_allclose(partial_transpose(ident, 1).mat, ident.mat)
    # full transpose on a single factor
    one = rand_op(rng, (4,))
    assert_allclose(partial_transpose(one, 0).mat, one.mat.T)


def test_partial_transpose_of_phi_plus_is_half_swap():
    pt = partial_transpose(max_entangled(2).proj(), 0)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert_allclose(pt.mat, swap / 2, atol=1e-15)
    assert_allclose(np.sort(np.linalg.eigvalsh(pt.mat)), [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


def test_fourier_matrix_unitary_and_unbiased():
    for d in range(2, 7):
        F = fourier_matrix(d)
        assert_allclose(F.conj().T @ F, np.eye(d), atol=1e-12)
        assert_allclose(np.abs(F) ** 2, np.full((d, d), 1 / d), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    d=st.integers(2, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_kronecker_norm_identity(d, seed):
    r = np.random.default_rng(seed)
    a = Ket((d,), r.standard_normal(d) + 1j * r.standard_normal(d))
    b = Ket((d, d), r.standard_normal(d * d) + 1j * r.standard_normal(d * d))
    assert tensor(a, b).norm == pytest.approx(a.norm * b.norm, rel=1e-12)
