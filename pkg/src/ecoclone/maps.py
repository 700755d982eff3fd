"""Choi-operator representation of 1 -> 2 cloning maps.

A map from one qudit ``in`` to two clones ``B`` and ``E`` is stored as a
positive operator on in (x) B (x) E normalized so that a trace-preserving
map has ``Tr_BE S = 1_in`` and hence ``Tr S = d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qudit import TOL, Ket, Op, partial_trace

#: Floor on the smallest eigenvalue accepted as positive semidefinite.
PSD_FLOOR = -1e-10


@dataclass(frozen=True, eq=False)
class ChoiOp:
    """Choi operator of a CP map on factors (in, B, E), each of dimension d."""

    op: Op
    d: int

    def __post_init__(self):
        d = self.d
        if self.op.dims != (d, d, d):
            raise ValueError(f"Choi operator must live on (in,B,E) with dims {(d, d, d)}, got {self.op.dims}")
        self.op.require_hermitian(TOL)
        lo = float(np.linalg.eigvalsh(self.op.mat)[0])
        if lo < PSD_FLOOR * max(1.0, d):
            raise ValueError(f"Choi operator is not positive semidefinite (min eigenvalue {lo:.3e})")

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    def trace(self) -> float:
        return float(self.op.trace().real)

    def rank(self, tol: float = 1e-9) -> int:
        w = np.linalg.eigvalsh(self.op.mat)
        return int(np.sum(w > tol * max(1.0, w[-1])))


def choi_from_vector(vec: np.ndarray, d: int) -> ChoiOp:
    """Rank-one Choi operator |S><S| from an (in,B,E) vector."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return ChoiOp(Op((d, d, d), np.outer(vec, vec.conj())), d)


def isometry_vector(V: np.ndarray, d: int) -> np.ndarray:
    """|S> = sum_k |k>_in (x) V|k> for a (d*d, d) isometry ``V``."""
    V = np.asarray(V, dtype=complex)
    if V.shape != (d * d, d):
        raise ValueError(f"isometry must have shape {(d * d, d)}, got {V.shape}")
    # row k of V.T is V|k>
    return V.T.reshape(-1)


def choi_from_isometry(V: np.ndarray, d: int, tol: float = TOL) -> ChoiOp:
    """Choi operator of the pure map |psi> -> V|psi>, with V: C^d -> C^d (x) C^d."""
    V = np.asarray(V, dtype=complex)
    if V.shape != (d * d, d):
        raise ValueError(f"isometry must have shape {(d * d, d)}, got {V.shape}")
    err = np.max(np.abs(V.conj().T @ V - np.eye(d)))
    if err > tol:
        raise ValueError(f"V is not an isometry (max |V^dag V - 1| = {err:.3e})")
    return choi_from_vector(isometry_vector(V, d), d)


def isometry_from_unitary(U: Op, blank: int = 0) -> np.ndarray:
    """Isometry |k> -> U (|k>_B |blank>_E) for a unitary on B (x) E."""
    d = U.dims[0]
    if U.dims != (d, d):
        raise ValueError("expected a two-factor unitary on B (x) E")
    return U.mat[:, [k * d + blank for k in range(d)]]


def trace_condition_residual(S: ChoiOp) -> float:
    """Frobenius norm of Tr_BE[S] - 1_in."""
    red = partial_trace(S.op, [0]).mat
    return float(np.linalg.norm(red - np.eye(S.d)))


def is_trace_preserving(S: ChoiOp, tol: float = 1e-10) -> tuple[bool, float]:
    """Return ``(ok, residual)`` with residual = ||Tr_BE S - 1||_F."""
    r = trace_condition_residual(S)
    return r <= tol, r


def _require_density(rho: Op, d: int, tol: float) -> None:
    if rho.dims != (d,):
        raise ValueError(f"input state must be a single d={d} factor, got dims {rho.dims}")
    rho.require_hermitian(tol)
    tr = rho.trace()
    if abs(tr - 1) > tol:
        raise ValueError(f"input state has trace {tr.real:.6g}, expected 1")
    if np.linalg.eigvalsh(rho.mat)[0] < -tol:
        raise ValueError("input state is not positive semidefinite")


def apply_map(S: ChoiOp, rho_in: Op, tol: float = TOL) -> Op:
    """Output state on B (x) E: Tr_in[(rho_in^T (x) 1) S]."""
    d = S.d
    _require_density(rho_in, d, tol)
    s = S.mat.reshape(d, d * d, d, d * d)
    out = np.einsum("ji,joiq->oq", rho_in.mat, s)
    return Op((d, d), out)


def clone_fidelities(S: ChoiOp, psi: Ket, tol: float = 1e-12) -> tuple[float, float]:
    """Single-state fidelities (F_B, F_E) of the two clones for input ``psi``."""
    d = S.d
    if psi.dims != (d,):
        raise ValueError(f"psi must live on one factor of dimension {d}")
    if not psi.is_unit(tol):
        raise ValueError(f"psi must have unit norm, got {psi.norm!r}")
    v = psi.amps
    vv = np.kron(v.conj(), v)
    sb = partial_trace(S.op, [0, 1]).mat
    se = partial_trace(S.op, [0, 2]).mat
    return float(np.vdot(vv, sb @ vv).real), float(np.vdot(vv, se @ vv).real)


def mean_fidelity(S: ChoiOp, R: Op, tol: float = TOL) -> float:
    """Tr(S R), the average clone fidelity for the figure of merit ``R``."""
    if R.dims != S.op.dims:
        raise ValueError(f"dimension mismatch: R on {R.dims}, S on {S.op.dims}")
    val = np.sum(S.mat * R.mat.T)
    if abs(val.imag) > tol * max(1.0, abs(val)):
        raise ValueError(f"Tr(SR) has imaginary part {val.imag:.3e}; is R Hermitian?")
    return float(val.real)


def random_choi(d: int, rng: np.random.Generator, kraus_rank: int | None = None) -> ChoiOp:
    """Random trace-preserving cloning map from a Haar-random Stinespring isometry."""
    from .qudit import random_isometry

    k = kraus_rank or d
    W = random_isometry(d, d * d * k, rng)
    # |k>_in (x) W|k> on (in, B, E, anc), then trace the ancilla
    t = W.T.reshape(d * d * d, k)
    return ChoiOp(Op((d, d, d), t @ t.conj().T), d)
