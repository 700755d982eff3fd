"""Tensor-product linear algebra over d-dimensional complex factors.

States and operators carry their factor dimensions so that partial traces
and partial transposes can be taken by factor index. Factor ordering is
left to right, matching ``np.kron``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

#: Absolute tolerance for exact-structure checks (unitarity, Hermiticity, ...).
TOL = 1e-10


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(x) for x in dims)
    if not dims or any(x < 1 for x in dims):
        raise ValueError(f"factor dimensions must be positive integers, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class Ket:
    """Vector on a tensor product of factors with dimensions ``dims``."""

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"{amps.size} amplitudes do not fit dims {dims}")
        nrm = np.linalg.norm(amps)
        if not np.isfinite(nrm) or nrm == 0:
            raise ValueError("ket norm must be finite and nonzero")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_unit(self, tol: float = 1e-12) -> bool:
        return abs(self.norm - 1.0) <= tol

    def normalized(self) -> "Ket":
        return Ket(self.dims, self.amps / self.norm)

    def inner(self, other: "Ket") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def proj(self) -> "Op":
        """The (unnormalized) outer product |self><self|."""
        return Op(self.dims, np.outer(self.amps, self.amps.conj()))

    def permute(self, order: Sequence[int]) -> "Ket":
        """Reorder factors: new factor i is old factor ``order[i]``."""
        t = self.amps.reshape(self.dims).transpose(order)
        return Ket(tuple(self.dims[i] for i in order), t.reshape(-1))

    def __add__(self, other: "Ket") -> "Ket":
        _same_dims(self, other)
        return Ket(self.dims, self.amps + other.amps)

    def __sub__(self, other: "Ket") -> "Ket":
        _same_dims(self, other)
        return Ket(self.dims, self.amps - other.amps)

    def __mul__(self, c: complex) -> "Ket":
        return Ket(self.dims, c * self.amps)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Op:
    """Square matrix on a tensor product of factors with dimensions ``dims``."""

    dims: tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = np.asarray(self.mat, dtype=complex)
        n = int(np.prod(dims))
        if mat.shape != (n, n):
            raise ValueError(f"matrix of shape {mat.shape} does not fit dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Op":
        dims = _check_dims(dims)
        return cls(dims, np.eye(int(np.prod(dims)), dtype=complex))

    @property
    def dag(self) -> "Op":
        return Op(self.dims, self.mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def require_hermitian(self, tol: float = 1e-12) -> None:
        err = self.hermiticity_error()
        if err > tol:
            raise ValueError(f"operator is not Hermitian (max deviation {err:.3e})")

    def apply(self, ket: Ket) -> Ket:
        _same_dims(self, ket)
        return Ket(self.dims, self.mat @ ket.amps)

    def expect(self, ket: Ket) -> complex:
        return complex(np.vdot(ket.amps, self.mat @ ket.amps))

    def permute(self, order: Sequence[int]) -> "Op":
        """Reorder factors: new factor i is old factor ``order[i]``."""
        n = len(self.dims)
        t = self.mat.reshape(self.dims + self.dims)
        t = t.transpose(list(order) + [n + i for i in order])
        dims = tuple(self.dims[i] for i in order)
        side = int(np.prod(dims))
        return Op(dims, t.reshape(side, side))

    def __matmul__(self, other):
        if isinstance(other, Ket):
            return self.apply(other)
        _same_dims(self, other)
        return Op(self.dims, self.mat @ other.mat)

    def __add__(self, other: "Op") -> "Op":
        _same_dims(self, other)
        return Op(self.dims, self.mat + other.mat)

    def __sub__(self, other: "Op") -> "Op":
        _same_dims(self, other)
        return Op(self.dims, self.mat - other.mat)

    def __mul__(self, c: complex) -> "Op":
        return Op(self.dims, c * self.mat)

    __rmul__ = __mul__


def _same_dims(a, b) -> None:
    if a.dims != b.dims:
        raise ValueError(f"factor dimensions differ: {a.dims} vs {b.dims}")


def _check_index(name: str, k: int, d: int) -> None:
    if not 0 <= k < d:
        raise IndexError(f"{name}={k} out of range for dimension {d}")


def basis_ket(d: int, k: int) -> Ket:
    """Computational basis vector |k> on one factor of dimension ``d``."""
    _check_index("k", k, d)
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return Ket((d,), v)


def max_entangled(d: int) -> Ket:
    """(1/sqrt(d)) sum_j |j>|j>."""
    if d < 2:
        raise ValueError("max_entangled requires d >= 2")
    v = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return Ket((d, d), v)


def root_of_unity(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def bell_state(d: int, m: int, n: int) -> Ket:
    """Generalized Bell state (1/sqrt(d)) sum_k g^(k n) |k>|k+m mod d>,
    with g = exp(2 pi i / d)."""
    _check_index("m", m, d)
    _check_index("n", n, d)
    g = root_of_unity(d)
    v = np.zeros((d, d), dtype=complex)
    for k in range(d):
        v[k, (k + m) % d] = g ** ((k * n) % d)
    return Ket((d, d), v.reshape(-1) / np.sqrt(d))


def symmetric_ket(d: int, k: int, l: int) -> Ket:
    """|kl+> = (|kl> + |lk>)/sqrt(2) for k != l, and |kk> otherwise."""
    _check_index("k", k, d)
    _check_index("l", l, d)
    v = np.zeros((d, d), dtype=complex)
    if k == l:
        v[k, k] = 1.0
    else:
        v[k, l] = v[l, k] = 1 / np.sqrt(2)
    return Ket((d, d), v.reshape(-1))


def fourier_matrix(d: int) -> np.ndarray:
    """Unitary DFT matrix F[j, k] = g^(j k) / sqrt(d)."""
    j = np.arange(d)
    return root_of_unity(d) ** (np.outer(j, j) % d) / np.sqrt(d)


def tensor(*items: Union[Ket, Op]) -> Union[Ket, Op]:
    """Kronecker product of kets or of operators, concatenating dims."""
    if not items:
        raise ValueError("tensor needs at least one factor")
    first = items[0]
    kind = type(first)
    if any(type(x) is not kind for x in items):
        raise TypeError("cannot mix kets and operators in a tensor product")
    dims: tuple[int, ...] = ()
    if kind is Ket:
        out = np.ones(1, dtype=complex)
        for x in items:
            out = np.kron(out, x.amps)
            dims += x.dims
        return Ket(dims, out)
    out = np.ones((1, 1), dtype=complex)
    for x in items:
        out = np.kron(out, x.mat)
        dims += x.dims
    return Op(dims, out)


def _factor_indices(idx: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in idx))
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"factor index {i} invalid for {n} factors")
    return idx


def partial_trace(op: Op, keep: Iterable[int]) -> Op:
    """Trace out every factor not listed in ``keep``."""
    n = len(op.dims)
    keep = _factor_indices(keep, n)
    if not keep:
        raise ValueError("must keep at least one factor")
    traced = [i for i in range(n) if i not in keep]
    t = op.mat.reshape(op.dims + op.dims)
    # contract traced pairs from the highest index down so positions stay valid
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    dims = tuple(op.dims[i] for i in keep)
    side = int(np.prod(dims))
    return Op(dims, t.reshape(side, side))


def partial_transpose(op: Op, factor: int) -> Op:
    """Transpose factor ``factor`` in the computational basis."""
    n = len(op.dims)
    (factor,) = _factor_indices([factor], n)
    t = op.mat.reshape(op.dims + op.dims)
    axes = list(range(2 * n))
    axes[factor], axes[n + factor] = axes[n + factor], axes[factor]
    return Op(op.dims, t.transpose(axes).reshape(op.mat.shape))


def haar_kets(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random unit vectors in C^d as rows.

    Normalized i.i.d. standard complex Gaussian vectors.
    """
    z = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def balanced_kets(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows (1/sqrt(d)) sum_j exp(i phi_j)|j> with uniform random phases."""
    phases = rng.uniform(0.0, 2 * np.pi, size=(count, d))
    return np.exp(1j * phases) / np.sqrt(d)


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry C^d_in -> C^d_out as a (d_out, d_in) array."""
    z = rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
