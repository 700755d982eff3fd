"""Fidelity operators R and their maximal eigenspaces.

For a state family with measure dpsi the clone fidelities are linear in the
Choi operator, F_B = Tr(S R_B) and F_E = Tr(S R_E), with

    R_B = int psi^T (x) psi (x) 1 dpsi,    R_E = int psi^T (x) 1 (x) psi dpsi,

and R = (R_B + R_E)/2. Every R here is assembled from the two-factor average
M = int psi^T (x) psi dpsi on (in, clone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import subspace_angles

from .qudit import (
    Ket,
    Op,
    balanced_kets,
    basis_ket,
    fourier_matrix,
    haar_kets,
    max_entangled,
    tensor,
)

KINDS = ("universal", "phase_covariant", "fourier")

#: Range of dimensions where the maximal-eigenspace conjecture has been checked.
VERIFIED_DIMS = range(2, 8)


def normalize_kind(kind: str) -> str:
    k = kind.replace("-", "_").lower()
    if k == "phase_cov" or k == "pc":
        k = "phase_covariant"
    if k not in KINDS:
        raise ValueError(f"unknown figure of merit {kind!r}; expected one of {KINDS}")
    return k


def clone_average(M: np.ndarray, d: int) -> Op:
    """R = (M_{in,B} (x) 1_E + M_{in,E} (x) 1_B) / 2 for a two-factor M."""
    M = np.asarray(M, dtype=complex).reshape(d, d, d, d)
    eye = np.eye(d)
    rb = np.einsum("abAB,eE->abeABE", M, eye)
    re = np.einsum("aeAE,bB->abeABE", M, eye)
    n = d**3
    return Op((d, d, d), 0.5 * (rb + re).reshape(n, n))


def _phi_proj(d: int) -> np.ndarray:
    return max_entangled(d).proj().mat


def universal_two_factor(d: int) -> np.ndarray:
    """Haar average of psi^T (x) psi: (1 + d Phi+)/(d(d+1))."""
    return (np.eye(d * d) + d * _phi_proj(d)) / (d * (d + 1))


def phase_covariant_two_factor(d: int) -> np.ndarray:
    """Phase average of psi^T (x) psi over balanced superpositions."""
    diag = np.zeros(d * d)
    diag[:: d + 1] = 1.0
    return _phi_proj(d) / d + np.eye(d * d) / d**2 - np.diag(diag) / d**2


def fourier_states(d: int) -> np.ndarray:
    """The 2d states of the computational and DFT bases, as rows."""
    return np.vstack([np.eye(d, dtype=complex), fourier_matrix(d).T])


def fourier_two_factor(d: int) -> np.ndarray:
    s = fourier_states(d)
    v = np.einsum("si,sj->sij", s.conj(), s).reshape(len(s), d * d)
    return np.einsum("si,sj->ij", v, v.conj()) / len(s)


def r_universal(d: int) -> Op:
    """R = (2 + d Phi+_{in,B} (x) 1_E + d Phi+_{in,E} (x) 1_B) / (2d(d+1))."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return clone_average(universal_two_factor(d), d)


def r_phase_covariant(d: int) -> Op:
    if d < 2:
        raise ValueError("d must be >= 2")
    return clone_average(phase_covariant_two_factor(d), d)


def r_fourier(d: int) -> Op:
    """Equal-weight average over the computational and Fourier bases."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return clone_average(fourier_two_factor(d), d)


def r_operator(kind: str, d: int) -> Op:
    kind = normalize_kind(kind)
    return {"universal": r_universal, "phase_covariant": r_phase_covariant, "fourier": r_fourier}[kind](d)


# --- independent oracles ------------------------------------------------------


def fourier_r_bruteforce(d: int) -> Op:
    """Literal sum over the 2d basis states of psi^T (x) psi (x) 1 and its E twin."""
    F = fourier_matrix(d)
    states = [basis_ket(d, k) for k in range(d)] + [Ket((d,), F[:, k]) for k in range(d)]
    ident = Op.identity((d,))
    acc = np.zeros((d**3, d**3), dtype=complex)
    for s in states:
        p = s.proj()
        pt = Op((d,), p.mat.T)
        rb = tensor(pt, p, ident)
        re = tensor(pt, ident, p)
        acc += 0.5 * (rb.mat + re.mat)
    return Op((d, d, d), acc / len(states))


@dataclass
class SampledOperator:
    """Monte-Carlo estimate of R with elementwise standard errors."""

    mean: Op
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    samples: int
    seed: int

    def compare(self, exact: Op, nsigma: float = 3.0, floor: float = 1e-12) -> dict:
        diff = self.mean.mat - exact.mat
        lim_re = nsigma * self.stderr_re + floor
        lim_im = nsigma * self.stderr_im + floor
        ok = bool(np.all(np.abs(diff.real) <= lim_re) and np.all(np.abs(diff.imag) <= lim_im))
        with np.errstate(divide="ignore", invalid="ignore"):
            z_re = np.where(self.stderr_re > 0, np.abs(diff.real) / self.stderr_re, 0.0)
            z_im = np.where(self.stderr_im > 0, np.abs(diff.imag) / self.stderr_im, 0.0)
        return {
            "max_abs_deviation": float(np.max(np.abs(diff))),
            "max_z": float(max(z_re.max(), z_im.max())),
            "max_stderr": float(max(self.stderr_re.max(), self.stderr_im.max())),
            "nsigma": nsigma,
            "pass": ok,
        }


def sample_r(kind: str, d: int, samples: int, seed: int, chunk: int = 2000) -> SampledOperator:
    """Estimate R by sampling the state family.

    ``universal`` draws Haar-random kets, ``phase_covariant`` draws uniform
    phase vectors. Chunk ``i`` uses the substream spawned from ``(seed, i)``
    so the estimate does not depend on how the work is split.
    """
    kind = normalize_kind(kind)
    if kind == "fourier":
        raise ValueError("the Fourier family is finite; use fourier_r_bruteforce")
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    draw = haar_kets if kind == "universal" else balanced_kets
    n = d**3
    s1 = np.zeros((n, n), dtype=complex)
    s2_re = np.zeros((n, n))
    s2_im = np.zeros((n, n))
    eye = np.eye(d)
    done = 0
    i = 0
    while done < samples:
        m = min(chunk, samples - done)
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        psi = draw(d, m, rng)
        v = np.einsum("si,sj->sij", psi.conj(), psi).reshape(m, d * d)
        X = np.einsum("si,sj->sij", v, v.conj()).reshape(m, d, d, d, d)
        rb = np.einsum("sabAB,eE->sabeABE", X, eye)
        re = np.einsum("saeAE,bB->sabeABE", X, eye)
        Rs = (0.5 * (rb + re)).reshape(m, n, n)
        s1 += Rs.sum(axis=0)
        s2_re += (Rs.real**2).sum(axis=0)
        s2_im += (Rs.imag**2).sum(axis=0)
        done += m
        i += 1
    mean = s1 / samples
    var_re = np.maximum(s2_re / samples - mean.real**2, 0.0) * samples / (samples - 1)
    var_im = np.maximum(s2_im / samples - mean.imag**2, 0.0) * samples / (samples - 1)
    return SampledOperator(
        mean=Op((d, d, d), mean),
        stderr_re=np.sqrt(var_re / samples),
        stderr_im=np.sqrt(var_im / samples),
        samples=samples,
        seed=seed,
    )


# --- eigenspace analysis ------------------------------------------------------


@dataclass
class EigenspaceReport:
    r_max: float
    degeneracy: int
    basis: list[Ket]
    full_spectrum: list[tuple[float, int]]
    gap: Optional[float]

    @property
    def basis_matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return np.column_stack([b.amps for b in self.basis])


def cluster_spectrum(w: np.ndarray, tol: float) -> list[tuple[float, int]]:
    """Group descending eigenvalues whose consecutive spacing is <= tol."""
    w = np.sort(np.asarray(w))[::-1]
    clusters: list[list[float]] = [[w[0]]]
    for x in w[1:]:
        if abs(clusters[-1][-1] - x) <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [(float(np.mean(c)), len(c)) for c in clusters]


def max_eigenspace(R: Op, degeneracy_tol: float = 1e-8) -> EigenspaceReport:
    """Largest eigenvalue of a Hermitian R, its multiplicity and eigenvectors.

    Eigenvalues closer than ``degeneracy_tol * ||R||`` are treated as equal.
    """
    R.require_hermitian(1e-12)
    w, v = np.linalg.eigh(R.mat)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    spectrum = cluster_spectrum(w, degeneracy_tol * scale)
    r_max, deg = spectrum[0]
    top = v[:, len(w) - deg :][:, ::-1]
    basis = [Ket(R.dims, top[:, i]) for i in range(deg)]
    gap = spectrum[0][0] - spectrum[1][0] if len(spectrum) > 1 else None
    return EigenspaceReport(float(w[-1]), deg, basis, spectrum, gap)


# --- conjectured eigenstates -------------------------------------------------


def _phi_with_k(d: int, k: int, clone: str) -> Ket:
    """|Phi+>_{in,clone} |k>_other, ordered as (in, B, E)."""
    t = tensor(max_entangled(d), basis_ket(d, k))  # (in, clone, other)
    return t if clone == "B" else t.permute([0, 2, 1])


def pc_alpha_beta(d: int) -> tuple[float, float]:
    """Unit-norm (alpha, beta) with alpha < 0 < beta and
    alpha/beta = -(sqrt(d)/4)(d + 2 + sqrt(d^2 + 4d - 4))."""
    ratio = -(math.sqrt(d) / 4) * (d + 2 + math.sqrt(d * d + 4 * d - 4))
    # |ratio*(a+b) + c|^2 with <a|b> = 1/d, <a|c> = <b|c> = 1/sqrt(d)
    norm2 = ratio**2 * 2 * (d + 1) / d + 1 + 4 * ratio / math.sqrt(d)
    beta = 1 / math.sqrt(norm2)
    return ratio * beta, beta


def conjectured_eigenstates(kind: str, d: int) -> list[Ket]:
    """Closed-form candidates for the maximal eigenvectors of R."""
    kind = normalize_kind(kind)
    out = []
    if kind == "universal":
        c = math.sqrt(d / (2 * (d + 1)))
        for k in range(d):
            out.append(c * (_phi_with_k(d, k, "B") + _phi_with_k(d, k, "E")))
    elif kind == "phase_covariant":
        a, b = pc_alpha_beta(d)
        for k in range(d):
            kkk = tensor(basis_ket(d, k), basis_ket(d, k), basis_ket(d, k))
            out.append(a * (_phi_with_k(d, k, "B") + _phi_with_k(d, k, "E")) + b * kkk)
    else:
        raise ValueError("no closed-form eigenstates are known for the Fourier family")
    return out


@dataclass
class ConjectureReport:
    kind: str
    d: int
    r_max: float
    degeneracy: int
    max_norm_error: float
    max_eigen_residual: float
    max_principal_angle: float
    eigen_tol: float = 1e-9
    angle_tol: float = 1e-8
    norm_tol: float = 1e-12
    extrapolated: bool = False
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


class ConjectureError(RuntimeError):
    pass


def verify_conjectured_eigenstates(
    kind: str,
    d: int,
    *,
    force: bool = False,
    strict: bool = True,
    degeneracy_tol: float = 1e-8,
) -> ConjectureReport:
    """Check that the closed-form states span exactly the maximal eigenspace."""
    kind = normalize_kind(kind)
    if d not in VERIFIED_DIMS and not force:
        raise ValueError(f"d={d} outside the verified range 2..7 (pass force=True to extrapolate)")
    R = r_operator(kind, d)
    eig = max_eigenspace(R, degeneracy_tol)
    states = conjectured_eigenstates(kind, d)
    cols = np.column_stack([s.amps for s in states])
    norm_err = float(np.max(np.abs(np.linalg.norm(cols, axis=0) - 1)))
    resid = float(np.max(np.linalg.norm(R.mat @ cols - eig.r_max * cols, axis=0)))
    angles = subspace_angles(cols, eig.basis_matrix)
    rep = ConjectureReport(
        kind=kind,
        d=d,
        r_max=eig.r_max,
        degeneracy=eig.degeneracy,
        max_norm_error=norm_err,
        max_eigen_residual=resid,
        max_principal_angle=float(np.max(angles)),
        extrapolated=d not in VERIFIED_DIMS,
    )
    if norm_err > rep.norm_tol:
        rep.failures.append(f"norm error {norm_err:.3e}")
    if resid > rep.eigen_tol:
        rep.failures.append(f"eigenvector residual {resid:.3e}")
    if eig.degeneracy != d:
        rep.failures.append(f"max eigenspace has dimension {eig.degeneracy}, expected {d}")
    if rep.max_principal_angle > rep.angle_tol:
        rep.failures.append(f"principal angle {rep.max_principal_angle:.3e}")
    if strict and rep.failures:
        raise ConjectureError(f"{kind} d={d}: " + "; ".join(rep.failures))
    return rep
