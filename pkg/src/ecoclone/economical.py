"""Ancilla-free (economical) cloning.

An economical cloner is a unitary on input + blank copy, so its Choi
operator is rank one, S = |S><S|. Optimality forces |S> into the maximal
eigenspace of R; feasibility then asks whether some vector of that space
also satisfies the trace condition Tr_BE |S><S| = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .qudit import Ket, Op, symmetric_ket

FEASIBILITY_TOL = 1e-8
INFEASIBILITY_FLOOR = 1e-3


class FeasibilityGapError(RuntimeError):
    """A search residual fell between the feasible and infeasible thresholds."""


@dataclass
class FeasibilityReport:
    residual: float
    best_coeffs: np.ndarray
    verdict: str
    restarts: int
    seed: int
    feasibility_tol: float = FEASIBILITY_TOL
    infeasibility_floor: float = INFEASIBILITY_FLOOR
    analytic_note: Optional[str] = None
    restart_residuals: list[float] = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"


def _basis_matrix(basis) -> np.ndarray:
    if hasattr(basis, "basis_matrix"):
        return basis.basis_matrix
    basis = list(basis)
    if not basis:
        raise ValueError("feasibility search needs a non-empty basis")
    return np.column_stack([b.amps if isinstance(b, Ket) else np.asarray(b) for b in basis])


def trace_condition_matrix(B: np.ndarray, c: np.ndarray, d: int) -> np.ndarray:
    """Tr_BE |S><S| for |S> = B c, with B holding (in,B,E) vectors as columns."""
    M = (B @ c).reshape(d, d * d)
    return M @ M.conj().T


def trace_residual(B: np.ndarray, c: np.ndarray, d: int) -> float:
    return float(np.linalg.norm(trace_condition_matrix(B, c, d) - np.eye(d)))


def _coeffs(z: np.ndarray, d: int, n: int) -> np.ndarray:
    c = z[:n] + 1j * z[n:]
    return math.sqrt(d) * c / np.linalg.norm(c)


def feasibility_search(
    basis,
    d: int,
    restarts: int = 100,
    seed: int = 0,
    *,
    feasibility_tol: float = FEASIBILITY_TOL,
    infeasibility_floor: float = INFEASIBILITY_FLOOR,
    analytic_note: Optional[str] = None,
) -> FeasibilityReport:
    """Minimize ||Tr_BE |S><S| - 1||_F over |S> = sum_k c_k v_k with ||c||^2 = d.

    Each restart is a Levenberg-Marquardt-style local solve started from a
    Gaussian point drawn from ``SeedSequence([seed, restart])``.

    Raises FeasibilityGapError when the best residual lies strictly between
    the two thresholds.
    """
    B = _basis_matrix(basis)
    if B.shape[0] != d**3:
        raise ValueError(f"basis vectors must have length d^3 = {d**3}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    n = B.shape[1]
    eye = np.eye(d)

    def resid(z):
        D = trace_condition_matrix(B, _coeffs(z, d, n), d) - eye
        return np.concatenate([D.real.ravel(), D.imag.ravel()])

    best_r, best_c = math.inf, None
    history = []
    for i in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        z0 = rng.standard_normal(2 * n)
        sol = least_squares(resid, z0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        c = _coeffs(sol.x, d, n)
        r = trace_residual(B, c, d)
        history.append(r)
        if r < best_r:
            best_r, best_c = r, c
    if best_r <= feasibility_tol:
        verdict = "feasible"
    elif best_r >= infeasibility_floor:
        verdict = "infeasible"
    else:
        raise FeasibilityGapError(
            f"best residual {best_r:.3e} lies between {feasibility_tol:g} and {infeasibility_floor:g}"
        )
    return FeasibilityReport(
        residual=best_r,
        best_coeffs=best_c,
        verdict=verdict,
        restarts=restarts,
        seed=seed,
        feasibility_tol=feasibility_tol,
        infeasibility_floor=infeasibility_floor,
        analytic_note=analytic_note,
        restart_residuals=history,
    )


# --- analytic criteria --------------------------------------------------------


def universal_trace_matrix(c: Sequence[complex], d: int) -> np.ndarray:
    """Closed form of Tr_BE |S><S| for |S> = sum_k c_k |r_max;k>:
    (sum|c_k|^2 1 + sum_{k,l} c_k c_l^* |l><k|) / (d+1)."""
    c = np.asarray(c, dtype=complex)
    return (np.sum(np.abs(c) ** 2) * np.eye(d) + np.outer(c.conj(), c)) / (d + 1)


def universal_nogo_residual(c: Sequence[complex], d: int) -> float:
    """||universal_trace_matrix(c) - 1||_F; equals sqrt(d(d-1))/(d+1) whenever ||c||^2 = d."""
    return float(np.linalg.norm(universal_trace_matrix(c, d) - np.eye(d)))


def gamma_pc(d: int, alpha: float, beta: float) -> float:
    """beta^2 + 4 alpha beta / sqrt(d) + 2 alpha^2 / d."""
    return beta**2 + 4 * alpha * beta / math.sqrt(d) + 2 * alpha**2 / d


def pc_trace_matrix(c: Sequence[complex], d: int, alpha: float, beta: float) -> np.ndarray:
    """Closed form of Tr_BE |S><S| for a superposition of the phase-covariant
    candidate eigenstates with amplitudes ``alpha``, ``beta``."""
    c = np.asarray(c, dtype=complex)
    w = 2 * alpha**2 / d
    outer = np.outer(c.conj(), c)
    off = outer - np.diag(np.diag(outer))
    return (
        w * np.sum(np.abs(c) ** 2) * np.eye(d)
        + gamma_pc(d, alpha, beta) * np.diag(np.abs(c) ** 2)
        + w * off
    )


def analytic_criterion(kind: str, d: int) -> dict:
    """The closed-form feasibility argument for ``kind`` at dimension ``d``."""
    from .merit import normalize_kind, pc_alpha_beta

    kind = normalize_kind(kind)
    if kind == "universal":
        r = math.sqrt(d * (d - 1)) / (d + 1)
        return {
            "criterion": "universal trace condition",
            "residual_lower_bound": r,
            "feasible": False,
            "note": "Tr_BE|S><S| = (d 1 + |c*><c*|)/(d+1) cannot equal 1: "
            f"residual is sqrt(d(d-1))/(d+1) = {r:.6g} for every admissible c",
        }
    if kind == "phase_covariant":
        a, b = pc_alpha_beta(d)
        g = gamma_pc(d, a, b)
        feasible = abs(g) <= 1e-12
        note = (
            f"gamma = {g:.3e}: "
            + ("zero, single-term c_l = sqrt(d) solves the trace condition" if feasible
               else "nonzero, trace condition would need c_k c_j^* = C delta_jk")
        )
        return {"criterion": "gamma", "gamma": g, "alpha": a, "beta": b, "feasible": feasible, "note": note}
    return {"criterion": None, "feasible": None, "note": "no closed-form criterion for the Fourier family"}


# --- explicit economical cloners ---------------------------------------------


def niu_griffiths(alpha: float, completion: str = "orthogonal") -> Op:
    """Two-qubit unitary with |00> -> |00> and |10> -> cos a |10> + sin a |01>.

    Only the action on |x>_B|0>_E matters for cloning. ``completion``
    picks how |01> and |11> are mapped: ``"orthogonal"`` gives the real
    rotation |01> -> cos a |01> - sin a |10>, |11> -> |11>; ``"alternate"``
    gives a different unitary completion for cross-checks.
    """
    c, s = math.cos(alpha), math.sin(alpha)
    U = np.zeros((4, 4), dtype=complex)
    # columns are images of |00>, |01>, |10>, |11>
    U[0, 0] = 1.0
    U[2, 2], U[1, 2] = c, s
    if completion == "orthogonal":
        U[1, 1], U[2, 1] = c, -s
        U[3, 3] = 1.0
    elif completion == "alternate":
        U[3, 1] = 1j
        U[1, 3], U[2, 3] = -c, s
    else:
        raise ValueError(f"unknown completion {completion!r}")
    return Op((2, 2), U)


def suboptimal_economical(d: int, l: int = 0, thetas: Optional[Sequence[float]] = None) -> np.ndarray:
    """Isometry |k> -> exp(i theta_k) |k l+> as a (d*d, d) array."""
    if not 0 <= l < d:
        raise IndexError(f"l={l} out of range for dimension {d}")
    if thetas is None:
        thetas = np.zeros(d)
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (d,):
        raise ValueError(f"need {d} phases, got shape {thetas.shape}")
    cols = [np.exp(1j * thetas[k]) * symmetric_ket(d, k, l).amps for k in range(d)]
    return np.column_stack(cols)


def theta_fidelity(d: int, thetas: Sequence[float], l: int = 0) -> float:
    """(d - 1 + |sum_{k != l} e^{i theta_k} + sqrt(2) e^{i theta_l}|^2) / (2 d^2)."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (d,):
        raise ValueError(f"need {d} phases, got shape {thetas.shape}")
    if not 0 <= l < d:
        raise IndexError(f"l={l} out of range for dimension {d}")
    ph = np.exp(1j * thetas)
    s = ph.sum() - ph[l] + math.sqrt(2) * ph[l]
    return float((d - 1 + abs(s) ** 2) / (2 * d * d))


def economical_pc_fidelity(d: int) -> float:
    """F_U = (d - 1 + (d - 1 + sqrt 2)^2) / (2 d^2)."""
    return (d - 1 + (d - 1 + math.sqrt(2)) ** 2) / (2 * d * d)
