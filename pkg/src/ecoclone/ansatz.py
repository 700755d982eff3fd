"""Bell-biorthogonal cloning states and their economical constraint systems.

A cloner is a pure state on (A, B, E, M),

    |Psi> = sum_{m,n} a[m, n] |B_{m,n}>_{A,B} |B_{m,-n}>_{E,M},

fixed by a unit-Frobenius-norm d x d amplitude matrix ``a``. ``A`` plays the
role of the input factor, ``M`` is the ancilla. The three families used
here are

    universal        a = x1 delta_{m0} delta_{n0} + x3
    phase-covariant  a = x1 delta_{m0} delta_{n0} + x2 delta_{m0} + x3
    Fourier          a = x1 delta_{m0} delta_{n0} + x2 (delta_{m0} + delta_{n0}) + x3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import least_squares, minimize_scalar

from .maps import ChoiOp
from .merit import normalize_kind, r_operator
from .qudit import Ket, Op, bell_state, root_of_unity

FAMILIES = ("universal", "phase_covariant", "fourier_covariant", "custom")
NORM_TOL = 1e-10


@dataclass(frozen=True)
class XParams:
    """Real amplitudes (x1, x2, x3) of the structured families.

    Signs are not restricted: the optimal phase-covariant machine needs x2 of
    opposite sign to x1 in this Bell-state convention.
    """

    x1: float
    x2: float = 0.0
    x3: float = 0.0

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError("XParams must be finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)

    @property
    def degenerate(self) -> bool:
        """True for the non-cloning limits where x1 or x3 vanishes."""
        return abs(self.x1) < 1e-12 or abs(self.x3) < 1e-12


def _family(label: str) -> str:
    lab = label.replace("-", "_").lower()
    if lab == "fourier":
        lab = "fourier_covariant"
    if lab not in FAMILIES:
        raise ValueError(f"unknown amplitude family {label!r}")
    return lab


def _raw_amplitudes(x: XParams, d: int, family: str) -> np.ndarray:
    a = np.full((d, d), x.x3, dtype=complex)
    a[0, 0] += x.x1
    if family == "phase_covariant":
        a[0, :] += x.x2
    elif family == "fourier_covariant":
        a[0, :] += x.x2
        a[:, 0] += x.x2
    return a


@dataclass(frozen=True, eq=False)
class AmplitudeMatrix:
    d: int
    a: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        if a.shape != (self.d, self.d):
            raise ValueError(f"amplitude matrix must be {self.d}x{self.d}")
        nrm = np.linalg.norm(a)
        if abs(nrm - 1) > NORM_TOL:
            raise ValueError(f"amplitude matrix has Frobenius norm {nrm:.12g}, expected 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "label", _family(self.label))


def family_norm(x: XParams, d: int, family: str) -> float:
    return float(np.linalg.norm(_raw_amplitudes(x, d, _family(family))))


def normalize_x(x: XParams, d: int, family: str) -> XParams:
    """Rescale x so the family's amplitude matrix has unit norm."""
    s = family_norm(x, d, family)
    if s == 0:
        raise ValueError("cannot normalize the zero amplitude matrix")
    v = x.as_array() / s
    return XParams(*v)


def amp_universal(x: XParams, d: int) -> AmplitudeMatrix:
    if x.x2 != 0:
        raise ValueError("the universal family has x2 = 0")
    return AmplitudeMatrix(d, _raw_amplitudes(x, d, "universal"), "universal")


def amp_phase_covariant(x: XParams, d: int) -> AmplitudeMatrix:
    return AmplitudeMatrix(d, _raw_amplitudes(x, d, "phase_covariant"), "phase_covariant")


def amp_fourier(x: XParams, d: int) -> AmplitudeMatrix:
    return AmplitudeMatrix(d, _raw_amplitudes(x, d, "fourier_covariant"), "fourier_covariant")


def amplitude_matrix(family: str, x: XParams, d: int) -> AmplitudeMatrix:
    family = _family(family)
    return {
        "universal": amp_universal,
        "phase_covariant": amp_phase_covariant,
        "fourier_covariant": amp_fourier,
    }[family](x, d)


def symmetric_universal_x(d: int) -> XParams:
    """Symmetric optimal universal cloner.

    The |Phi+>_{A,B}|Phi+>_{E,M} and |Phi+>_{A,E}|Phi+>_{B,M} components both
    get weight sqrt(d/(2(d+1))). The second one is (1/d) sum_{m,n} of the
    Bell products, so the matrix entry x3 carries an extra 1/d.
    """
    w = math.sqrt(d / (2 * (d + 1)))
    return XParams(w, 0.0, w / d)


# --- states and Choi operators -----------------------------------------------


def _bell_tensor(d: int) -> np.ndarray:
    """T[m, n, i, j] = <i j|B_{m,n}>."""
    t = np.empty((d, d, d, d), dtype=complex)
    for m in range(d):
        for n in range(d):
            t[m, n] = bell_state(d, m, n).amps.reshape(d, d)
    return t


def cloning_state(a: AmplitudeMatrix) -> Ket:
    """|Psi> on factors (A, B, E, M)."""
    d = a.d
    t = _bell_tensor(d)
    neg = (-np.arange(d)) % d
    psi = np.einsum("mn,mnab,mnec->abec", a.a, t, t[:, neg])
    return Ket((d, d, d, d), psi.reshape(-1))


def reduced_choi(psi: Ket, tol: float = 1e-12) -> ChoiOp:
    """d Tr_M |Psi><Psi|, read on (in, B, E) with in = A."""
    d = psi.dims[0]
    if psi.dims != (d, d, d, d):
        raise ValueError("expected a state on four factors (A, B, E, M)")
    if not psi.is_unit(tol):
        raise ValueError(f"cloning state must have unit norm, got {psi.norm!r}")
    T = psi.amps.reshape(d**3, d)
    return ChoiOp(Op((d, d, d), d * (T @ T.conj().T)), d)


def support_states(a: AmplitudeMatrix) -> list[Ket]:
    """|r_p> = <p|_M |Psi> for p = 0..d-1 (not normalized)."""
    d = a.d
    T = cloning_state(a).amps.reshape(d**3, d)
    return [Ket((d, d, d), T[:, p]) for p in range(d)]


# --- optimal structured machines ---------------------------------------------


_FAMILY_FOR_KIND = {
    "universal": "universal",
    "phase_covariant": "phase_covariant",
    "fourier": "fourier_covariant",
}


def _family_basis(family: str, d: int) -> np.ndarray:
    """Coefficient vectors (d*d, k) spanning the family's amplitude matrices."""
    cols = []
    for e in np.eye(3):
        cols.append(_raw_amplitudes(XParams(*e), d, family).reshape(-1))
    B = np.column_stack(cols)
    return B[:, [0, 2]] if family == "universal" else B


def fidelity_matrix(R: Op, d: int) -> np.ndarray:
    """Q with Tr(S R) = a^dag Q a for S = reduced_choi(cloning_state(a))."""
    t = _bell_tensor(d)
    neg = (-np.arange(d)) % d
    E = np.einsum("mnab,mnec->abecmn", t, t[:, neg]).reshape(d**3, d, d * d)
    RE = np.einsum("ij,jkq->ikq", R.mat, E)
    return d * np.einsum("ikp,ikq->pq", E.conj(), RE)


@dataclass
class OptimalMachine:
    kind: str
    d: int
    x: XParams
    amplitudes: AmplitudeMatrix
    fidelity: float
    eigen_gap: float


def optimal_x(kind: str, d: int) -> OptimalMachine:
    """Maximize Tr(S R) over the real family parameters on the unit-norm surface.

    The fidelity is a ratio of real quadratic forms in x, so the maximizer is
    the top generalized eigenvector. The overall sign is fixed by x1 >= 0.
    """
    kind = normalize_kind(kind)
    family = _FAMILY_FOR_KIND[kind]
    R = r_operator(kind, d)
    B = _family_basis(family, d)
    Q = fidelity_matrix(R, d)
    A = (B.conj().T @ Q @ B).real
    A = 0.5 * (A + A.T)
    N = (B.conj().T @ B).real
    w, v = scipy.linalg.eigh(A, N)
    top = v[:, -1]
    top = top / math.sqrt(top @ N @ top)
    if top[0] < 0:
        top = -top
    if family == "universal":
        x = XParams(top[0], 0.0, top[1])
    else:
        x = XParams(*top)
    amps = amplitude_matrix(family, x, d)
    gap = float(w[-1] - w[-2]) if len(w) > 1 else math.inf
    return OptimalMachine(kind, d, x, amps, float(w[-1]), gap)


def pc_identity_residual(x: XParams) -> float:
    """x3^2 - (x1 + x2 + x3)(x2 + x3)."""
    return x.x3**2 - (x.x1 + x.x2 + x.x3) * (x.x2 + x.x3)


def fourier_identity_residual(x: XParams) -> float:
    """x2^2 - x1 x3."""
    return x.x2**2 - x.x1 * x.x3


# --- economical constraint systems -------------------------------------------


def f_poly(x: XParams, d: int) -> float:
    x1, x2, x3 = x.as_array()
    return x1**2 + d * x2**2 + d * d * x3**2 + 2 * x1 * x2 + 2 * d * x2 * x3


def g_poly(x: XParams, d: int) -> float:
    x1, x2, x3 = x.as_array()
    return (d * d + 2 * d) * x2**2 + 2 * d * x1 * x2 + 2 * d * x1 * x3 + 2 * d * d * x2 * x3


def economical_columns(a: np.ndarray, alpha: Sequence[complex]) -> np.ndarray:
    """Columns U|k>_B|psi0>_E = sum_{m,n,j} alpha_{j+m} a_{mn} g^{n(k-j)} |k+m>_B |j>_E.

    Returned as a (d*d, d) array indexed (B, E) x k.
    """
    a = np.asarray(a, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    d = a.shape[0]
    idx = np.arange(d)
    G = root_of_unity(d) ** (np.outer(idx, idx) % d)
    aG = a @ G  # aG[m, t] = sum_n a[m, n] g^(n t)
    out = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        for m in range(d):
            out[(k + m) % d, :, k] += alpha[(idx + m) % d] * aG[m, (k - idx) % d]
    return out.reshape(d * d, d)


@dataclass
class ConstraintResiduals:
    family: str
    d: int
    f: float
    g: float
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    normalization: float

    @property
    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.diagonal)), np.max(np.abs(self.offdiagonal))))


def constraint_residuals(
    x: XParams, alpha: Sequence[complex], d: int, family: str = "fourier_covariant"
) -> ConstraintResiduals:
    """Unitarity conditions <k'|U^dag U|k> = delta in closed polynomial form.

    ``diagonal[k]`` is <k|U^dag U|k> - 1 and ``offdiagonal[kp, k]`` is
    <kp|U^dag U|k> for kp != k (zero on the diagonal). ``normalization``
    is f + g/d - 1, which vanishes for a unit-norm Fourier-family matrix.
    The Fourier form covers the universal family at x2 = 0.
    """
    family = _family(family)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (d,):
        raise ValueError(f"alpha must have length {d}")
    x1, x2, x3 = x.as_array()
    f, g = f_poly(x, d), g_poly(x, d)
    p = np.abs(alpha) ** 2
    A = lambda i: alpha[i % d]  # noqa: E731
    off = np.zeros((d, d), dtype=complex)
    if family in ("fourier_covariant", "universal"):
        diag = p.sum() * f + p * g - 1
        c1 = d * x2**2 + 2 * x1 * x2 + 2 * d * x2 * x3
        for k in range(d):
            for kp in range(d):
                if k == kp:
                    continue
                corr = sum(A(j) * np.conj(A(j + k - kp)) for j in range(d))
                off[kp, k] = (
                    c1 * corr
                    + d * x2**2 * (A(k) * np.conj(A(2 * k - kp)) + A(2 * kp - k) * np.conj(A(kp)))
                    + 2 * d * x1 * x3 * A(kp) * np.conj(A(k))
                )
    elif family == "phase_covariant":
        diag = p.sum() * (x1**2 + d * d * x3**2) + p * (g - 2 * d * x2**2) - 1
        for k in range(d):
            for kp in range(d):
                if k != kp:
                    off[kp, k] = 2 * d * x1 * x3 * A(kp) * np.conj(A(k))
    else:
        raise ValueError("closed-form constraints exist only for the structured families")
    return ConstraintResiduals(family, d, f, g, np.asarray(diag, dtype=float), off, f + g / d - 1)


def gram_residuals(a: np.ndarray, alpha: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, offdiagonal) residuals from explicit inner products of the columns."""
    V = economical_columns(a, alpha)
    G = V.conj().T @ V  # G[kp, k] = <v_kp|v_k>
    diag = np.diag(G).real - 1
    off = G - np.diag(np.diag(G))
    return diag, off


def _unit_alpha(z: np.ndarray, d: int) -> np.ndarray:
    c = z[:d] + 1j * z[d:]
    return c / np.linalg.norm(c)


@dataclass
class SystemSearch:
    min_residual: float
    best_alpha: np.ndarray
    restarts: int
    seed: int


def economical_system_search(
    x: XParams, d: int, family: str = "fourier_covariant", restarts: int = 100, seed: int = 0
) -> SystemSearch:
    """Minimize the Frobenius norm of the unitarity residuals over unit alpha."""
    a = _raw_amplitudes(x, d, _family(family))

    def resid(z):
        dg, off = gram_residuals(a, _unit_alpha(z, d))
        return np.concatenate([dg, off.real.ravel(), off.imag.ravel()])

    best = (math.inf, None)
    for i in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        sol = least_squares(resid, rng.standard_normal(2 * d), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = float(np.linalg.norm(resid(sol.x)))
        if r < best[0]:
            best = (r, _unit_alpha(sol.x, d))
    return SystemSearch(best[0], best[1], restarts, seed)


@dataclass
class PCSystemReport:
    d: int
    x: XParams
    residual: float
    normalization_residual: float
    gram_residual: float
    degenerate: bool
    solvable: bool
    tol: float = 1e-9
    l: int = 0


def pc_system_check(x: XParams, d: int, l: int = 0, tol: float = 1e-9) -> PCSystemReport:
    """Resolve the phase-covariant system with alpha_k = delta_{kl}.

    The off-diagonal conditions 2 d x1 x3 alpha_{k'} alpha_k^* = 0 force a
    single nonzero alpha; the diagonal ones then reduce to x1^2 + d^2 x3^2 = 1.
    The degenerate limit x3 = 0 is flagged and never reported solvable.
    """
    x1, x2, x3 = x.as_array()
    residual = abs(x1**2 + d * d * x3**2 - 1)
    norm_res = abs(
        x1**2 + d * d * x3**2 + d * x2**2 + 2 * x1 * x2 + 2 * x1 * x3 + 2 * d * x2 * x3 - 1
    )
    alpha = np.zeros(d, dtype=complex)
    alpha[l] = 1.0
    dg, off = gram_residuals(_raw_amplitudes(x, d, "phase_covariant"), alpha)
    gram = float(np.sqrt(np.sum(dg**2) + np.sum(np.abs(off) ** 2)))
    degenerate = abs(x3) < 1e-12
    solvable = (not degenerate) and max(residual, norm_res) <= tol
    return PCSystemReport(d, x, residual, norm_res, gram, degenerate, solvable, tol, l)


# --- Fourier recurrence -------------------------------------------------------


def recurrence_amplitudes(theta: float, d: int) -> np.ndarray:
    """alpha~_j with alpha~_0 = 1: alpha~_{2n} = (-1)^n a^{2n}, alpha~_{2n+1} = (-1)^n a^{2n+1}."""
    a = np.exp(1j * theta)
    j = np.arange(d)
    return (-1.0) ** (j // 2) * a**j


def recurrence_residual(theta: float, d: int) -> float:
    """How far alpha~(theta) is from a solution of the cyclic system.

    Combines the wrap-around of alpha~_{k+1} = -alpha~_k^2 alpha~_{k-1}^* (indices
    mod d) with |sum_j alpha_j alpha_{j+2}^*|, alpha = alpha~/sqrt(d). The m = 2
    correlation is only a constraint when 2 != 0 mod d.
    """
    al = recurrence_amplitudes(theta, d)
    k = np.arange(d)
    closure = np.abs(al[(k + 1) % d] + al**2 * np.conj(al[(k - 1) % d]))
    r = float(closure.max())
    if d > 2:
        r = max(r, m2_correlation(theta, d))
    return r


def m2_correlation(theta: float, d: int) -> float:
    al = recurrence_amplitudes(theta, d) / math.sqrt(d)
    return float(abs(np.sum(al * np.conj(np.roll(al, -2)))))


def _fourier_system_terms(phases: np.ndarray, d: int) -> np.ndarray:
    al = np.exp(1j * np.concatenate([[0.0], phases])) / math.sqrt(d)
    k, kp = np.nonzero(~np.eye(d, dtype=bool))
    v = (
        al[k] * np.conj(al[(2 * k - kp) % d])
        + al[(2 * kp - k) % d] * np.conj(al[kp])
        + 2 * al[kp] * np.conj(al[k])
    )
    return np.concatenate([v.real, v.imag])


def fourier_system_residual(phases: np.ndarray, d: int) -> float:
    """Norm of alpha_k alpha*_{2k-k'} + alpha_{2k'-k} alpha*_{k'} + 2 alpha_{k'} alpha*_k
    over k != k', for equal-norm alpha with alpha_0 real."""
    return float(np.linalg.norm(_fourier_system_terms(np.asarray(phases, dtype=float), d)))


@dataclass
class RecurrenceReport:
    d: int
    min_residual: float
    argmin_theta: float
    min_m2_only: float
    system_min_residual: float
    solvable: bool
    contradicted: bool
    solve_tol: float = 1e-9
    lower_bound_tol: float = 1e-3
    grid: int = 0
    notes: list[str] = field(default_factory=list)


def fourier_recurrence_check(
    d: int, grid: int = 1 << 14, restarts: int = 50, seed: int = 0,
    solve_tol: float = 1e-9, lower_bound_tol: float = 1e-3,
) -> RecurrenceReport:
    """Scan the unimodular alpha~_1 for a solution of the Fourier constraint system.

    Also minimizes the full equal-norm system directly over the free phases
    as an independent check of the recurrence argument.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    th = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = np.array([recurrence_residual(t, d) for t in th])
    i = int(np.argmin(vals))
    step = th[1] - th[0]
    ref = minimize_scalar(
        lambda t: recurrence_residual(t, d), bounds=(th[i] - step, th[i] + step),
        method="bounded", options={"xatol": 1e-14},
    )
    best_theta, best = (ref.x, float(ref.fun)) if ref.fun < vals[i] else (th[i], float(vals[i]))
    m2 = float(min(m2_correlation(t, d) for t in th))

    sys_best = math.inf
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        sol = least_squares(
            _fourier_system_terms, rng.uniform(0, 2 * np.pi, d - 1), args=(d,),
            xtol=1e-15, ftol=1e-15, gtol=1e-15,
        )
        sys_best = min(sys_best, fourier_system_residual(sol.x, d))

    notes = []
    if d == 2:
        notes.append("m = 2 is 0 mod 2: the correlation constraint reduces to the norm sum")
    if d > 2 and m2 < lower_bound_tol <= best:
        notes.append("the m = 2 correlation alone can vanish; the cyclic closure rules it out")
    return RecurrenceReport(
        d=d,
        min_residual=best,
        argmin_theta=float(best_theta) % (2 * np.pi),
        min_m2_only=m2,
        system_min_residual=float(sys_best),
        solvable=best <= solve_tol,
        contradicted=best > lower_bound_tol,
        solve_tol=solve_tol,
        lower_bound_tol=lower_bound_tol,
        grid=grid,
        notes=notes,
    )
