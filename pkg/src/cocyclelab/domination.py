"""Domination: certificates, cone fields, invariant sections and windings.

Everything is reduced to ``k = 1`` through the exterior power where the
criterion requires it. Invariant sections are computed in the original
space on the Grassmannian ``G(k, d)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cocycle import (
    Cocycle,
    Frequency,
    TrigMatrixPoly,
    approximants,
    evaluate,
    exterior_cocycle,
    scaled_iterate,
)
from .exceptions import DegenerateGapError, LiftError, RefineError
from .linalg import Subspace, principal_angles, top_singular_subspace
from .lyapunov import DEFAULT_GRID, NEG_INF, lyapunov_spectrum

RHO_GRID = (1 / 4, 1 / 8, 1 / 16, 1 / 32)
DEFAULT_GAP_TOL = 1e-3
CAUCHY_TOL = 1e-8
CAUCHY_WINDOW = 10
# relative slack so that the equality cases of the criterion pass
_REL = 1e-12


# ---------------------------------------------------------------- certificate


@dataclass
class DominationCertificate:
    """Outcome of the singular value gap criterion on a phase grid.

    ``ratio_here`` and ``ratio_there`` are the worst ``sigma_2 / sigma_1`` of
    ``Lambda^k A_n`` at ``x`` and ``x + n alpha`` (must be ``<= rho^2``),
    ``growth`` the worst ``sigma_1(A_2n(x)) / (sigma_1(A_n(x + n alpha))
    sigma_1(A_n(x)))`` (must be ``>= 4 rho``). ``slack`` is the smallest
    absolute margin in log scale, ``required`` the log of the grid modulus
    bound it must beat for ``certified``.
    """

    k: int
    n: int
    rho: float
    grid_size: int
    ratio_here: float
    ratio_there: float
    growth: float
    passed: bool
    certified: bool
    slack: float
    required: float
    violations: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "rho": self.rho,
            "grid_size": self.grid_size,
            "ratio_here": self.ratio_here,
            "ratio_there": self.ratio_there,
            "growth": self.growth,
            "passed": self.passed,
            "certified": self.certified,
            "slack": _json_float(self.slack),
            "required": _json_float(self.required),
            "violations": self.violations[:32],
        }


def _json_float(v: float):
    return v if math.isfinite(v) else str(v)


def _sup_bounds(A: TrigMatrixPoly, grid: int = 1024) -> tuple[float, float]:
    """Rigorous bounds for ``sup ||A||`` and ``sup ||A'||`` on the real line.

    Grid maxima plus the next derivative bound times half the grid step,
    capped by the coefficient sums.
    """
    norms = np.linalg.norm(A.coeffs, ord=2, axis=(1, 2))
    w = 2 * np.pi * np.abs(A.modes)
    k0, k1, k2 = float(np.sum(norms)), float(np.sum(norms * w)), float(np.sum(norms * w**2))
    if A.degree == 0:
        return float(norms[0]), 0.0
    x = np.arange(grid) / grid
    dA = TrigMatrixPoly(A.coeffs * (2j * np.pi * A.modes)[:, None, None])
    s0 = float(np.max(np.linalg.norm(evaluate(A, x), ord=2, axis=(1, 2))))
    s1 = float(np.max(np.linalg.norm(evaluate(dA, x), ord=2, axis=(1, 2))))
    half = 0.5 / grid
    return min(k0, s0 + k1 * half), min(k1, s1 + k2 * half)


def _log_lipschitz(c: Cocycle, k: int, n: int, rho: float) -> tuple[float, float]:
    """Logs of Lipschitz bounds in ``x`` for the two kinds of inequalities.

    Uses ``||Lambda^k B|| <= ||B||^k`` and the product rule on the
    trigonometric coefficients. Returns ``-inf`` for constant maps.
    """
    K, Kp = _sup_bounds(c.map)
    if Kp == 0 or K == 0:
        return NEG_INF, NEG_INF
    lk, lkp = k * math.log(K), math.log(k * Kp) + (k - 1) * math.log(K)
    # sigma_1 and sigma_2 of A_n are both (1-Lipschitz functions of A_n)
    single = math.log(1 + rho**2) + math.log(n) + lkp + (n - 1) * lk
    double = math.log(2 + 8 * rho) + math.log(n) + lkp + (2 * n - 1) * lk
    return single, double


def singular_gap_certificate(c: Cocycle, k: int = 1, n: int = 1, M: int = 512,
                             rho: float = 0.25) -> DominationCertificate:
    """Check the singular value gap criterion for ``k``-domination.

    At every grid phase ``x = m/M`` the three inequalities

    * ``sigma_2(A_n(x)) <= rho^2 sigma_1(A_n(x))``,
    * the same at ``x + n alpha``,
    * ``sigma_1(A_2n(x)) >= 4 rho sigma_1(A_n(x + n alpha)) sigma_1(A_n(x))``

    are tested on ``Lambda^k A``. A pass is promoted to ``certified`` when
    the smallest slack exceeds a Lipschitz bound times half the grid step.
    """
    if not 0 < rho <= 0.25:
        raise ValueError("rho must lie in (0, 1/4]")
    if not 1 <= k < c.dim:
        raise ValueError(f"k must lie in 1..{c.dim - 1}")
    if n < 1 or M < 1:
        raise ValueError("n and M must be positive")
    ck = exterior_cocycle(c, k)
    x = np.arange(M) / M
    P1, l1 = scaled_iterate(ck, n, x)
    P2, l2 = scaled_iterate(ck, n, x + n * c.alpha)
    s1 = np.linalg.svd(P1, compute_uv=False)
    s2 = np.linalg.svd(P2, compute_uv=False)
    top12 = np.linalg.svd(P2 @ P1, compute_uv=False)[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = s1[:, 1] / s1[:, 0]
        r2 = s2[:, 1] / s2[:, 0]
        g = top12 / (s1[:, 0] * s2[:, 0])
    rho2, four = rho**2, 4 * rho
    zero = (s1[:, 0] == 0) | (s2[:, 0] == 0) | ~np.isfinite(l1) | ~np.isfinite(l2)
    ok = ~zero & (r1 <= rho2 * (1 + _REL)) & (r2 <= rho2 * (1 + _REL)) & (g >= four * (1 - _REL))
    passed = bool(ok.all())

    # absolute slacks, in logs: ln(rho^2 s_1 - s_2) + logscale, etc.
    with np.errstate(divide="ignore", invalid="ignore"):
        sl1 = l1 + np.log(np.maximum(rho2 * s1[:, 0] - s1[:, 1], 0))
        sl2 = l2 + np.log(np.maximum(rho2 * s2[:, 0] - s2[:, 1], 0))
        sl3 = l1 + l2 + np.log(np.maximum(top12 - four * s1[:, 0] * s2[:, 0], 0))
    lip1, lip2 = _log_lipschitz(c, k, n, rho)
    half_step = math.log(0.5 / M)
    need1, need2 = lip1 + half_step, lip2 + half_step
    if passed:
        margin = min(
            float(np.min(sl1 - need1)) if lip1 != NEG_INF else math.inf,
            float(np.min(sl2 - need1)) if lip1 != NEG_INF else math.inf,
            float(np.min(sl3 - need2)) if lip2 != NEG_INF else math.inf,
        )
        certified = margin > 0
    else:
        certified = False
    # scale-free slack used for robustness comparisons
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.minimum.reduce([np.log(rho2) - np.log(r1), np.log(rho2) - np.log(r2),
                                 np.log(g) - np.log(four)])
    slack = float(np.min(np.where(zero, -np.inf, rel)))
    return DominationCertificate(
        k=k, n=n, rho=float(rho), grid_size=M,
        ratio_here=float(np.max(np.where(zero, np.inf, r1))),
        ratio_there=float(np.max(np.where(zero, np.inf, r2))),
        growth=float(np.min(np.where(zero, 0.0, g))),
        passed=passed, certified=bool(certified), slack=slack,
        required=float(max(need1, need2)),
        violations=[float(v) for v in x[~ok]],
    )


# ---------------------------------------------------------------- cone field


@dataclass
class ConefieldResult:
    passed: bool
    min_reentry: float
    rho: float
    n: int
    diagnostic: str = ""


def conefield_test(c: Cocycle, k: int = 1, n: int = 1, rho: float = 0.25, M: int = 256,
                   samples: int = 16, seed: int = 0, margin: float = 1e-9) -> ConefieldResult:
    """Push the boundary of the cone ``||P_{E+(A_n(x))} w|| > rho`` forward.

    ``E+`` is the top right singular direction of ``Lambda^k A_n``. At each
    grid phase the direction ``v_1`` and ``samples`` boundary directions
    ``rho v_1 + sqrt(1 - rho^2) y`` (``y`` random unit, orthogonal to
    ``v_1``) are mapped by ``A_n(x)``; every image must land strictly inside
    the cone at ``x + n alpha``.
    """
    if not 1 <= k < c.dim:
        raise ValueError(f"k must lie in 1..{c.dim - 1}")
    ck = exterior_cocycle(c, k)
    D = ck.dim
    rng = np.random.default_rng(seed)
    x = np.arange(M) / M
    P1, _ = scaled_iterate(ck, n, x)
    P2, _ = scaled_iterate(ck, n, x + n * c.alpha)
    worst = math.inf
    for m in range(M):
        try:
            v1 = top_singular_subspace(P1[m], 1).basis[:, 0]
            target = top_singular_subspace(P2[m], 1)
        except DegenerateGapError as exc:
            return ConefieldResult(False, math.nan, rho, n, f"x={x[m]:.6g}: {exc}")
        y = rng.standard_normal((D, samples)) + 1j * rng.standard_normal((D, samples))
        y -= np.outer(v1, v1.conj() @ y)
        y /= np.linalg.norm(y, axis=0)
        W = np.column_stack([v1, rho * v1[:, None] + math.sqrt(1 - rho**2) * y])
        img = P1[m] @ W
        norms = np.linalg.norm(img, axis=0)
        if np.any(norms == 0):
            return ConefieldResult(False, 0.0, rho, n, f"x={x[m]:.6g}: direction in kernel")
        proj = np.linalg.norm(target.basis.conj().T @ (img / norms), axis=0)
        worst = min(worst, float(proj.min()))
    passed = worst > rho + margin
    diag = "" if passed else f"re-entry {worst:.6g} does not exceed rho={rho:.6g}"
    return ConefieldResult(passed, worst, rho, n, diag)


# ---------------------------------------------------------------- sections


def _orthonormalize(F: np.ndarray) -> np.ndarray:
    if F.shape[-1] == 1:
        nrm = np.linalg.norm(F, axis=-2, keepdims=True)
        return F / np.where(nrm > 0, nrm, np.nan)
    return np.linalg.qr(F)[0]


def _chains(mats, T: int, lengths, F0: np.ndarray, P: int) -> np.ndarray:
    """Run frame chains of several lengths through one shared matrix stream.

    ``mats(s)`` returns the ``(P, d, d)`` matrices applied at step ``s`` of
    ``T``; the chain of length ``L`` starts at step ``T - L`` so that all
    chains end together. Returns frames of shape ``(len(lengths), P, d, r)``.
    """
    lengths = np.asarray(lengths)
    F = np.broadcast_to(F0, (lengths.size, P) + F0.shape).copy()
    starts = T - lengths
    for s in range(T):
        A = mats(s)
        act = starts <= s
        F[act] = _orthonormalize(A[None] @ F[act])
    return _orthonormalize(F)


def _projectors(F: np.ndarray) -> np.ndarray:
    return F @ np.swapaxes(F.conj(), -1, -2)


def _gap(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    return np.linalg.norm(_projectors(F) - _projectors(G), ord=2, axis=(-2, -1))


def _initial_frame(d: int, r: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    return np.linalg.qr(F)[0]


@dataclass
class SectionResult:
    """Frames of one invariant section and its convergence record."""

    phases: np.ndarray
    frames: np.ndarray  # (P, d, r)
    increments: np.ndarray  # (window,) max gap between consecutive iterations
    converged: bool

    def subspace(self, i: int) -> Subspace:
        return Subspace(self.frames[i])


def _lengths(iterations: int, block: int, window: int) -> list[int]:
    lo = max(1, iterations - window)
    return [block * j for j in range(lo, iterations + 1)]


def _section(c: Cocycle, z, r: int, iterations: int, block: int, tol: float,
             seed: int, window: int, adjoint: bool) -> SectionResult:
    z = np.asarray(z, dtype=complex)
    lengths = _lengths(iterations, block, window)
    T = lengths[-1]
    if adjoint:
        # conjugate transposes A(z + j alpha)^*, j = T-1 down to 0
        def mats(s):
            return np.swapaxes(evaluate(c.map, z + (T - 1 - s) * c.alpha).conj(), -1, -2)
    else:
        y = z - T * c.alpha

        def mats(s):
            return evaluate(c.map, y + s * c.alpha)
    F = _chains(mats, T, lengths, _initial_frame(c.dim, r, seed), z.size)
    with np.errstate(invalid="ignore"):
        inc = _gap(F[1:], F[:-1]).max(axis=1) if len(lengths) > 1 else np.zeros(0)
    finite = np.all(np.isfinite(F))
    converged = bool(finite and inc.size > 0 and np.all(inc < tol))
    return SectionResult(z.real % 1.0, F[-1], inc, converged)


def unstable_section(c: Cocycle, k: int = 1, M: int = 256, iterations: int = 200,
                     block: int = 1, tol: float = CAUCHY_TOL, phases=None, seed: int = 0,
                     window: int = CAUCHY_WINDOW) -> SectionResult:
    """``u(x) = lim A_N(x - N alpha) u_0`` for a fixed generic ``k``-frame ``u_0``.

    ``N`` runs over ``block * j``; the last ``window + 1`` values up to
    ``block * iterations`` are computed and their consecutive gap-metric
    increments must all fall below ``tol``.
    """
    z = np.arange(M) / M if phases is None else phases
    return _section(c, z, k, iterations, block, tol, seed, window, adjoint=False)


def stable_section(c: Cocycle, k: int = 1, M: int = 256, iterations: int = 200,
                   block: int = 1, tol: float = CAUCHY_TOL, phases=None, seed: int = 1,
                   window: int = CAUCHY_WINDOW) -> SectionResult:
    """``s(x)``: orthogonal complement of ``lim E_k^+(A_N(x))``.

    The top right singular space of ``A_N(x)`` is reached by pushing a frame
    through the adjoint chain ``A(x)^* ... A(x + (N-1) alpha)^*``. This needs
    no inverse, so singular maps are handled too.
    """
    z = np.arange(M) / M if phases is None else phases
    top = _section(c, z, k, iterations, block, tol, seed, window, adjoint=True)
    comp = np.linalg.svd(top.frames, full_matrices=True)[0][..., :, k:] if np.all(
        np.isfinite(top.frames)) else np.full(top.frames.shape[:-1] + (c.dim - k,), np.nan)
    return SectionResult(top.phases, comp, top.increments, top.converged)


def rational_stable_section(c: Cocycle, k: int = 1, M: int = 256, phases=None,
                            max_q: int = 200) -> SectionResult:
    """Stable section from the eigenspace splitting of ``A_q(x)``.

    For a rational frequency ``p/q`` the sum of generalized eigenspaces of
    the ``d - k`` smallest eigenvalues of ``A_q(x)`` is invariant. An
    irrational frequency is replaced by its last approximant with
    ``q <= max_q``.
    """
    freq = c.freq
    if not freq.is_rational:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cands = [a for a in approximants(freq, 64) if a.q <= max_q]
        if not cands:
            raise ValueError("no approximant within max_q")
        freq = Frequency.rational(cands[-1].p, cands[-1].q)
    cr = c.with_frequency(freq)
    z = np.arange(M) / M if phases is None else np.asarray(phases)
    B, _ = scaled_iterate(cr, freq.q, z)
    d = c.dim
    out = np.empty(B.shape[:-1] + (d - k,), dtype=complex)
    for i, Bi in enumerate(B):
        mods = np.sort(np.abs(np.linalg.eigvals(Bi)))
        cut = 0.5 * (mods[d - k - 1] + mods[d - k])
        if mods[d - k] - mods[d - k - 1] <= 1e-12 * max(mods[-1], 1e-300):
            raise DegenerateGapError(f"eigenvalue moduli not separated at x={z[i].real:.6g}")
        _, Z, sdim = scipy.linalg.schur(Bi, output="complex", sort=lambda w: abs(w) < cut)
        out[i] = Z[:, :sdim]
    return SectionResult(np.asarray(z).real % 1.0, out, np.zeros(0), True)


@dataclass
class Splitting:
    """Invariant splitting ``C^d = u(x) + s(x)`` sampled on phases."""

    cocycle: Cocycle
    k: int
    phases: np.ndarray
    u: np.ndarray  # (M, d, k)
    s: np.ndarray  # (M, d, d - k)
    u_next: np.ndarray  # u at phases + alpha
    angles: np.ndarray
    invariance: float
    converged: bool

    @property
    def min_angle(self) -> float:
        return float(np.min(self.angles))

    @property
    def transverse(self) -> bool:
        return bool(np.all(self.angles > 1e-12))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "grid_size": int(self.phases.size),
            "min_angle": self.min_angle,
            "invariance": self.invariance,
            "converged": self.converged,
            "transverse": self.transverse,
        }


def invariance_residual(c: Cocycle, here: np.ndarray, there: np.ndarray, phases) -> float:
    """Largest gap between ``A(x) u(x)`` and ``u(x + alpha)``."""
    img = _orthonormalize(evaluate(c.map, np.asarray(phases)) @ here)
    with np.errstate(invalid="ignore"):
        g = _gap(img, there)
    return float(np.max(np.where(np.isfinite(g), g, np.inf)))


def splitting(c: Cocycle, k: int = 1, M: int = 256, iterations: int = 200, block: int = 1,
              tol: float = CAUCHY_TOL, stable: str = "adjoint", seed: int = 0) -> Splitting:
    """Unstable and stable sections with angles and invariance residual.

    ``stable`` selects the stable-section method: ``"adjoint"`` or
    ``"rational"``.
    """
    x = np.arange(M) / M
    both = np.concatenate([x, x + c.alpha])
    un = unstable_section(c, k, iterations=iterations, block=block, tol=tol, phases=both, seed=seed)
    if stable == "adjoint":
        st = stable_section(c, k, iterations=iterations, block=block, tol=tol, phases=x, seed=seed + 1)
    elif stable == "rational":
        st = rational_stable_section(c, k, phases=x)
    else:
        raise ValueError("stable must be 'adjoint' or 'rational'")
    u, u_next = un.frames[:M], un.frames[M:]
    finite = np.all(np.isfinite(u)) and np.all(np.isfinite(st.frames))
    if finite and k == c.dim:
        angles, inv = np.full(M, np.pi / 2), invariance_residual(c, u, u_next, x)
    elif finite:
        angles = np.array([principal_angles(Subspace(u[i]), Subspace(st.frames[i]))[0]
                           for i in range(M)])
        inv = invariance_residual(c, u, u_next, x)
    else:
        angles, inv = np.zeros(M), math.inf
    return Splitting(c, k, x, u, st.frames, u_next, angles, inv,
                     bool(un.converged and st.converged))


# ---------------------------------------------------------------- windings


@dataclass
class WindingReport:
    winding: int
    total_increment: float
    residual: float
    omega: int
    multipliers: np.ndarray | None = None

    @property
    def accepted(self) -> bool:
        return self.residual < 0.1

    def to_dict(self) -> dict:
        return {
            "winding": self.winding,
            "total_increment": self.total_increment,
            "residual": self.residual,
            "omega": self.omega,
            "accepted": self.accepted,
        }


def winding_number(values) -> WindingReport:
    """Winding of a closed sampled curve in ``C \\ {0}`` (last point joins the first)."""
    v = np.asarray(values, dtype=complex)
    if np.any(v == 0):
        raise ValueError("curve passes through zero")
    inc = np.angle(np.roll(v, -1) / v)
    if np.max(np.abs(inc)) >= np.pi / 2:
        raise RefineError(f"argument increment {np.max(np.abs(inc)):.3g} >= pi/2; refine the grid")
    total = float(np.sum(inc))
    w = total / (2 * np.pi)
    wi = int(round(w))
    return WindingReport(wi, total, abs(w - wi), -wi, v)


def scalar_multiplier_and_winding(split: Splitting, retries: int = 32, seed: int = 0,
                                  lift_floor: float = 1e-3) -> WindingReport:
    """Winding of ``lambda(x)`` where ``A(x) u(x) = lambda(x) u(x + alpha)``.

    ``u`` is lifted to vectors normalized by ``v^* u(x) = 1`` for a fixed
    ``v``; first ``v = u(x_0)``, then random unit vectors. ``omega`` is minus
    the winding.
    """
    if split.k != 1:
        raise ValueError("winding is defined for k = 1; pass to the exterior power first")
    u, un = split.u[..., 0], split.u_next[..., 0]
    rng = np.random.default_rng(seed)
    v = u[0]
    for _ in range(retries + 1):
        a, b = u @ v.conj(), un @ v.conj()
        if min(np.min(np.abs(a)), np.min(np.abs(b))) > lift_floor:
            break
        v = rng.standard_normal(u.shape[1]) + 1j * rng.standard_normal(u.shape[1])
        v /= np.linalg.norm(v)
    else:
        raise LiftError(f"no lift found after {retries} retries")
    lift = u / a[:, None]
    Au = np.einsum("mij,mj->mi", evaluate(split.cocycle.map, split.phases), lift)
    lam = Au @ v.conj()
    return winding_number(lam)


def determinant_winding(c: Cocycle, M: int = DEFAULT_GRID) -> WindingReport:
    """Winding of ``x -> det A(x)`` (``omega`` is the implied ``omega^d``)."""
    x = np.arange(M) / M
    return winding_number(np.linalg.det(evaluate(c.map, x)))


@dataclass
class AngleProfile:
    t: np.ndarray
    min_angles: np.ndarray
    boundary_min: float
    interior_min: float
    passed: bool


def splitting_angle_profile(splits, t_values, tol: float = 1e-3) -> AngleProfile:
    """Minimum splitting angle per ``t`` and the interior/boundary comparison.

    Passes when the interior minimum is at least the boundary minimum less
    ``tol``.
    """
    t = np.asarray(t_values, dtype=float)
    order = np.argsort(t)
    mins = np.array([splits[i].min_angle for i in order])
    t = t[order]
    boundary = float(min(mins[0], mins[-1]))
    interior = float(np.min(mins[1:-1])) if mins.size > 2 else boundary
    return AngleProfile(t, mins, boundary, interior, interior >= boundary - tol)


def splittings_over_band(c: Cocycle, k: int, t_values, M: int = 256, iterations: int = 200,
                         block: int = 1) -> list[Splitting]:
    return [splitting(c.shifted(t), k, M, iterations, block) for t in t_values]


# ---------------------------------------------------------------- classification


@dataclass
class Classification:
    verdict: str  # trivial | dominated | undetermined
    exponents: list[float]
    gaps: list[int]
    certificates: dict[int, DominationCertificate]
    undetermined: list[int]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "exponents": [_json_float(v) for v in self.exponents],
            "gaps": self.gaps,
            "undetermined": self.undetermined,
            "certificates": {str(k): cert.to_dict() for k, cert in self.certificates.items()},
        }


def n_schedule(freq: Frequency, budget: int) -> list[int]:
    """Approximant denominators, their doublings and powers of two up to ``budget``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        qs = [a.q for a in approximants(freq, 64) if a.q <= budget]
    out = set()
    for q in qs + [1]:
        while q <= budget:
            out.add(q)
            q *= 2
    return sorted(out)


def oseledets_classification(c: Cocycle, budget: int = 64, gap_tol: float = DEFAULT_GAP_TOL,
                             M: int = 256, n_est: int | None = None, M_est: int = DEFAULT_GRID,
                             rhos=RHO_GRID, exponents=None, certify: bool = False) -> Classification:
    """Classify the Oseledets filtration as trivial, dominated or undetermined.

    Exponents closer than ``gap_tol`` count as equal; a finite exponent
    followed by ``-inf`` counts as a gap. For each gap ``k`` a passing
    certificate is searched over ``n_schedule`` and ``rhos``; with
    ``certify`` it must also carry the Lipschitz grid margin.
    """
    L = list(exponents) if exponents is not None else lyapunov_spectrum(c, n_est, M_est)
    gaps = []
    for k in range(1, c.dim):
        a, b = L[k - 1], L[k]
        if a == NEG_INF:
            continue
        if b == NEG_INF or a - b > gap_tol:
            gaps.append(k)
    if not gaps:
        return Classification("trivial", L, [], {}, [])
    certs, missing = {}, []
    schedule = n_schedule(c.freq, budget)
    for k in gaps:
        found = None
        for n in schedule:
            for rho in rhos:
                cert = singular_gap_certificate(c, k, n, M, rho)
                if cert.certified if certify else cert.passed:
                    found = cert
                    break
            if found:
                break
        if found:
            certs[k] = found
        else:
            missing.append(k)
    verdict = "undetermined" if missing else "dominated"
    return Classification(verdict, L, gaps, certs, missing)


# ---------------------------------------------------------------- robustness, holomorphy


def perturb(c: Cocycle, size: float, seed: int = 0) -> Cocycle:
    """Random coefficient perturbation of relative spectral size ``size``."""
    rng = np.random.default_rng(seed)
    C = c.map.coeffs
    noise = rng.standard_normal(C.shape) + 1j * rng.standard_normal(C.shape)
    scale = np.linalg.norm(C, ord=2, axis=(1, 2)).max()
    noise *= size * scale / np.linalg.norm(noise, ord=2, axis=(1, 2)).max()
    return Cocycle(c.freq, TrigMatrixPoly(C + noise))


def robust_under_perturbation(c: Cocycle, cert: DominationCertificate, size: float = 1e-4,
                              trials: int = 4, seed: int = 0) -> bool:
    """Does the certificate survive perturbations with at least half its slack?"""
    for i in range(trials):
        new = singular_gap_certificate(perturb(c, size, seed + i), cert.k, cert.n,
                                       cert.grid_size, cert.rho)
        if not new.passed or new.slack < 0.5 * cert.slack:
            return False
    return True


def _chart(F: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Affine chart ``F (V^* F)^{-1}`` of the Grassmannian."""
    return F @ np.linalg.inv(V.conj().T @ F)


def cauchy_riemann_residual(c: Cocycle, k: int = 1, x_values=None, t: float = 0.0,
                            h: float = 1e-4, iterations: int = 60, block: int = 1,
                            seed: int = 0) -> float:
    """Relative discrete Cauchy-Riemann residual of ``z -> u(z)`` in a chart.

    Holomorphy means ``du/dt = i du/dx``; both derivatives are taken by
    central differences of step ``h`` around ``x + i t``.
    """
    x = np.linspace(0, 1, 16, endpoint=False) if x_values is None else np.asarray(x_values)
    z0 = x + 1j * t
    pts = np.concatenate([z0 + h, z0 - h, z0 + 1j * h, z0 - 1j * h])
    sec = unstable_section(c, k, iterations=iterations, block=block, phases=pts, seed=seed)
    V = sec.frames[0]
    Y = _chart(sec.frames, V)
    m = x.size
    dx = (Y[:m] - Y[m:2 * m]) / (2 * h)
    dt = (Y[2 * m:3 * m] - Y[3 * m:]) / (2 * h)
    scale = max(float(np.max(np.abs(dx))), 1e-300)
    return float(np.max(np.abs(dt - 1j * dx)) / scale)


__all__ = [
    "AngleProfile",
    "Classification",
    "ConefieldResult",
    "DominationCertificate",
    "SectionResult",
    "Splitting",
    "WindingReport",
    "cauchy_riemann_residual",
    "conefield_test",
    "determinant_winding",
    "invariance_residual",
    "n_schedule",
    "oseledets_classification",
    "perturb",
    "rational_stable_section",
    "robust_under_perturbation",
    "scalar_multiplier_and_winding",
    "singular_gap_certificate",
    "splitting",
    "splitting_angle_profile",
    "splittings_over_band",
    "stable_section",
    "unstable_section",
    "winding_number",
]
