"""Lyapunov exponents, complexified profiles and accelerations.

Sums of exponents ``L^k = L_1 + ... + L_k`` are estimated at finite scale
as phase averages of ``(1/n) ln ||Lambda^k A_n(x)||`` on a uniform grid.
At rational frequencies they are computed exactly per phase from spectral
radii of ``A_q``. The value ``-inf`` is a legitimate exponent and is
propagated explicitly rather than produced by accident of arithmetic.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cocycle import Cocycle, Frequency, approximants, scaled_iterate
from .linalg import spectral_radius

NEG_INF = -math.inf
LOG_FLOOR = -300.0
DEFAULT_GRID = 2048
DEFAULT_SNAP_TOL = 0.05
DEFAULT_FIT_TOL = 1e-3


def _finite(v: float) -> bool:
    return v != NEG_INF


def default_n(freq: Frequency, target: int = 1000) -> int:
    """Largest approximant denominator of ``freq`` not exceeding ``target``."""
    if freq.is_rational:
        return freq.q * max(1, target // freq.q)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        qs = [a.q for a in approximants(freq, 64) if a.q <= target]
    return qs[-1] if qs else target


def log_norms(c: Cocycle, k: int, n: int, z) -> np.ndarray:
    """``(1/n) ln ||Lambda^k A_n(z)||`` at each phase (``-inf`` where zero)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    P, logscale = scaled_iterate(c, n, z, k)
    top = np.linalg.svd(P, compute_uv=False)[..., 0]
    with np.errstate(divide="ignore"):
        return (logscale + np.log(top)) / n


def _phase_average(samples: np.ndarray) -> tuple[float, float]:
    """Mean over the last axis and a quadrature error estimate (half grid)."""
    if np.any(samples < LOG_FLOOR):
        return NEG_INF, 0.0
    full = float(np.sum(samples) / samples.size)
    half = samples[::2]
    return full, abs(full - float(np.sum(half) / half.size))


def finite_scale_exponent(c: Cocycle, k: int, n: int, M: int = DEFAULT_GRID,
                          offset: float = 0.0) -> float:
    """``(1/n)(1/M) sum_m ln ||Lambda^k A_n(x_m)||`` with ``x_m = (m + offset)/M``.

    Returns ``-inf`` if some sample norm is below ``exp(-300 n)``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    x = (np.arange(M) + offset) / M
    return _phase_average(log_norms(c, k, n, x))[0]


@dataclass
class LyapunovProfile:
    """Sampled ``t -> L^k(alpha, A(. + i t))`` for ``k = 1..d``.

    ``values[k - 1, i]`` is the estimate at ``t[i]``; ``err`` holds the
    half-grid quadrature discrepancy of each sample.
    """

    t: np.ndarray
    values: np.ndarray
    n: int
    grid_size: int
    err: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def column(self, k: int) -> np.ndarray:
        return self.values[k - 1]

    def index_of(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.t, t, rtol=0, atol=1e-12))
        if hits.size == 0:
            raise KeyError(f"t={t} not sampled")
        return int(hits[0])

    def second_differences(self, k: int) -> np.ndarray:
        """Divided second differences (convexity check), finite samples only."""
        t, y = self.t, self.column(k)
        ok = np.isfinite(y)
        t, y = t[ok], y[ok]
        if t.size < 3:
            return np.zeros(0)
        s = np.diff(y) / np.diff(t)
        return np.diff(s) / (0.5 * (t[2:] - t[:-2]))

    def convexity_violation(self, k: int) -> float:
        """Most negative plain second difference ``y[i-1] - 2 y[i] + y[i+1]``.

        Meaningful for uniformly spaced samples; for general spacing it uses
        the secant deviation scaled to a unit step.
        """
        t, y = self.t, self.column(k)
        ok = np.isfinite(y)
        t, y = t[ok], y[ok]
        if t.size < 3:
            return 0.0
        h0, h1 = t[1:-1] - t[:-2], t[2:] - t[1:-1]
        # interpolated value at t[i] from neighbours minus actual value
        secant = (h1 * y[:-2] + h0 * y[2:]) / (h0 + h1)
        return float(np.min(secant - y[1:-1])) * 2.0

    def to_rows(self):
        """Rows ``(t, k, L_k, L^k, err)`` in a stable order."""
        for i, t in enumerate(self.t):
            spec = spectrum_from_values(self.values[:, i])
            for k in range(1, self.dim + 1):
                yield float(t), k, spec[k - 1], float(self.values[k - 1, i]), float(self.err[k - 1, i])


def profile(c: Cocycle, t_list, n: int, M: int = DEFAULT_GRID, ks=None,
            workers: int = 1) -> LyapunovProfile:
    """``L^k`` estimates of the shifted cocycles ``(alpha, A(. + i t))``.

    Each ``t`` is computed independently, so the result does not depend on
    ``workers``.
    """
    t = np.asarray(sorted(float(v) for v in t_list))
    d = c.dim
    ks = list(range(1, d + 1)) if ks is None else list(ks)
    values = np.full((d, t.size), np.nan)
    err = np.full((d, t.size), np.nan)
    x = np.arange(M) / M

    def one(i):
        shifted = c.shifted(t[i])  # raises RangeError early on overflow
        return [_phase_average(log_norms(shifted, k, n, x)) for k in ks]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(t.size)))
    else:
        results = [one(i) for i in range(t.size)]
    for i, res in enumerate(results):
        for k, (v, e) in zip(ks, res):
            values[k - 1, i] = v
            err[k - 1, i] = e
    return LyapunovProfile(t, values, n, M, err)


def spectrum_from_values(sums) -> list[float]:
    """First differences ``L_k = L^k - L^(k-1)`` with ``L^0 = 0``.

    Once a partial sum is ``-inf`` every later exponent is ``-inf``.
    """
    out, prev = [], 0.0
    for s in sums:
        s = float(s)
        if prev == NEG_INF or s == NEG_INF:
            out.append(NEG_INF)
            prev = NEG_INF
        else:
            out.append(s - prev)
            prev = s
    return out


def spectrum_from_profiles(prof: LyapunovProfile, t: float = 0.0) -> list[float]:
    """Individual exponents ``L_1 >= ... >= L_d`` at the sampled ``t``."""
    return spectrum_from_values(prof.values[:, prof.index_of(t)])


def lyapunov_spectrum(c: Cocycle, n: int | None = None, M: int = DEFAULT_GRID) -> list[float]:
    """Finite-scale estimate of ``(L_1, ..., L_d)``."""
    n = default_n(c.freq) if n is None else n
    x = np.arange(M) / M
    sums = [_phase_average(log_norms(c, k, n, x))[0] for k in range(1, c.dim + 1)]
    return spectrum_from_values(sums)


# ---------------------------------------------------------------- rational


def _require_rational(c: Cocycle) -> int:
    if not c.freq.is_rational:
        raise ValueError("a rational frequency p/q is required")
    return c.freq.q


def rational_exponent_at_phase(c: Cocycle, k: int, x) -> np.ndarray | float:
    """``(1/q) ln rho(Lambda^k A_q(x))`` for a rational frequency ``p/q``.

    ``-inf`` where the spectral radius vanishes.
    """
    q = _require_rational(c)
    z = np.asarray(x, dtype=complex)
    P, logscale = scaled_iterate(c, q, z, k)
    rho = np.asarray(spectral_radius(P))
    with np.errstate(divide="ignore"):
        out = np.where(rho > 0, (logscale + np.log(np.where(rho > 0, rho, 1.0))) / q, NEG_INF)
    return float(out) if out.ndim == 0 else out


def rational_mean_exponent(c: Cocycle, k: int, M: int = DEFAULT_GRID) -> float:
    """``L^k(p/q, A)``: phase average of the exact rational exponent.

    The spectrum of ``A_q(x)`` is ``1/q``-periodic in ``x`` so only
    ``[0, 1/q)`` is sampled. Isolated ``-inf`` samples are clamped at the log
    floor with a warning; if every sample is ``-inf`` so is the result.
    """
    q = _require_rational(c)
    x = np.arange(M) / (q * M)
    vals = np.asarray(rational_exponent_at_phase(c, k, x))
    bad = ~np.isfinite(vals) | (vals < LOG_FLOOR)
    if bad.all():
        return NEG_INF
    if bad.any():
        warnings.warn(
            f"{int(bad.sum())} of {M} samples clamped at ln-floor {LOG_FLOOR}; refine the grid",
            RuntimeWarning,
            stacklevel=2,
        )
        vals = np.where(bad, LOG_FLOOR, vals)
    return float(np.sum(vals) / M)


@dataclass
class UpperBoundReport:
    p: int
    q: int
    t: np.ndarray
    rational_sup: np.ndarray
    irrational: np.ndarray
    excess: float


def rational_upper_bound_check(c: Cocycle, k: int, index: int, t_values=(0.0,),
                               M: int = 512, n_irr: int | None = None,
                               M_irr: int = DEFAULT_GRID, irrational=None) -> UpperBoundReport:
    """Compare ``sup_x L^k(p_n/q_n, A(. + i t), x)`` with ``L^k(alpha, A(. + i t))``.

    ``index`` selects the approximant (1-based). ``excess`` is the largest
    difference over the sampled ``t``. Precomputed irrational estimates may
    be passed in ``irrational`` (one per ``t``).
    """
    if c.freq.is_rational:
        raise ValueError("frequency must be irrational")
    approx = approximants(c.freq, index)
    if len(approx) < index:
        raise ValueError(f"only {len(approx)} approximants available")
    a = approx[index - 1]
    t = np.asarray(t_values, dtype=float)
    n_irr = default_n(c.freq) if n_irr is None else n_irr
    x = np.arange(M) / (a.q * M)
    rat = Frequency.rational(a.p, a.q)
    sup_rat = np.empty(t.size)
    irr = np.empty(t.size)
    for i, ti in enumerate(t):
        shifted = c.shifted(ti)
        sup_rat[i] = np.max(rational_exponent_at_phase(shifted.with_frequency(rat), k, x))
        if irrational is None:
            irr[i] = finite_scale_exponent(shifted, k, n_irr, M_irr)
        else:
            irr[i] = irrational[i]
    diff = np.where(np.isfinite(irr), sup_rat - irr, np.where(np.isfinite(sup_rat), np.inf, 0.0))
    return UpperBoundReport(a.p, a.q, t, sup_rat, irr, float(np.max(diff)))


@dataclass
class TraceFourierReport:
    """Fourier analysis of ``x -> tr A_q(x)^k`` in the modes ``exp(2 pi i j q x)``."""

    p: int
    q: int
    k_power: int
    modes: np.ndarray
    log_abs_coeffs: np.ndarray
    t: np.ndarray
    dominant: np.ndarray
    phi_modal: np.ndarray
    phi_direct: np.ndarray
    zero_trace: bool

    @property
    def slopes(self) -> np.ndarray:
        """Slope ``-2 pi j / k`` of the dominant mode at each ``t``."""
        return -2 * np.pi * self.dominant / self.k_power

    @property
    def omegas(self) -> np.ndarray:
        return -self.dominant / self.k_power


def trace_fourier_analysis(c: Cocycle, k_power: int = 1, t_values=(0.0,),
                           grid: int | None = None, noise: float = 1e-12) -> TraceFourierReport:
    """Dominant Fourier modes of ``tr A_q(x)^k`` and the resulting max-log profile.

    ``phi_modal(t) = max_j [ln|a_j| / (k q) - 2 pi j t / k]`` over significant
    modes; ``phi_direct(t) = max_x ln|tr A_q(x + i t)^k| / (k q)`` on the grid.
    """
    q = _require_rational(c)
    k = int(k_power)
    N = c.map.degree
    G = max(int(grid or 0), 2 * k * N * q + 2)
    x = np.arange(G) / G
    P, ls = scaled_iterate(c, q, x)
    top = float(np.max(ls[np.isfinite(ls)])) if np.any(np.isfinite(ls)) else 0.0
    tr = np.trace(np.linalg.matrix_power(P, k), axis1=-2, axis2=-1)
    with np.errstate(invalid="ignore", over="ignore"):
        tr = tr * np.exp(k * (ls - top))
    tr = np.nan_to_num(tr)
    hat = np.fft.fft(tr) / G
    m = np.fft.fftfreq(G, d=1.0 / G).astype(int)
    keep = (m % q == 0) & (np.abs(m) <= k * N * q)
    j = m[keep] // q
    mag = np.abs(hat[keep])
    order = np.argsort(j)
    j, mag = j[order], mag[order]
    zero_trace = bool(mag.max() < 1e-14) if mag.size else True
    sig = mag > noise * (mag.max() if mag.size else 0.0)
    with np.errstate(divide="ignore"):
        log_abs = np.log(mag) + k * top
    t = np.asarray(t_values, dtype=float)
    dominant = np.zeros(t.size, dtype=int)
    phi_modal = np.full(t.size, NEG_INF)
    phi_direct = np.full(t.size, NEG_INF)
    if not zero_trace:
        js, la = j[sig], log_abs[sig]
        for i, ti in enumerate(t):
            vals = la / (k * q) - 2 * np.pi * js * ti / k
            best = int(np.argmax(vals))
            dominant[i], phi_modal[i] = js[best], vals[best]
            Pt, lst = scaled_iterate(c, q, x + 1j * ti)
            trt = np.trace(np.linalg.matrix_power(Pt, k), axis1=-2, axis2=-1)
            with np.errstate(divide="ignore"):
                logs = (np.log(np.abs(trt)) + k * lst) / (k * q)
            phi_direct[i] = float(np.max(logs))
    return TraceFourierReport(c.freq.p, q, k, j, log_abs, t, dominant, phi_modal,
                              phi_direct, zero_trace)


# ---------------------------------------------------------------- accelerations


def ladder(eps0: float = 0.1, levels: int = 8) -> np.ndarray:
    """Geometric ladder ``eps0 * 2^-m``, ``m = 0..levels-1`` (decreasing)."""
    return eps0 * 2.0 ** -np.arange(levels)


def snap(value: float, max_denominator: int, tol: float = DEFAULT_SNAP_TOL):
    """Nearest multiple of ``1/l`` for the smallest ``l`` within ``tol``.

    Returns ``(snapped, l, distance)``; when no ``l`` works the closest
    candidate overall is returned.
    """
    best = None
    for l in range(1, max(1, max_denominator) + 1):
        cand = round(value * l) / l
        dist = abs(value - cand)
        if dist < tol:
            return cand, l, dist
        if best is None or dist < best[2] - 1e-15:
            best = (cand, l, dist)
    return best


@dataclass
class AccelerationEntry:
    k: int
    omega_upper: float  # omega^k
    omega: float  # omega_k = omega^k - omega^(k-1)
    window: tuple[float, float]
    residual: float
    regular: bool
    snapped: float
    denominator: int
    snap_distance: float


@dataclass
class AccelerationReport:
    base: float
    side: int
    entries: list[AccelerationEntry] = field(default_factory=list)

    def omega_upper(self, k: int) -> float:
        return 0.0 if k == 0 else self.entries[k - 1].omega_upper

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "side": self.side,
            "entries": [
                {
                    "k": e.k,
                    "omega_upper": e.omega_upper,
                    "omega": e.omega,
                    "window": list(e.window),
                    "residual": e.residual,
                    "regular": e.regular,
                    "snapped": e.snapped,
                    "denominator": e.denominator,
                    "snap_distance": e.snap_distance,
                }
                for e in self.entries
            ],
        }


def _affine_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(np.max(np.abs(y - (slope * x + intercept))))


def acceleration(prof: LyapunovProfile, base: float = 0.0, side: int = 1,
                 tol: float = DEFAULT_FIT_TOL, snap_tol: float = DEFAULT_SNAP_TOL,
                 special_linear: bool = False) -> AccelerationReport:
    """One-sided accelerations ``omega^k`` at ``t = base``.

    The profile must contain ``base`` and points ``base + side * eps`` on a
    ladder. For each ``k`` an affine function is fitted to the points
    ``(0, L(base))`` and ``(eps, L(base + side eps))`` over the largest
    window of smallest ``eps`` whose max residual stays below ``tol``;
    ``omega^k`` is the fitted slope in ``t`` over ``2 pi``. Fewer than two
    ladder points in a passing window flags the entry as non-regular.
    """
    side = 1 if side >= 0 else -1
    ib = prof.index_of(base)
    dist = side * (prof.t - base)
    idx = np.flatnonzero(dist > 0)
    idx = idx[np.argsort(dist[idx])]
    d = prof.dim
    lmax = max(1, d - 1) if special_linear else d
    report = AccelerationReport(float(base), side)
    prev = 0.0
    for k in range(1, d + 1):
        y0 = prof.values[k - 1, ib]
        ys = prof.values[k - 1, idx]
        eps = dist[idx]
        if not np.isfinite(y0) or idx.size == 0 or not np.all(np.isfinite(ys)):
            report.entries.append(AccelerationEntry(k, math.nan, math.nan, (0.0, 0.0), math.inf,
                                                    False, math.nan, 0, math.inf))
            prev = math.nan
            continue
        xs = np.concatenate([[0.0], eps])
        yv = np.concatenate([[y0], ys])
        slope, resid = (yv[1] - yv[0]) / xs[1], 0.0
        size = 1
        for m in range(2, xs.size):
            s, r = _affine_fit(xs[: m + 1], yv[: m + 1])
            if r >= tol:
                break
            slope, resid, size = s, r, m
        regular = size >= 2
        w = side * slope / (2 * np.pi)
        cand, l, sd = snap(w, lmax, snap_tol)
        report.entries.append(
            AccelerationEntry(k, float(w), float(w - prev), (float(eps[0]), float(eps[size - 1])),
                              float(resid), bool(regular), float(cand), int(l), float(sd))
        )
        prev = w
    return report


def acceleration_profile(c: Cocycle, n: int, M: int = DEFAULT_GRID, base: float = 0.0,
                         eps0: float = 0.1, levels: int = 8, side: int = 1,
                         workers: int = 1) -> LyapunovProfile:
    """Profile sampled at ``base`` and on the ladder ``base + side * eps``."""
    ts = [base] + [base + side * e for e in ladder(eps0, levels)]
    return profile(c, ts, n, M, workers=workers)


@dataclass
class RegularityResult:
    affine: bool
    slope: float
    deviation: float
    window: tuple[float, float]


def regularity_check(prof: LyapunovProfile, k: int, window: tuple[float, float],
                     tol: float | None = None) -> RegularityResult:
    """Is ``t -> L^k`` affine on ``window``?

    Measures the largest deviation of the sampled values from the secant
    through the window end points. Default ``tol`` is ``1e-3`` times the
    window width.
    """
    a, b = window
    tol = 1e-3 * (b - a) if tol is None else tol
    sel = np.flatnonzero((prof.t >= a - 1e-12) & (prof.t <= b + 1e-12))
    if sel.size < 2:
        raise ValueError("window must contain at least two samples")
    t, y = prof.t[sel], prof.column(k)[sel]
    if not np.all(np.isfinite(y)):
        return RegularityResult(bool(np.all(y == NEG_INF)), math.nan, 0.0, (a, b))
    slope = (y[-1] - y[0]) / (t[-1] - t[0])
    secant = y[0] + slope * (t - t[0])
    dev = float(np.max(np.abs(secant - y)))
    return RegularityResult(dev < tol, float(slope), dev, (float(t[0]), float(t[-1])))


def shifted_profile_values(c: Cocycle, k: int, t_values, n: int, M: int = DEFAULT_GRID) -> np.ndarray:
    """``L^k`` estimates at each ``t`` (helper for series computations)."""
    x = np.arange(M) / M
    return np.array([_phase_average(log_norms(c.shifted(t), k, n, x))[0] for t in t_values])


__all__ = [
    "NEG_INF",
    "AccelerationEntry",
    "AccelerationReport",
    "LyapunovProfile",
    "RegularityResult",
    "TraceFourierReport",
    "UpperBoundReport",
    "acceleration",
    "acceleration_profile",
    "default_n",
    "finite_scale_exponent",
    "ladder",
    "log_norms",
    "lyapunov_spectrum",
    "profile",
    "rational_exponent_at_phase",
    "rational_mean_exponent",
    "rational_upper_bound_check",
    "regularity_check",
    "snap",
    "spectrum_from_profiles",
    "spectrum_from_values",
    "trace_fourier_analysis",
]
