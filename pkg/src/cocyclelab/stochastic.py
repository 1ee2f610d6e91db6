"""Monte Carlo hitting probabilities and bad-set measurements.

Brownian paths start at the origin and are stopped on leaving the open
square ``(-2, 2)^2``. Obstacles are finite unions of closed axis-aligned
boxes inside ``[-1, 1]^2``; boxes may be degenerate (segments, points).
Each step of a discretized path is tested as a segment against every box, so
thin obstacles cannot be jumped over.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle, approximants
from .exceptions import NormalizationError
from .lyapunov import default_n, finite_scale_exponent, log_norms

DEFAULT_WALKS = 10_000
DEFAULT_STEP = 1e-3
DEFAULT_SEED = 20240601
Z95 = 1.959963984540054
_CHUNK = 500
_BLOCK = 256
_HALF = 2.0


@dataclass(frozen=True)
class ObstacleSpec:
    """Union of closed boxes ``[x0, x1] x [y0, y1]`` inside ``[-1, 1]^2``."""

    boxes: tuple[tuple[float, float, float, float], ...] = ()

    def __post_init__(self):
        for b in self.boxes:
            x0, x1, y0, y1 = b
            if not (-1 <= x0 <= x1 <= 1 and -1 <= y0 <= y1 <= 1):
                raise ValueError(f"box {b} is not a box inside [-1, 1]^2")

    @classmethod
    def empty(cls) -> "ObstacleSpec":
        return cls(())

    @classmethod
    def full(cls) -> "ObstacleSpec":
        return cls(((-1.0, 1.0, -1.0, 1.0),))

    @classmethod
    def slab(cls, rho: float, top: float = 1.0) -> "ObstacleSpec":
        """Full-width horizontal slab ``[-1, 1] x [top - rho, top]``.

        Slabs sharing ``top`` are nested in ``rho``. A zero thickness gives
        the empty obstacle, not the line ``y = top``, which Brownian motion
        does hit.
        """
        if not 0 <= rho <= top + 1:
            raise ValueError("slab must fit inside [-1, 1]^2")
        if rho == 0:
            return cls.empty()
        return cls(((-1.0, 1.0, top - rho, top),))

    @classmethod
    def segment(cls, x: float = 0.0, y0: float = -1.0, y1: float = 1.0) -> "ObstacleSpec":
        """Vertical segment ``{x} x [y0, y1]``."""
        return cls(((x, x, y0, y1),))

    @property
    def rho(self) -> float:
        """Measure of the levels ``t`` in ``(-1, 1)`` with a non-empty slice."""
        ivs = sorted((b[2], b[3]) for b in self.boxes)
        total, cur_lo, cur_hi = 0.0, None, None
        for lo, hi in ivs:
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_hi is not None:
            total += cur_hi - cur_lo
        return total

    def contains(self, p: np.ndarray) -> np.ndarray:
        """Membership of points ``(..., 2)``."""
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1], dtype=bool)
        for x0, x1, y0, y1 in self.boxes:
            out |= (p[..., 0] >= x0) & (p[..., 0] <= x1) & (p[..., 1] >= y0) & (p[..., 1] <= y1)
        return out

    def hits_segment(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Does the segment from ``a`` to ``b`` meet the obstacle (Liang-Barsky)?"""
        out = np.zeros(a.shape[:-1], dtype=bool)
        d = b - a
        for x0, x1, y0, y1 in self.boxes:
            lo = np.zeros(a.shape[:-1])
            hi = np.ones(a.shape[:-1])
            ok = np.ones(a.shape[:-1], dtype=bool)
            for axis, (blo, bhi) in enumerate(((x0, x1), (y0, y1))):
                p, v = a[..., axis], d[..., axis]
                still = v == 0
                ok &= ~still | ((p >= blo) & (p <= bhi))
                with np.errstate(divide="ignore", invalid="ignore"):
                    t1 = (blo - p) / v
                    t2 = (bhi - p) / v
                tmin = np.where(still, -np.inf, np.minimum(t1, t2))
                tmax = np.where(still, np.inf, np.maximum(t1, t2))
                lo = np.maximum(lo, tmin)
                hi = np.minimum(hi, tmax)
            out |= ok & (lo <= hi)
        return out


@dataclass
class HitEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    hits: int
    walks: int
    step: float

    @property
    def half_width(self) -> float:
        return Z95 * math.sqrt(self.estimate * (1 - self.estimate) / self.walks)


def _run_chunk(spec: ObstacleSpec, n: int, h: float, seed_seq: np.random.SeedSequence,
               max_steps: int) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    pos = np.zeros((n, 2))
    if spec.contains(np.zeros(2)):
        return n
    alive = np.ones(n, dtype=bool)
    hit = np.zeros(n, dtype=bool)
    sd = math.sqrt(h)
    steps = 0
    while alive.any() and steps < max_steps:
        # draws are made for every walker so that paths do not depend on spec
        inc = rng.standard_normal((n, _BLOCK, 2)) * sd
        path = pos[:, None, :] + np.cumsum(inc, axis=1)
        prev = np.concatenate([pos[:, None, :], path[:, :-1]], axis=1)
        idx = np.flatnonzero(alive)
        seg_hit = spec.hits_segment(prev[idx], path[idx])
        outside = np.any(np.abs(path[idx]) >= _HALF, axis=-1)
        big = _BLOCK + 1
        first_hit = np.where(seg_hit.any(axis=1), seg_hit.argmax(axis=1), big)
        first_out = np.where(outside.any(axis=1), outside.argmax(axis=1), big)
        # a step that leaves the square cannot also reach [-1, 1]^2
        newly_hit = first_hit < first_out
        done = newly_hit | (first_out < big)
        hit[idx[newly_hit]] = True
        alive[idx[done]] = False
        pos = path[:, -1]
        steps += _BLOCK
    return int(hit.sum())


def hitting_probability(spec: ObstacleSpec, walks: int = DEFAULT_WALKS, step: float = DEFAULT_STEP,
                        seed: int = DEFAULT_SEED, max_time: float = 200.0,
                        workers: int = 1) -> HitEstimate:
    """Probability that Brownian motion from 0 hits ``spec`` before leaving ``(-2, 2)^2``.

    Walks use Gaussian increments of variance ``step`` per coordinate, drawn
    from per-chunk Philox streams spawned from ``seed``; the estimate does
    not depend on ``workers``. Paths still running after ``max_time`` count
    as misses. The interval is the 95% normal approximation.
    """
    if walks < 1 or step <= 0:
        raise ValueError("walks and step must be positive")
    sizes = [min(_CHUNK, walks - s) for s in range(0, walks, _CHUNK)]
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    max_steps = int(math.ceil(max_time / step))
    args = list(zip(sizes, seqs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda a: _run_chunk(spec, a[0], step, a[1], max_steps), args))
    else:
        hits = sum(_run_chunk(spec, n, step, s, max_steps) for n, s in args)
    p = hits / walks
    hw = Z95 * math.sqrt(p * (1 - p) / walks)
    return HitEstimate(p, max(0.0, p - hw), min(1.0, p + hw), hits, walks, step)


@dataclass
class ScalingStudy:
    rho: np.ndarray
    estimates: list[HitEstimate]
    c_hat: float
    c_low: float
    c_high: float
    monotone: bool

    @property
    def positive(self) -> bool:
        return self.c_low > 0

    def rows(self):
        for r, e in zip(self.rho, self.estimates):
            yield float(r), e.estimate, e.ci_low, e.ci_high


def obstacle_scaling_study(specs, walks: int = DEFAULT_WALKS, step: float = DEFAULT_STEP,
                           seed: int = DEFAULT_SEED, workers: int = 1) -> ScalingStudy:
    """Fit the floor ``c = min P(rho) / rho`` over a family of obstacles.

    ``specs`` is a sequence of :class:`ObstacleSpec` or of slab thicknesses.
    Obstacles with ``rho = 0`` are estimated but left out of the ratio. All
    specs share one seed, so the walks are the same paths for each.
    ``monotone`` checks ``P`` non-decreasing in ``rho`` up to the intervals.
    """
    specs = [s if isinstance(s, ObstacleSpec) else ObstacleSpec.slab(float(s)) for s in specs]
    specs.sort(key=lambda s: s.rho)
    rhos = np.array([s.rho for s in specs])
    ests = [hitting_probability(s, walks, step, seed, workers=workers) for s in specs]
    ratios = [(e.estimate / r, e.ci_low / r, e.ci_high / r) for r, e in zip(rhos, ests) if r > 0]
    if ratios:
        c_hat, c_lo, c_hi = min(ratios)
    else:
        c_hat = c_lo = c_hi = math.nan
    monotone = all(ests[i].estimate <= ests[j].estimate + ests[i].half_width + ests[j].half_width
                   for i in range(len(ests)) for j in range(i + 1, len(ests)))
    return ScalingStudy(rhos, ests, c_hat, c_lo, c_hi, monotone)


# ---------------------------------------------------------------- bad sets


@dataclass
class BadSetReport:
    q: int
    q_prev: int
    delta: float
    eps: float
    n: int
    measure: float
    t: np.ndarray
    profile: np.ndarray  # inf_x sup_k psi at each t
    threshold: float  # psi_floor - delta
    psi_floor: float  # inf_t sup_x psi
    reference: float  # L in psi = (phi - (L - kappa)) / (3 kappa)
    kappa: float

    def to_dict(self) -> dict:
        return {"q": self.q, "q_prev": self.q_prev, "delta": self.delta, "eps": self.eps,
                "n": self.n, "measure": self.measure, "threshold": self.threshold,
                "psi_floor": self.psi_floor, "reference": self.reference, "kappa": self.kappa}


def _normalization(phi: np.ndarray, reference: float, kappa: float) -> float:
    """Smallest ``kappa' >= kappa`` with ``psi <= 1`` and ``inf_t sup_x psi >= 0``."""
    floor = float(np.min(np.max(phi, axis=1)))
    top = float(np.max(phi))
    if not (math.isfinite(floor) and math.isfinite(top) and math.isfinite(reference)):
        raise NormalizationError("log-norm function is not finite on the strip sample")
    return max(kappa, (top - reference) / 2, reference - floor)


def bad_set_series(c: Cocycle, n: int, indices, delta: float = 1 / 3, eps: float = 0.02,
                   t_grid: int = 81, x_grid: int = 256, kappa: float = 0.01,
                   reference: float | None = None) -> list[BadSetReport]:
    """Measured bad sets for several approximants with one shared ``psi``.

    ``psi = (phi_n - (L - kappa)) / (3 kappa)`` with
    ``phi_n = (1/n) ln ||A_n||`` and ``L`` the reference exponent at ``t = 0``;
    ``kappa`` is enlarged if needed so that ``psi <= 1`` and
    ``inf_t sup_x psi >= 0`` on the sample. A ``t`` is bad when
    ``inf_x sup_{0 <= k < q + q'} psi(x + k alpha + i t) <= inf_t sup_x psi - delta``.
    """
    if c.freq.is_rational:
        raise ValueError("frequency must be irrational")
    indices = list(indices)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        approx = approximants(c.freq, max(indices))
    if len(approx) < max(indices):
        raise ValueError(f"only {len(approx)} approximants available")
    span = max(approx[i - 1].q + approx[i - 1].q_prev for i in indices)
    t = np.linspace(-eps, eps, t_grid + 2)[1:-1]
    x = np.arange(x_grid) / x_grid
    pts = x[:, None] + c.alpha * np.arange(span)[None, :]
    phi = np.empty((t.size, x_grid, span))
    for i, ti in enumerate(t):
        phi[i] = log_norms(c.shifted(ti), 1, n, pts)
    if reference is None:
        reference = finite_scale_exponent(c, 1, default_n(c.freq))
    k_eff = _normalization(phi[:, :, 0], reference, kappa)
    psi = (phi - (reference - k_eff)) / (3 * k_eff)
    floor = float(np.min(np.max(psi[:, :, 0], axis=1)))
    if floor < -1e-12:
        raise NormalizationError(f"inf_t sup_x psi = {floor:.3g} < 0")
    out = []
    for idx in indices:
        a = approx[idx - 1]
        prof = np.min(np.max(psi[:, :, : a.q + a.q_prev], axis=2), axis=1)
        bad = prof <= floor - delta
        out.append(BadSetReport(a.q, a.q_prev, delta, eps, n, float(bad.mean() * 2 * eps), t,
                                prof, floor - delta, floor, float(reference), k_eff))
    return out


def bad_set_measure(c: Cocycle, n: int, index: int, delta: float = 1 / 3, eps: float = 0.02,
                    t_grid: int = 81, x_grid: int = 256, kappa: float = 0.01,
                    reference: float | None = None) -> BadSetReport:
    """Measured ``|T|`` for the approximant number ``index`` (see :func:`bad_set_series`)."""
    return bad_set_series(c, n, [index], delta, eps, t_grid, x_grid, kappa, reference)[0]


__all__ = [
    "BadSetReport",
    "HitEstimate",
    "ObstacleSpec",
    "ScalingStudy",
    "bad_set_measure",
    "bad_set_series",
    "hitting_probability",
    "obstacle_scaling_study",
]
