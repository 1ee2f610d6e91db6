"""Analytic one-frequency cocycles.

A map ``A: R/Z -> L(C^d, C^d)`` is stored as a matrix trigonometric
polynomial ``A(z) = sum_j C_j exp(2 pi i j z)`` so that it can be evaluated
at complex phases and shifted into the complex strip exactly. A cocycle pairs
such a map with a :class:`Frequency`.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError, RangeError
from .linalg import exterior_power

# exp(700) is close to the largest finite double
_MAX_EXPONENT = 700.0
REMAINDER_STOP = 1e-12


class TrigMatrixPoly:
    """Matrix-valued trigonometric polynomial of degree ``N``.

    ``coeffs[j + N]`` holds the ``d x d`` coefficient of ``exp(2 pi i j z)``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] % 2 != 1:
            raise DimensionError("coeffs must have shape (2N+1, d, d)")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def constant(cls, C) -> "TrigMatrixPoly":
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        return cls(C[None])

    @classmethod
    def from_modes(cls, modes: dict[int, np.ndarray], dim: int | None = None) -> "TrigMatrixPoly":
        """Build from a ``{j: C_j}`` mapping; missing modes are zero."""
        mats = {j: np.atleast_2d(np.asarray(C, dtype=complex)) for j, C in modes.items()}
        if dim is None:
            dim = next(iter(mats.values())).shape[0]
        N = max((abs(j) for j in mats), default=0)
        coeffs = np.zeros((2 * N + 1, dim, dim), dtype=complex)
        for j, C in mats.items():
            coeffs[j + N] += C
        return cls(coeffs)

    @classmethod
    def from_function(cls, func, dim: int, degree: int) -> "TrigMatrixPoly":
        """Interpolate ``func(x) -> (..., d, d)`` by a degree-``degree`` polynomial.

        Exact when ``func`` is itself a trigonometric polynomial of at most
        that degree.
        """
        G = 2 * degree + 1
        x = np.arange(G) / G
        vals = np.asarray(func(x), dtype=complex).reshape(G, dim, dim)
        hat = np.fft.fft(vals, axis=0) / G
        modes = np.concatenate([hat[G - degree:], hat[: degree + 1]], axis=0)
        return cls(modes)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        N = self.degree
        return np.arange(-N, N + 1)

    def coefficient(self, j: int) -> np.ndarray:
        N = self.degree
        if abs(j) > N:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.coeffs[j + N]

    def __call__(self, z) -> np.ndarray:
        return evaluate(self, z)

    def __repr__(self) -> str:
        return f"TrigMatrixPoly(dim={self.dim}, degree={self.degree})"

    def sup_norm_bound(self, t: float = 0.0) -> float:
        """Upper bound for ``sup_x ||A(x + i s)||`` over ``|s| <= |t|``."""
        norms = np.linalg.norm(self.coeffs, ord=2, axis=(1, 2))
        return float(np.sum(norms * np.exp(2 * np.pi * np.abs(self.modes) * abs(t))))

    def derivative_bound(self) -> float:
        """Upper bound for ``sup_x ||A'(x)||`` on the real line."""
        norms = np.linalg.norm(self.coeffs, ord=2, axis=(1, 2))
        return float(np.sum(norms * 2 * np.pi * np.abs(self.modes)))

    def scaled(self, factor: complex) -> "TrigMatrixPoly":
        return TrigMatrixPoly(self.coeffs * factor)

    def __add__(self, other: "TrigMatrixPoly") -> "TrigMatrixPoly":
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch")
        N = max(self.degree, other.degree)
        out = np.zeros((2 * N + 1, self.dim, self.dim), dtype=complex)
        out[N - self.degree: N + self.degree + 1] += self.coeffs
        out[N - other.degree: N + other.degree + 1] += other.coeffs
        return TrigMatrixPoly(out)


def evaluate(A: TrigMatrixPoly, z) -> np.ndarray:
    """Evaluate ``A`` at (arrays of) complex phases; returns ``(..., d, d)``."""
    z = np.asarray(z, dtype=complex)
    N = A.degree
    if N == 0:
        return np.broadcast_to(A.coeffs[0], z.shape + A.coeffs.shape[1:]).copy()
    # exact 1-periodicity in Re z
    z = (z.real % 1.0) + 1j * z.imag
    phase = np.exp(2j * np.pi * z[..., None] * A.modes)
    return np.tensordot(phase, A.coeffs, axes=([-1], [0]))


def shift_imag(A: TrigMatrixPoly, t: float) -> TrigMatrixPoly:
    """The map ``x -> A(x + i t)`` as a new trigonometric polynomial."""
    if t == 0:
        return A
    exponents = -2 * np.pi * A.modes * t
    if np.max(np.abs(exponents)) > _MAX_EXPONENT:
        raise RangeError(
            f"shift t={t} overflows mode |j|={A.degree}; reduce |t| or the degree"
        )
    return TrigMatrixPoly(A.coeffs * np.exp(exponents)[:, None, None])


@dataclass(frozen=True)
class Frequency:
    """Rotation number ``alpha`` in [0, 1).

    Rational frequencies keep the exact reduced fraction ``p/q``.
    """

    value: float
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.q is not None:
            if self.q < 1 or math.gcd(self.p, self.q) != 1:
                raise ValueError(f"rational frequency must be reduced with q >= 1: {self.p}/{self.q}")

    @classmethod
    def rational(cls, p: int, q: int) -> "Frequency":
        f = Fraction(p, q)
        f -= math.floor(f)
        return cls(float(f), f.numerator, f.denominator)

    @classmethod
    def irrational(cls, value: float) -> "Frequency":
        return cls(float(value) % 1.0)

    @classmethod
    def parse(cls, text: str) -> "Frequency":
        """``"p/q"`` gives a rational frequency, anything else a float."""
        text = str(text).strip()
        if "/" in text:
            p, q = text.split("/")
            return cls.rational(int(p), int(q))
        return cls.irrational(float(text))

    @property
    def is_rational(self) -> bool:
        return self.q is not None

    def __str__(self) -> str:
        return f"{self.p}/{self.q}" if self.is_rational else repr(self.value)


class Approximant(NamedTuple):
    p: int
    q: int
    q_prev: int
    remainder: float


def approximants(f: Frequency | float, count: int) -> list[Approximant]:
    """Continued-fraction convergents ``p_n/q_n``, ``n >= 1``.

    Runs the Euclidean algorithm on the pair ``(1, alpha)`` using the exact
    rational value of the stored double. ``remainder`` is ``|q_n alpha - p_n|``
    and ``q_prev`` the previous denominator. The list stops early, with a
    warning, once the remainder falls below 1e-12: beyond that point the
    double cannot be told apart from a rational.
    """
    value = f.value if isinstance(f, Frequency) else float(f) % 1.0
    exact = isinstance(f, Frequency) and f.is_rational
    x = Fraction(f.p, f.q) if exact else Fraction(value)
    # convergents p_{-1}/q_{-1} = 1/0 and p_0/q_0 = a_0/1 with a_0 = 0
    p_prev, q_prev, p, q = 1, 0, 0, 1
    r_prev, r = Fraction(1), x
    out: list[Approximant] = []
    while len(out) < count:
        if r == 0 or r < REMAINDER_STOP:
            if not exact:
                warnings.warn(
                    f"frequency {value!r} is rational at double precision; "
                    f"approximant list truncated after {len(out)} terms",
                    RuntimeWarning,
                    stacklevel=2,
                )
            break
        a = r_prev // r
        r_prev, r = r, r_prev - a * r
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Approximant(p, q, q_prev, float(r)))
    return out


@dataclass(frozen=True)
class Cocycle:
    """Pair ``(alpha, A)`` acting by ``(x, w) -> (x + alpha, A(x) w)``."""

    freq: Frequency
    map: TrigMatrixPoly

    @property
    def alpha(self) -> float:
        return self.freq.value

    @property
    def dim(self) -> int:
        return self.map.dim

    def shifted(self, t: float) -> "Cocycle":
        return Cocycle(self.freq, shift_imag(self.map, t))

    def with_frequency(self, freq: Frequency) -> "Cocycle":
        return Cocycle(freq, self.map)


def _rescale(P: np.ndarray, logscale: np.ndarray) -> None:
    if not np.all(np.isfinite(P)):
        raise RangeError("matrix product is not finite in double precision")
    # pre-scale by the largest modulus so the squared sum cannot overflow
    big = np.max(np.abs(P), axis=(-2, -1))
    unit = np.where(big > 0, big, 1.0)
    norm = big * np.linalg.norm(P / unit[..., None, None], axis=(-2, -1))
    nz = norm > 0
    safe = np.where(nz, norm, 1.0)
    P /= safe[..., None, None]
    logscale += np.where(nz, np.log(safe), -np.inf)


def step_matrices(c: Cocycle, z, k: int = 1) -> np.ndarray:
    """``Lambda^k A(z)`` evaluated at the phases ``z``."""
    M = evaluate(c.map, z)
    return M if k == 1 else exterior_power(M, k)


def scaled_iterate(c: Cocycle, n: int, z, k: int = 1):
    """Overflow-safe ``Lambda^k A_n(z)``.

    Returns ``(P, logscale)`` with ``Lambda^k A_n(z) = exp(logscale) * P``
    and ``||P||_F = 1`` (or ``P = 0`` with ``logscale = -inf``).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = np.asarray(z, dtype=complex)
    dk = math.comb(c.dim, k)
    P = np.broadcast_to(np.eye(dk, dtype=complex), z.shape + (dk, dk)).copy()
    logscale = np.zeros(z.shape)
    for j in range(n):
        P = step_matrices(c, z + j * c.alpha, k) @ P
        _rescale(P, logscale)
    return P, logscale


def iterate(c: Cocycle, n: int, z) -> np.ndarray:
    """``A_n(z) = A(z + (n-1) alpha) ... A(z + alpha) A(z)``; identity for n = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = np.asarray(z, dtype=complex)
    P = np.broadcast_to(np.eye(c.dim, dtype=complex), z.shape + (c.dim, c.dim)).copy()
    for j in range(n):
        P = evaluate(c.map, z + j * c.alpha) @ P
    return P


def exterior_cocycle(c: Cocycle, k: int) -> Cocycle:
    """The cocycle ``(alpha, Lambda^k A)`` on ``C^(d choose k)``.

    ``Lambda^k A`` has degree at most ``k N``; it is recovered exactly by
    sampling on ``2 k N + 1`` phases and transforming back.
    """
    d = c.dim
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    if k == 1:
        return c
    N = k * c.map.degree
    dk = math.comb(d, k)
    poly = TrigMatrixPoly.from_function(
        lambda x: exterior_power(evaluate(c.map, x), k), dk, N
    )
    return Cocycle(c.freq, poly)


# ---------------------------------------------------------------- families


GOLDEN = (math.sqrt(5) - 1) / 2


def _default_freq(freq) -> Frequency:
    if freq is None:
        return Frequency.irrational(GOLDEN)
    if isinstance(freq, Frequency):
        return freq
    return Frequency.parse(freq)


def almost_mathieu(E: float = 0.0, lam: float = 3.0, freq=None) -> Cocycle:
    """``A(x) = [[E - lam cos 2 pi x, -1], [1, 0]]``."""
    half = np.array([[-lam / 2, 0], [0, 0]])
    poly = TrigMatrixPoly.from_modes({0: [[E, -1], [1, 0]], 1: half, -1: half})
    return Cocycle(_default_freq(freq), poly)


def diag(values=(2.0, 1.0), windings=None, freq=None) -> Cocycle:
    """``diag(v_i exp(2 pi i w_i x))``; constant when ``windings`` is omitted."""
    values = [complex(v) for v in values]
    windings = [0] * len(values) if windings is None else [int(w) for w in windings]
    if len(windings) != len(values):
        raise DimensionError("values and windings must have equal length")
    d = len(values)
    modes: dict[int, np.ndarray] = {}
    for i, (v, w) in enumerate(zip(values, windings)):
        modes.setdefault(w, np.zeros((d, d), dtype=complex))[i, i] = v
    return Cocycle(_default_freq(freq), TrigMatrixPoly.from_modes(modes, dim=d))


def scalar_winding(winding: int = 1, scale: float = 1.0, freq=None) -> Cocycle:
    """One-dimensional ``A(x) = scale * exp(2 pi i winding x)``."""
    return Cocycle(_default_freq(freq), TrigMatrixPoly.from_modes({int(winding): [[scale]]}))


def random_trig(dim: int = 2, degree: int = 1, seed: int = 0, decay: float = 1.0,
                freq=None) -> Cocycle:
    """Complex Gaussian coefficients with weight ``exp(-decay |j|)``."""
    rng = np.random.default_rng(seed)
    shape = (2 * degree + 1, dim, dim)
    C = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    C *= np.exp(-decay * np.abs(np.arange(-degree, degree + 1)))[:, None, None] / math.sqrt(2 * dim)
    return Cocycle(_default_freq(freq), TrigMatrixPoly(C))


FAMILIES = {
    "almost_mathieu": almost_mathieu,
    "diag": diag,
    "scalar_winding": scalar_winding,
    "random_trig": random_trig,
}


def family(name: str, freq=None, **params) -> Cocycle:
    """Built-in family by name."""
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return builder(freq=freq, **params)


# ---------------------------------------------------------------- JSON specs


def frequency_to_dict(f: Frequency) -> dict:
    if f.is_rational:
        return {"kind": "rational", "p": f.p, "q": f.q}
    return {"kind": "irrational", "value": f.value}


def frequency_from_dict(d: dict) -> Frequency:
    kind = d.get("kind")
    if kind == "rational":
        return Frequency.rational(int(d["p"]), int(d["q"]))
    if kind == "irrational":
        return Frequency.irrational(float(d["value"]))
    raise ValueError(f"unknown frequency kind {kind!r}")


def cocycle_to_dict(c: Cocycle) -> dict:
    coeffs = []
    for j in c.map.modes:
        C = c.map.coefficient(int(j))
        coeffs.append({"j": int(j), "re": C.real.tolist(), "im": C.imag.tolist()})
    return {"dim": c.dim, "freq": frequency_to_dict(c.freq), "coeffs": coeffs}


def cocycle_from_dict(d: dict) -> Cocycle:
    """Inverse of :func:`cocycle_to_dict`; ``im`` parts may be omitted."""
    try:
        dim = int(d["dim"])
        freq = frequency_from_dict(d["freq"])
        modes = {}
        for entry in d["coeffs"]:
            re = np.asarray(entry["re"], dtype=float)
            im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != (dim, dim) or im.shape != (dim, dim):
                raise DimensionError(f"coefficient j={entry['j']} is not {dim}x{dim}")
            modes[int(entry["j"])] = re + 1j * im
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed cocycle spec: {exc}") from exc
    if not modes:
        raise ValueError("cocycle spec has no coefficients")
    return Cocycle(freq, TrigMatrixPoly.from_modes(modes, dim=dim))


def load_cocycle(path) -> Cocycle:
    with open(path, encoding="utf-8") as fh:
        return cocycle_from_dict(json.load(fh))


def dump_cocycle(c: Cocycle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cocycle_to_dict(c), fh, indent=2)
        fh.write("\n")
