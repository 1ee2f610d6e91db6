"""Dense complex matrix kernel.

Singular values, compound (exterior power) matrices, spectral radii, top
singular subspaces, orthogonal and oblique projectors and principal angles.
All functions are pure; most accept stacks of matrices with shape
``(..., d, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .exceptions import (
    DegenerateGapError,
    DimensionError,
    NormalizationError,
    TransversalityError,
)

DEFAULT_GAP_MARGIN = 1e-8


def _as_square(B) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    if B.ndim < 2 or B.shape[-1] != B.shape[-2]:
        raise DimensionError(f"expected square matrix, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ValueError("matrix has non-finite entries")
    return B


@dataclass(frozen=True)
class Subspace:
    """A point of the Grassmannian G(k, d), stored as an orthonormal basis.

    ``basis`` is a ``d x k`` matrix with orthonormal columns.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[1] > basis.shape[0]:
            raise DimensionError(f"basis must be d x k with k <= d, got {basis.shape}")
        gram = basis.conj().T @ basis
        if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-10, rtol=0):
            raise NormalizationError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, vectors, tol: float = 1e-12) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (must be independent)."""
        V = np.asarray(vectors, dtype=complex)
        if V.ndim == 1:
            V = V[:, None]
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        if s.size == 0 or s[-1] <= tol * max(s[0], 1.0):
            raise DimensionError("spanning vectors are linearly dependent")
        return cls(U)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        """Orthogonal complement."""
        U, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(U[:, self.rank:])


def singular_values(B) -> np.ndarray:
    """Singular values in decreasing order."""
    return np.linalg.svd(_as_square(B), compute_uv=False)


@lru_cache(maxsize=None)
def k_subsets(d: int, k: int) -> np.ndarray:
    """Lexicographically ordered k-subsets of range(d), shape (C(d,k), k)."""
    return np.array(list(combinations(range(d), k)), dtype=np.intp).reshape(comb(d, k), k)


def exterior_power(B, k: int) -> np.ndarray:
    """k-th compound matrix of ``B`` (all k x k minors).

    Rows and columns are indexed by k-subsets of ``range(d)`` in
    lexicographic order, so that ``exterior_power(A @ B, k) ==
    exterior_power(A, k) @ exterior_power(B, k)``. Works on stacks.
    """
    B = _as_square(B)
    d = B.shape[-1]
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    if k == 1:
        return B.copy()
    if k == d:
        return np.linalg.det(B)[..., None, None]
    idx = k_subsets(d, k)
    rows = idx[:, None, :, None]
    cols = idx[None, :, None, :]
    return np.linalg.det(B[..., rows, cols])


def spectral_radius(B) -> np.ndarray | float:
    """Largest eigenvalue modulus (LAPACK ``geev``, which balances first)."""
    B = _as_square(B)
    r = np.abs(np.linalg.eigvals(B)).max(axis=-1)
    return float(r) if r.ndim == 0 else r


def top_singular_subspace(B, k: int, margin: float = DEFAULT_GAP_MARGIN) -> Subspace:
    """Span of the right singular vectors of the ``k`` largest singular values.

    Raises :class:`DegenerateGapError` if ``sigma_k - sigma_{k+1}`` does not
    exceed ``margin * sigma_1``.
    """
    B = _as_square(B)
    if B.ndim != 2:
        raise DimensionError("top_singular_subspace takes a single matrix")
    d = B.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    _, s, Vh = np.linalg.svd(B)
    if k < d and (s[0] == 0 or s[k - 1] - s[k] <= margin * s[0]):
        raise DegenerateGapError(
            f"sigma_{k}={s[k - 1]:.6g} and sigma_{k + 1}={s[k]:.6g} are not separated"
        )
    return Subspace(Vh[:k].conj().T)


def projection_restriction_norm(S: Subspace, w, atol: float = 1e-10) -> float:
    """Norm of the orthogonal projection of the unit vector ``w`` onto ``S``."""
    w = np.asarray(w, dtype=complex)
    if abs(np.linalg.norm(w) - 1.0) > atol:
        raise NormalizationError("w must be a unit vector")
    return float(np.linalg.norm(S.basis.conj().T @ w))


def principal_angles(U: Subspace, V: Subspace) -> np.ndarray:
    """Principal angles between ``U`` and ``V`` in increasing order.

    Uses cosines for large angles and sines for small ones, which keeps
    small angles accurate.
    """
    if U.ambient_dim != V.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    m = min(U.rank, V.rank)
    cos = np.clip(np.linalg.svd(U.basis.conj().T @ V.basis, compute_uv=False)[:m], 0, 1)
    Q, R = (U, V) if U.rank <= V.rank else (V, U)
    resid = Q.basis - R.basis @ (R.basis.conj().T @ Q.basis)
    sin = np.sort(np.clip(np.linalg.svd(resid, compute_uv=False), 0, 1))[:m]
    angles = np.where(cos > np.sqrt(0.5), np.arcsin(sin), np.arccos(cos))
    return np.sort(angles)


def gap_metric(U: Subspace, V: Subspace) -> float:
    """Spectral norm of the difference of the orthogonal projectors."""
    if U.ambient_dim != V.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    if U.rank != V.rank:
        return 1.0
    return float(np.linalg.norm(U.projector - V.projector, 2))


class ObliqueProjection(NamedTuple):
    matrix: np.ndarray
    norm: float
    angle: float


def oblique_projector(u: Subspace, s: Subspace, min_angle: float = 1e-12) -> ObliqueProjection:
    """Projection onto ``u`` along ``s`` with its norm and the minimal angle.

    ``u`` and ``s`` must be complementary (ranks summing to the ambient
    dimension) and transverse. The returned norm is computed from the SVD of
    the projector itself; the angle from the principal angles, so
    ``norm * sin(angle) == 1`` is a genuine cross-check.
    """
    d = u.ambient_dim
    if s.ambient_dim != d or u.rank + s.rank != d:
        raise DimensionError("u and s must be complementary subspaces")
    theta = float(principal_angles(u, s)[0]) if min(u.rank, s.rank) > 0 else np.pi / 2
    if theta < min_angle:
        raise TransversalityError(f"subspaces are not transverse (angle {theta:.3g})")
    frame = np.hstack([u.basis, s.basis])
    pk = np.zeros((d, d))
    pk[: u.rank, : u.rank] = np.eye(u.rank)
    P = frame @ pk @ np.linalg.inv(frame)
    return ObliqueProjection(P, float(np.linalg.norm(P, 2)), theta)


def trace_power_lower_bound(B) -> tuple[int, float]:
    """Return ``(k, max_k |tr B^k|^(1/k))`` over ``1 <= k <= d``.

    Ties resolve to the smallest ``k``.
    """
    B = _as_square(B)
    if B.ndim != 2:
        raise DimensionError("trace_power_lower_bound takes a single matrix")
    best_k, best = 1, -1.0
    P = np.eye(B.shape[0], dtype=complex)
    for k in range(1, B.shape[0] + 1):
        P = P @ B
        val = abs(np.trace(P)) ** (1.0 / k)
        if val > best * (1 + 1e-12):
            best_k, best = k, val
    return best_k, float(best)
