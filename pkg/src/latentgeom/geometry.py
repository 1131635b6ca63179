"""Constant-curvature manifolds, geodesic distances, and embedding tests.

The three candidate geometries (flat, positively curved, negatively curved)
are handled through their ambient models: the sphere sits in Euclidean
space, the hyperboloid in Minkowski space.  Whether a distance matrix can
be realized exactly on one of these manifolds is decided by the eigenvalue
signature of a curvature-indexed Gram form of the distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np


class GeometryError(ValueError):
    """Inconsistent geometry specification or off-manifold point."""


class EigenSolverError(RuntimeError):
    """Symmetric eigendecomposition failed to converge."""


class Geometry(str, Enum):
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class ManifoldSpec:
    """A simply connected, complete manifold of constant curvature.

    ``curvature`` must be 0 exactly when ``kind`` is Euclidean, positive
    for spherical, negative for hyperbolic.
    """

    kind: Geometry
    dim: int
    curvature: float = 0.0

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError(f"dimension must be >= 1, got {self.dim}")
        k = self.curvature
        kind = Geometry(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Geometry.EUCLIDEAN and k != 0.0:
            raise GeometryError("Euclidean manifold requires curvature 0")
        if kind is Geometry.SPHERICAL and not k > 0.0:
            raise GeometryError("spherical manifold requires curvature > 0")
        if kind is Geometry.HYPERBOLIC and not k < 0.0:
            raise GeometryError("hyperbolic manifold requires curvature < 0")

    @property
    def ambient_dim(self) -> int:
        """Length of ambient coordinate vectors (dim for flat, dim+1 curved)."""
        return self.dim if self.kind is Geometry.EUCLIDEAN else self.dim + 1


def euclidean_form(x: np.ndarray, y: np.ndarray) -> float:
    """Standard inner product of the ambient Euclidean space."""
    return float(np.dot(x, y))


def minkowski_form(x: np.ndarray, y: np.ndarray) -> float:
    """Indefinite inner product -x0*y0 + sum_i xi*yi of Minkowski space."""
    return float(-x[0] * y[0] + np.dot(x[1:], y[1:]))


def check_on_manifold(m: ManifoldSpec, x: np.ndarray, tol: float = 1e-9) -> None:
    """Raise GeometryError if ``x`` is not on the locus defining ``m``.

    Curved points must satisfy Q(x, x) = 1/curvature (with x0 > 0 on the
    hyperboloid); Euclidean points only need the right length.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (m.ambient_dim,):
        raise GeometryError(
            f"point has shape {x.shape}, expected ({m.ambient_dim},)"
        )
    if m.kind is Geometry.EUCLIDEAN:
        return
    target = 1.0 / m.curvature
    q = euclidean_form(x, x) if m.kind is Geometry.SPHERICAL else minkowski_form(x, x)
    if abs(q - target) > tol * max(1.0, abs(target)):
        raise GeometryError(
            f"point violates locus Q(x,x)={target:.6g} (got {q:.6g})"
        )
    if m.kind is Geometry.HYPERBOLIC and not x[0] > 0:
        raise GeometryError("hyperboloid points require x0 > 0")


def geodesic_distance(m: ManifoldSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Geodesic distance between two on-manifold points.

    Spherical and hyperbolic arguments to arccos/arccosh are clamped to
    their domains; floating-point drift near coincident or antipodal
    points otherwise produces NaN.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    check_on_manifold(m, x)
    check_on_manifold(m, y)
    k = m.curvature
    if m.kind is Geometry.EUCLIDEAN:
        return float(np.linalg.norm(x - y))
    if m.kind is Geometry.SPHERICAL:
        c = np.clip(k * euclidean_form(x, y), -1.0, 1.0)
        return float(math.acos(c) / math.sqrt(k))
    c = max(1.0, k * minkowski_form(x, y))
    return float(math.acosh(c) / math.sqrt(-k))


def pairwise_distances(m: ManifoldSpec, points: np.ndarray) -> np.ndarray:
    """All geodesic distances between rows of ``points`` (n x ambient_dim)."""
    pts = np.asarray(points, dtype=float)
    k = m.curvature
    if m.kind is Geometry.EUCLIDEAN:
        sq = np.sum(pts**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
        d = np.sqrt(np.maximum(d2, 0.0))
    elif m.kind is Geometry.SPHERICAL:
        c = np.clip(k * (pts @ pts.T), -1.0, 1.0)
        d = np.arccos(c) / math.sqrt(k)
    else:
        eta = np.ones(pts.shape[1])
        eta[0] = -1.0
        c = np.maximum(1.0, k * ((pts * eta) @ pts.T))
        d = np.arccosh(c) / math.sqrt(-k)
    np.fill_diagonal(d, 0.0)
    return d


def _centering(k: int) -> np.ndarray:
    return np.eye(k) - np.full((k, k), 1.0 / k)


def cosine_form(dist: np.ndarray, kappa: float) -> np.ndarray:
    """Entrywise cos(sqrt(kappa) d) for kappa > 0, cosh(sqrt(-kappa) d) for kappa < 0.

    This is the curvature-scaled Gram form whose eigenvalue signature
    encodes embeddability on the curved manifolds.
    """
    if kappa == 0.0:
        raise GeometryError("cosine_form is undefined at curvature 0")
    d = np.asarray(dist, dtype=float)
    if kappa > 0:
        return np.cos(math.sqrt(kappa) * d)
    return np.cosh(math.sqrt(-kappa) * d)


def gram_matrix(dist: np.ndarray, kappa: float) -> np.ndarray:
    """Curvature-indexed Gram form of a distance matrix.

    For nonzero curvature this is cosine_form(dist, kappa) / kappa; at
    curvature 0 it is the double-centered squared-distance matrix
    -0.5 * J (D*D) J familiar from classical scaling.
    """
    d = np.asarray(dist, dtype=float)
    if kappa != 0.0:
        return cosine_form(d, kappa) / kappa
    j = _centering(d.shape[0])
    return -0.5 * (j @ (d * d) @ j)


def eig_sym(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    a = np.asarray(w, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    sym = 0.5 * (a + a.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigendecomposition did not converge: {exc}") from exc
    return vals, vecs


class Signature(NamedTuple):
    """Counts of positive, zero, and negative eigenvalues."""

    positive: int
    zero: int
    negative: int


def signature(w: np.ndarray, zero_tol: float | None = None) -> Signature:
    """Eigenvalue signature of a symmetric matrix.

    Eigenvalues within ``zero_tol`` of zero count as zero; the default
    tolerance is 1e-8 relative to the largest eigenvalue magnitude.
    """
    vals, _ = eig_sym(w)
    if zero_tol is None:
        zero_tol = 1e-8 * max(1e-300, float(np.max(np.abs(vals))))
    elif zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    pos = int(np.sum(vals > zero_tol))
    neg = int(np.sum(vals < -zero_tol))
    return Signature(pos, len(vals) - pos - neg, neg)


class EmbeddingCheck(NamedTuple):
    feasible: bool
    minimal_dim: int


def embeddable(
    dist: np.ndarray,
    kind: Geometry,
    kappa: float = 0.0,
    zero_tol: float | None = None,
) -> EmbeddingCheck:
    """Can ``dist`` be realized exactly on the given manifold class?

    Euclidean: the double-centered Gram form must be positive
    semi-definite, and its rank is the smallest embedding dimension.
    Spherical (kappa > 0): the cosine form must have no negative
    eigenvalues; smallest dimension is (number of positives) - 1.
    Hyperbolic (kappa < 0): the cosh form must have exactly one positive
    eigenvalue; smallest dimension equals its number of negatives.
    """
    kind = Geometry(kind)
    d = np.asarray(dist, dtype=float)
    if kind is Geometry.EUCLIDEAN:
        if kappa != 0.0:
            raise GeometryError("Euclidean embedding check requires curvature 0")
        vals, _ = eig_sym(gram_matrix(d, 0.0))
        tol = zero_tol if zero_tol is not None else 1e-8 * max(
            1e-300, float(np.max(np.abs(vals)))
        )
        feasible = bool(vals[0] >= -tol)
        rank = int(np.sum(vals > tol))
        return EmbeddingCheck(feasible, rank)
    if kind is Geometry.SPHERICAL:
        if not kappa > 0:
            raise GeometryError("spherical embedding check requires curvature > 0")
        sig = signature(cosine_form(d, kappa), zero_tol)
        return EmbeddingCheck(sig.negative == 0, sig.positive - 1)
    if not kappa < 0:
        raise GeometryError("hyperbolic embedding check requires curvature < 0")
    sig = signature(cosine_form(d, kappa), zero_tol)
    return EmbeddingCheck(sig.positive == 1, sig.negative)
