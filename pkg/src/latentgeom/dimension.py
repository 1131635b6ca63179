"""Rank estimation for the curvature Gram form and the rank-to-dimension map.

The rank estimator combines a scree profile of ordered eigenvalue
magnitudes with the bootstrap variability of leading eigenvector blocks;
the sum of the two has a dip at the true rank.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import Geometry, eig_sym


@dataclass(frozen=True)
class LadleResult:
    """Rank estimate with its scree / eigenvector-variability diagnostics.

    ``phi`` and ``f`` are indexed by candidate rank j = 0..K-1; the
    objective phi + f is searched over j = 0..K-2.  ``full_rank_warning``
    flags the degenerate-bootstrap case where no eigenvalue is numerically
    zero, so the estimate is capped at K-2.
    """

    r_hat: int
    phi: np.ndarray
    f: np.ndarray
    objective: np.ndarray
    n_boot: int
    full_rank_warning: bool = False
    degenerate_bootstrap: bool = False


def _top_blocks(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors ordered largest eigenvalue first."""
    vals, vecs = eig_sym(matrix)
    return vals[::-1], vecs[:, ::-1]


def ladle_rank(
    w_builder: Callable[[np.ndarray], np.ndarray],
    d_hat,
    boot: Sequence[np.ndarray] | Callable[[int], Iterable[np.ndarray]],
    n_boot: int = 200,
    psd_mode: bool = False,
    zero_tol: float = 1e-8,
) -> LadleResult:
    """Estimate the rank of w_builder(d_hat) via bootstrap eigenvector variability.

    ``boot`` supplies resampled distance matrices, either as a sequence or
    as a callable invoked with the replicate count.  With ``psd_mode`` the
    working matrix is W^T W (same rank, positive semi-definite), which the
    negatively-curved class needs because its Gram form is indefinite.
    """
    d_values = getattr(d_hat, "values", d_hat)
    d_values = np.asarray(d_values, dtype=float)
    k = d_values.shape[0]
    if k < 3:
        raise ValueError("need at least K=3 points for rank estimation")

    def working(dist: np.ndarray) -> np.ndarray:
        w = np.asarray(w_builder(dist), dtype=float)
        return w.T @ w if psd_mode else w

    w_hat = working(d_values)
    vals, vecs = _top_blocks(w_hat)
    mags = np.abs(vals)
    total = float(mags.sum())
    if total == 0.0:
        raise ValueError("working matrix is identically zero")
    phi = mags / total

    if callable(boot):
        replicates = list(boot(n_boot))
    else:
        replicates = [np.asarray(getattr(b, "values", b), float) for b in boot]
    n_b = len(replicates)
    if n_b < 1:
        raise ValueError("need at least one bootstrap replicate")

    # f0[j] = 1 - mean |det| of the j x j leading block of V_hat^T V_star,
    # with bootstrap eigenvectors sign-aligned to their observed
    # counterparts (|det| is sign-invariant; alignment stabilizes
    # near-degenerate blocks numerically).  j = 0 contributes 0 by the
    # empty-determinant convention.
    cross = np.empty((n_b, k, k))
    for b, d_star in enumerate(replicates):
        _, vecs_star = _top_blocks(working(d_star))
        m = vecs.T @ vecs_star
        signs = np.sign(np.diagonal(m))
        signs[signs == 0] = 1.0
        cross[b] = m * signs[None, :]
    f0 = np.zeros(k)
    for j in range(1, k):
        dets = np.linalg.det(cross[:, :j, :j])
        f0[j] = 1.0 - float(np.mean(np.abs(dets)))
    f0 = np.clip(f0, 0.0, None)
    f0_total = float(f0.sum())
    degenerate = f0_total < 1e-12
    f = np.zeros(k) if degenerate else f0 / f0_total

    objective = (phi + f)[: k - 1]
    numerical_rank = int(np.sum(mags > zero_tol * mags[0]))
    if degenerate and numerical_rank == k:
        # no eigenvalue is negligible and the bootstrap carries no signal:
        # the matrix looks full rank, beyond the search range
        r_hat = k - 2
        full_rank = True
    else:
        r_hat = int(np.argmin(objective))
        full_rank = False
    return LadleResult(
        r_hat=r_hat,
        phi=phi,
        f=f,
        objective=objective,
        n_boot=n_b,
        full_rank_warning=full_rank,
        degenerate_bootstrap=degenerate,
    )


def dimension_from_rank(kind: Geometry, r_hat: int, floor: bool = False) -> int:
    """Map an estimated Gram-form rank to a manifold dimension.

    Flat space embeds in rank dimensions; the curved classes spend one
    rank on the ambient embedding, so their dimension is rank - 1.  With
    ``floor`` the reporting convention max(2, p) is applied.
    """
    if r_hat < 0:
        raise ValueError("rank must be nonnegative")
    kind = Geometry(kind)
    p = r_hat if kind is Geometry.EUCLIDEAN else r_hat - 1
    return max(2, p) if floor else p
