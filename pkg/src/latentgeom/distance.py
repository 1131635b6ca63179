"""Between-clique connection probabilities and the latent distance matrix.

Cross-clique tie frequencies estimate connection probabilities between
latent locations; almost-clique tie density estimates the marginal
gregariousness factor; together they give distances
d = -log(p) + 2*log(E(exp nu)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cliques import CliqueSet, almost_clique
from .graph import Graph


@dataclass(frozen=True)
class ProbMatrix:
    """Estimated clique-to-clique connection probabilities.

    The diagonal is 1 by construction (within-clique ties all present);
    off-diagonal zeros are floored at 1/ell^2 and flagged so downstream
    logs stay finite.
    """

    values: np.ndarray
    floored: np.ndarray
    ell: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if (v < 0).any() or (v > 1).any():
            raise ValueError("probabilities must lie in [0, 1]")
        if not np.allclose(v, v.T):
            raise ValueError("probability matrix must be symmetric")
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DistanceMatrix:
    """Estimated clique-to-clique latent distances (symmetric, zero diagonal)."""

    values: np.ndarray
    e_nu_hat: float = 1.0
    clamp_count: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if (v < 0).any():
            raise ValueError("distances must be nonnegative")
        if not np.allclose(v, v.T):
            raise ValueError("distance matrix must be symmetric")
        if np.diagonal(v).any():
            raise ValueError("distance matrix must have zero diagonal")
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.shape[0]

    def offdiag(self) -> np.ndarray:
        k = self.order
        mask = ~np.eye(k, dtype=bool)
        return self.values[mask]


class ENuHat(NamedTuple):
    """Estimated gregariousness factor with diagnostics."""

    value: float
    cliques_used: int
    warned: bool


def estimate_p(g: Graph, cs: CliqueSet) -> ProbMatrix:
    """Cross-clique tie frequency for every clique pair.

    Counts ordered cross pairs (i in C_k, j in C_k') with i != j and
    divides by the number of such pairs; when cliques share nodes the
    (i, i) pairs are excluded from the denominator since a node is not a
    tie trial with itself.
    """
    k = cs.k
    ell = cs.ell
    adj = g.adjacency
    values = np.eye(k)
    floored = np.zeros((k, k), dtype=bool)
    for a in range(k):
        ca = cs.cliques[a]
        for b in range(a + 1, k):
            cb = cs.cliques[b]
            shared = len(set(ca) & set(cb))
            trials = ell * ell - shared
            count = int(adj[np.ix_(ca, cb)].sum())
            p = count / trials
            if p == 0.0:
                p = 1.0 / (ell * ell)
                floored[a, b] = floored[b, a] = True
            values[a, b] = values[b, a] = p
    return ProbMatrix(values, floored, ell)


def estimate_e_nu(g: Graph, cs: CliqueSet, t: int | None = None) -> ENuHat:
    """Average tie density inside the almost-cliques.

    Almost-clique members are latently close to the clique, so their
    mutual tie density isolates the gregariousness factor from distance.
    Cliques whose almost-clique has fewer than two nodes carry no signal
    and are skipped; if none qualify (or the density is exactly zero) the
    estimate falls back to 1 with a warning flag.
    """
    t_eff = (cs.ell - 1) if t is None else t
    densities = []
    for c in cs.cliques:
        nodes = sorted(almost_clique(g, c, t_eff))
        m = len(nodes)
        if m < 2:
            continue
        ties = int(g.adjacency[np.ix_(nodes, nodes)].sum()) // 2
        densities.append(ties / (m * (m - 1) / 2))
    if not densities:
        return ENuHat(1.0, 0, True)
    value = float(np.mean(densities))
    if value == 0.0:
        return ENuHat(1.0, len(densities), True)
    return ENuHat(value, len(densities), False)


def estimate_d(p: ProbMatrix, e_nu: float) -> DistanceMatrix:
    """Distances d = max(0, -log(p) + 2*log(e_nu)) with a zero diagonal.

    Sampling overshoot (p > e_nu^2) would give a negative distance; such
    entries are clamped to 0 and counted.
    """
    if not 0.0 < e_nu <= 1.0:
        raise ValueError(f"e_nu must be in (0, 1], got {e_nu}")
    raw = -np.log(p.values) + 2.0 * np.log(e_nu)
    np.fill_diagonal(raw, 0.0)
    offdiag = ~np.eye(p.order, dtype=bool)
    clamped = int(np.sum((raw < 0) & offdiag))
    d = np.maximum(raw, 0.0)
    return DistanceMatrix(d, float(e_nu), clamped)


def distances_from_graph(
    g: Graph, cs: CliqueSet, t: int | None = None
) -> tuple[ProbMatrix, ENuHat, DistanceMatrix]:
    """Run the full estimation chain p-hat -> e_nu-hat -> d-hat.

    A tie between two almost-clique members multiplies two independent
    gregariousness factors, so the almost-clique density estimates the
    SQUARE of E(exp nu); its square root is what enters the distance
    formula (which applies a 2*log correction).
    """
    p = estimate_p(g, cs)
    e_nu = estimate_e_nu(g, cs, t)
    d = estimate_d(p, math.sqrt(e_nu.value))
    return p, e_nu, d
