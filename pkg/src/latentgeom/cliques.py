"""Clique enumeration, well-separated clique selection, and almost-cliques.

Cliques act as proxy "points" in the latent space: members of a complete
subgraph must be latently close, so cross-clique tie frequencies estimate
distances between those points.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graph import Graph

# Root visiting order is a fixed pseudo-random permutation (a function of n
# only) so a capped enumeration samples cliques from the whole graph instead
# of exhausting the lexicographically first neighborhood.
_ORDER_SEED = 0x1CE


class CliqueSelectionError(RuntimeError):
    """No feasible clique set found; lower K or the clique size."""


@dataclass(frozen=True)
class CliqueSet:
    """K node sets of size ell selected from a graph.

    ``overlap_score`` is the total pairwise intersection size (ordered
    pairs, i != j).  ``almost`` holds, per clique, the nodes outside it
    adjacent to at least ``t`` but fewer than all of its members.
    """

    cliques: tuple[tuple[int, ...], ...]
    ell: int
    overlap_score: int = 0
    almost: tuple[frozenset, ...] | None = None
    draws_used: int = 0

    def __post_init__(self):
        if self.ell < 2 or len(self.cliques) < 2:
            raise ValueError("need at least 2 cliques of size >= 2")
        for c in self.cliques:
            if len(c) != self.ell:
                raise ValueError(f"clique {c} does not have size {self.ell}")

    @property
    def k(self) -> int:
        return len(self.cliques)


def _visit_order(n: int) -> np.ndarray:
    return np.random.default_rng(_ORDER_SEED).permutation(n)


def _bitmask_rows(adj_bool: np.ndarray) -> list[int]:
    """Each row of a boolean adjacency matrix as one big-integer bitmask."""
    packed = np.packbits(adj_bool, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _cliques_from_root(nbrs: list[int], adj_bool: np.ndarray, root: int, ell: int):
    """Yield ell-cliques (in permuted index space) whose minimum index is root.

    Ordered DFS expansion over bitmask candidate sets: candidates are
    restricted to higher indices adjacent to everything chosen so far,
    with a branch-and-bound cutoff when too few candidates remain.  The
    root's children are explored densest-first (by co-degree within the
    candidate set), so the cliques found earliest sit in locally dense
    pockets; the running-mask bookkeeping still enumerates each clique
    exactly once.
    """
    above = -1 << (root + 1)
    cand0 = nbrs[root] & above

    def expand(path: tuple, cand: int):
        need = ell - len(path)
        if need == 0:
            yield path
            return
        m = cand
        while m:
            if m.bit_count() < need:
                return
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            if need == 1:
                yield path + (v,)
                continue
            sub = m & nbrs[v]
            if sub.bit_count() >= need - 1:
                yield from expand(path + (v,), sub)

    if ell == 1:
        yield (root,)
        return
    first = np.flatnonzero(adj_bool[root, root + 1 :]) + root + 1
    if len(first) > 1:
        codegree = adj_bool[np.ix_(first, first)].sum(axis=1)
        first = first[np.argsort(-codegree, kind="stable")]
    remaining = cand0
    for v in first.tolist():
        remaining ^= 1 << v
        if len((root,)) + 1 == ell:
            yield (root, v)
            continue
        sub = remaining & nbrs[v]
        if sub.bit_count() >= ell - 2:
            yield from expand((root, v), sub)


def _core_nodes(adj: np.ndarray, min_degree: int) -> np.ndarray:
    """Nodes of the min_degree-core (iterative peeling).

    Every clique on min_degree+1 nodes lies inside this core, so
    enumeration can ignore everything else.
    """
    alive = np.ones(adj.shape[0], dtype=bool)
    deg = adj.sum(axis=1).astype(np.int64)
    while True:
        drop = alive & (deg < min_degree)
        if not drop.any():
            return np.flatnonzero(alive)
        alive &= ~drop
        deg = deg - adj[:, drop].sum(axis=1)


def enumerate_cliques(g: Graph, ell: int, cap: int = 50_000) -> list[tuple[int, ...]]:
    """Up to ``cap`` distinct ell-cliques, deterministic given the graph.

    Candidates are restricted to the (ell-1)-core, and per-root generators
    are drained round-robin, so when the cap binds the output still covers
    many regions of the graph.
    """
    if ell < 2:
        raise ValueError("clique size must be >= 2")
    if cap <= 0:
        raise ValueError("cap must be positive")
    core = _core_nodes(g.adjacency, ell - 1)
    if len(core) < ell:
        return []
    order_full = _visit_order(g.n)
    order = np.asarray([v for v in order_full if v in set(core.tolist())])
    adj_perm = g.adjacency[np.ix_(order, order)].astype(bool)
    n_core = len(order)
    nbrs = _bitmask_rows(adj_perm)
    gens = [_cliques_from_root(nbrs, adj_perm, r, ell) for r in range(n_core)]
    found: list[tuple[int, ...]] = []
    active = list(range(n_core))
    while active and len(found) < cap:
        still = []
        for gi in active:
            try:
                path = next(gens[gi])
            except StopIteration:
                continue
            found.append(tuple(sorted(int(order[v]) for v in path)))
            still.append(gi)
            if len(found) >= cap:
                break
        active = still
    return found


def _set_density(adj: np.ndarray, nodes: tuple[int, ...]) -> float:
    k = len(nodes)
    if k < 2:
        return 1.0
    sub = adj[np.ix_(nodes, nodes)]
    return float(sub.sum()) / (k * (k - 1))


def _near_clique_pool(
    g: Graph, ell: int, density: float, cap: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    """Randomized greedy pool of node sets with edge density >= density.

    Used only for the relaxed mode (density < 1): grow a set from a random
    edge, each step adding the candidate with most ties into the set, and
    keep results that clear the density threshold.
    """
    adj = g.adjacency
    pool: set[tuple[int, ...]] = set()
    attempts = 0
    max_attempts = 40 * cap
    while len(pool) < cap and attempts < max_attempts:
        attempts += 1
        i = int(rng.integers(g.n))
        nbrs = np.flatnonzero(adj[i])
        if nbrs.size == 0:
            continue
        members = [i, int(rng.choice(nbrs))]
        while len(members) < ell:
            counts = adj[members].sum(axis=0)
            counts[members] = -1
            best = int(np.argmax(counts))
            if counts[best] <= 0:
                break
            members.append(best)
        if len(members) < ell:
            continue
        cand = tuple(sorted(members))
        if _set_density(adj, cand) >= density:
            pool.add(cand)
    return sorted(pool)


def select_cliques(
    g: Graph,
    k: int,
    ell: int,
    draws: int = 1_000_000,
    seed: int = 0,
    density: float = 1.0,
    pool_cap: int = 50_000,
    t: int | None = None,
    stop_at_zero: bool = True,
) -> CliqueSet:
    """Pick K size-ell cliques with small overlap and all cross ties present.

    Randomized search over K-subsets of an enumerated candidate pool,
    minimizing total pairwise overlap subject to every selected pair having
    at least one cross edge (so no estimated probability is zero).  Ties in
    the objective break toward the lexicographically smallest node-set
    sequence among the candidates drawn; with ``stop_at_zero`` the search
    ends early once a feasible zero-overlap subset appears.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    rng = np.random.default_rng(seed)
    if density < 1.0:
        pool = _near_clique_pool(g, ell, density, pool_cap, rng)
    else:
        pool = enumerate_cliques(g, ell, cap=pool_cap)
    if len(pool) < k:
        raise CliqueSelectionError(
            f"only {len(pool)} candidate sets of size {ell} found; need K={k} "
            "(lower K or ell)"
        )

    adj = g.adjacency
    members = [np.asarray(c) for c in pool]
    sets = [set(c) for c in pool]

    def pair_stats(i: int, j: int, cache={}) -> tuple[int, bool]:
        key = (i, j) if i < j else (j, i)
        hit = cache.get(key)
        if hit is None:
            ov = len(sets[i] & sets[j])
            linked = bool(adj[np.ix_(members[i], members[j])].any())
            hit = (ov, linked)
            cache[key] = hit
        return hit

    best_key = None
    best_idx = None
    used = 0
    npool = len(pool)
    small_pool = npool <= 64
    for used in range(1, draws + 1):
        if small_pool:
            idx = rng.permutation(npool)[:k]
        else:
            # rejection sampling beats choice(replace=False) on big pools
            idx = rng.integers(0, npool, size=k)
            if len(set(idx.tolist())) < k:
                continue
        overlap = 0
        feasible = True
        for a, b in combinations(idx.tolist(), 2):
            ov, linked = pair_stats(a, b)
            if not linked:
                feasible = False
                break
            overlap += 2 * ov
        if not feasible:
            continue
        key = (overlap, tuple(sorted(pool[i] for i in idx)))
        if best_key is None or key < best_key:
            best_key = key
            best_idx = idx
        if stop_at_zero and best_key is not None and best_key[0] == 0:
            break
    if best_idx is None:
        raise CliqueSelectionError(
            f"no feasible K={k} subset with all cross ties present within "
            f"{draws} draws (lower K or ell)"
        )
    chosen = best_key[1]
    t_eff = (ell - 1) if t is None else t
    almost = tuple(almost_clique(g, c, t_eff) for c in chosen)
    return CliqueSet(chosen, ell, best_key[0], almost, used)


def almost_clique(g: Graph, clique, t: int) -> frozenset:
    """Nodes outside ``clique`` adjacent to at least t but not all members."""
    members = sorted(int(v) for v in clique)
    ell = len(members)
    if not 1 <= t < ell:
        raise ValueError(f"t must satisfy 1 <= t < {ell}, got {t}")
    counts = g.adjacency[members].sum(axis=0)
    mask = (counts >= t) & (counts < ell)
    mask[members] = False
    return frozenset(int(v) for v in np.flatnonzero(mask))


def verify_cliques(g: Graph, cs: CliqueSet) -> bool:
    """Every listed clique is complete in the source graph."""
    for c in cs.cliques:
        sub = g.adjacency[np.ix_(c, c)]
        expected = len(c) * (len(c) - 1)
        if int(sub.sum()) != expected:
            return False
    return True
