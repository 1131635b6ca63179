"""Undirected, unweighted graph representation and edge-list ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphFormatError(ValueError):
    """Malformed edge-list input."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as a dense 0/1 adjacency matrix.

    The adjacency matrix is symmetric with a zero diagonal and is frozen
    after construction, so instances can be shared freely across workers.
    ``labels`` maps internal index -> external label when the source used
    non-integer node names.
    """

    adjacency: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphFormatError(f"adjacency must be square, got shape {a.shape}")
        if a.shape[0] == 0:
            raise GraphFormatError("empty graph")
        vals = np.unique(a)
        if not np.isin(vals, (0, 1)).all():
            raise GraphFormatError("adjacency entries must be 0 or 1")
        if (a != a.T).any():
            raise GraphFormatError("adjacency must be symmetric")
        if np.diagonal(a).any():
            raise GraphFormatError("adjacency diagonal must be zero")
        if self.labels is not None and len(self.labels) != a.shape[0]:
            raise GraphFormatError("labels length must match node count")
        a = a.astype(np.uint8)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(i.tolist(), j.tolist()))

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    @classmethod
    def from_edges(
        cls, n: int, edges, labels: tuple[str, ...] | None = None
    ) -> "Graph":
        """Build a graph on ``n`` nodes, symmetrizing and deduplicating edges
        and dropping self-loops."""
        a = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                continue
            a[i, j] = 1
            a[j, i] = 1
        return cls(a, labels)


def _parse_tokens(line: str) -> list[str]:
    stripped = line.split("#", 1)[0].strip()
    if not stripped:
        return []
    if "," in stripped:
        return [t.strip() for t in stripped.split(",") if t.strip()]
    return stripped.split()


def load_edge_list(path, indexing: str = "zero") -> Graph:
    """Read a graph from an edge-list text file.

    One edge per line, two whitespace- or comma-separated tokens;
    ``#``-prefixed comments are ignored and an optional first line
    ``n=<int>`` declares the node count.  ``indexing`` selects how tokens
    map to nodes: "zero" / "one" for integer ids, "labeled" for arbitrary
    strings (assigned indices in order of first appearance).  Lines with
    more than two tokens are rejected rather than coerced: weighted input
    usually signals a data problem.
    """
    if indexing not in ("zero", "one", "labeled"):
        raise ValueError(f"unknown indexing mode {indexing!r}")
    text = Path(path).read_text()
    declared_n: int | None = None
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _parse_tokens(raw)
        if not tokens:
            continue
        if declared_n is None and not pairs and len(tokens) == 1 and tokens[0].startswith("n="):
            try:
                declared_n = int(tokens[0][2:])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad node-count header {tokens[0]!r}")
            continue
        if len(tokens) != 2:
            raise GraphFormatError(
                f"line {lineno}: expected two tokens, got {len(tokens)} "
                "(weighted or malformed input is not coerced)"
            )
        pairs.append((tokens[0], tokens[1]))

    if not pairs and declared_n is None:
        raise GraphFormatError(f"{path}: empty graph (no edges and no n=<int> header)")

    labels: tuple[str, ...] | None = None
    if indexing == "labeled":
        index: dict[str, int] = {}
        edges = []
        for lineno, (u, v) in enumerate(pairs):
            for tok in (u, v):
                if tok not in index:
                    index[tok] = len(index)
            edges.append((index[u], index[v]))
        n = declared_n if declared_n is not None else len(index)
        if n < len(index):
            raise GraphFormatError(
                f"header declares n={n} but {len(index)} distinct labels appear"
            )
        # isolated nodes declared by the header get synthetic labels
        labels = tuple(index.keys()) + tuple(
            f"__node{i}" for i in range(len(index), n)
        )
    else:
        offset = 0 if indexing == "zero" else 1
        edges = []
        seen_max = -1
        for lineno, raw in enumerate(text.splitlines(), start=1):
            tokens = _parse_tokens(raw)
            if not tokens or (len(tokens) == 1 and tokens[0].startswith("n=")):
                continue
            try:
                i, j = int(tokens[0]) - offset, int(tokens[1]) - offset
            except ValueError:
                raise GraphFormatError(
                    f"line {lineno}: tokens {tokens!r} not parseable as "
                    f"{indexing}-indexed integers"
                )
            if i < 0 or j < 0:
                raise GraphFormatError(
                    f"line {lineno}: node id below the {indexing}-indexed minimum"
                )
            seen_max = max(seen_max, i, j)
            edges.append((i, j))
        n = declared_n if declared_n is not None else seen_max + 1
        if declared_n is not None and seen_max >= declared_n:
            raise GraphFormatError(
                f"header declares n={declared_n} but node {seen_max} appears"
            )
    if n <= 0:
        raise GraphFormatError(f"{path}: empty graph")
    return Graph.from_edges(n, edges, labels)


def save_edge_list(g: Graph, path) -> None:
    """Write a graph in the edge-list format read by load_edge_list."""
    lines = [f"n={g.n}"]
    for i, j in g.edges():
        if g.labels is not None:
            lines.append(f"{g.labels[i]} {g.labels[j]}")
        else:
            lines.append(f"{i} {j}")
    Path(path).write_text("\n".join(lines) + "\n")


def subgraph(g: Graph, nodes) -> Graph:
    """Induced subgraph on ``nodes``, reindexed in sorted node order."""
    idx = sorted(set(int(v) for v in nodes))
    if not idx:
        raise GraphFormatError("empty graph")
    if idx[0] < 0 or idx[-1] >= g.n:
        raise GraphFormatError(f"node index out of range 0..{g.n - 1}")
    sub = g.adjacency[np.ix_(idx, idx)]
    labels = tuple(g.labels[i] for i in idx) if g.labels is not None else None
    return Graph(sub.copy(), labels)
