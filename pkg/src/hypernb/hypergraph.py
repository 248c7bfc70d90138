"""Nonuniform hypergraphs stored as per-size edge arrays.

Edges of size ``k`` live in an ``(m_k, k)`` integer array whose rows are
sorted node indices. Parallel edges (repeated rows) are kept: each copy is a
distinct edge and produces its own pointed edges.

Hyperedge-list text format: one edge per line, node ids are 1-based and
separated by whitespace and/or commas. Blank lines and lines starting with
``#`` are skipped. Label files hold one integer label per line, line ``i``
giving the label of node ``i`` (0-based node index, labels as written).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Hypergraph",
    "HypergraphFormatError",
    "load_hypergraph",
    "save_hypergraph",
    "load_labels",
    "save_labels",
    "pointed_edges",
    "degree_operator",
    "adjacency_operator",
    "clique_projection",
]

_SPLIT = re.compile(r"[\s,]+")


class HypergraphFormatError(ValueError):
    """Raised for malformed hyperedge-list or label files."""


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Immutable hypergraph on nodes ``0..n-1``.

    ``edges`` maps edge size to an ``(m_k, k)`` array of sorted node indices.
    Sizes with no edges are dropped, so ``K`` lists only sizes present.
    """

    n: int
    edges: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise ValueError("node count must be nonnegative")
        clean = {}
        for k in sorted(self.edges):
            arr = np.asarray(self.edges[k], dtype=np.int64)
            if arr.size == 0:
                continue
            k = int(k)
            if k < 2:
                raise ValueError(f"edge size must be >= 2, got {k}")
            arr = np.sort(arr.reshape(-1, k), axis=1)
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError(f"node index out of range [0, {n})")
            if k > 1 and np.any(arr[:, 1:] == arr[:, :-1]):
                raise ValueError(f"size-{k} edge with a repeated node")
            arr.setflags(write=False)
            clean[k] = arr
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_edges(cls, n, edge_list):
        """Build from an iterable of node-index collections."""
        groups: dict[int, list] = {}
        for e in edge_list:
            e = sorted(int(v) for v in e)
            groups.setdefault(len(e), []).append(e)
        return cls(n, {k: np.array(v, dtype=np.int64) for k, v in groups.items()})

    @property
    def K(self) -> list[int]:
        return sorted(self.edges)

    @property
    def kappa(self) -> int:
        return len(self.edges)

    def m_k(self, k: int) -> int:
        arr = self.edges.get(k)
        return 0 if arr is None else arr.shape[0]

    @property
    def m(self) -> int:
        return sum(a.shape[0] for a in self.edges.values())

    @property
    def num_pointed(self) -> int:
        return sum(a.size for a in self.edges.values())

    def pointed_offset(self, k: int) -> int:
        """Index of the first size-``k`` pointed edge in canonical order."""
        return sum(self.edges[j].size for j in self.K if j < k)

    def edge_list(self):
        """All edges as tuples, in canonical (size, index) order."""
        return [tuple(int(v) for v in row) for k in self.K for row in self.edges[k]]

    def degrees(self, k: int | None = None) -> np.ndarray:
        """Per-node count of incident edges (of size ``k`` if given)."""
        sizes = self.K if k is None else [k]
        deg = np.zeros(self.n, dtype=np.int64)
        for j in sizes:
            if j in self.edges:
                deg += np.bincount(self.edges[j].ravel(), minlength=self.n)
        return deg

    def deduplicated(self) -> "Hypergraph":
        """Copy with parallel edges collapsed to a single instance."""
        return Hypergraph(self.n, {k: np.unique(a, axis=0) for k, a in self.edges.items()})

    def __repr__(self):
        sizes = ", ".join(f"{k}: {a.shape[0]}" for k, a in self.edges.items())
        return f"Hypergraph(n={self.n}, m_k={{{sizes}}})"


def load_hypergraph(path, n: int | None = None) -> Hypergraph:
    """Read a hyperedge-list file (1-based ids) into a :class:`Hypergraph`.

    ``n`` overrides the node count, which otherwise is the largest id seen;
    nodes that never appear in an edge are isolated.
    """
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            ids = [int(tok) for tok in _SPLIT.split(line) if tok]
        except ValueError as exc:
            raise HypergraphFormatError(f"line {lineno}: malformed token ({exc})") from None
        if any(v < 1 for v in ids):
            raise HypergraphFormatError(f"line {lineno}: node ids must be positive")
        if len(set(ids)) != len(ids):
            raise HypergraphFormatError(f"line {lineno}: repeated node id in edge")
        if len(ids) < 2:
            raise HypergraphFormatError(f"line {lineno}: edge needs at least 2 distinct nodes")
        edges.append([v - 1 for v in ids])
    if not edges:
        raise HypergraphFormatError(f"{path}: no edges")
    max_id = max(max(e) for e in edges) + 1
    if n is None:
        n = max_id
    elif n < max_id:
        raise HypergraphFormatError(f"node count {n} smaller than largest id {max_id}")
    return Hypergraph.from_edges(n, edges)


def save_hypergraph(H: Hypergraph, path) -> None:
    lines = [" ".join(str(v + 1) for v in e) for e in H.edge_list()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_labels(path, n: int | None = None) -> np.ndarray:
    try:
        labels = np.array(
            [int(s) for s in Path(path).read_text().split()], dtype=np.int64
        )
    except ValueError as exc:
        raise HypergraphFormatError(f"{path}: malformed label ({exc})") from None
    if n is not None and labels.shape[0] != n:
        raise HypergraphFormatError(f"{path}: {labels.shape[0]} labels for {n} nodes")
    if labels.size and labels.min() < 0:
        raise HypergraphFormatError(f"{path}: labels must be nonnegative")
    return labels


def save_labels(labels, path) -> None:
    Path(path).write_text("".join(f"{int(z)}\n" for z in labels))


def pointed_edges(H: Hypergraph) -> np.ndarray:
    """Pointed edges in canonical order as rows ``(point, k, edge_index)``.

    Order: edge size ascending, then edge index, then the point's position
    inside the sorted edge. Row ``r`` is basis element ``r`` of B.
    """
    blocks = []
    for k in H.K:
        arr = H.edges[k]
        m = arr.shape[0]
        blocks.append(
            np.column_stack(
                [arr.ravel(), np.full(m * k, k), np.repeat(np.arange(m), k)]
            )
        )
    if not blocks:
        return np.zeros((0, 3), dtype=np.int64)
    return np.vstack(blocks).astype(np.int64)


def degree_operator(H: Hypergraph, k: int) -> sp.csr_array:
    """Diagonal matrix of size-``k`` degrees (zero if ``k`` is absent)."""
    d = H.degrees(k) if k in H.edges else np.zeros(H.n)
    return sp.diags_array(d.astype(float), format="csr")


def adjacency_operator(H: Hypergraph, k: int) -> sp.csr_array:
    """Co-membership counts through size-``k`` edges, zero diagonal."""
    n = H.n
    arr = H.edges.get(k)
    if arr is None:
        return sp.csr_array((n, n))
    a, b = np.triu_indices(k, 1)
    rows = arr[:, a].ravel()
    cols = arr[:, b].ravel()
    data = np.ones(2 * rows.size)
    A = sp.coo_array(
        (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    )
    return A.tocsr()


def clique_projection(H: Hypergraph) -> Hypergraph:
    """Replace every k-edge by its C(k, 2) node pairs, keeping multiplicity."""
    pairs = []
    for k in H.K:
        arr = H.edges[k]
        for a, b in combinations(range(k), 2):
            pairs.append(arr[:, [a, b]])
    if not pairs:
        return Hypergraph(H.n)
    return Hypergraph(H.n, {2: np.vstack(pairs)})
