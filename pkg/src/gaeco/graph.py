"""Immutable graph, feature and partition containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_DENSE_CAP = 50_000_000


class DenseCapExceeded(ValueError):
    """Raised when an n x n matrix would exceed the configured entry cap."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected graph stored as CSR adjacency over nodes ``0..n-1``.

    ``indptr``/``indices`` hold every directed instance of each undirected
    edge, so row ``i`` lists the neighbours of ``i`` in ascending order.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    self_loops: bool
    raw_edge_count: int = 0

    @property
    def num_entries(self) -> int:
        """Number of stored (directed) adjacency entries."""
        return int(self.indices.shape[0])

    @property
    def num_undirected_edges(self) -> int:
        """Undirected edges excluding self-loops."""
        src, dst = self.edge_arrays()
        return int(np.count_nonzero(src < dst))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Row (source) and column (destination) index of every stored entry."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return rows, self.indices.copy()

    def has_edge(self, i: int, j: int) -> bool:
        row = self.indices[self.indptr[i]:self.indptr[i + 1]]
        k = np.searchsorted(row, j)
        return bool(k < row.shape[0] and row[k] == j)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("feature matrix contains NaN or Inf")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def f(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    k: int = field(default=0)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 1:
            raise ValueError("labels must be a 1-D vector")
        if lab.size and not np.issubdtype(lab.dtype, np.integer):
            if not np.all(np.equal(np.mod(lab, 1), 0)):
                raise ValueError("labels must be integers")
        lab = _readonly(lab.astype(np.int64))
        k = self.k or (int(lab.max()) + 1 if lab.size else 1)
        if k < 1:
            raise ValueError("k must be >= 1")
        if lab.size and (lab.min() < 0 or lab.max() >= k):
            raise ValueError(f"labels must lie in [0, {k})")
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "k", k)

    def __len__(self) -> int:
        return self.labels.shape[0]


def build_graph(
    n: int,
    edge_list: Iterable[Sequence[int]] | np.ndarray,
    add_self_loops: bool = True,
) -> Graph:
    """Symmetrize and deduplicate ``edge_list`` into a :class:`Graph`."""
    if n <= 0:
        raise ValueError("graph needs at least one node")
    edges = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list,
                       dtype=np.int64)
    edges = edges.reshape(-1, 2)
    raw = edges.shape[0]
    if raw and (edges.min() < 0 or edges.max() >= n):
        bad = edges[(edges < 0).any(axis=1) | (edges >= n).any(axis=1)][0]
        raise IndexError(f"edge {tuple(int(v) for v in bad)} out of range for n={n}")
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    if add_self_loops:
        loop = np.arange(n, dtype=np.int64)
        src = np.concatenate([src, loop])
        dst = np.concatenate([dst, loop])
    keys = np.unique(src * n + dst)
    rows, cols = np.divmod(keys, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return Graph(n=n, indptr=_readonly(indptr), indices=_readonly(cols.astype(np.int64)),
                 self_loops=add_self_loops, raw_edge_count=raw)


def neighbors(g: Graph, i: int) -> list[int]:
    if not 0 <= i < g.n:
        raise IndexError(f"node {i} out of range for n={g.n}")
    return g.indices[g.indptr[i]:g.indptr[i + 1]].tolist()


def dense_adjacency(g: Graph, diagonal: bool = True,
                    cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Materialize the 0/1 adjacency; ``diagonal`` forces the diagonal to 1 (or 0)."""
    if g.n * g.n > cap:
        raise DenseCapExceeded(
            f"dense adjacency needs {g.n * g.n} entries (cap {cap}); "
            "use sampled reconstruction instead")
    a = np.zeros((g.n, g.n))
    rows, cols = g.edge_arrays()
    a[rows, cols] = 1.0
    np.fill_diagonal(a, 1.0 if diagonal else 0.0)
    return a
