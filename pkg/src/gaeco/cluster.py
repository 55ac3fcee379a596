"""Seeded k-means (k-means++ seeding, Lloyd iterations, best-of restarts)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .losses import nearest_centroid


@dataclass
class KmeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int
    history: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _check(z: np.ndarray, k: int):
    if z.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if k < 1:
        raise ValueError("K must be >= 1")
    if k > z.shape[0]:
        raise ValueError(f"K={k} exceeds the number of points ({z.shape[0]})")


def kmeans_pp_init(z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """First center uniform, the rest drawn proportionally to squared distance."""
    z = np.asarray(z, dtype=np.float64)
    _check(z, k)
    n = z.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((z - z[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(free[rng.integers(free.size)])
        chosen.append(nxt)
        d2 = np.minimum(d2, ((z - z[nxt]) ** 2).sum(axis=1))
    return z[chosen].copy()


def _update(z: np.ndarray, labels: np.ndarray, k: int, centers: np.ndarray):
    """Recompute means; an empty cluster takes the point farthest from its center."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    while (counts == 0).any():
        empty = int(np.flatnonzero(counts == 0)[0])
        d2 = ((z - centers[labels]) ** 2).sum(axis=1)
        d2[counts[labels] < 2] = -1.0
        far = int(d2.argmax())
        counts[labels[far]] -= 1
        labels[far] = empty
        counts[empty] = 1
    onehot = np.zeros((k, z.shape[0]))
    onehot[labels, np.arange(z.shape[0])] = 1.0
    return (onehot @ z) / counts[:, None], labels


def _inertia(z, labels, centers) -> float:
    diff = z - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def lloyd(z: np.ndarray, centers: np.ndarray, max_iter: int = 300,
          tol: float = 1e-6) -> KmeansResult:
    """Lloyd iterations from ``centers`` until assignments stop changing,
    the largest center shift drops below ``tol``, or ``max_iter``."""
    z = np.asarray(z, dtype=np.float64)
    k = centers.shape[0]
    c = np.array(centers, dtype=np.float64)
    labels, _ = nearest_centroid(z, c)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        new_c, labels = _update(z, labels, k, c)
        shift = float(np.sqrt(((new_c - c) ** 2).sum(axis=1)).max())
        c = new_c
        history.append(_inertia(z, labels, c))
        new_labels, _ = nearest_centroid(z, c)
        done = shift < tol or np.array_equal(new_labels, labels)
        labels = new_labels
        if done:
            break
    return KmeansResult(c, labels, _inertia(z, labels, c), it, history)


def kmeans(z: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 300,
           tol: float = 1e-6, n_init: int = 10) -> KmeansResult:
    """Best of ``n_init`` k-means++ restarts by inertia (earliest restart wins ties)."""
    z = np.asarray(z, dtype=np.float64)
    _check(z, k)
    best = None
    for child in rng.spawn(n_init):
        res = lloyd(z, kmeans_pp_init(z, k, child), max_iter, tol)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def refresh_centroids(z: np.ndarray, k: int, previous: np.ndarray | None,
                      rng: np.random.Generator, max_iter: int = 300, tol: float = 1e-6,
                      n_init: int = 10) -> KmeansResult:
    """Warm-start Lloyd from ``previous`` if given, else a full :func:`kmeans`."""
    if previous is None:
        return kmeans(z, k, rng, max_iter, tol, n_init)
    if previous.shape[0] != k:
        raise ValueError(f"previous centroids have {previous.shape[0]} rows, expected {k}")
    return lloyd(z, previous, max_iter, tol)
