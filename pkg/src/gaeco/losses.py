"""Inner-product decoder, reconstruction and clustering losses."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .graph import DEFAULT_DENSE_CAP, DenseCapExceeded, Graph


@dataclass(frozen=True)
class LossReport:
    l_total: float
    l_recon: float
    l_clust: float
    beta: float
    epoch: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def decode(z: Tensor, cap: int = DEFAULT_DENSE_CAP) -> Tensor:
    """Edge probabilities ``sigmoid(Z Z^T)``."""
    if z.rows * z.rows > cap:
        raise DenseCapExceeded(f"decoding {z.rows} nodes densely exceeds the cap of {cap} entries")
    return ad.sigmoid(ad.gram(z))


def _normalizer(reduction: str, entries: int, n: int) -> float:
    if reduction == "entry":
        return float(entries)
    if reduction == "node":
        return float(n)
    raise ValueError(f"unknown reduction {reduction!r}")


def recon_loss(a: np.ndarray, a_hat: Tensor, pos_weight: float = 1.0,
               reduction: str = "entry") -> Tensor:
    """Binary cross-entropy summed over all n*n entries.

    ``reduction="entry"`` divides by n*n (a per-entry mean); ``"node"`` divides
    by n, i.e. averages the per-row sums over nodes.
    """
    if a.shape != a_hat.shape:
        raise ValueError(f"adjacency {a.shape} vs reconstruction {a_hat.shape}")
    return ad.binary_cross_entropy(a_hat, a, pos_weight=pos_weight,
                                   normalizer=_normalizer(reduction, a.size, a.shape[0]))


def _edge_keys(g: Graph, diagonal: bool) -> np.ndarray:
    src, dst = g.edge_arrays()
    keys = src * g.n + dst
    diag = np.arange(g.n) * (g.n + 1)
    if diagonal:
        keys = np.union1d(keys, diag)
    else:
        keys = np.setdiff1d(keys, diag)
    return keys


def sample_pairs(g: Graph, neg_per_pos: int, rng: np.random.Generator,
                 diagonal: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positive entries plus ``neg_per_pos`` uniform non-edges per positive.

    Returns ``(left, right, target)``. Non-edges are drawn uniformly over
    ordered pairs absent from the target adjacency; when there are none,
    only the positives are returned.
    """
    if neg_per_pos < 1:
        raise ValueError("neg_per_pos must be >= 1")
    pos = _edge_keys(g, diagonal)
    if pos.size == 0:
        raise ValueError("graph has no edges to reconstruct")
    n = g.n
    want = neg_per_pos * pos.size
    if pos.size >= n * n:
        neg = np.empty(0, dtype=np.int64)
    else:
        chunks, have = [], 0
        while have < want:
            cand = rng.integers(0, n * n, size=int((want - have) * 1.2) + 16)
            idx = np.minimum(np.searchsorted(pos, cand), pos.size - 1)
            cand = cand[pos[idx] != cand]
            chunks.append(cand)
            have += cand.size
        neg = np.concatenate(chunks)[:want]
    keys = np.concatenate([pos, neg])
    target = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    left, right = np.divmod(keys, n)
    return left, right, target


def sampled_recon_loss(g: Graph, z: Tensor, neg_per_pos: int, rng: np.random.Generator,
                       diagonal: bool = True, pos_weight: float = 1.0,
                       reduction: str = "entry") -> Tensor:
    """BCE over all positive entries and freshly sampled negatives.

    ``"entry"`` averages over the sampled pairs; ``"node"`` divides their sum by n.
    """
    left, right, target = sample_pairs(g, neg_per_pos, rng, diagonal)
    p = ad.sigmoid(ad.pair_dot(z, left, right))
    return ad.binary_cross_entropy(p, target[:, None], pos_weight=pos_weight,
                                   normalizer=_normalizer(reduction, target.size, g.n))


def nearest_centroid(z: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of the closest centroid per row (lowest index on ties) and its squared distance."""
    d2 = np.empty((z.shape[0], c.shape[0]))
    for j in range(c.shape[0]):
        diff = z - c[j]
        d2[:, j] = np.einsum("ij,ij->i", diff, diff)
    idx = d2.argmin(axis=1)
    return idx, d2[np.arange(z.shape[0]), idx]


def kmeans_loss(z: Tensor, c: np.ndarray) -> Tensor:
    """Mean squared distance from each embedding to its nearest centroid.

    Centroids enter as constants, so gradients reach ``z`` only.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] == 0:
        raise ValueError("need at least one centroid")
    if c.shape[1] != z.cols:
        raise ValueError(f"centroids have dim {c.shape[1]}, embeddings {z.cols}")
    idx, _ = nearest_centroid(z.data, c)
    diff = ad.sub(z, Tensor(c[idx]))
    return ad.scale(ad.sum_all(ad.square(diff)), 1.0 / z.rows)


def total_loss(l_r: Tensor, l_c: Tensor, beta: float, epoch: int = 0) -> tuple[Tensor, LossReport]:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    total = ad.add(l_r, ad.scale(l_c, beta))
    report = LossReport(l_total=total.item(), l_recon=l_r.item(), l_clust=l_c.item(),
                        beta=float(beta), epoch=epoch)
    return total, report
