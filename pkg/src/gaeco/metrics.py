"""NMI and ARI between two partitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Partition


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # (k_truth, k_pred)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p)


def contingency(truth, pred) -> ContingencyTable:
    """Co-membership counts; rows/columns follow the sorted distinct ids of each side."""
    t, p = _labels(truth), _labels(pred)
    if t.shape != p.shape:
        raise ValueError(f"partitions differ in length: {t.shape[0]} vs {p.shape[0]}")
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    counts = np.zeros((ti.max() + 1 if ti.size else 0, pi.max() + 1 if pi.size else 0),
                      dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)
    return ContingencyTable(counts)


def _entropy(counts: np.ndarray, n: int) -> float:
    # sorted summation makes the value independent of label order
    c = np.sort(counts[counts > 0].astype(np.float64))
    p = c / n
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred) -> float:
    """Normalized mutual information with natural logs and 0*log(0) = 0.

    Evaluated as ``2 I(C; C*) / (H(C) + H(C*))`` with
    ``I = H(C) + H(C*) - H(C, C*)``. When both partitions are a single
    cluster the ratio is 0/0 and the result is 1.
    """
    table = contingency(truth, pred)
    n = table.n
    if n == 0:
        raise ValueError("empty partitions")
    h_t = _entropy(table.row_sums, n)
    h_p = _entropy(table.col_sums, n)
    den = h_t + h_p
    if den == 0.0:
        return 1.0
    mi = den - _entropy(table.counts.ravel(), n)
    return float(min(max(2.0 * mi / den, 0.0), 1.0))


def _comb2(x):
    return x * (x - 1) / 2.0


def ari(truth, pred) -> float:
    """Adjusted Rand index from pair counts; 1.0 when the chance-corrected denominator vanishes."""
    table = contingency(truth, pred)
    n = table.n
    if n < 2:
        raise ValueError("ARI needs at least two nodes")
    index = _comb2(table.counts.astype(np.float64)).sum()
    sa = _comb2(table.row_sums.astype(np.float64)).sum()
    sb = _comb2(table.col_sums.astype(np.float64)).sum()
    expected = sa * sb / _comb2(float(n))
    max_index = 0.5 * (sa + sb)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def score(truth, pred) -> dict:
    t, p = _labels(truth), _labels(pred)
    return {
        "nmi": nmi(t, p),
        "ari": ari(t, p),
        "n": int(t.shape[0]),
        "k_truth": int(np.unique(t).size),
        "k_pred": int(np.unique(p).size),
    }
