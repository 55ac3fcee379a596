"""Tape-based reverse-mode differentiation over dense float64 matrices.

Every tensor is 2-D. Operations executed while a :class:`Tape` is active
record a backward rule whenever at least one input requires a gradient;
:meth:`Tape.backward` then replays those rules in exact reverse order.

    >>> w = Tensor([[1.0, 2.0]], requires_grad=True)
    >>> with Tape() as tape:
    ...     loss = sum_all(square(w))
    >>> tape.backward(loss)
    >>> w.grad
    array([[2., 4.]])
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

LOG_EPS = 1e-12
LEAKY_SLOPE = 0.2

_active: list["Tape"] = []


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or Inf."""


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ValueError(f"tensors are 2-D, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise ValueError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def detach(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, _as_tensor(other))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))

    @property
    def T(self):
        return transpose(self)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


@dataclass
class _Record:
    out: Tensor
    inputs: tuple[Tensor, ...]
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]
    op: str


class Tape:
    """Ordered log of differentiable operations."""

    def __init__(self):
        self.records: list[_Record] = []
        self.consumed = False

    def __enter__(self):
        _active.append(self)
        return self

    def __exit__(self, *exc):
        _active.remove(self)
        return False

    def __len__(self):
        return len(self.records)

    def backward(self, loss: Tensor) -> list[Tensor]:
        """Accumulate d(loss)/d(leaf) into ``.grad`` of every leaf that requires it.

        Returns the leaves reached, in first-encounter order.
        """
        if self.consumed:
            raise RuntimeError("tape already consumed by a previous backward()")
        if loss.shape != (1, 1):
            raise ValueError(f"loss must be 1x1, got {loss.shape}")
        self.consumed = True
        produced = {id(r.out) for r in self.records}
        grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
        leaves: dict[int, Tensor] = {}
        for rec in reversed(self.records):
            g = grads.pop(id(rec.out), None)
            if g is None:
                continue
            for t, gi in zip(rec.inputs, rec.backward(g)):
                if gi is None or not t.requires_grad:
                    continue
                if id(t) in grads:
                    grads[id(t)] = grads[id(t)] + gi
                else:
                    grads[id(t)] = gi
                if id(t) not in produced:
                    leaves.setdefault(id(t), t)
        for key, t in leaves.items():
            g = grads[key]
            t.grad = g if t.grad is None else t.grad + g
        return list(leaves.values())


def _record(op: str, out_data: np.ndarray, inputs: tuple[Tensor, ...], backward) -> Tensor:
    if not np.isfinite(out_data).all():
        raise NonFiniteError(f"{op} produced non-finite values")
    needs = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = out_data
    out.grad = None
    out.name = None
    out.requires_grad = needs and bool(_active)
    if out.requires_grad:
        _active[-1].records.append(_Record(out, inputs, backward, op))
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if g.shape == shape:
        return g
    return g.sum(axis=0, keepdims=True)


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    if a.shape != b.shape and not (b.rows == 1 and b.cols == a.cols):
        raise ValueError(f"{op}: cannot combine {a.shape} with {b.shape}")


# -- linear algebra -----------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise ValueError(f"matmul: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data

    def back(g):
        return (g @ bd.T if a.requires_grad else None,
                ad.T @ g if b.requires_grad else None)
    return _record("matmul", ad @ bd, (a, b), back)


def transpose(a: Tensor) -> Tensor:
    return _record("transpose", a.data.T.copy(), (a,), lambda g: (g.T,))


def gram(z: Tensor) -> Tensor:
    """``z @ z.T`` with a single symmetric backward product."""
    zd = z.data

    def back(g):
        return ((g + g.T) @ zd,)
    return _record("gram", zd @ zd.T, (z,), back)


# -- elementwise --------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    """Sum of equal shapes, or of a matrix and a row vector broadcast over rows."""
    _check_broadcast(a, b, "add")
    return _record("add", a.data + b.data, (a, b),
                   lambda g: (g, _unbroadcast(g, b.shape)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")
    return _record("sub", a.data - b.data, (a, b),
                   lambda g: (g, -_unbroadcast(g, b.shape)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "mul")
    ad, bd = a.data, b.data

    def back(g):
        return (g * bd if a.requires_grad else None,
                _unbroadcast(g * ad, b.shape) if b.requires_grad else None)
    return _record("mul", ad * bd, (a, b), back)


def scale(a: Tensor, c: float) -> Tensor:
    return _record("scale", a.data * c, (a,), lambda g: (g * c,))


def square(a: Tensor) -> Tensor:
    ad = a.data
    return _record("square", ad * ad, (a,), lambda g: (2.0 * ad * g,))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _record("exp", out, (a,), lambda g: (g * out,))


def log(a: Tensor, eps: float = LOG_EPS) -> Tensor:
    """Natural log of ``a`` clamped to ``[eps, 1 - eps]``; zero gradient outside."""
    inside = (a.data >= eps) & (a.data <= 1.0 - eps)
    c = np.clip(a.data, eps, 1.0 - eps)
    return _record("log", np.log(c), (a,), lambda g: (np.where(inside, g / c, 0.0),))


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    # split by sign so exp never overflows
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _record("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def elu(a: Tensor, alpha: float = 1.0) -> Tensor:
    x = a.data
    neg = alpha * np.expm1(np.minimum(x, 0.0))
    out = np.where(x > 0, x, neg)
    return _record("elu", out, (a,), lambda g: (np.where(x > 0, g, g * (neg + alpha)),))


def leaky_relu(a: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    """``x`` for ``x >= 0`` else ``slope * x``; the derivative at 0 is 1."""
    if not 0.0 < slope < 1.0:
        raise ValueError("slope must lie in (0, 1)")
    x = a.data
    pos = x >= 0
    return _record("leaky_relu", np.where(pos, x, slope * x), (a,),
                   lambda g: (np.where(pos, g, slope * g),))


def dropout(a: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; ``p == 1`` zeroes everything."""
    if p <= 0.0:
        return a
    if p >= 1.0:
        mask = np.zeros(a.shape)
    else:
        mask = (rng.random(a.shape) >= p) / (1.0 - p)
    return _record("dropout", a.data * mask, (a,), lambda g: (g * mask,))


# -- reductions and reshapes --------------------------------------------------

def sum_all(a: Tensor) -> Tensor:
    shape = a.shape
    return _record("sum", np.array([[a.data.sum()]]), (a,),
                   lambda g: (np.full(shape, g[0, 0]),))


def mean_all(a: Tensor) -> Tensor:
    shape, n = a.shape, a.data.size
    return _record("mean", np.array([[a.data.mean()]]), (a,),
                   lambda g: (np.full(shape, g[0, 0] / n),))


def row_sum(a: Tensor) -> Tensor:
    cols = a.cols
    return _record("row_sum", a.data.sum(axis=1, keepdims=True), (a,),
                   lambda g: (np.repeat(g, cols, axis=1),))


def reshape(a: Tensor, rows: int, cols: int) -> Tensor:
    shape = a.shape
    return _record("reshape", a.data.reshape(rows, cols).copy(), (a,),
                   lambda g: (g.reshape(shape),))


def head_sum(a: Tensor, heads: int) -> Tensor:
    """Sum each of ``heads`` contiguous column blocks: (n, H*D) -> (n, H)."""
    n, hd = a.shape
    if hd % heads:
        raise ValueError(f"{hd} columns do not split into {heads} heads")
    d = hd // heads
    return _record("head_sum", a.data.reshape(n, heads, d).sum(axis=2), (a,),
                   lambda g: (np.repeat(g, d, axis=1),))


def head_mean(a: Tensor, heads: int) -> Tensor:
    """Average the ``heads`` column blocks: (n, H*D) -> (n, D)."""
    n, hd = a.shape
    if hd % heads:
        raise ValueError(f"{hd} columns do not split into {heads} heads")
    return _record("head_mean", a.data.reshape(n, heads, hd // heads).mean(axis=1), (a,),
                   lambda g: (np.tile(g / heads, (1, heads)),))


def row_l2_normalize(a: Tensor, floor: float = 1e-12) -> Tensor:
    """Scale every row to unit Euclidean norm (rows shorter than ``floor`` are divided by it)."""
    norm = np.maximum(np.sqrt(np.einsum("ij,ij->i", a.data, a.data)), floor)[:, None]
    out = a.data / norm

    def back(g):
        return ((g - out * np.einsum("ij,ij->i", g, out)[:, None]) / norm,)
    return _record("row_l2_normalize", out, (a,), back)


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    index = np.asarray(index, dtype=np.int64)
    n = a.rows

    def back(g):
        out = np.zeros((n, g.shape[1]))
        np.add.at(out, index, g)
        return (out,)
    return _record("gather_rows", a.data[index], (a,), back)


# -- graph ops ----------------------------------------------------------------

@dataclass(frozen=True)
class EdgeIndex:
    """Directed edge instances grouped contiguously by destination.

    Edge ``e`` carries a message from ``src[e]`` into ``dst[e]``; the edges
    of destination ``i`` occupy ``offsets[i]:offsets[i+1]``.
    """

    src: np.ndarray
    dst: np.ndarray
    offsets: np.ndarray
    n: int

    @classmethod
    def from_graph(cls, g) -> "EdgeIndex":
        # CSR rows are destinations, their sorted columns are sources
        dst = np.repeat(np.arange(g.n), np.diff(g.indptr))
        return cls(src=np.asarray(g.indices, dtype=np.int64), dst=dst,
                   offsets=np.asarray(g.indptr, dtype=np.int64), n=g.n)

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    def group_sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def aggregation_matrix(self, weights: np.ndarray) -> sp.csr_matrix:
        """CSR matrix ``M`` with ``M[dst[e], src[e]] = weights[e]``."""
        return sp.csr_matrix((weights, self.src, self.offsets), shape=(self.n, self.n))


def _segment_reduce(ufunc, values: np.ndarray, edges: EdgeIndex) -> np.ndarray:
    return ufunc.reduceat(values, edges.offsets[:-1], axis=0)


def segment_softmax(scores: Tensor, edges: EdgeIndex) -> Tensor:
    """Softmax over the edges sharing a destination, independently per column."""
    if scores.rows != edges.num_edges:
        raise ValueError(f"segment_softmax: {scores.rows} scores for {edges.num_edges} edges")
    if (edges.group_sizes() == 0).any():
        raise ValueError("segment_softmax: a destination has no incoming edges")
    s = scores.data
    shifted = s - _segment_reduce(np.maximum, s, edges)[edges.dst]
    e = np.exp(shifted)
    out = e / _segment_reduce(np.add, e, edges)[edges.dst]

    def back(g):
        dot = _segment_reduce(np.add, out * g, edges)[edges.dst]
        return (out * (g - dot),)
    return _record("segment_softmax", out, (scores,), back)


def neighbor_sum(alpha: Tensor, values: Tensor, edges: EdgeIndex) -> Tensor:
    """Per-head weighted aggregation ``out[i, h] = sum_e alpha[e, h] * values[src[e], h]``.

    ``alpha`` is (E, H); ``values`` is (n, H*D) with heads as contiguous
    column blocks; the result is (n, H*D).
    """
    E, H = alpha.shape
    n, hd = values.shape
    if E != edges.num_edges or n != edges.n or hd % H:
        raise ValueError(f"neighbor_sum: alpha {alpha.shape}, values {values.shape}")
    d = hd // H
    a, v = alpha.data, values.data
    mats = [edges.aggregation_matrix(a[:, h]) for h in range(H)]
    out = np.hstack([mats[h] @ v[:, h * d:(h + 1) * d] for h in range(H)])

    def back(g):
        ga = gv = None
        if alpha.requires_grad:
            ga = np.empty((E, H))
            for h in range(H):
                blk = slice(h * d, (h + 1) * d)
                ga[:, h] = np.einsum("ij,ij->i", g[edges.dst, blk], v[edges.src, blk])
        if values.requires_grad:
            gv = np.hstack([mats[h].T @ g[:, h * d:(h + 1) * d] for h in range(H)])
        return ga, gv
    return _record("neighbor_sum", out, (alpha, values), back)


def pair_dot(z: Tensor, left: np.ndarray, right: np.ndarray, chunk: int = 65536) -> Tensor:
    """Column vector of ``<z[left[p]], z[right[p]]>`` for every pair ``p``."""
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    zd = z.data
    n = z.rows
    out = np.empty((left.shape[0], 1))
    for s in range(0, left.shape[0], chunk):
        sl = slice(s, s + chunk)
        out[sl, 0] = np.einsum("ij,ij->i", zd[left[sl]], zd[right[sl]])

    def back(g):
        m = sp.csr_matrix((g[:, 0], (left, right)), shape=(n, n))
        return (m @ zd + m.T @ zd,)
    return _record("pair_dot", out, (z,), back)


def binary_cross_entropy(p: Tensor, target: np.ndarray, pos_weight: float = 1.0,
                         eps: float = LOG_EPS, normalizer: float | None = None) -> Tensor:
    """Sum of ``-(w t log p + (1 - t) log(1 - p))`` divided by ``normalizer``
    (default: the entry count, i.e. a mean), log clamped at ``eps``."""
    t = np.asarray(target, dtype=np.float64)
    if t.shape != p.shape:
        raise ValueError(f"binary_cross_entropy: target {t.shape} vs prediction {p.shape}")
    pd = p.data
    c = np.clip(pd, eps, 1.0 - eps)
    w = pos_weight * t
    size = float(t.size if normalizer is None else normalizer)
    val = -(w * np.log(c) + (1.0 - t) * np.log1p(-c)).sum() / size
    inside = (pd >= eps) & (pd <= 1.0 - eps)

    def back(g):
        d = -(w / c - (1.0 - t) / (1.0 - c)) / size
        return (np.where(inside, d, 0.0) * g[0, 0],)
    return _record("binary_cross_entropy", np.array([[val]]), (p,), back)
