"""Two-layer multi-head graph attention encoder."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import EdgeIndex, Tensor
from .graph import FeatureMatrix, Graph


@dataclass
class EncoderConfig:
    in_dim: int
    hidden: int = 256
    embed: int = 64
    heads: int = 8
    dropout_input: float = 0.4
    dropout_attention: float = 0.2
    slope: float = ad.LEAKY_SLOPE
    l2_output: bool = False  # unit-norm embedding rows

    def __post_init__(self):
        if self.heads < 1:
            raise ValueError("need at least one attention head")
        if self.hidden % self.heads:
            raise ValueError(f"hidden={self.hidden} is not divisible by heads={self.heads}")
        for p in (self.dropout_input, self.dropout_attention):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"dropout probability {p} outside [0, 1]")


@dataclass
class GatLayerParams:
    """Weights of one attention layer, heads stacked as column blocks.

    ``weight`` is (in_dim, heads*head_dim); column block ``k`` is W^k.
    ``a_self`` scores the receiving node's projection W^k h_i and ``a_neigh``
    the neighbour's W^k h_j, so ``[a_self | a_neigh]`` is the attention vector
    applied to the concatenation of the two.
    """

    weight: Tensor
    a_self: Tensor
    a_neigh: Tensor
    heads: int
    concat: bool = True

    @property
    def head_dim(self) -> int:
        return self.weight.cols // self.heads

    def tensors(self) -> list[Tensor]:
        return [self.weight, self.a_self, self.a_neigh]


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_layer(rng: np.random.Generator, in_dim: int, head_dim: int, heads: int,
               concat: bool, name: str) -> GatLayerParams:
    w = np.hstack([_glorot(rng, in_dim, head_dim, (in_dim, head_dim)) for _ in range(heads)])
    att = np.hstack([_glorot(rng, 2 * head_dim, 1, (2, head_dim)) for _ in range(heads)])
    return GatLayerParams(
        weight=Tensor(w, requires_grad=True, name=f"{name}.weight"),
        a_self=Tensor(att[:1], requires_grad=True, name=f"{name}.a_self"),
        a_neigh=Tensor(att[1:], requires_grad=True, name=f"{name}.a_neigh"),
        heads=heads, concat=concat)


@dataclass
class EncoderParams:
    layer1: GatLayerParams
    layer2: GatLayerParams
    config: EncoderConfig = field(repr=False, default=None)

    def tensors(self) -> list[Tensor]:
        return self.layer1.tensors() + self.layer2.tensors()

    def zero_grad(self):
        for t in self.tensors():
            t.grad = None


def init_encoder(config: EncoderConfig, rng: np.random.Generator) -> EncoderParams:
    """Glorot-uniform initialization of both layers.

    Layer 1 concatenates ``heads`` blocks of ``hidden/heads`` columns; layer 2
    averages ``heads`` blocks of ``embed`` columns.
    """
    l1 = init_layer(rng, config.in_dim, config.hidden // config.heads, config.heads,
                    concat=True, name="layer1")
    l2 = init_layer(rng, config.hidden, config.embed, config.heads, concat=False,
                    name="layer2")
    return EncoderParams(l1, l2, config)


def attention_logits(layer: GatLayerParams, projected: Tensor, edges: EdgeIndex,
                     slope: float = ad.LEAKY_SLOPE) -> Tensor:
    """Per-edge, per-head scores (E, H) from already projected features ``W h``."""
    H = layer.heads
    s_self = ad.head_sum(ad.mul(projected, layer.a_self), H)
    s_neigh = ad.head_sum(ad.mul(projected, layer.a_neigh), H)
    raw = ad.add(ad.gather_rows(s_self, edges.dst), ad.gather_rows(s_neigh, edges.src))
    return ad.leaky_relu(raw, slope)


def gat_layer_forward(layer: GatLayerParams, h: Tensor, edges: EdgeIndex,
                      activation=None, dropout_input: float = 0.0,
                      dropout_attention: float = 0.0, rng=None,
                      slope: float = ad.LEAKY_SLOPE) -> Tensor:
    if h.cols != layer.weight.rows:
        raise ValueError(f"layer expects {layer.weight.rows} input columns, got {h.cols}")
    if rng is not None and dropout_input > 0:
        h = ad.dropout(h, dropout_input, rng)
    projected = ad.matmul(h, layer.weight)
    alpha = ad.segment_softmax(attention_logits(layer, projected, edges, slope), edges)
    if rng is not None and dropout_attention > 0:
        alpha = ad.dropout(alpha, dropout_attention, rng)
    out = ad.neighbor_sum(alpha, projected, edges)
    if not layer.concat:
        out = ad.head_mean(out, layer.heads)
    return activation(out) if activation is not None else out


def encode(params: EncoderParams, graph: Graph | EdgeIndex, x: FeatureMatrix | Tensor,
           rng: np.random.Generator | None = None, train_mode: bool = False) -> Tensor:
    """Embed every node: ELU(concat heads) then mean over heads, identity output
    (or unit-norm rows when ``config.l2_output`` is set)."""
    edges = graph if isinstance(graph, EdgeIndex) else EdgeIndex.from_graph(graph)
    xt = x if isinstance(x, Tensor) else Tensor(x.values)
    if xt.rows != edges.n:
        raise ValueError(f"{xt.rows} feature rows for {edges.n} nodes")
    cfg = params.config
    p_in = cfg.dropout_input if train_mode else 0.0
    p_att = cfg.dropout_attention if train_mode else 0.0
    r = rng if train_mode else None
    if train_mode and rng is None and (p_in > 0 or p_att > 0):
        raise ValueError("train_mode with dropout needs an rng")
    h = gat_layer_forward(params.layer1, xt, edges, ad.elu, p_in, p_att, r, cfg.slope)
    z = gat_layer_forward(params.layer2, h, edges, None, p_in, p_att, r, cfg.slope)
    return ad.row_l2_normalize(z) if cfg.l2_output else z


# -- checkpoint ---------------------------------------------------------------

CHECKPOINT_MAGIC = b"GAECOCKP"
CHECKPOINT_VERSION = 1


def save_checkpoint(params: EncoderParams, path) -> None:
    """Binary dump: magic, version, tensor count, then per tensor
    (name length, utf-8 name, rows, cols, float64 data); all little-endian."""
    tensors = params.tensors()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(tensors)))
        for t in tensors:
            name = t.name.encode("utf-8")
            fh.write(struct.pack("<I", len(name)))
            fh.write(name)
            fh.write(struct.pack("<QQ", *t.shape))
            fh.write(t.data.astype("<f8").tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    version, count = struct.unpack_from("<II", raw, 8)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    pos = 16
    out = {}
    for _ in range(count):
        (ln,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        name = raw[pos:pos + ln].decode("utf-8")
        pos += ln
        rows, cols = struct.unpack_from("<QQ", raw, pos)
        pos += 16
        nbytes = rows * cols * 8
        out[name] = np.frombuffer(raw[pos:pos + nbytes], dtype="<f8").reshape(rows, cols).copy()
        pos += nbytes
    return out


def params_from_checkpoint(config: EncoderConfig, tensors: dict[str, np.ndarray]) -> EncoderParams:
    def layer(prefix, heads, concat):
        return GatLayerParams(
            *(Tensor(tensors[f"{prefix}.{k}"], requires_grad=True, name=f"{prefix}.{k}")
              for k in ("weight", "a_self", "a_neigh")),
            heads=heads, concat=concat)
    return EncoderParams(layer("layer1", config.heads, True),
                         layer("layer2", config.heads, False), config)
