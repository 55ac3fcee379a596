"""Joint reconstruction + k-means training loop, artifacts and beta sweeps."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .autodiff import EdgeIndex, Tape, Tensor
from .cluster import kmeans, refresh_centroids
from .encoder import EncoderConfig, encode, init_encoder, save_checkpoint
from .graph import DEFAULT_DENSE_CAP, DenseCapExceeded, dense_adjacency
from .ingest import (PLANETOID, DatasetBundle, load_content_cites, load_dataset, load_generic,
                     load_pubmed_tab, row_normalize)
from .losses import LossReport, kmeans_loss, recon_loss, decode, sampled_recon_loss, total_loss
from .metrics import score
from .optim import Adam

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    dataset: str = "custom"
    data_root: str | None = None
    content: str | None = None
    cites: str | None = None
    edges: str | None = None
    features: str | None = None
    labels: str | None = None
    beta: float | None = None  # None: per-dataset default (10 for unknown datasets)
    k: int | None = None  # None: ground-truth community count
    epochs: int = 400
    warmup_epochs: int = 50
    centroid_refresh_period: int = 1
    lr: float = 0.005
    dropout_input: float = 0.4
    dropout_attention: float = 0.2
    heads: int = 8
    hidden: int = 256
    embed: int = 64
    l2_embeddings: bool = True  # unit-norm rows; keeps the k-means term from shrinking Z
    seed: int = 42
    recon_mode: str = "auto"  # dense | sampled | auto
    neg_per_pos: int = 5
    dense_cap: int = DEFAULT_DENSE_CAP
    recon_diagonal: bool = True
    pos_weight: float | str = 1.0  # or "balanced": negatives / positives of the target
    recon_reduction: str = "node"  # entry | node
    normalize_features: bool = True
    ablation: str = "with_clust"  # with_clust | no_clust
    clip_norm: float | None = None
    kmeans_n_init: int = 10
    eval_every: int = 0

    def __post_init__(self):
        if self.beta is not None and self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.epochs < 0 or self.warmup_epochs < 0:
            raise ValueError("epochs and warmup_epochs must be >= 0")
        if self.epochs and self.epochs < self.warmup_epochs:
            raise ValueError("epochs must be >= warmup_epochs")
        if self.centroid_refresh_period < 1:
            raise ValueError("centroid_refresh_period must be >= 1")
        if self.recon_mode not in ("dense", "sampled", "auto"):
            raise ValueError(f"unknown recon_mode {self.recon_mode!r}")
        if self.ablation not in ("with_clust", "no_clust"):
            raise ValueError(f"unknown ablation {self.ablation!r}")
        if self.recon_reduction not in ("entry", "node"):
            raise ValueError(f"unknown recon_reduction {self.recon_reduction!r}")
        if self.pos_weight != "balanced" and not float(self.pos_weight) > 0:
            raise ValueError("pos_weight must be positive or 'balanced'")

    def resolved_beta(self) -> float:
        if self.beta is not None:
            return float(self.beta)
        return PLANETOID.get(self.dataset, (0, 0, 0, 10.0))[3]


@dataclass
class RunReport:
    config: dict
    dataset: dict
    losses: list[LossReport]
    nmi: float
    ari: float
    k: int
    inertia: float
    recon_mode: str
    eval_history: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self, include_time: bool = True) -> dict:
        d = asdict(self)
        if not include_time:
            d.pop("wall_time")
        return d

    def l_clust_series(self, after_warmup: bool = True) -> np.ndarray:
        start = self.config["warmup_epochs"] if after_warmup else 0
        return np.array([r.l_clust for r in self.losses if r.epoch >= start])


def load_bundle(config: TrainConfig) -> DatasetBundle:
    if config.content and config.cites:
        c = Path(config.content)
        if c.suffix == ".tab":
            bundle = load_pubmed_tab(c, config.cites, name=config.dataset)
        else:
            bundle = load_content_cites(c, config.cites, name=config.dataset)
    elif config.edges and config.features and config.labels:
        bundle = load_generic(config.edges, config.features, config.labels, name=config.dataset)
    elif config.data_root:
        bundle = load_dataset(config.dataset, config.data_root)
    else:
        raise ValueError("config names no dataset files")
    return bundle


def resolve_pos_weight(config: TrainConfig, graph, target) -> float:
    if config.pos_weight != "balanced":
        return float(config.pos_weight)
    if target is not None:
        pos = float(target.sum())
        return (target.size - pos) / pos
    return float(config.neg_per_pos)


def export_embeddings(z: np.ndarray, path) -> None:
    """CSV ``node_id,z_0,...`` with 17 significant digits (exact round trip)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id"] + [f"z_{j}" for j in range(z.shape[1])])
        for i, row in enumerate(z):
            w.writerow([i] + [f"{v:.17g}" for v in row])


def export_labels(labels: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("node_id,community\n")
        fh.writelines(f"{i},{int(c)}\n" for i, c in enumerate(labels))


def read_embeddings(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[np.argsort(data[:, 0], kind="stable"), 1:]


def read_labels(path) -> np.ndarray:
    """Read a labels file: ``node_id,community`` CSV (with header) or one label per line."""
    rows = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if rows and "," in rows[0]:
        if not rows[0].split(",")[0].strip().lstrip("-").isdigit():
            rows = rows[1:]
        pairs = np.array([[int(v) for v in r.split(",")[:2]] for r in rows], dtype=np.int64)
        if pairs.size == 0:
            return np.empty(0, dtype=np.int64)
        order = np.argsort(pairs[:, 0], kind="stable")
        if not np.array_equal(pairs[order, 0], np.arange(len(pairs))):
            raise ValueError(f"{path}: node ids must cover 0..n-1 exactly once")
        return pairs[order, 1]
    return np.array([int(r) for r in rows], dtype=np.int64)


def train(config: TrainConfig, bundle: DatasetBundle | None = None,
          out_dir=None) -> RunReport:
    """Run one training job; write artifacts to ``out_dir`` when given."""
    t0 = time.perf_counter()
    if bundle is None:
        bundle = load_bundle(config)
    graph = bundle.graph
    feats = row_normalize(bundle.features) if config.normalize_features else bundle.features
    k = config.k or bundle.k_truth
    beta = config.resolved_beta()
    n = graph.n

    mode = config.recon_mode
    if mode == "auto":
        mode = "dense" if n * n <= config.dense_cap else "sampled"
    if mode == "dense" and n * n > config.dense_cap:
        raise DenseCapExceeded(
            f"dense reconstruction of {n} nodes needs {n * n} entries (cap {config.dense_cap}); "
            "use recon_mode='sampled'")

    init_ss, drop_ss, km_ss, neg_ss, final_ss = np.random.SeedSequence(config.seed).spawn(5)
    drop_rng = np.random.default_rng(drop_ss)
    km_rng = np.random.default_rng(km_ss)
    neg_rng = np.random.default_rng(neg_ss)

    enc_cfg = EncoderConfig(in_dim=feats.f, hidden=config.hidden, embed=config.embed,
                            heads=config.heads, dropout_input=config.dropout_input,
                            dropout_attention=config.dropout_attention,
                            l2_output=config.l2_embeddings)
    params = init_encoder(enc_cfg, np.random.default_rng(init_ss))
    opt = Adam(params.tensors(), lr=config.lr, clip_norm=config.clip_norm)
    edges = EdgeIndex.from_graph(graph)
    x = Tensor(feats.values)
    target = dense_adjacency(graph, config.recon_diagonal, config.dense_cap) if mode == "dense" else None

    pos_weight = resolve_pos_weight(config, graph, target)

    losses: list[LossReport] = []
    eval_history: list[dict] = []
    centroids = None
    for epoch in range(config.epochs):
        params.zero_grad()
        with Tape() as tape:
            z = encode(params, edges, x, drop_rng, train_mode=True)
            if mode == "dense":
                l_r = recon_loss(target, decode(z, config.dense_cap), pos_weight,
                                 config.recon_reduction)
            else:
                l_r = sampled_recon_loss(graph, z, config.neg_per_pos, neg_rng,
                                         config.recon_diagonal, pos_weight,
                                         config.recon_reduction)
            fresh = centroids is None or epoch == config.warmup_epochs
            if fresh or epoch % config.centroid_refresh_period == 0:
                centroids = refresh_centroids(z.data, k, None if fresh else centroids, km_rng,
                                              n_init=config.kmeans_n_init).centroids
            active = config.ablation == "with_clust" and epoch >= config.warmup_epochs
            beta_eff = beta if active else 0.0
            if beta_eff > 0:
                loss, rep = total_loss(l_r, kmeans_loss(z, centroids), beta_eff, epoch)
            else:
                l_c = kmeans_loss(Tensor(z.data), centroids)
                loss, rep = l_r, LossReport(l_r.item(), l_r.item(), l_c.item(), 0.0, epoch)
        tape.backward(loss)
        opt.step()
        losses.append(rep)
        if config.eval_every and (epoch + 1) % config.eval_every == 0:
            z_eval = encode(params, edges, x).data
            res = kmeans(z_eval, k, np.random.default_rng(final_ss), n_init=config.kmeans_n_init)
            eval_history.append({"epoch": epoch, **score(bundle.truth, res.labels)})
            log.info("epoch %d  loss %.5f  recon %.5f  clust %.5f  nmi %.4f  ari %.4f",
                     epoch, rep.l_total, rep.l_recon, rep.l_clust,
                     eval_history[-1]["nmi"], eval_history[-1]["ari"])
        elif epoch % 50 == 0 or epoch == config.epochs - 1:
            log.info("epoch %d  loss %.5f  recon %.5f  clust %.5f",
                     epoch, rep.l_total, rep.l_recon, rep.l_clust)

    z_final = encode(params, edges, x).data
    final = kmeans(z_final, k, np.random.default_rng(final_ss), n_init=config.kmeans_n_init)

    cfg = asdict(config)
    cfg["beta"] = beta
    cfg["k"] = k
    report = RunReport(config=cfg, dataset=bundle.stats(), losses=losses, nmi=0.0, ari=0.0,
                       k=k, inertia=final.inertia, recon_mode=mode, eval_history=eval_history)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        export_embeddings(z_final, out / "embeddings.csv")
        export_labels(final.labels, out / "labels.csv")
        save_checkpoint(params, out / "checkpoint.bin")
        if bundle.node_ids:
            with open(out / "node_map.csv", "w", encoding="utf-8") as fh:
                fh.write("node_id,raw_id\n")
                fh.writelines(f"{i},{r}\n" for i, r in enumerate(bundle.node_ids))
        with open(out / "losses.jsonl", "w", encoding="utf-8") as fh:
            fh.writelines(r.to_json() + "\n" for r in losses)
        pred = read_labels(out / "labels.csv")
    else:
        pred = final.labels
    s = score(bundle.truth, pred)
    report.nmi, report.ari = s["nmi"], s["ari"]
    report.wall_time = time.perf_counter() - t0
    if out_dir is not None:
        with open(Path(out_dir) / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    log.info("%s: nmi %.4f  ari %.4f  (%.1fs)", bundle.name, report.nmi, report.ari,
             report.wall_time)
    return report


def beta_sweep(config: TrainConfig, betas, bundle: DatasetBundle | None = None,
               out_dir=None) -> list[dict]:
    """One full run per beta with the shared seed; rows of ``beta, nmi, ari``."""
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("need at least one beta value")
    if bundle is None:
        bundle = load_bundle(config)
    rows = []
    for i, b in enumerate(betas):
        sub = None if out_dir is None else Path(out_dir) / f"run{i:02d}_beta{b:g}"
        rep = train(replace(config, beta=b), bundle, sub)
        rows.append({"beta": b, "nmi": rep.nmi, "ari": rep.ari})
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["beta", "nmi", "ari"], lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        with open(out / "sweep.json", "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return rows
