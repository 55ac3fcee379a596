"""Planted-partition attributed graphs with bag-of-words features."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import FeatureMatrix, Partition, build_graph
from .ingest import DatasetBundle


def attributed_sbm(n: int = 300, k: int = 3, avg_degree: float = 4.0, homophily: float = 0.8,
                   n_features: int = 200, words_per_node: int = 12, topic_share: float = 0.5,
                   seed: int = 0) -> DatasetBundle:
    """Sample a graph whose edges and binary features both follow planted communities.

    ``homophily`` is the expected fraction of a node's edges that stay inside
    its community; ``topic_share`` the fraction of its words drawn from its
    community's vocabulary slice (the rest are uniform over all words).
    """
    rng = np.random.default_rng(seed)
    labels = np.sort(np.arange(n) % k)
    m = int(round(avg_degree * n / 2))
    n_in = rng.binomial(m, homophily)

    members = [np.flatnonzero(labels == c) for c in range(k)]
    sizes = np.array([len(mm) for mm in members], dtype=float)
    comm = rng.choice(k, size=n_in, p=sizes / sizes.sum())
    a = np.array([rng.choice(members[c]) for c in comm], dtype=np.int64)
    b = np.array([rng.choice(members[c]) for c in comm], dtype=np.int64)
    u = rng.integers(0, n, size=m - n_in)
    v = rng.integers(0, n, size=m - n_in)
    src = np.concatenate([a, u])
    dst = np.concatenate([b, v])
    keep = src != dst
    edges = np.stack([src[keep], dst[keep]], axis=1)

    x = np.zeros((n, n_features))
    block = n_features // k
    for i in range(n):
        c = labels[i]
        n_topic = rng.binomial(words_per_node, topic_share)
        topic = rng.integers(c * block, (c + 1) * block, size=n_topic)
        noise = rng.integers(0, n_features, size=words_per_node - n_topic)
        x[i, np.concatenate([topic, noise])] = 1.0

    return DatasetBundle(graph=build_graph(n, edges), features=FeatureMatrix(x),
                         truth=Partition(labels, k=k), name=f"sbm{n}",
                         node_ids=tuple(f"p{i}" for i in range(n)),
                         class_names=tuple(f"c{c}" for c in range(k)))


def write_content_cites(bundle: DatasetBundle, content_path, cites_path) -> None:
    """Write ``bundle`` as a ``.content``/``.cites`` pair (one line per undirected edge)."""
    ids = bundle.node_ids or tuple(str(i) for i in range(bundle.graph.n))
    names = bundle.class_names or tuple(str(c) for c in range(bundle.truth.k))
    with open(content_path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(bundle.features.values):
            words = " ".join(f"{v:g}" for v in row)
            fh.write(f"{ids[i]} {words} {names[bundle.truth.labels[i]]}\n")
    src, dst = bundle.graph.edge_arrays()
    keep = src < dst
    with open(cites_path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{ids[a]} {ids[b]}\n" for a, b in zip(src[keep], dst[keep]))


def write_planetoid_dir(bundle: DatasetBundle, root, name: str) -> tuple[Path, Path]:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    c, e = root / f"{name}.content", root / f"{name}.cites"
    write_content_cites(bundle, c, e)
    return c, e
