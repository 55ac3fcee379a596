"""Dataset loaders for Planetoid-style text files and a simple generic format."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import FeatureMatrix, Graph, Partition, build_graph

log = logging.getLogger(__name__)


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetBundle:
    graph: Graph
    features: FeatureMatrix
    truth: Partition
    name: str = ""
    node_ids: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()
    dropped_edges: int = 0

    def __post_init__(self):
        if len(self.truth) != self.graph.n:
            raise ValueError("truth labels length differs from node count")
        if self.features.n != self.graph.n:
            raise ValueError("feature rows differ from node count")

    @property
    def k_truth(self) -> int:
        return int(np.unique(self.truth.labels).shape[0])

    def stats(self) -> dict:
        return {
            "name": self.name,
            "nodes": self.graph.n,
            "features": self.features.f,
            "communities": self.k_truth,
            "raw_edges": self.graph.raw_edge_count,
            "undirected_edges": self.graph.num_undirected_edges,
            "dropped_edges": self.dropped_edges,
        }


def row_normalize(features: FeatureMatrix) -> FeatureMatrix:
    """Divide each row by its L1 norm; all-zero rows are left alone."""
    v = features.values
    norm = np.abs(v).sum(axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    return FeatureMatrix(v / norm)


def _lines(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line:
                yield lineno, line


def load_content_cites(content_path, cites_path, name: str = "",
                       add_self_loops: bool = True) -> DatasetBundle:
    """Parse a ``.content`` / ``.cites`` pair.

    ``.content`` rows are ``<id> <f1> ... <ff> <class>``; ``.cites`` rows are
    ``<cited> <citing>``. Ids become dense integers in first-seen order and
    class strings become ``0..k-1`` in first-seen order. Citations naming an
    id absent from ``.content`` are dropped and counted.
    """
    content_path, cites_path = Path(content_path), Path(cites_path)
    ids: dict[str, int] = {}
    classes: dict[str, int] = {}
    rows: list[np.ndarray] = []
    labels: list[int] = []
    width = None
    for lineno, line in _lines(content_path):
        parts = line.split()
        if width is None:
            width = len(parts)
            if width < 3:
                raise DatasetFormatError(f"{content_path}:{lineno}: need id, features and class")
        elif len(parts) != width:
            raise DatasetFormatError(
                f"{content_path}:{lineno}: expected {width} columns, got {len(parts)}")
        node = parts[0]
        if node in ids:
            raise DatasetFormatError(f"{content_path}:{lineno}: duplicate node id {node!r}")
        ids[node] = len(ids)
        try:
            rows.append(np.array(parts[1:-1], dtype=np.float64))
        except ValueError as exc:
            raise DatasetFormatError(f"{content_path}:{lineno}: {exc}") from None
        labels.append(classes.setdefault(parts[-1], len(classes)))
    if not ids:
        raise DatasetFormatError(f"{content_path}: empty content file")

    edges = []
    dropped = 0
    seen_any = False
    for lineno, line in _lines(cites_path):
        seen_any = True
        parts = line.split()
        if len(parts) != 2:
            raise DatasetFormatError(f"{cites_path}:{lineno}: expected 2 columns, got {len(parts)}")
        a, b = parts
        if a in ids and b in ids:
            edges.append((ids[a], ids[b]))
        else:
            dropped += 1
    if not seen_any:
        raise DatasetFormatError(f"{cites_path}: empty cites file")
    if dropped:
        log.warning("dropped %d citation(s) referencing unknown ids", dropped)

    graph = build_graph(len(ids), np.array(edges, dtype=np.int64).reshape(-1, 2),
                        add_self_loops=add_self_loops)
    # keep the count of citations actually present in the file
    graph = Graph(graph.n, graph.indptr, graph.indices, graph.self_loops,
                  raw_edge_count=len(edges) + dropped)
    return DatasetBundle(
        graph=graph,
        features=FeatureMatrix(np.vstack(rows)),
        truth=Partition(np.array(labels), k=len(classes)),
        name=name or content_path.stem,
        node_ids=tuple(ids),
        class_names=tuple(classes),
        dropped_edges=dropped,
    )


def load_generic(edges_path, features_path, labels_path, name: str = "",
                 add_self_loops: bool = True) -> DatasetBundle:
    """Load ``src<TAB>dst`` edges, CSV features (row = node id) and one label per line.

    Lines starting with ``#`` are ignored in all three files.
    """
    feats = []
    with open(features_path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                feats.append([float(v) for v in row])
            except ValueError:
                raise DatasetFormatError(
                    f"{features_path}:{lineno}: non-numeric feature") from None
    if not feats:
        raise DatasetFormatError(f"{features_path}: no feature rows")
    if len({len(r) for r in feats}) != 1:
        raise DatasetFormatError(f"{features_path}: ragged feature rows")

    labels = []
    for lineno, line in _lines(Path(labels_path)):
        if line.startswith("#"):
            continue
        try:
            labels.append(int(line))
        except ValueError:
            raise DatasetFormatError(f"{labels_path}:{lineno}: label is not an integer") from None
    if len(labels) != len(feats):
        raise DatasetFormatError(
            f"{len(feats)} feature rows but {len(labels)} labels")

    edges = []
    for lineno, line in _lines(Path(edges_path)):
        if line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise DatasetFormatError(f"{edges_path}:{lineno}: expected 'src<TAB>dst'")
        edges.append((int(parts[0]), int(parts[1])))

    n = len(feats)
    graph = build_graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2),
                        add_self_loops=add_self_loops)
    return DatasetBundle(
        graph=graph,
        features=FeatureMatrix(np.array(feats)),
        truth=Partition(np.array(labels)),
        name=name or Path(features_path).stem,
    )


def save_generic(bundle: DatasetBundle, edges_path, features_path, labels_path) -> None:
    """Write ``bundle`` in the generic format; floats use ``repr`` so reloads are exact."""
    src, dst = bundle.graph.edge_arrays()
    keep = src < dst
    with open(edges_path, "w", encoding="utf-8") as fh:
        for a, b in zip(src[keep], dst[keep]):
            fh.write(f"{a}\t{b}\n")
    with open(features_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        for row in bundle.features.values:
            w.writerow([repr(float(v)) for v in row])
    with open(labels_path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(v)}\n" for v in bundle.truth.labels)


def load_pubmed_tab(node_path, cites_path, name: str = "pubmed",
                    add_self_loops: bool = True) -> DatasetBundle:
    """Load the Pubmed-Diabetes ``NODE.paper.tab`` / ``DIRECTED.cites.tab`` pair.

    Node rows are ``<id>\tlabel=<c>\t<word>=<tfidf>...\tsummary=...``; the
    vocabulary comes from the ``numeric:<word>:0.0`` header declarations.
    Cite rows are ``<edge id>\tpaper:<a>\t|\tpaper:<b>``.
    """
    vocab: dict[str, int] = {}
    ids: dict[str, int] = {}
    classes: dict[str, int] = {}
    entries: list[tuple[int, int, float]] = []
    labels: list[int] = []
    for lineno, line in _lines(Path(node_path)):
        parts = line.split("\t")
        if lineno == 1:
            continue
        if lineno == 2:
            for decl in parts:
                bits = decl.split(":")
                if len(bits) == 3 and bits[0] == "numeric":
                    vocab.setdefault(bits[1], len(vocab))
            continue
        node = parts[0]
        if node in ids:
            raise DatasetFormatError(f"{node_path}:{lineno}: duplicate node id {node!r}")
        row = ids[node] = len(ids)
        label = None
        for item in parts[1:]:
            key, _, val = item.partition("=")
            if key == "label":
                label = val
            elif key != "summary" and key:
                if key not in vocab:
                    raise DatasetFormatError(f"{node_path}:{lineno}: undeclared feature {key!r}")
                entries.append((row, vocab[key], float(val)))
        if label is None:
            raise DatasetFormatError(f"{node_path}:{lineno}: missing label")
        labels.append(classes.setdefault(label, len(classes)))
    if not ids:
        raise DatasetFormatError(f"{node_path}: no nodes")
    x = np.zeros((len(ids), len(vocab)))
    for r, c, v in entries:
        x[r, c] = v

    edges, dropped = [], 0
    for lineno, line in _lines(Path(cites_path)):
        parts = line.split("\t")
        if len(parts) != 4 or parts[2] != "|":
            continue  # header lines
        a, b = parts[1].removeprefix("paper:"), parts[3].removeprefix("paper:")
        if a in ids and b in ids:
            edges.append((ids[a], ids[b]))
        else:
            dropped += 1
    graph = build_graph(len(ids), np.array(edges, dtype=np.int64).reshape(-1, 2),
                        add_self_loops=add_self_loops)
    return DatasetBundle(graph=graph, features=FeatureMatrix(x),
                         truth=Partition(np.array(labels), k=len(classes)), name=name,
                         node_ids=tuple(ids), class_names=tuple(classes),
                         dropped_edges=dropped)


PLANETOID = {
    # name: (nodes, features, communities, default beta)
    "cora": (2708, 1433, 7, 10.0),
    "citeseer": (3327, 3703, 6, 0.1),
    "pubmed": (19717, 500, 3, 0.1),
}


def find_dataset(name: str, root) -> tuple[Path, Path] | None:
    """Locate a dataset's file pair under ``root``.

    Looks for ``<name>.content``/``<name>.cites`` and, for PubMed, the
    Pubmed-Diabetes ``.tab`` pair, in ``root`` or a ``<name>`` subdirectory.
    """
    root = Path(root)
    dirs = [root] + [root / d for d in (name, name.capitalize(), name.upper(),
                                        "Pubmed-Diabetes", "Pubmed-Diabetes/data")]
    for d in dirs:
        for stem in (name, name.capitalize()):
            c, e = d / f"{stem}.content", d / f"{stem}.cites"
            if c.exists() and e.exists():
                return c, e
        if name == "pubmed":
            c = d / "Pubmed-Diabetes.NODE.paper.tab"
            e = d / "Pubmed-Diabetes.DIRECTED.cites.tab"
            if c.exists() and e.exists():
                return c, e
    return None


def load_dataset(name: str, root, add_self_loops: bool = True) -> DatasetBundle:
    """Load a named benchmark found under ``root`` (see :func:`find_dataset`)."""
    found = find_dataset(name, root)
    if found is None:
        raise FileNotFoundError(f"no files for dataset {name!r} under {root}")
    c, e = found
    if c.suffix == ".tab":
        return load_pubmed_tab(c, e, name=name, add_self_loops=add_self_loops)
    return load_content_cites(c, e, name=name, add_self_loops=add_self_loops)
