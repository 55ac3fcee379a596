import numpy as np
import pytest

from gaeco.graph import FeatureMatrix
from gaeco.ingest import (DatasetFormatError, load_content_cites, load_generic,
                          load_pubmed_tab, row_normalize, save_generic)
from gaeco.synthetic import attributed_sbm, write_content_cites


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_toy_content_cites(tmp_path):
    c = write(tmp_path / "toy.content", "a 1 0 1 x\nb 0 1 1 y\n")
    e = write(tmp_path / "toy.cites", "a b\n")
    b = load_content_cites(c, e)
    assert b.graph.n == 2 and b.features.f == 3 and b.k_truth == 2
    assert b.graph.num_undirected_edges == 1
    assert b.graph.has_edge(0, 1) and b.graph.has_edge(1, 0)
    assert b.node_ids == ("a", "b")
    np.testing.assert_array_equal(b.truth.labels, [0, 1])


def test_dangling_citations_dropped(tmp_path):
    c = write(tmp_path / "t.content", "a 1 x\nb 0 x\nc 1 y\n")
    e = write(tmp_path / "t.cites", "a b\nb zz\nqq a\nc a\n")
    b = load_content_cites(c, e)
    assert b.dropped_edges == 2
    assert b.graph.num_undirected_edges == 2
    assert b.graph.raw_edge_count == 4


@pytest.mark.parametrize("content,cites", [
    ("a 1 0 x\nb 1 y\n", "a b\n"),      # wrong column count
    ("a 1 x\na 0 y\n", "a a\n"),         # duplicate id
    ("", "a b\n"),                       # empty content
    ("a 1 x\n", ""),                     # empty cites
    ("a 1 x\nb 0 y\n", "a b c\n"),       # malformed cite
])
def test_content_cites_errors(tmp_path, content, cites):
    c = write(tmp_path / "t.content", content)
    e = write(tmp_path / "t.cites", cites)
    with pytest.raises(DatasetFormatError):
        load_content_cites(c, e)


def test_generic_triangle(tmp_path):
    e = write(tmp_path / "e.tsv", "# triangle\n0\t1\n1\t2\n2\t0\n")
    f = write(tmp_path / "f.csv", "1.0,0.5\n0,1\n2,2\n")
    lab = write(tmp_path / "l.txt", "0\n0\n1\n")
    b = load_generic(e, f, lab)
    assert (b.graph.n, b.features.f) == (3, 2)
    assert b.graph.num_undirected_edges == 3


def test_generic_empty_edges(tmp_path):
    e = write(tmp_path / "e.tsv", "")
    f = write(tmp_path / "f.csv", "1\n2\n3\n4\n")
    lab = write(tmp_path / "l.txt", "0\n1\n0\n1\n")
    b = load_generic(e, f, lab)
    assert b.graph.n == 4 and b.graph.num_undirected_edges == 0


def test_generic_errors(tmp_path):
    e = write(tmp_path / "e.tsv", "0\t1\n")
    f = write(tmp_path / "f.csv", "1\n2\n3\n")
    with pytest.raises(DatasetFormatError):
        load_generic(e, f, write(tmp_path / "l.txt", "0\n1\n"))
    bad = write(tmp_path / "bad.csv", "1\nabc\n")
    with pytest.raises(DatasetFormatError):
        load_generic(e, bad, write(tmp_path / "l2.txt", "0\n1\n"))


def test_generic_round_trip(tmp_path):
    b = attributed_sbm(n=40, k=3, n_features=15, seed=3)
    b = type(b)(graph=b.graph, features=FeatureMatrix(b.features.values * np.pi / 7),
                truth=b.truth)
    paths = tmp_path / "e.tsv", tmp_path / "f.csv", tmp_path / "l.txt"
    save_generic(b, *paths)
    r = load_generic(*paths)
    np.testing.assert_array_equal(r.graph.indptr, b.graph.indptr)
    np.testing.assert_array_equal(r.graph.indices, b.graph.indices)
    np.testing.assert_array_equal(r.features.values, b.features.values)
    np.testing.assert_array_equal(r.truth.labels, b.truth.labels)


def test_content_cites_round_trip(tmp_path):
    b = attributed_sbm(n=50, k=2, n_features=10, seed=5)
    write_content_cites(b, tmp_path / "s.content", tmp_path / "s.cites")
    r = load_content_cites(tmp_path / "s.content", tmp_path / "s.cites")
    np.testing.assert_array_equal(r.graph.indices, b.graph.indices)
    np.testing.assert_array_equal(r.truth.labels, b.truth.labels)
    np.testing.assert_array_equal(r.features.values, b.features.values)


def test_pubmed_tab(tmp_path):
    nodes = write(tmp_path / "n.tab", "NODE\tpaper\n"
                  "cat=1,2,3:label\tnumeric:w-a:0.0\tnumeric:w-b:0.0\tnumeric:w-c:0.0\n"
                  "11\tlabel=1\tw-a=0.5\tw-c=0.1\tsummary=w-a,w-c\n"
                  "22\tlabel=3\tw-b=0.2\tsummary=w-b\n"
                  "33\tlabel=1\tsummary=\n")
    cites = write(tmp_path / "c.tab", "DIRECTED\tcites\nNO_FEATURES\n"
                  "1\tpaper:11\t|\tpaper:22\n2\tpaper:33\t|\tpaper:11\n3\tpaper:99\t|\tpaper:11\n")
    b = load_pubmed_tab(nodes, cites)
    assert (b.graph.n, b.features.f, b.k_truth) == (3, 3, 2)
    np.testing.assert_allclose(b.features.values, [[0.5, 0, 0.1], [0, 0.2, 0], [0, 0, 0]])
    assert b.graph.num_undirected_edges == 2 and b.dropped_edges == 1


@pytest.mark.parametrize("row,expected", [([2, 2], [0.5, 0.5]), ([0, 0], [0, 0]),
                                          ([1, 3], [0.25, 0.75])])
def test_row_normalize(row, expected):
    out = row_normalize(FeatureMatrix(np.array([row], dtype=float)))
    np.testing.assert_array_equal(out.values[0], expected)
