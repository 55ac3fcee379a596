import numpy as np
import pytest

from gaeco.graph import build_graph

# criterion id -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")


def random_graph(rng, n, p=0.4, self_loops=True):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return build_graph(n, pairs, add_self_loops=self_loops)


def central_difference(f, x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Numerical gradient of scalar ``f()`` w.r.t. the array ``x`` (mutated in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        fp = f()
        x[idx] = orig - step
        fm = f()
        x[idx] = orig
        g[idx] = (fp - fm) / (2 * step)
    return g


def max_rel_error(analytic, numeric, abs_floor=1e-7):
    """Largest relative error over entries whose absolute error exceeds ``abs_floor``."""
    err = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.where(err <= abs_floor, 0.0, err / np.where(scale == 0, 1.0, scale))
    return float(rel.max()) if rel.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def naive_gat_layer(g, h, weight, a_self, a_neigh, heads, concat, slope=0.2, act=None):
    """Direct per-node, per-head loop over neighbourhoods (no vectorization)."""
    d = weight.shape[1] // heads
    n = g.n
    per_head = []
    for k in range(heads):
        wk = weight[:, k * d:(k + 1) * d]
        ak_s, ak_n = a_self[0, k * d:(k + 1) * d], a_neigh[0, k * d:(k + 1) * d]
        out = np.zeros((n, d))
        for i in range(n):
            nbrs = [int(j) for j in g.indices[g.indptr[i]:g.indptr[i + 1]]]
            wi = h[i] @ wk
            logits = []
            for j in nbrs:
                e = float(ak_s @ wi + ak_n @ (h[j] @ wk))
                logits.append(e if e >= 0 else slope * e)
            top = max(logits)
            ex = [np.exp(e - top) for e in logits]
            total = sum(ex)
            for j, w in zip(nbrs, ex):
                out[i] += (w / total) * (h[j] @ wk)
        per_head.append(out)
    res = np.hstack(per_head) if concat else sum(per_head) / heads
    return act(res) if act is not None else res


def brute_nmi(truth, pred):
    """NMI straight from the contingency-table formula with explicit loops."""
    import math
    t, p = list(truth), list(pred)
    n = len(t)
    ct, cp = sorted(set(t)), sorted(set(p))
    n_i = {a: t.count(a) for a in ct}
    n_j = {b: p.count(b) for b in cp}
    num = 0.0
    for a in ct:
        for b in cp:
            nij = sum(1 for x, y in zip(t, p) if x == a and y == b)
            if nij:
                num += nij * math.log(nij * n / (n_i[a] * n_j[b]))
    den = sum(c * math.log(c / n) for c in n_i.values()) + sum(c * math.log(c / n) for c in n_j.values())
    if den == 0:
        return 1.0
    return -2.0 * num / den


def brute_ari(truth, pred):
    """ARI from an explicit enumeration of all node pairs."""
    t, p = list(truth), list(pred)
    n = len(t)
    both = in_t = in_p = pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            st_, sp_ = t[i] == t[j], p[i] == p[j]
            both += st_ and sp_
            in_t += st_
            in_p += sp_
            pairs += 1
    expected = in_t * in_p / pairs
    top = 0.5 * (in_t + in_p)
    if top == expected:
        return 1.0
    return (both - expected) / (top - expected)
