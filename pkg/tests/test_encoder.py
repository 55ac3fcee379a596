import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaeco import autodiff as ad
from gaeco.autodiff import EdgeIndex, Tensor
from gaeco.encoder import (EncoderConfig, GatLayerParams, attention_logits, encode,
                           gat_layer_forward, init_encoder, load_checkpoint,
                           params_from_checkpoint, save_checkpoint)
from gaeco.graph import FeatureMatrix, build_graph

from conftest import naive_gat_layer, random_graph


def layer_from(w, a_s, a_n, heads, concat=True):
    return GatLayerParams(Tensor(w), Tensor(a_s), Tensor(a_n), heads, concat)


def small_encoder(in_dim, heads=2, head_dim=3, seed=0, **kw):
    cfg = EncoderConfig(in_dim=in_dim, hidden=heads * head_dim, embed=head_dim, heads=heads, **kw)
    return init_encoder(cfg, np.random.default_rng(seed))


def test_logit_hand_example():
    g = build_graph(1, [])
    layer = layer_from(np.eye(2), np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]]), 1)
    h = Tensor(np.array([[3.0, 5.0]]))
    e = attention_logits(layer, ad.matmul(h, layer.weight), EdgeIndex.from_graph(g))
    assert e.data[0, 0] == 6.0


def test_zero_attention_gives_zero_logits():
    r = np.random.default_rng(1)
    g = random_graph(r, 5)
    layer = layer_from(r.normal(size=(3, 4)), np.zeros((1, 4)), np.zeros((1, 4)), 2)
    h = Tensor(r.normal(size=(5, 3)))
    e = attention_logits(layer, ad.matmul(h, layer.weight), EdgeIndex.from_graph(g))
    np.testing.assert_array_equal(e.data, 0.0)


def test_negated_attention_scales_by_slope():
    g = build_graph(2, [(0, 1)])
    w = np.eye(2)
    h = Tensor(np.array([[1.0, 2.0], [0.5, 3.0]]))
    a = np.array([[1.0, 1.0]])
    pos = attention_logits(layer_from(w, a, a, 1), h, EdgeIndex.from_graph(g)).data
    neg = attention_logits(layer_from(w, -a, -a, 1), h, EdgeIndex.from_graph(g)).data
    np.testing.assert_allclose(neg, -0.2 * pos)


def test_single_node_identity():
    g = build_graph(1, [])
    x = np.array([[0.3, -1.2, 4.0]])
    out = gat_layer_forward(layer_from(np.eye(3), np.zeros((1, 3)), np.zeros((1, 3)), 1),
                            Tensor(x), EdgeIndex.from_graph(g))
    np.testing.assert_array_equal(out.data, x)


def test_disconnected_nodes_independent():
    r = np.random.default_rng(2)
    layer = layer_from(r.normal(size=(2, 4)), r.normal(size=(1, 4)), r.normal(size=(1, 4)), 2)
    x = r.normal(size=(2, 2))
    both = gat_layer_forward(layer, Tensor(x), EdgeIndex.from_graph(build_graph(2, []))).data
    for i in range(2):
        alone = gat_layer_forward(layer, Tensor(x[i:i + 1]),
                                  EdgeIndex.from_graph(build_graph(1, []))).data
        np.testing.assert_allclose(both[i], alone[0], rtol=0, atol=1e-14)


@pytest.mark.parametrize("concat", [True, False])
def test_layer_matches_naive_loop(concat):
    r = np.random.default_rng(3)
    g = random_graph(r, 5, 0.5)
    w, a_s, a_n = r.normal(size=(4, 6)), r.normal(size=(1, 6)), r.normal(size=(1, 6))
    h = r.normal(size=(5, 4))
    fast = gat_layer_forward(layer_from(w, a_s, a_n, 2, concat), Tensor(h),
                             EdgeIndex.from_graph(g)).data
    slow = naive_gat_layer(g, h, w, a_s, a_n, 2, concat)
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-10)


def test_encode_shape_and_eval_determinism():
    r = np.random.default_rng(4)
    g = random_graph(r, 9)
    x = FeatureMatrix(r.random((9, 5)))
    params = init_encoder(EncoderConfig(in_dim=5), np.random.default_rng(0))
    z1 = encode(params, g, x).data
    z2 = encode(params, g, x).data
    assert z1.shape == (9, 64)
    assert z1.tobytes() == z2.tobytes()


def test_encode_train_mode_uses_rng():
    r = np.random.default_rng(5)
    g = random_graph(r, 6)
    x = FeatureMatrix(r.random((6, 4)))
    params = small_encoder(4)
    a = encode(params, g, x, np.random.default_rng(1), train_mode=True).data
    b = encode(params, g, x, np.random.default_rng(1), train_mode=True).data
    c = encode(params, g, x, np.random.default_rng(2), train_mode=True).data
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        encode(params, g, x, None, train_mode=True)


def test_full_input_dropout_is_structure_only():
    r = np.random.default_rng(6)
    g = random_graph(r, 5)
    params = small_encoder(3, dropout_input=1.0, dropout_attention=0.0)
    za = encode(params, g, FeatureMatrix(r.random((5, 3))), np.random.default_rng(0), True).data
    zb = encode(params, g, FeatureMatrix(r.random((5, 3))), np.random.default_rng(0), True).data
    np.testing.assert_array_equal(za, zb)


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(in_dim=3, hidden=10, heads=3)
    with pytest.raises(ValueError):
        EncoderConfig(in_dim=3, dropout_input=1.5)


def test_input_width_mismatch():
    params = small_encoder(3)
    with pytest.raises(ValueError):
        encode(params, build_graph(2, []), FeatureMatrix(np.ones((2, 4))))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_permutation_equivariance(n, seed):
    r = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if r.random() < 0.4]
    x = r.random((n, 3))
    perm = r.permutation(n)
    inv = np.argsort(perm)
    params = small_encoder(3, seed=seed % 1000)
    z = encode(params, build_graph(n, pairs), FeatureMatrix(x)).data
    g_p = build_graph(n, [(inv[i], inv[j]) for i, j in pairs])
    z_p = encode(params, g_p, FeatureMatrix(x[perm])).data
    np.testing.assert_allclose(z_p, z[perm], rtol=0, atol=1e-12)


def test_two_hop_locality():
    # path 0-1-2-3-4: node 0's embedding ignores nodes 3 and 4
    g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    r = np.random.default_rng(7)
    x = r.random((5, 3))
    params = small_encoder(3)
    z = encode(params, g, FeatureMatrix(x)).data
    x2 = x.copy()
    x2[3:] = r.random((2, 3)) * 10
    z2 = encode(params, g, FeatureMatrix(x2)).data
    np.testing.assert_array_equal(z[0], z2[0])
    assert not np.allclose(z[2], z2[2])


def test_checkpoint_round_trip(tmp_path):
    params = small_encoder(4, seed=3)
    path = tmp_path / "ck.bin"
    save_checkpoint(params, path)
    raw = path.read_bytes()
    assert raw[:8] == b"GAECOCKP"
    loaded = params_from_checkpoint(params.config, load_checkpoint(path))
    for a, b in zip(params.tensors(), loaded.tensors()):
        assert a.name == b.name
        assert a.data.tobytes() == b.data.tobytes()
    (tmp_path / "bad.bin").write_bytes(b"nope" * 8)
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad.bin")


def test_l2_output_rows_unit_norm():
    r = np.random.default_rng(8)
    g = random_graph(r, 7)
    params = small_encoder(3, l2_output=True)
    z = encode(params, g, FeatureMatrix(r.random((7, 3)))).data
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, atol=1e-12)
