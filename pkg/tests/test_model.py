import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agenet.errors import ConfigError, DimensionError, ShapeError
from agenet.gradcheck import numeric_grad, rel_error
from agenet.losses import cross_entropy, one_hot
from agenet.model import ModelConfig, Network, agenet_default, analytic_param_count, build, feature_maps, param_count
from agenet.tensor import make_rng

TOY = ModelConfig(conv_layers=1, conv_filters=(2,), conv_strides=(1,), pool_layers=(1,), dropout_layers=(),
                  dropout_rate=0.0, dense_units=(10,), input_shape=(3, 8, 8))


def shape_oracle(cfg):
    """Independent walk of the stack: ceil for same-padded strides, floor for pools."""
    c, h, w = cfg.input_shape
    for i in range(1, cfg.conv_layers + 1):
        s = cfg.conv_strides[i - 1]
        c, h, w = cfg.conv_filters[i - 1], math.ceil(h / s), math.ceil(w / s)
        if i in cfg.pool_layers:
            h, w = h // 2, w // 2
    return c * h * w


@pytest.fixture(scope="module")
def agenet():
    return build(agenet_default(), make_rng(0))


class TestAgenetDefault:
    def test_published_values(self):
        cfg = agenet_default()
        assert cfg.conv_filters == (64, 128, 256, 512, 1024)
        assert cfg.dropout_rate == 0.187
        assert cfg.dense_units == (256, 128, 10)
        assert cfg.num_classes == 10
        assert cfg.conv_strides == (2, 1, 1, 1, 1)
        assert cfg.pool_layers == (1, 2, 3, 4) and cfg.dropout_layers == (1, 2, 3, 4, 5)

    def test_flatten_width(self, agenet):
        flat = [s for s in agenet.shapes if s[0] == "flatten"][0]
        assert flat[2] == (65536,) == (shape_oracle(agenet_default()),)
        assert flat[1] == (1024, 8, 8)

    def test_conv1_params(self, agenet):
        assert agenet.layers[0].params["W"].size + agenet.layers[0].params["b"].size == 1792

    def test_param_count(self, agenet):
        hand = sum((9 * ci + 1) * co for ci, co in zip((3, 64, 128, 256, 512), (64, 128, 256, 512, 1024)))
        hand += (65536 + 1) * 256 + (256 + 1) * 128 + (128 + 1) * 10
        assert hand == 23_082_250
        assert param_count(agenet) == analytic_param_count(agenet_default()) == hand

    def test_feature_maps_layer1(self, agenet):
        img = np.random.default_rng(1).random((3, 256, 256)).astype(np.float32)
        maps = feature_maps(agenet, img, 1)
        assert len(maps) == 64 and all(m.shape == (128, 128) and m.dtype == np.uint8 for m in maps)

    def test_feature_maps_zero_input(self, agenet):
        maps = feature_maps(agenet, np.zeros((3, 256, 256), np.float32), 2)
        assert len(maps) == 128 and not any(m.any() for m in maps)

    @pytest.mark.parametrize("layer", [0, 6])
    def test_feature_maps_range(self, agenet, layer):
        with pytest.raises(ShapeError):
            feature_maps(agenet, np.zeros((3, 256, 256), np.float32), layer)


def test_dense_param_count():
    cfg = ModelConfig(conv_layers=0, conv_filters=(), conv_strides=(), pool_layers=(), dropout_layers=(),
                      dense_units=(10,), input_shape=(128, 1, 1))
    assert param_count(build(cfg, make_rng(0))) == 1290


def test_empty_network():
    assert param_count(Network(TOY, [], [], np.float32, [])) == 0
    assert param_count(None) == 0


def test_toy_builds_and_runs():
    net = build(TOY, make_rng(0))
    probs, _ = net.forward(np.random.default_rng(0).random((32, 3, 8, 8)))
    assert probs.shape == (32, 10)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_underflow_names_layer():
    cfg = ModelConfig(conv_layers=3, conv_filters=(2, 2, 2), conv_strides=(1, 1, 1), pool_layers=(1, 2, 3),
                      dropout_layers=(), input_shape=(1, 4, 4), dense_units=(10,))
    with pytest.raises(ConfigError, match="conv3.pool"):
        build(cfg, make_rng(0))


def test_invalid_configs():
    with pytest.raises(ConfigError):
        ModelConfig(conv_layers=2)
    with pytest.raises(ConfigError):
        ModelConfig(pool_layers=(6,))
    with pytest.raises(ConfigError):
        ModelConfig(dropout_rate=1.0)


def test_input_shape_checked():
    with pytest.raises(DimensionError):
        build(TOY, make_rng(0)).forward(np.zeros((1, 3, 9, 9)))


def test_eval_forward_deterministic():
    cfg = ModelConfig(conv_layers=1, conv_filters=(4,), conv_strides=(1,), pool_layers=(1,), dropout_layers=(1,),
                      input_shape=(3, 8, 8), dense_units=(10,))
    net = build(cfg, make_rng(3))
    x = np.random.default_rng(0).random((5, 3, 8, 8))
    assert net.forward(x)[0].tobytes() == net.forward(x)[0].tobytes()


def test_initial_loss_near_ln_k():
    # averaged over initialisations; single nets scatter widely around ln k
    r = np.random.default_rng(0)
    losses = []
    for seed in range(20):
        net = build(TOY, make_rng(seed))
        x = r.random((64, 3, 8, 8))
        probs, _ = net.forward(x)
        losses.append(cross_entropy(probs.astype(np.float64), one_hot(r.integers(0, 10, 64), 10))[0])
    assert abs(np.mean(losses) - math.log(10)) <= 0.2 * math.log(10)


def _toy_f64(seed=0):
    net = build(TOY, make_rng(seed), np.float64)
    r = np.random.default_rng(seed + 100)
    return net, r.random((4, 3, 8, 8)), one_hot(r.integers(0, 10, 4), 10)


@pytest.mark.parametrize("seed", range(5))
def test_network_gradient_spot_check(seed):
    net, x, y = _toy_f64(seed)
    probs, caches = net.forward(x)
    grads = net.backward(caches, cross_entropy(probs, y)[1])
    params = net.parameters()
    assert [g.shape for g in grads] == [p.shape for p in params]
    r = np.random.default_rng(seed)

    def loss():
        return cross_entropy(net.forward(x)[0], y)[0]

    sizes = np.array([p.size for p in params])
    for _ in range(10):
        k = int(r.choice(len(params), p=sizes / sizes.sum()))
        i = int(r.integers(params[k].size))
        num = numeric_grad(loss, params[k], 1e-5, indices=[i]).ravel()[i]
        ana = grads[k].ravel()[i]
        assert rel_error([ana], [num]) <= 1e-4 or abs(ana - num) <= 1e-9


def test_zero_upstream_gives_zero_grads():
    net, x, _ = _toy_f64()
    _, caches = net.forward(x)
    assert all(not g.any() for g in net.backward(caches, np.zeros((4, 10))))


def test_gradient_linearity():
    net, x, y = _toy_f64()
    probs, caches = net.forward(x)
    g = cross_entropy(probs, y)[1]
    g1 = net.backward(caches, g)
    g2 = net.backward(caches, 2 * g)
    assert all(np.allclose(b, 2 * a, rtol=1e-12, atol=0) for a, b in zip(g1, g2))


def test_config_text_roundtrip():
    cfg = agenet_default()
    assert ModelConfig.from_text(cfg.to_text() + "#seed=42\nunknown=1\n") == cfg


@given(st.integers(1, 3), st.integers(8, 40), st.lists(st.integers(1, 2), min_size=3, max_size=3),
       st.sets(st.integers(1, 3)), st.sampled_from(["same", "valid"]))
@settings(max_examples=40, deadline=None)
def test_shape_chain(n, size, strides, pools, padding):
    cfg = ModelConfig(conv_layers=n, conv_filters=(2,) * n, conv_strides=strides[:n],
                      pool_layers=tuple(p for p in pools if p <= n), dropout_layers=(), padding=padding,
                      input_shape=(1, size, size), dense_units=(3,))
    try:
        net = build(cfg, make_rng(0))
    except ConfigError:
        return
    for (_, _, out), (_, nxt, _) in zip(net.shapes, net.shapes[1:]):
        assert out == nxt
    assert net.shapes[-1][2] == (3,)
    assert param_count(net) == analytic_param_count(cfg)
    if padding == "same":
        assert net.shapes[[s[0] for s in net.shapes].index("flatten")][2] == (shape_oracle(cfg),)
