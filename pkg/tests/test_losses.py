import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from agenet.errors import DimensionError, ValidationError
from agenet.layers import softmax
from agenet.losses import cross_entropy, one_hot, predict_prob


def test_perfect_prediction():
    y = one_hot([0, 3, 9], 10)
    loss, _ = cross_entropy(y.copy(), y)
    assert 0.0 <= loss <= 1e-11


@pytest.mark.parametrize("label", range(10))
def test_uniform_is_ln10(label):
    loss, _ = cross_entropy(np.full((1, 10), 0.1), one_hot([label], 10))
    assert abs(loss - 2.302585093) <= 1e-9
    assert abs(loss - math.log(10)) <= 1e-12


def test_sum_vs_mean():
    p = np.full((4, 10), 0.1)
    y = one_hot([0, 1, 2, 3], 10)
    s, gs = cross_entropy(p, y, "sum")
    m, gm = cross_entropy(p, y, "mean")
    assert s == pytest.approx(4 * m) and np.allclose(gs, 4 * gm)


def test_gradient_rows_sum_to_zero(rng):
    z = rng.normal(scale=3, size=(64, 10))
    _, g = cross_entropy(softmax(z), one_hot(rng.integers(0, 10, 64), 10))
    assert np.max(np.abs(g.sum(axis=1))) <= 1e-10


def test_clamp_keeps_loss_finite():
    p = np.array([[1.0, 0.0]])
    loss, _ = cross_entropy(p, one_hot([1], 2))
    assert loss == pytest.approx(-math.log(1e-12))


def test_not_one_hot():
    with pytest.raises(ValidationError):
        cross_entropy(np.full((1, 3), 1 / 3), np.array([[0.5, 0.5, 0.0]]))
    with pytest.raises(ValidationError):
        cross_entropy(np.full((1, 3), 1 / 3), np.array([[1.0, 1.0, 0.0]]))


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        cross_entropy(np.full((2, 3), 1 / 3), one_hot([0], 3))


def test_label_out_of_range():
    with pytest.raises(ValidationError):
        one_hot([10], 10)


class TestPredictProb:
    def test_selects_label(self):
        p = np.full((1, 10), 0.05)
        p[0, 4] = 0.55
        assert predict_prob(p, one_hot([4], 10))[0] == 0.55

    def test_uniform(self):
        assert np.allclose(predict_prob(np.full((3, 10), 0.1), one_hot([0, 5, 9], 10)), 0.1)

    def test_index_oracle(self, rng):
        p = softmax(rng.normal(size=(20, 10)))
        lab = rng.integers(0, 10, 20)
        assert np.array_equal(predict_prob(p, one_hot(lab, 10)), p[np.arange(20), lab])


@given(arrays(np.float64, (3, 6), elements=st.floats(-30, 30)), st.lists(st.integers(0, 5), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_loss_non_negative(z, labels):
    loss, _ = cross_entropy(softmax(z), one_hot(labels, 6))
    assert loss >= 0.0
