import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import adam_scalar, rmsprop_scalar
from agenet.errors import ConfigError, NumericalError
from agenet.optim import AdamConfig, AdamState, adam_step, baseline_step, make_optimizer


def quad_grad(w):
    return 2.0 * w


class TestAdam:
    def test_first_step(self):
        w = [np.zeros(1)]
        adam_step(w, [np.ones(1)], AdamState(), AdamConfig(eta=0.001))
        assert abs(w[0][0] - (-0.001 / (1 + 1e-8))) <= 1e-12

    def test_first_step_eps_inside_sqrt(self):
        w = [np.zeros(1)]
        adam_step(w, [np.ones(1)], AdamState(), AdamConfig(eta=0.001, eps_inside_sqrt=True))
        assert abs(w[0][0] - (-0.001 / math.sqrt(1 + 1e-8))) <= 1e-15

    def test_zero_gradient(self):
        w = [np.array([0.3, -2.0])]
        st_ = AdamState()
        adam_step(w, [np.zeros(2)], st_, AdamConfig())
        assert w[0].tolist() == [0.3, -2.0] and st_.t == 1

    def test_trajectory_matches_scalar_oracle(self):
        w = [np.array([1.0])]
        state, cfg = AdamState(), AdamConfig(eta=0.001)
        ours = []
        for _ in range(10):
            adam_step(w, [quad_grad(w[0])], state, cfg)
            ours.append(float(w[0][0]))
        ref = adam_scalar(1.0, quad_grad, 10)
        assert max(abs(a - b) for a, b in zip(ours, ref)) <= 1e-12

    @given(st.lists(st.floats(-1e3, 1e3).filter(lambda g: abs(g) > 1e-6), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_direction_opposes_moment(self, gs):
        g = np.array(gs)
        w = [np.zeros_like(g)]
        state = AdamState()
        adam_step(w, [g], state, AdamConfig())
        assert np.array_equal(np.sign(w[0]), -np.sign(state.m[0]))

    @pytest.mark.parametrize("g", [1e-3, 0.5, 1.0, 7.0, 1e4])
    def test_scale_aware_first_step(self, g):
        w = [np.zeros(1)]
        adam_step(w, [np.array([g])], AdamState(), AdamConfig(eta=0.01))
        assert abs(abs(w[0][0]) - 0.01) <= 0.01 * 1e-8 / g + 1e-15

    def test_nan_gradient(self):
        state = AdamState()
        with pytest.raises(NumericalError, match="step 1"):
            adam_step([np.zeros(2)], [np.array([0.0, np.nan])], state, AdamConfig())
        assert state.t == 0

    def test_bad_config(self):
        with pytest.raises(ConfigError):
            AdamConfig(eta=0)
        with pytest.raises(ConfigError):
            AdamConfig(beta1=1.0)


class TestBaselines:
    def test_sgd_hand(self):
        w = [np.array([1.0])]
        baseline_step(w, [np.array([2.0])], "sgd", 0.1)
        assert w[0][0] == pytest.approx(0.8, abs=1e-15)

    def test_sgd_zero_gradient(self):
        w = [np.array([1.0, 2.0])]
        baseline_step(w, [np.zeros(2)], "sgd", 0.1)
        assert w[0].tolist() == [1.0, 2.0]

    @pytest.mark.parametrize("g", [-3.0, 0.01, 2.0, 100.0])
    def test_rmsprop_first_step(self, g):
        w, state = [np.zeros(1)], []
        baseline_step(w, [np.array([g])], "rmsprop", 0.01, state, rho=0.9)
        expect = -0.01 * g / (abs(g) * math.sqrt(1 - 0.9) + 1e-8)
        assert w[0][0] == pytest.approx(expect, rel=1e-12)

    def test_rmsprop_trajectory(self):
        w, state = [np.array([1.0])], []
        ours = []
        for _ in range(10):
            baseline_step(w, [quad_grad(w[0])], "rmsprop", 0.01, state)
            ours.append(float(w[0][0]))
        ref = rmsprop_scalar(1.0, quad_grad, 10, 0.01)
        assert max(abs(a - b) for a, b in zip(ours, ref)) <= 1e-12

    def test_unknown_variant(self):
        with pytest.raises(ConfigError):
            baseline_step([np.zeros(1)], [np.zeros(1)], "adagrad", 0.1)
        with pytest.raises(ConfigError):
            make_optimizer("adagrad", 0.1)


@pytest.mark.parametrize("name", ["sgd", "rmsprop", "adam"])
@pytest.mark.parametrize("lr", [1e-3, 1e-2])
@pytest.mark.parametrize("w0", [1.0, -0.7, 3.0])
def test_all_optimizers_decrease_quadratic(name, lr, w0):
    opt = make_optimizer(name, lr)
    w = [np.array([w0])]
    prev = w0**2
    for _ in range(20):
        opt.step(w, [quad_grad(w[0])])
        cur = float(w[0][0] ** 2)
        assert cur < prev
        prev = cur


def test_optimizer_reports_step():
    opt = make_optimizer("sgd", 0.1)
    opt.step([np.zeros(1)], [np.ones(1)])
    with pytest.raises(NumericalError, match="optimizer step 2"):
        opt.step([np.zeros(1)], [np.array([np.inf])])
