import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agenet.data.bins import ADIENCE_BINS, TRAINING_BINS, BinScheme
from agenet.errors import DimensionError, ValidationError
from agenet.metrics import MidpointTable, confusion_matrix, cross_bin_eval, evaluate, expected_age


class TestEvaluate:
    def test_all_correct(self):
        acc, cm = evaluate(np.eye(4), [0, 1, 2, 3])
        assert acc == 1.0 and np.array_equal(cm, np.eye(4, dtype=int))

    def test_hand_count(self):
        probs = np.array([[0.9, 0.1], [0.2, 0.8], [0.3, 0.7]])
        acc, cm = evaluate(probs, [0, 0, 1])
        assert acc == pytest.approx(2 / 3) and cm.tolist() == [[1, 1], [0, 1]]

    @given(st.integers(0, 2**32 - 1), st.integers(1, 60))
    @settings(max_examples=40, deadline=None)
    def test_conservation(self, seed, n):
        r = np.random.default_rng(seed)
        lab = r.integers(0, 10, n)
        acc, cm = evaluate(r.random((n, 10)), lab)
        assert cm.sum() == n and np.array_equal(cm.sum(axis=1), np.bincount(lab, minlength=10))
        assert acc == np.trace(cm) / n and (cm >= 0).all()

    def test_errors(self):
        with pytest.raises(DimensionError):
            evaluate(np.eye(3), [0, 1])
        with pytest.raises(ValidationError):
            confusion_matrix([0, 5], [0, 1], 3)


class TestMidpoints:
    def test_training_table(self):
        t = MidpointTable.from_scheme(TRAINING_BINS)
        assert t.values.tolist() == [1, 4.5, 9.5, 15, 20, 24.5, 30, 39, 52, 70]

    def test_forty_to_forty_five(self):
        t = MidpointTable.from_scheme(BinScheme([(0, 39), (40, 45), (46, None)]), open_age=80)
        assert t.values[1] == 42.5
        assert expected_age(np.array([[0.0, 1.0, 0.0]]), t)[0] == 42.5

    def test_one_hot_training_bin(self):
        t = MidpointTable.from_scheme(TRAINING_BINS)
        assert expected_age(np.eye(10)[[4]], t)[0] == 20.0

    def test_uniform(self):
        t = MidpointTable.from_scheme(TRAINING_BINS)
        assert expected_age(np.full((1, 10), 0.1), t)[0] == pytest.approx(t.values.mean(), abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_convex(self, seed):
        t = MidpointTable.from_scheme(TRAINING_BINS)
        ages = expected_age(np.random.default_rng(seed).dirichlet(np.ones(10) * 0.3, size=20), t)
        assert np.all(ages >= 1.0 - 1e-9) and np.all(ages <= 70.0 + 1e-9)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            MidpointTable([1, 1, 2])
        with pytest.raises(ValidationError):
            MidpointTable.from_scheme(TRAINING_BINS, open_age=50)
        with pytest.raises(DimensionError):
            expected_age(np.eye(3), MidpointTable.from_scheme(TRAINING_BINS))


class TestCrossBin:
    def test_exact(self):
        assert cross_bin_eval([30.0], [4], ADIENCE_BINS)["exact"] == 1.0

    def test_adjacent_and_gap(self):
        out = cross_bin_eval([18.0, 22.0], [4, 4], ADIENCE_BINS)
        assert out == {"n": 2, "exact": 0.0, "one_off": 0.5}

    def test_open_bin(self):
        assert cross_bin_eval([95.0, 55.0], [7, 7], ADIENCE_BINS) == {"n": 2, "exact": 0.5, "one_off": 0.5}

    def test_perfect_midpoints(self):
        t = MidpointTable.from_scheme(ADIENCE_BINS)
        out = cross_bin_eval(t.values, np.arange(8), ADIENCE_BINS)
        assert out["exact"] == out["one_off"] == 1.0

    def test_label_range(self):
        with pytest.raises(ValidationError):
            cross_bin_eval([10.0], [8], ADIENCE_BINS)

    @given(st.lists(st.tuples(st.floats(0, 100), st.integers(0, 7)), min_size=1, max_size=50))
    @settings(max_examples=60, deadline=None)
    def test_exact_le_one_off(self, rows):
        ages, labels = zip(*rows)
        out = cross_bin_eval(list(ages), list(labels), ADIENCE_BINS)
        assert 0 <= out["exact"] <= out["one_off"] <= 1
