import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from svmpert.models import (
    BinaryLinearModel,
    ClassProportions,
    Dataset,
    MulticlassLinearModel,
    margin_binary,
    pair_boundary_distance,
    predict_binary,
    predict_multi,
    predict_multi_batch,
)


class TestBinaryModel:
    def test_rejects_zero_weights(self):
        with pytest.raises(ValueError):
            BinaryLinearModel(np.zeros(3), 1.0)

    def test_predict_examples(self):
        assert predict_binary(BinaryLinearModel([1, -1], 0.0), [2, 1]) == 1
        assert predict_binary(BinaryLinearModel([1, 0], 0.0), [0, 0]) == 1  # sign(0) = +1
        assert predict_binary(BinaryLinearModel([3, 4], -5.0), [0, 0]) == -1

    def test_margin_examples(self):
        assert margin_binary(BinaryLinearModel([3, 4], -5.0), [3, 3]) == 16.0
        assert margin_binary(BinaryLinearModel([1, 0], 0.0), [0, 0]) == 0.0
        assert margin_binary(BinaryLinearModel([0, 2], 1.0), [0, -0.5]) == 0.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            predict_binary(BinaryLinearModel([1, 0], 0.0), [1, 2, 3])

    @given(
        st.lists(st.floats(-10, 10), min_size=2, max_size=6),
        st.floats(-5, 5),
        st.floats(0.001, 1000.0),
    )
    def test_scale_invariance(self, coords, b, alpha):
        w = np.array(coords + [1.0])  # guarantee a nonzero weight
        x = np.arange(len(w), dtype=float)
        base = BinaryLinearModel(w, b)
        scaled = BinaryLinearModel(alpha * w, alpha * b)
        assert predict_binary(base, x) == predict_binary(scaled, x)


class TestMulticlassModel:
    def test_rejects_duplicate_columns(self):
        with pytest.raises(ValueError):
            MulticlassLinearModel.from_columns([[1, 0], [1, 0], [0, 1]])

    def test_degenerate_two_class_flagged(self):
        m = MulticlassLinearModel.from_columns([[1, 0], [-1, 0]])
        assert m.degenerate
        assert not MulticlassLinearModel.from_columns([[1, 0], [0, 1], [1, 1]]).degenerate

    def test_predict_examples(self, toy_multi):
        assert predict_multi(toy_multi, [2, 1]) == 1
        assert predict_multi(toy_multi, [1, 1]) == 1  # tie -> lowest index
        assert predict_multi(toy_multi, [0, 3]) == 2

    def test_shift_invariance(self, toy_multi, rng):
        shift = rng.standard_normal(2)
        shifted = MulticlassLinearModel(toy_multi.weights + shift[:, None])
        for _ in range(50):
            x = rng.standard_normal(2)
            assert predict_multi(toy_multi, x) == predict_multi(shifted, x)

    def test_batch_matches_scalar(self, toy_multi, rng):
        X = rng.standard_normal((40, 2))
        batch = predict_multi_batch(toy_multi, X)
        assert all(batch[i] == predict_multi(toy_multi, X[i]) for i in range(40))


class TestBoundaryDistance:
    def test_examples(self, toy_multi):
        d12 = pair_boundary_distance(toy_multi, [2, 1], 1, 2)
        d13 = pair_boundary_distance(toy_multi, [2, 1], 1, 3)
        assert d12 == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert d13 == pytest.approx(math.sqrt(5), abs=1e-12)

    def test_zero_on_boundary(self, toy_multi):
        # (1, 1) lies on the class-1/class-2 hyperplane.
        assert pair_boundary_distance(toy_multi, [1, 1], 1, 2) == pytest.approx(0.0)

    def test_antisymmetry(self, toy_multi, rng):
        for _ in range(50):
            x = rng.standard_normal(2)
            for q, l in [(1, 2), (1, 3), (2, 3)]:
                assert pair_boundary_distance(toy_multi, x, q, l) == pytest.approx(
                    -pair_boundary_distance(toy_multi, x, l, q), abs=1e-12
                )

    def test_same_class_rejected(self, toy_multi):
        with pytest.raises(ValueError):
            pair_boundary_distance(toy_multi, [1, 0], 2, 2)

    def test_nonnegative_toward_other_classes(self, rng):
        # Strict check on clearly non-tied samples.
        model = MulticlassLinearModel(rng.standard_normal((4, 5)))
        for _ in range(200):
            x = rng.standard_normal(4)
            scores = model.weights.T @ x
            order = np.sort(scores)
            if order[-1] - order[-2] < 1e-9:
                continue
            q = int(np.argmax(scores)) + 1
            for l in range(1, 6):
                if l != q:
                    assert pair_boundary_distance(model, x, q, l) > 0.0


class TestDatasetAndProportions:
    def test_dataset_validation(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 3)), np.array([1]))
        with pytest.raises(ValueError):
            Dataset(np.zeros((0, 3)), np.array([], dtype=int))

    def test_restrict(self):
        d = Dataset(np.arange(6.0).reshape(3, 2), np.array([1, 2, 1]))
        sub = d.restrict(d.labels == 1)
        assert sub.n == 2 and sub.p == 2
        with pytest.raises(ValueError):
            d.restrict(d.labels == 7)

    def test_proportions_validation(self):
        ClassProportions(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            ClassProportions(np.array([0.6, 0.5]))
        with pytest.raises(ValueError):
            ClassProportions(np.array([-0.1, 1.1]))
