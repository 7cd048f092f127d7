import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topiclink.errors import (DegenerateLabels, SamplingError, StratificationError,
                              ValidationError)
from topiclink.learn import (Dataset, Metrics, Model, baseline_majority, baseline_random,
                             balanced_sample, kfold, load_model, logistic_gradient,
                             logistic_loss, metrics, predict, save_model, standardization,
                             stratified_folds, train, training_loss)


def finite_difference(theta, X, y, lam, h=1e-6):
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (logistic_loss(theta + e, X, y, lam) - logistic_loss(theta - e, X, y, lam)) / (2 * h)
    return g


def gradient_rel_error(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(5, 51)), int(rng.integers(1, 21))
    X = rng.normal(size=(n, d))
    y = (rng.random(n) < 0.5).astype(float)
    theta = rng.normal(size=d + 1)
    lam = float(rng.uniform(0, 1))
    g = logistic_gradient(theta, X, y, lam)
    fd = finite_difference(theta, X, y, lam)
    return np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)


def blobs(n, seed, gap=10.0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(scale=0.5, size=(n, 2)) + gap * y[:, None]
    return Dataset(X, y)


class TestGradient:
    @pytest.mark.parametrize("seed", range(20))
    def test_finite_difference(self, seed):
        assert gradient_rel_error(seed) <= 1e-6


class TestTrain:
    def test_symmetric_example(self):
        m = train(Dataset([[-1.0], [1.0]], [0, 1]), lam=0.1)
        assert predict(m, [0.0]) == pytest.approx(0.5, abs=1e-9)
        assert m.converged

    def test_single_class(self):
        with pytest.raises(DegenerateLabels):
            train(Dataset([[0.0], [1.0]], [1, 1]))

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            train(Dataset([[0.0], [np.inf]], [0, 1]))

    def test_too_few_rows(self):
        with pytest.raises(ValidationError):
            train(Dataset([[0.0]], [1]))

    @pytest.mark.parametrize("seed", range(5))
    def test_start_independent(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(80, 4))
        y = (X[:, 0] + rng.normal(size=80) > 0).astype(int)
        d = Dataset(X, y)
        a = train(d, lam=0.01)
        b = train(d, lam=0.01, init=rng.normal(size=5))
        assert abs(training_loss(a, d) - training_loss(b, d)) <= 1e-6

    def test_gradient_at_optimum(self):
        d = blobs(60, 0, gap=1.0)
        m = train(d, lam=0.05)
        X = (d.X - m.mean) / m.scale
        g = logistic_gradient(np.append(m.weights, m.intercept), X, d.y.astype(float), 0.05)
        assert np.linalg.norm(g) <= 1e-8

    def test_deterministic(self):
        d = blobs(50, 3, gap=1.0)
        a, b = train(d), train(d)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert a.intercept == b.intercept


class TestPredict:
    def model(self, w, b=0.0):
        w = np.asarray(w, dtype=float)
        return Model(tuple(f"x{i}" for i in range(w.size)), w, b, 0.0,
                     np.zeros(w.size), np.ones(w.size))

    def test_zero_weights(self):
        np.testing.assert_array_equal(predict(self.model([0, 0]), np.eye(2) * 7), [0.5, 0.5])

    def test_clamped(self):
        m = self.model([1.0])
        assert predict(m, [1e6]) == 1 - 1e-12
        assert predict(m, [-1e6]) == 1e-12

    def test_width_mismatch(self):
        with pytest.raises(ValidationError):
            predict(self.model([1.0]), [1.0, 2.0])

    @given(st.lists(st.floats(0.01, 5), min_size=1, max_size=5), st.floats(-3, 3),
           st.floats(0, 2))
    def test_monotone(self, w, x, dx):
        m = self.model(w)
        row = np.full(len(w), x)
        up = row.copy()
        up[0] += dx
        assert predict(m, up) >= predict(m, row)


class TestMetrics:
    def test_example(self):
        m = metrics([0.9, 0.9, 0.1, 0.1], [1, 0, 0, 1])
        assert (m.accuracy, m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5, 0.5)

    def test_perfect(self):
        m = metrics([1, 0, 1], [1, 0, 1])
        assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)

    def test_all_negative(self):
        m = metrics([0, 0, 0], [1, 0, 1])
        assert m.recall == 0 and m.f1 == 0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            metrics([0.1], [1, 0])

    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=1, max_size=50))
    def test_identities(self, rows):
        p, y = map(np.array, zip(*rows))
        m = metrics(p, y)
        assert m.tp + m.fp + m.tn + m.fn == len(rows)
        assert m.accuracy == (m.tp + m.tn) / len(rows)
        assert m.precision == (m.tp / (m.tp + m.fp) if m.tp + m.fp else 0.0)
        assert m.recall == (m.tp / (m.tp + m.fn) if m.tp + m.fn else 0.0)
        pr = m.precision + m.recall
        assert m.f1 == (2 * m.precision * m.recall / pr if pr else 0.0)

    def test_average(self):
        a = Metrics.from_confusion(1, 0, 1, 0)
        b = Metrics.from_confusion(0, 1, 0, 1)
        avg = Metrics.average([a, b])
        assert avg.accuracy == 0.5 and (avg.tp, avg.fp, avg.tn, avg.fn) == (1, 1, 1, 1)


class TestBaselines:
    def test_majority(self):
        m = baseline_majority([1] * 6 + [0] * 4)
        assert (m.accuracy, m.recall, m.precision) == (0.6, 1.0, 0.6)

    def test_majority_balanced(self):
        assert baseline_majority([0, 1] * 5).accuracy == 0.5

    def test_majority_negative(self):
        m = baseline_majority([0, 0, 1])
        assert m.accuracy == pytest.approx(2 / 3) and m.recall == 0

    def test_random_precision_tracks_label_rate(self):
        y = (np.random.default_rng(0).random(20000) < 0.3).astype(int)
        m = baseline_random(y, 0.5, seed=1)
        assert m.tp + m.fp == 10000
        assert abs(m.precision - y.mean()) <= 3 * np.sqrt(0.3 * 0.7 / 10000)

    def test_empty(self):
        with pytest.raises(ValidationError):
            baseline_majority([])


class TestSampling:
    def pool(self, pos, neg):
        return np.arange(pos + neg), np.array([1] * pos + [0] * neg)

    def test_split(self):
        items, labels = balanced_sample(*self.pool(100, 100), 100, seed=0)
        assert labels.sum() == 50 and len(set(items.tolist())) == 100

    def test_deficient(self):
        with pytest.raises(SamplingError) as exc:
            balanced_sample(*self.pool(30, 100), 100, seed=0)
        assert exc.value.deficient_class == "positive"

    def test_deterministic(self):
        a = balanced_sample(*self.pool(80, 90), 60, seed=5)
        b = balanced_sample(*self.pool(80, 90), 60, seed=5)
        np.testing.assert_array_equal(a[0], b[0])

    def test_odd_size(self):
        with pytest.raises(ValidationError):
            balanced_sample(*self.pool(10, 10), 5, seed=0)


class TestCrossValidation:
    def test_blobs(self):
        assert kfold(blobs(200, 1), k=10, seed=0).mean.accuracy == 1.0

    def test_null(self):
        rng = np.random.default_rng(4)
        d = Dataset(rng.normal(size=(2000, 5)), np.arange(2000) % 2)
        acc = kfold(d, k=10, seed=4).mean.accuracy
        assert 0.45 <= acc <= 0.55

    def test_deterministic(self):
        d = blobs(100, 2, gap=1.0)
        assert kfold(d, 5, seed=9).mean == kfold(d, 5, seed=9).mean
        assert kfold(d, 5, seed=9, threads=3).mean == kfold(d, 5, seed=9).mean

    def test_folds_stratified(self):
        y = np.array([1] * 30 + [0] * 70)
        fold = stratified_folds(y, 10, seed=0)
        for i in range(10):
            assert y[fold == i].sum() == 3 and (fold == i).sum() == 10

    def test_small_class(self):
        with pytest.raises(StratificationError):
            stratified_folds([1, 1, 0, 0, 0], 3, seed=0)

    def test_standardization_no_leak(self):
        d = blobs(100, 5, gap=1.0)
        fold = stratified_folds(d.y, 5, seed=0)
        train_rows = fold != 0
        before = standardization(d.X[train_rows])
        X = d.X.copy()
        X[~train_rows] *= 1e6
        after = standardization(X[train_rows])
        np.testing.assert_array_equal(before[0], after[0])
        np.testing.assert_array_equal(before[1], after[1])
        r1 = kfold(d, 5, seed=0)
        m1 = r1.models[0]
        r2 = kfold(Dataset(X, d.y), 5, seed=0)
        np.testing.assert_array_equal(m1.mean, r2.models[0].mean)
        np.testing.assert_array_equal(m1.scale, r2.models[0].scale)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        m = train(blobs(40, 7, gap=1.0), lam=0.2)
        save_model(m, tmp_path / "m.tsv")
        back = load_model(tmp_path / "m.tsv")
        np.testing.assert_array_equal(back.weights, m.weights)
        np.testing.assert_array_equal(back.mean, m.mean)
        np.testing.assert_array_equal(back.scale, m.scale)
        assert (back.intercept, back.lam, back.names) == (m.intercept, m.lam, m.names)
