import numpy as np
import pytest

from graspdec import LdaModel, MulticlassLdaModel, fit_lda, fit_multiclass_lda
from graspdec.errors import InvalidConfig, SingleClassInput, SingularCovariance
from graspdec.lda import pooled_within_class_cov


def two_gaussians(rng, n, mu0, mu1, cov=None, d=None):
    d = d if d is not None else len(mu0)
    cov = np.eye(d) if cov is None else cov
    x0 = rng.multivariate_normal(mu0, cov, n)
    x1 = rng.multivariate_normal(mu1, cov, n)
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n, dtype=int), np.ones(n, dtype=int)])
    return x, y


class TestFitLda:
    def test_1d_clusters(self):
        rng = np.random.default_rng(0)
        x, y = two_gaussians(rng, 2000, [-1.0], [1.0])
        model = fit_lda(x, y, shrinkage=0.0)
        assert model.weights[0] > 0
        assert model.bias == pytest.approx(0.0, abs=0.05)
        # boundary at 0: points on either side classify accordingly
        assert model.predict(np.array([[0.8]]))[0] == 1
        assert model.predict(np.array([[-0.8]]))[0] == 0

    def test_single_class_rejected(self):
        x = np.random.default_rng(1).standard_normal((10, 3))
        with pytest.raises(SingleClassInput):
            fit_lda(x, np.ones(10, dtype=int))

    def test_equal_means_near_chance(self):
        rng = np.random.default_rng(2)
        x, y = two_gaussians(rng, 1000, [0.0, 0.0], [0.0, 0.0])
        model = fit_lda(x, y)
        xt, yt = two_gaussians(rng, 1000, [0.0, 0.0], [0.0, 0.0])
        acc = np.mean(model.predict(xt) == yt)
        assert abs(acc - 0.5) <= 0.1

    def test_closed_form_direction(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 4))
        cov = a @ a.T + 4 * np.eye(4)
        mu0 = np.array([0.0, 0.0, 0.0, 0.0])
        mu1 = np.array([1.0, -0.5, 0.25, 2.0])
        x, y = two_gaussians(rng, 5000, mu0, mu1, cov)
        model = fit_lda(x, y, shrinkage=0.0)
        ref = np.linalg.solve(cov, mu1 - mu0)
        cos = model.weights @ ref / (np.linalg.norm(model.weights)
                                     * np.linalg.norm(ref))
        assert cos >= 0.99

    def test_class_means_recorded(self):
        rng = np.random.default_rng(4)
        x, y = two_gaussians(rng, 200, [-2.0, 0.0], [2.0, 1.0])
        model = fit_lda(x, y)
        np.testing.assert_allclose(model.class_means[0], x[y == 0].mean(axis=0))
        np.testing.assert_allclose(model.class_means[1], x[y == 1].mean(axis=0))

    def test_scale_invariant_predictions(self):
        rng = np.random.default_rng(5)
        x, y = two_gaussians(rng, 400, [-1.0, 0.5], [1.0, -0.5])
        base = fit_lda(x, y).predict(x)
        for c in (0.01, 100.0):
            scaled = fit_lda(c * x, y).predict(c * x)
            np.testing.assert_array_equal(scaled, base)

    def test_singular_covariance_at_zero_shrinkage(self):
        # rank-deficient: feature 1 duplicates feature 0
        rng = np.random.default_rng(6)
        base = rng.standard_normal(40)
        x = np.column_stack([base, base])
        y = (np.arange(40) % 2).astype(int)
        with pytest.raises(SingularCovariance):
            fit_lda(x, y, shrinkage=0.0)
        fit_lda(x, y, shrinkage=0.05)  # shrinkage rescues it

    def test_shrinkage_range_validated(self):
        x = np.random.default_rng(7).standard_normal((20, 2))
        y = (np.arange(20) % 2).astype(int)
        with pytest.raises(InvalidConfig):
            fit_lda(x, y, shrinkage=-0.1)
        with pytest.raises(InvalidConfig):
            fit_lda(x, y, shrinkage=1.1)

    def test_empirical_priors_shift_bias(self):
        rng = np.random.default_rng(8)
        x, y = two_gaussians(rng, 500, [-1.0], [1.0])
        eq = fit_lda(x, y)
        skew = fit_lda(x, y, priors=(0.9, 0.1))
        assert skew.bias < eq.bias  # rarer positive class moves boundary up
        np.testing.assert_allclose(skew.weights, eq.weights)

    def test_score_tie_predicts_inactive(self):
        model = LdaModel(weights=np.array([1.0]), bias=0.0,
                         class_means=np.array([[-1.0], [1.0]]), shrinkage=0.0)
        assert model.predict(np.array([[0.0]]))[0] == 0


class TestPooledCov:
    def test_matches_manual_computation(self):
        rng = np.random.default_rng(9)
        x, y = two_gaussians(rng, 50, [0.0, 0.0], [3.0, 3.0])
        pooled = pooled_within_class_cov(x, y)
        parts = []
        for k in (0, 1):
            c = x[y == k] - x[y == k].mean(axis=0)
            parts.append(c.T @ c)
        manual = (parts[0] + parts[1]) / len(x)
        np.testing.assert_allclose(pooled, manual, atol=1e-12)


class TestMulticlass:
    def _clusters(self, rng, n, spread=0.3):
        centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
        x = np.vstack([c + spread * rng.standard_normal((n, 2)) for c in centers])
        y = np.repeat([0, 1, 2], n)
        return x, y

    def test_separated_clusters(self):
        rng = np.random.default_rng(10)
        x, y = self._clusters(rng, 100)
        model = fit_multiclass_lda(x, y, n_classes=3)
        assert np.mean(model.predict(x) == y) >= 0.95

    def test_missing_class_rejected(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((20, 2))
        y = np.repeat([0, 1], 10)
        with pytest.raises(SingleClassInput):
            fit_multiclass_lda(x, y, n_classes=3)

    def test_uniform_features_chance_level(self):
        rng = np.random.default_rng(12)
        x = rng.uniform(size=(600, 8))
        y = np.repeat([0, 1, 2], 200)
        model = fit_multiclass_lda(x, y, n_classes=3)
        xt = rng.uniform(size=(600, 8))
        yt = np.repeat([0, 1, 2], 200)
        acc = np.mean(model.predict(xt) == yt)
        assert abs(acc - 1.0 / 3.0) <= 0.1

    def test_argmax_tie_breaks_low(self):
        flat = LdaModel(weights=np.zeros(2), bias=0.0,
                        class_means=np.zeros((2, 2)), shrinkage=0.0)
        model = MulticlassLdaModel(per_class=(flat, flat, flat))
        assert model.predict(np.zeros((3, 2))).tolist() == [0, 0, 0]

    def test_scores_shape(self):
        rng = np.random.default_rng(13)
        x, y = self._clusters(rng, 30)
        model = fit_multiclass_lda(x, y, n_classes=3)
        assert model.scores(x).shape == (90, 3)
