"""Linear discriminant analysis on feature vectors.

Binary Fisher LDA with shrinkage of the pooled within-class covariance,
plus a one-vs-rest wrapper for multiclass problems.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidConfig,
    SingleClassInput,
    SingularCovariance,
)

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class LdaModel:
    """Binary linear discriminant: predict 1 iff w.x + b > 0."""

    weights: np.ndarray
    bias: float
    class_means: np.ndarray  # (2, n_features), row k is the class-k mean
    shrinkage: float = 0.0
    n_features: int = field(init=False)

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if weights.ndim != 1 or weights.size == 0:
            raise InvalidConfig("weights must be a non-empty vector")
        if not np.isfinite(weights).all() or not np.isfinite(self.bias):
            raise InvalidConfig("discriminant parameters must be finite")
        means = np.ascontiguousarray(self.class_means, dtype=np.float64)
        if means.shape != (2, weights.size):
            raise DimensionMismatch(
                f"class means shape {means.shape}, expected (2, {weights.size})"
            )
        if not 0 <= self.shrinkage <= 1:
            raise InvalidConfig("shrinkage must lie in [0, 1]")
        weights.setflags(write=False)
        means.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "class_means", means)
        object.__setattr__(self, "n_features", weights.size)

    def score(self, features: np.ndarray) -> np.ndarray:
        """Signed distance-like score, one per row of ``features``."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"{features.shape[1]} features, model expects {self.n_features}"
            )
        return features @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Binary labels; a score exactly on the boundary maps to 0."""
        return (self.score(features) > 0).astype(np.uint8)


@dataclass(frozen=True)
class MulticlassLdaModel:
    """One-vs-rest ensemble; predicted class is the highest-scoring one."""

    per_class: tuple[LdaModel, ...]

    def __post_init__(self):
        per_class = tuple(self.per_class)
        if len(per_class) < 2:
            raise InvalidConfig("need at least two class discriminants")
        dims = {m.n_features for m in per_class}
        if len(dims) > 1:
            raise DimensionMismatch(f"discriminants disagree in size: {dims}")
        object.__setattr__(self, "per_class", per_class)

    @property
    def n_classes(self) -> int:
        return len(self.per_class)

    def scores(self, features: np.ndarray) -> np.ndarray:
        """(n_samples, n_classes) score matrix."""
        return np.stack([m.score(features) for m in self.per_class], axis=1)

    def predict(self, features: np.ndarray) -> np.ndarray:
        # np.argmax breaks ties toward the lowest class index
        return np.argmax(self.scores(features), axis=1)


def pooled_within_class_cov(x: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Pooled covariance of class-centered samples (biased, divides by n)."""
    centered = np.empty_like(x)
    for cls in np.unique(labels):
        mask = labels == cls
        centered[mask] = x[mask] - x[mask].mean(axis=0)
    return centered.T @ centered / x.shape[0]


def fit_lda(features: np.ndarray, labels: np.ndarray,
            shrinkage: float = 0.05,
            priors: tuple[float, float] = (0.5, 0.5)) -> LdaModel:
    """Fit a binary discriminant from labeled feature rows.

    Labels must be 0/1 with both classes present. The pooled within-class
    covariance is shrunk toward the scaled identity before inversion. With
    equal priors the bias puts the boundary at the projected-means midpoint.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise DimensionMismatch(
            f"features {x.shape} do not match {labels.shape[0]} labels"
        )
    if not 0 <= shrinkage <= 1:
        raise InvalidConfig("shrinkage must lie in [0, 1]")
    if not np.all(np.isin(labels, (0, 1))):
        raise InvalidConfig("labels must be 0 or 1")
    if len(priors) != 2 or any(p <= 0 for p in priors):
        raise InvalidConfig("priors must be two positive values")
    mask1 = labels == 1
    n0, n1 = int((~mask1).sum()), int(mask1.sum())
    if n0 == 0 or n1 == 0:
        raise SingleClassInput("both classes must be present")

    mu0 = x[~mask1].mean(axis=0)
    mu1 = x[mask1].mean(axis=0)
    cov = pooled_within_class_cov(x, labels)
    n = cov.shape[0]
    cov = (1.0 - shrinkage) * cov \
        + shrinkage * (np.trace(cov) / n) * np.eye(n)

    evals = np.linalg.eigvalsh(cov)
    if evals[0] <= 0 or evals[-1] / max(evals[0], 1e-300) > _COND_LIMIT:
        raise SingularCovariance(
            "pooled covariance is ill-conditioned; raise shrinkage"
        )
    weights = np.linalg.solve(cov, mu1 - mu0)
    bias = -0.5 * weights @ (mu0 + mu1) + np.log(priors[1] / priors[0])
    return LdaModel(weights, float(bias), np.stack([mu0, mu1]), shrinkage)


def fit_multiclass_lda(features: np.ndarray, labels: np.ndarray,
                       n_classes: int,
                       shrinkage: float = 0.05) -> MulticlassLdaModel:
    """One-vs-rest discriminants for labels in range(n_classes)."""
    labels = np.asarray(labels)
    if n_classes < 2:
        raise InvalidConfig("need at least two classes")
    if not np.all(np.isin(labels, np.arange(n_classes))):
        raise InvalidConfig(f"labels must lie in range({n_classes})")
    models = []
    for cls in range(n_classes):
        binary = (labels == cls).astype(np.uint8)
        if binary.min() == binary.max():
            raise SingleClassInput(
                f"class {cls} is absent or alone in the training labels"
            )
        models.append(fit_lda(features, binary, shrinkage))
    return MulticlassLdaModel(tuple(models))
