"""Grasp classification by pattern similarity against the EMG library.

The estimated activation pattern is compared to every library pattern by
mean squared error; the class with the lowest per-class average error is
the decision. For binary patterns MSE equals the Hamming disagreement
fraction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from .activation import ActivationPattern, PatternLibrary
from .errors import DimensionMismatch, EmptyLibrary, InvalidConfig
from .pipeline import PipelineModel, estimate_pattern
from .signals import GraspClass, Trial

_AGGREGATES = ("mean", "min")


@dataclass(frozen=True)
class MatchReport:
    """All per-pattern errors behind one classification decision."""

    per_class_mean_mse: Mapping[GraspClass, float]
    per_pattern_mse: tuple[tuple[GraspClass, int, float], ...]
    predicted: GraspClass

    def __post_init__(self):
        object.__setattr__(
            self, "per_class_mean_mse", dict(self.per_class_mean_mse)
        )
        object.__setattr__(
            self, "per_pattern_mse", tuple(self.per_pattern_mse)
        )


def pattern_mse(a: ActivationPattern, b: ActivationPattern) -> float:
    """Mean over entries of the squared difference, in [0, 1] for binary."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"pattern shapes differ: {a.shape} vs {b.shape}")
    diff = a.values.astype(np.float64) - b.values.astype(np.float64)
    return float(np.mean(diff * diff))


def _classify_values(values: np.ndarray, library: PatternLibrary,
                     aggregate: str) -> MatchReport:
    if aggregate not in _AGGREGATES:
        raise InvalidConfig(f"aggregate must be one of {_AGGREGATES}")
    if library.total_count == 0:
        raise EmptyLibrary("pattern library holds no patterns")
    per_pattern = []
    per_class = {}
    for cls in library.classes():
        stack = library.stacked(cls)
        if stack.shape[1:] != values.shape:
            raise DimensionMismatch(
                f"estimated pattern {values.shape} vs library "
                f"patterns {stack.shape[1:]}"
            )
        errors = _kernels.mse_to_stack(values, stack)
        per_pattern.extend(
            (cls, i, float(e)) for i, e in enumerate(errors)
        )
        per_class[cls] = float(errors.mean() if aggregate == "mean"
                               else errors.min())
    predicted = None
    for cls in sorted(per_class):  # ties fall to the lowest class index
        if predicted is None or per_class[cls] < per_class[predicted]:
            predicted = cls
    return MatchReport(per_class, tuple(per_pattern), predicted)


def classify_pattern(estimated: ActivationPattern, library: PatternLibrary,
                     aggregate: str = "mean") -> MatchReport:
    """Classify a binary pattern against the library.

    ``aggregate`` selects how a class's 50 errors collapse to one score:
    "mean" (the default decision rule) or "min" (nearest neighbor).
    """
    return _classify_values(
        estimated.values.astype(np.float64), library, aggregate
    )


def classify_soft(scores: np.ndarray, library: PatternLibrary,
                  aggregate: str = "mean") -> MatchReport:
    """Experimental: classify real-valued activation scores in [0, 1]."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.min() < 0 or scores.max() > 1:
        raise InvalidConfig("scores must be a matrix with entries in [0, 1]")
    return _classify_values(scores, library, aggregate)


def classify_trial(model: PipelineModel, trial: Trial,
                   aggregate: str = "mean") -> MatchReport:
    """End to end: estimate the trial's pattern from EEG, then classify it."""
    estimated = estimate_pattern(model, trial)
    return classify_pattern(estimated, model.library, aggregate)
