"""Competing trial-level decoders: CSP+LDA and its filter-bank variant.

Both classify the grasp directly from the whole 4 s EEG trial, with no
segmentation, activation patterns, or EMG involvement. Model I uses a
single broadband filter and unregularized CSP; Model II uses the full
filter bank with covariance shrinkage per band.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .csp import SpatialFilterModel, features_from_covs, fit_csp, normalized_cov
from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidConfig,
    SingleClassInput,
    UnlabeledTrial,
)
from .filtering import apply_filter_bank
from .lda import LdaModel, MulticlassLdaModel, fit_lda, fit_multiclass_lda
from .signals import (
    BAND_PRESETS,
    FilterBankSpec,
    GraspClass,
    Trial,
)

N_CLASSES = 3


class BaselineKind(Enum):
    MODEL_I = "model1"
    MODEL_II = "model2"


_KIND_DEFAULTS = {
    # (filter bank preset, gamma)
    BaselineKind.MODEL_I: ("broadband", 0.0),
    BaselineKind.MODEL_II: ("default", 0.1),
}


@dataclass(frozen=True)
class BaselineConfig:
    """Hyperparameters; None fields fall back to the kind's defaults."""

    filter_bank: Optional[FilterBankSpec] = None
    gamma: Optional[float] = None
    m_pairs: int = 2
    lda_shrinkage: float = 0.05

    def __post_init__(self):
        if self.m_pairs < 1:
            raise InvalidConfig("m_pairs must be a positive integer")
        if self.gamma is not None and not 0 <= self.gamma <= 1:
            raise InvalidConfig("gamma must lie in [0, 1]")
        if not 0 <= self.lda_shrinkage <= 1:
            raise InvalidConfig("lda_shrinkage must lie in [0, 1]")

    def resolved(self, kind: BaselineKind) -> "BaselineConfig":
        preset, gamma = _KIND_DEFAULTS[kind]
        return BaselineConfig(
            self.filter_bank or BAND_PRESETS[preset],
            self.gamma if self.gamma is not None else gamma,
            self.m_pairs,
            self.lda_shrinkage,
        )


@dataclass(frozen=True)
class BaselineModel:
    """One-vs-rest CSP per class feeding a multiclass LDA head."""

    kind: BaselineKind
    spatial_per_class: tuple[SpatialFilterModel, ...]
    head: MulticlassLdaModel
    m_pairs: int

    def __post_init__(self):
        spatial = tuple(self.spatial_per_class)
        object.__setattr__(self, "spatial_per_class", spatial)
        if len(spatial) != N_CLASSES:
            raise InvalidConfig(f"need {N_CLASSES} class filter sets")
        if self.head.n_classes != N_CLASSES:
            raise InvalidConfig(f"head must score {N_CLASSES} classes")

    @property
    def filter_bank(self) -> FilterBankSpec:
        return self.spatial_per_class[0].filter_bank


def trial_covariances(trial: Trial,
                      filter_bank: FilterBankSpec) -> np.ndarray:
    """(n_bands, ch, ch) trace-normalized covariances of the whole trial."""
    bands = apply_filter_bank(trial.eeg, filter_bank)
    return np.stack([normalized_cov(b.samples) for b in bands])


def _labels(trials: Sequence[Trial]) -> np.ndarray:
    labels = []
    for t in trials:
        if t.class_label is None:
            raise UnlabeledTrial(f"trial {t.trial_id!r} has no class label")
        labels.append(int(t.class_label))
    return np.asarray(labels)


def _baseline_features(spatial_per_class: Sequence[SpatialFilterModel],
                       covs: np.ndarray) -> np.ndarray:
    """Concatenated per-class CSP features; covs is (n_trials, n_bands, ch, ch)."""
    parts = []
    for spatial in spatial_per_class:
        for b, model in enumerate(spatial.per_band):
            parts.append(features_from_covs(model, covs[:, b]))
    return np.concatenate(parts, axis=1)


def fit_baseline_from_covariances(kind: BaselineKind, covs: np.ndarray,
                                  labels: np.ndarray,
                                  config: BaselineConfig) -> BaselineModel:
    """Fit from precomputed (n_trials, n_bands, ch, ch) trial covariances.

    Lets the evaluation harness filter each trial once and reuse the
    covariances across folds.
    """
    config = config.resolved(kind)
    labels = np.asarray(labels)
    present = np.unique(labels)
    if len(present) < N_CLASSES:
        raise SingleClassInput(
            f"training data covers classes {present.tolist()}, "
            f"need all {N_CLASSES}"
        )
    n_bands = config.filter_bank.n_bands
    if covs.shape[1] != n_bands:
        raise DimensionMismatch(
            f"{covs.shape[1]} covariance bands for {n_bands} plan bands"
        )
    spatial_per_class = []
    for cls in range(N_CLASSES):
        active = labels == cls
        per_band = []
        for b in range(n_bands):
            cov_active = covs[active, b].mean(axis=0)
            cov_rest = covs[~active, b].mean(axis=0)
            per_band.append(
                fit_csp(cov_active, cov_rest, config.m_pairs, config.gamma,
                        band_index=b)
            )
        spatial_per_class.append(
            SpatialFilterModel(tuple(per_band), config.filter_bank,
                               config.gamma)
        )

    features = _baseline_features(spatial_per_class, covs)
    head = fit_multiclass_lda(features, labels, N_CLASSES,
                              config.lda_shrinkage)
    return BaselineModel(kind, tuple(spatial_per_class), head, config.m_pairs)


def train_baseline(kind: BaselineKind, trials: Sequence[Trial],
                   config: Optional[BaselineConfig] = None) -> BaselineModel:
    """Fit a trial-level baseline from labeled trials.

    For each class, CSP contrasts that class's trial covariances against
    the pooled rest (one-vs-rest); the multiclass LDA head consumes the
    concatenation of all three feature groups.
    """
    config = (config or BaselineConfig()).resolved(kind)
    trials = list(trials)
    if not trials:
        raise EmptyInput("need at least one trial")
    labels = _labels(trials)
    covs = np.stack([trial_covariances(t, config.filter_bank) for t in trials])
    return fit_baseline_from_covariances(kind, covs, labels, config)


def predict_from_covariances(model: BaselineModel,
                             covs: np.ndarray) -> np.ndarray:
    """Predicted class indices for (n_trials, n_bands, ch, ch) covariances."""
    features = _baseline_features(model.spatial_per_class, covs)
    return model.head.predict(features)


def predict_baseline(model: BaselineModel, trial: Trial) -> GraspClass:
    """Classify one trial; deterministic, EEG only."""
    covs = trial_covariances(trial, model.filter_bank)[None]
    return GraspClass(int(predict_from_covariances(model, covs)[0]))


@dataclass(frozen=True)
class PairwiseBaseline:
    """Alternative multiclass strategy: one CSP+LDA per class pair, with
    majority voting. Library-level experiment, not part of the CLI."""

    kind: BaselineKind
    pairs: tuple[tuple[int, int], ...]
    spatial_per_pair: tuple[SpatialFilterModel, ...]
    heads: tuple[LdaModel, ...]


def train_pairwise_baseline(kind: BaselineKind, trials: Sequence[Trial],
                            config: Optional[BaselineConfig] = None,
                            ) -> PairwiseBaseline:
    config = (config or BaselineConfig()).resolved(kind)
    trials = list(trials)
    if not trials:
        raise EmptyInput("need at least one trial")
    labels = _labels(trials)
    if len(np.unique(labels)) < N_CLASSES:
        raise SingleClassInput("all classes must be present")
    covs = np.stack([trial_covariances(t, config.filter_bank) for t in trials])

    pairs, spatials, heads = [], [], []
    for a, b in combinations(range(N_CLASSES), 2):
        member = np.isin(labels, (a, b))
        sub = covs[member]
        binary = (labels[member] == b).astype(np.uint8)
        per_band = []
        for band in range(config.filter_bank.n_bands):
            cov_b = sub[binary == 1, band].mean(axis=0)
            cov_a = sub[binary == 0, band].mean(axis=0)
            per_band.append(
                fit_csp(cov_b, cov_a, config.m_pairs, config.gamma,
                        band_index=band)
            )
        spatial = SpatialFilterModel(tuple(per_band), config.filter_bank,
                                     config.gamma)
        features = _baseline_features([spatial], sub)
        pairs.append((a, b))
        spatials.append(spatial)
        heads.append(fit_lda(features, binary, config.lda_shrinkage))
    return PairwiseBaseline(kind, tuple(pairs), tuple(spatials), tuple(heads))


def predict_pairwise(model: PairwiseBaseline, trial: Trial) -> GraspClass:
    covs = trial_covariances(trial, model.spatial_per_pair[0].filter_bank)[None]
    votes = np.zeros(N_CLASSES, dtype=int)
    for (a, b), spatial, head in zip(model.pairs, model.spatial_per_pair,
                                     model.heads):
        features = _baseline_features([spatial], covs)
        votes[b if head.predict(features)[0] else a] += 1
    return GraspClass(int(np.argmax(votes)))  # tie falls to lowest index
