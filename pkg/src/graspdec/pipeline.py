"""Grasp decoding pipeline: six per-muscle EEG classifiers over a filter bank.

Training labels come from EMG: each trial's EMG is binarized into a 6x30
activation pattern, and row c labels the EEG segments for muscle channel c.
Each channel classifier fits its own per-band CSP on its active/inactive
segment split and an LDA on the concatenated log-power features. Applying
the six classifiers to a new trial's EEG yields an estimated activation
pattern; EMG is never consumed at prediction time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .activation import (
    N_MUSCLE_CHANNELS,
    ActivationPattern,
    PatternLibrary,
    ThresholdPolicy,
    build_pattern,
)
from .csp import (
    CspModel,
    SpatialFilterModel,
    extract_features,
    features_from_covs,
    fit_csp,
    normalized_cov_stack,
)
from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidConfig,
    MissingEMG,
    SingleClassInput,
    UnlabeledTrial,
)
from .filtering import apply_filter_bank
from .lda import LdaModel, fit_lda
from .signals import (
    BAND_PRESETS,
    DEFAULT_WINDOW,
    FilterBankSpec,
    Paradigm,
    SignalEpoch,
    Trial,
    WindowSpec,
    segment_starts,
)


@dataclass(frozen=True)
class PipelineConfig:
    """Hyperparameters shared by all six channel classifiers."""

    window: WindowSpec = DEFAULT_WINDOW
    filter_bank: FilterBankSpec = BAND_PRESETS["default"]
    m_pairs: int = 2
    gamma: float = 0.0
    lda_shrinkage: float = 0.05
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy)

    def __post_init__(self):
        if self.m_pairs < 1:
            raise InvalidConfig("m_pairs must be a positive integer")
        if not 0 <= self.gamma <= 1:
            raise InvalidConfig("gamma must lie in [0, 1]")
        if not 0 <= self.lda_shrinkage <= 1:
            raise InvalidConfig("lda_shrinkage must lie in [0, 1]")


@dataclass(frozen=True)
class ChannelClassifier:
    """Predicts one muscle channel's on/off state from an EEG segment."""

    emg_channel_index: int
    spatial: SpatialFilterModel
    lda: LdaModel

    def __post_init__(self):
        if self.emg_channel_index < 0:
            raise InvalidConfig("emg_channel_index must be non-negative")
        n_filters = sum(m.n_filters for m in self.spatial.per_band)
        if n_filters != self.lda.n_features:
            raise DimensionMismatch(
                f"{n_filters} spatial filters feed an LDA expecting "
                f"{self.lda.n_features} features"
            )


@dataclass(frozen=True)
class PipelineModel:
    """Trained pipeline: channel classifiers plus the EMG pattern library."""

    channel_classifiers: tuple[ChannelClassifier, ...]
    window: WindowSpec
    library: PatternLibrary
    trained_on: Paradigm
    config: PipelineConfig

    def __post_init__(self):
        classifiers = tuple(self.channel_classifiers)
        object.__setattr__(self, "channel_classifiers", classifiers)
        if len(classifiers) != N_MUSCLE_CHANNELS:
            raise InvalidConfig(
                f"pipeline needs {N_MUSCLE_CHANNELS} channel classifiers, "
                f"got {len(classifiers)}"
            )
        if self.library.n_channels != len(classifiers):
            raise DimensionMismatch(
                f"library has {self.library.n_channels} channels for "
                f"{len(classifiers)} classifiers"
            )
        for clf in classifiers:
            if clf.spatial.filter_bank != self.config.filter_bank:
                raise InvalidConfig(
                    "channel classifiers were fit on a different filter bank "
                    "than the pipeline config declares"
                )

    @property
    def n_segments(self) -> int:
        return self.window.expected_segments


def band_segment_covariances(eeg: SignalEpoch, filter_bank: FilterBankSpec,
                             window: WindowSpec,
                             dtype=np.float64) -> np.ndarray:
    """Trace-normalized covariance of every (band, segment) slice of a trial.

    Filtering runs over the whole epoch (zero-phase), so segment edges see
    no filter transients. Returns (n_bands, n_segments, n_ch, n_ch).
    """
    band_epochs = apply_filter_bank(eeg, filter_bank)
    starts, win_n = segment_starts(window, eeg.n_samples, eeg.sample_rate_hz)
    out = np.empty(
        (len(band_epochs), len(starts), eeg.n_channels, eeg.n_channels),
        dtype=dtype,
    )
    for b, band in enumerate(band_epochs):
        stack = np.stack([band.samples[:, s:s + win_n] for s in starts])
        out[b] = normalized_cov_stack(stack)
    return out


def channel_features(per_band: Sequence[CspModel],
                      covs: np.ndarray) -> np.ndarray:
    """(n_segments, n_bands*2m) features from per-band covariances."""
    parts = [
        features_from_covs(model, np.asarray(covs[b], dtype=np.float64))
        for b, model in enumerate(per_band)
    ]
    return np.concatenate(parts, axis=1)


def fit_channel_from_covariances(channel: int, covs_per_trial: Sequence[np.ndarray],
                                 labels_per_trial: Sequence[np.ndarray],
                                 filter_bank: FilterBankSpec, m_pairs: int = 2,
                                 gamma: float = 0.0,
                                 shrinkage: float = 0.05) -> ChannelClassifier:
    """Fit one channel classifier from precomputed segment covariances.

    ``covs_per_trial[i]`` is (n_bands, n_segments, ch, ch) for trial i and
    ``labels_per_trial[i]`` the matching binary segment labels. Splitting
    the computation this way lets callers reuse the covariances across the
    six channels and across cross-validation folds.
    """
    if not covs_per_trial:
        raise EmptyInput("need at least one trial")
    labels = np.concatenate([np.asarray(l) for l in labels_per_trial])
    if labels.min() == labels.max():
        raise SingleClassInput(
            f"muscle channel {channel} never changes state across training data"
        )
    n_bands = filter_bank.n_bands
    all_covs = np.concatenate(
        [np.asarray(c, dtype=np.float64) for c in covs_per_trial], axis=1
    )  # (n_bands, total_segments, ch, ch)
    active = labels == 1
    per_band = []
    for b in range(n_bands):
        cov_active = all_covs[b, active].mean(axis=0)
        cov_rest = all_covs[b, ~active].mean(axis=0)
        per_band.append(fit_csp(cov_active, cov_rest, m_pairs, gamma, band_index=b))
    spatial = SpatialFilterModel(tuple(per_band), filter_bank, gamma)
    features = channel_features(per_band, all_covs)
    lda = fit_lda(features, labels, shrinkage)
    return ChannelClassifier(channel, spatial, lda)


def _check_movement_trial(trial: Trial) -> None:
    if trial.paradigm is not Paradigm.MOVEMENT:
        raise InvalidConfig(
            f"trial {trial.trial_id!r}: training requires movement trials"
        )
    if trial.emg is None:
        raise MissingEMG(f"trial {trial.trial_id!r} has no EMG epoch")
    if trial.class_label is None:
        raise UnlabeledTrial(f"trial {trial.trial_id!r} has no class label")


def train_channel_classifier(trials: Sequence[Trial], channel: int,
                             window: WindowSpec, filter_bank: FilterBankSpec,
                             policy: ThresholdPolicy, m_pairs: int = 2,
                             gamma: float = 0.0,
                             shrinkage: float = 0.05) -> ChannelClassifier:
    """Fit the classifier for one muscle channel from labeled trials.

    Segment labels come from the EMG binarization of each trial; the EEG
    side never sees the EMG samples themselves.
    """
    trials = list(trials)
    if not trials:
        raise EmptyInput("need at least one trial")
    covs, labels = [], []
    for trial in trials:
        _check_movement_trial(trial)
        pattern = build_pattern(trial, window, policy)
        labels.append(pattern.values[channel])
        covs.append(band_segment_covariances(trial.eeg, filter_bank, window))
    return fit_channel_from_covariances(
        channel, covs, labels, filter_bank, m_pairs, gamma, shrinkage
    )


def train_pipeline(trials: Sequence[Trial],
                   config: Optional[PipelineConfig] = None) -> PipelineModel:
    """Train the full pipeline on labeled movement trials.

    Builds the EMG pattern library, then fits each muscle channel's CSP+LDA
    classifier using the library patterns as segment labels. The expensive
    per-trial filter-bank covariances are computed once and shared by all
    six channel fits.
    """
    config = config or PipelineConfig()
    trials = list(trials)
    if not trials:
        raise EmptyInput("need at least one trial")

    patterns = []
    for trial in trials:
        _check_movement_trial(trial)
        patterns.append(build_pattern(trial, config.window, config.threshold))

    by_class: dict = {}
    for p in patterns:
        by_class.setdefault(p.class_label, []).append(p)
    library = PatternLibrary(
        {cls: tuple(ps) for cls, ps in sorted(by_class.items())},
        config.window,
        patterns[0].shape[0],
    )

    covs = [
        band_segment_covariances(t.eeg, config.filter_bank, config.window)
        for t in trials
    ]
    classifiers = []
    for channel in range(N_MUSCLE_CHANNELS):
        labels = [p.values[channel] for p in patterns]
        classifiers.append(
            fit_channel_from_covariances(
                channel, covs, labels, config.filter_bank,
                config.m_pairs, config.gamma, config.lda_shrinkage,
            )
        )
    return PipelineModel(
        tuple(classifiers), config.window, library, Paradigm.MOVEMENT, config
    )


def predict_segment(clf: ChannelClassifier,
                    eeg_segment_per_band: Sequence[np.ndarray]) -> int:
    """Muscle on/off decision for one segment, given per-band EEG slices."""
    features = extract_features(clf.spatial, eeg_segment_per_band)
    return int(clf.lda.predict(features.values[None, :])[0])


def estimate_pattern(model: PipelineModel, trial: Trial) -> ActivationPattern:
    """Estimate the 6x30 activation pattern of a trial from its EEG alone."""
    covs = band_segment_covariances(
        trial.eeg, model.config.filter_bank, model.window
    )
    rows = []
    for clf in model.channel_classifiers:
        features = channel_features(clf.spatial.per_band, covs)
        rows.append(clf.lda.predict(features))
    return ActivationPattern(np.stack(rows), trial.trial_id, trial.class_label)
