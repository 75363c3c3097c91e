"""EMG decoding: segment RMS, per-trial thresholds, binary activity patterns.

Each EMG channel of a trial is cut into sliding-window segments, the RMS of
each segment is compared against the trial's mean segment RMS, and the
resulting 0/1 row is one line of the trial's muscle activity pattern
(6 channels x 30 segments by default). Per-class collections of these
patterns form the library that EEG-estimated patterns are matched against.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import (
    ChannelCountMismatch,
    DimensionMismatch,
    EmptySegment,
    InvalidConfig,
    MissingEMG,
    UnlabeledTrial,
)
from .signals import GraspClass, Paradigm, Trial, WindowSpec, segment_starts

N_MUSCLE_CHANNELS = 6


class ThresholdSource(Enum):
    PER_TRIAL_MEAN_RMS = "per_trial_mean_rms"


@dataclass(frozen=True)
class ThresholdPolicy:
    """How the activation threshold is derived from a trial's own RMS."""

    scale: float = 1.0
    source: ThresholdSource = ThresholdSource.PER_TRIAL_MEAN_RMS

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidConfig("threshold scale must be positive")


@dataclass(frozen=True)
class ActivationPattern:
    """Binary muscle-activity image, channels x segments."""

    values: np.ndarray
    trial_id: str
    class_label: Optional[GraspClass] = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.uint8)
        if values is self.values:
            values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise InvalidConfig("pattern must be a [channels x segments] matrix")
        if not np.isin(values, (0, 1)).all():
            raise InvalidConfig("pattern entries must be 0 or 1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class PatternLibrary:
    """Per-class collections of EMG-derived activation patterns."""

    patterns_by_class: Mapping[GraspClass, tuple[ActivationPattern, ...]]
    window: WindowSpec
    n_channels: int

    def __post_init__(self):
        by_class = {
            cls: tuple(patterns)
            for cls, patterns in self.patterns_by_class.items()
        }
        object.__setattr__(self, "patterns_by_class", by_class)
        shapes = {p.shape for patterns in by_class.values() for p in patterns}
        if len(shapes) > 1:
            raise DimensionMismatch(f"library patterns disagree in shape: {shapes}")
        if shapes:
            n_ch, _ = shapes.pop()
            if n_ch != self.n_channels:
                raise DimensionMismatch(
                    f"library declared {self.n_channels} channels but "
                    f"patterns have {n_ch}"
                )

    @property
    def total_count(self) -> int:
        return sum(len(p) for p in self.patterns_by_class.values())

    def classes(self) -> list[GraspClass]:
        return sorted(self.patterns_by_class.keys())

    def stacked(self, cls: GraspClass) -> np.ndarray:
        """Float64 stack (n_patterns, channels, segments) for one class."""
        patterns = self.patterns_by_class[cls]
        return np.stack([p.values for p in patterns]).astype(np.float64)


def rms(segment) -> float:
    """Root mean square of a sample vector."""
    x = np.asarray(segment, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySegment("cannot take RMS of an empty segment")
    return float(np.sqrt(np.mean(x * x)))


def segment_rms(emg_channel, window: WindowSpec,
                sample_rate_hz: float) -> np.ndarray:
    """RMS of every sliding-window segment of one channel."""
    x = np.asarray(emg_channel, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySegment("cannot segment an empty channel")
    starts, win_n = segment_starts(window, x.size, sample_rate_hz)
    return _kernels.sliding_rms(x, starts, win_n)


def trial_threshold(emg_channel, window: WindowSpec,
                    policy: ThresholdPolicy, sample_rate_hz: float) -> float:
    """Per-channel, per-trial threshold: scaled mean of the segment RMS values."""
    return policy.scale * float(np.mean(segment_rms(emg_channel, window,
                                                    sample_rate_hz)))


def binarize_channel(emg_channel, window: WindowSpec,
                     policy: ThresholdPolicy,
                     sample_rate_hz: float) -> np.ndarray:
    """Decode one EMG channel into its 1 x n_segments binary activity row.

    A segment is active iff its RMS strictly exceeds the trial threshold;
    a constant channel therefore decodes to all zeros.
    """
    values = segment_rms(emg_channel, window, sample_rate_hz)
    threshold = policy.scale * float(np.mean(values))
    return (values > threshold).astype(np.uint8)


def build_pattern(trial: Trial, window: WindowSpec,
                  policy: ThresholdPolicy,
                  expected_channels: int = N_MUSCLE_CHANNELS) -> ActivationPattern:
    """Assemble a trial's muscle activity pattern from its EMG channels."""
    if trial.emg is None:
        raise MissingEMG(f"trial {trial.trial_id!r} has no EMG epoch")
    if trial.emg.n_channels != expected_channels:
        raise ChannelCountMismatch(
            f"trial {trial.trial_id!r} has {trial.emg.n_channels} EMG "
            f"channels, expected {expected_channels}"
        )
    rows = [
        binarize_channel(trial.emg.samples[c], window, policy,
                         trial.emg.sample_rate_hz)
        for c in range(trial.emg.n_channels)
    ]
    return ActivationPattern(np.stack(rows), trial.trial_id, trial.class_label)


def build_library(trials: Sequence[Trial], window: WindowSpec,
                  policy: ThresholdPolicy,
                  expected_channels: int = N_MUSCLE_CHANNELS) -> PatternLibrary:
    """Build the per-class pattern library from labeled movement trials."""
    by_class: dict[GraspClass, list[ActivationPattern]] = {}
    for trial in trials:
        if trial.class_label is None:
            raise UnlabeledTrial(f"trial {trial.trial_id!r} has no class label")
        if trial.paradigm is not Paradigm.MOVEMENT:
            raise InvalidConfig(
                f"trial {trial.trial_id!r} is {trial.paradigm}; the library "
                f"is built from actual-movement trials"
            )
        pattern = build_pattern(trial, window, policy, expected_channels)
        by_class.setdefault(trial.class_label, []).append(pattern)
    n_channels = expected_channels if by_class else 0
    return PatternLibrary(by_class, window, n_channels)
