"""Core signal types: epochs, trials, window and filter-bank plans."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from .errors import InvalidBand, InvalidConfig, WindowTooLong

DEFAULT_TRIAL_MS = 4000.0

# Motor-cortex montage used by the default dataset presets.
EEG_CHANNELS_DEFAULT = (
    "FC1", "FC2", "FC3", "FC4", "FC5", "FC6",
    "C1", "C2", "C3", "C4", "C5", "C6", "Cz",
    "CP1", "CP2", "CP3", "CP4", "CP5", "CP6", "CPz",
)

# Six right-arm muscles, wrist extensors through triceps.
EMG_CHANNELS_DEFAULT = ("ECU", "ED", "FCR", "FCU", "BB", "TB")


class GraspClass(IntEnum):
    """The three grasp actions. Integer order is the tie-break order."""

    LATERAL = 0
    PINCER = 1
    PALMAR = 2

    @classmethod
    def from_string(cls, name: str) -> "GraspClass":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InvalidConfig(f"unknown grasp class {name!r}") from None

    def __str__(self) -> str:
        return self.name.lower()


class Paradigm(Enum):
    """Whether the subject executed or only imagined the grasp."""

    MOVEMENT = "movement"
    IMAGERY = "imagery"

    @classmethod
    def from_string(cls, name: str) -> "Paradigm":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise InvalidConfig(f"unknown paradigm {name!r}") from None

    def __str__(self) -> str:
        return self.value


def _as_readonly(samples) -> np.ndarray:
    out = np.ascontiguousarray(samples, dtype=np.float64)
    if out is samples:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SignalEpoch:
    """One multichannel signal epoch, channels by samples.

    Samples are stored as an immutable float64 array; all entries must be
    finite. ``t0_ms`` is the epoch-relative time origin (0 by convention).
    """

    samples: np.ndarray
    sample_rate_hz: float
    channel_names: tuple[str, ...]
    t0_ms: float = 0.0

    def __post_init__(self):
        samples = _as_readonly(self.samples)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise InvalidConfig("samples must be a [n_channels x n_samples] matrix")
        if len(self.channel_names) != samples.shape[0]:
            raise InvalidConfig(
                f"{len(self.channel_names)} channel names for "
                f"{samples.shape[0]} channels"
            )
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if not np.isfinite(samples).all():
            raise InvalidConfig("samples contain NaN or Inf")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_ms(self) -> float:
        return self.n_samples / self.sample_rate_hz * 1000.0

    def with_samples(self, samples) -> "SignalEpoch":
        """Same metadata, new sample matrix of identical shape."""
        return SignalEpoch(samples, self.sample_rate_hz, self.channel_names, self.t0_ms)


@dataclass(frozen=True)
class Trial:
    """One recorded or synthesized trial.

    ``emg`` is absent for motor-imagery trials at inference; ``class_label``
    is absent for unlabeled inference trials.
    """

    trial_id: str
    eeg: SignalEpoch
    paradigm: Paradigm
    emg: Optional[SignalEpoch] = None
    class_label: Optional[GraspClass] = None
    duration_ms: float = DEFAULT_TRIAL_MS

    def __post_init__(self):
        for epoch in (self.eeg, self.emg):
            if epoch is None:
                continue
            half_sample_ms = 500.0 / epoch.sample_rate_hz
            if abs(epoch.duration_ms - self.duration_ms) > half_sample_ms:
                raise InvalidConfig(
                    f"epoch duration {epoch.duration_ms:.3f} ms disagrees with "
                    f"trial duration {self.duration_ms:.3f} ms"
                )


@dataclass(frozen=True)
class WindowSpec:
    """Sliding-window plan for cutting a trial into segments.

    The window length must lie in [500, 2000] ms, and the plan must produce
    ``expected_segments`` segments on a 4000 ms trial. The default
    (1100 ms window, 100 ms step) yields exactly 30.
    """

    window_ms: float = 1100.0
    step_ms: float = 100.0
    expected_segments: int = 30

    def __post_init__(self):
        if not 500.0 <= self.window_ms <= 2000.0:
            raise InvalidConfig("window_ms must lie in [500, 2000]")
        if not self.step_ms > 0:
            raise InvalidConfig("step_ms must be positive")
        if self.expected_segments < 1:
            raise InvalidConfig("expected_segments must be positive")
        got = self.count_for(DEFAULT_TRIAL_MS)
        if got != self.expected_segments:
            raise InvalidConfig(
                f"window plan yields {got} segments on a 4000 ms trial, "
                f"expected {self.expected_segments}"
            )

    def count_for(self, duration_ms: float) -> int:
        """Segment count for a trial of the given duration."""
        if self.window_ms > duration_ms:
            raise WindowTooLong(
                f"window {self.window_ms} ms exceeds duration {duration_ms} ms"
            )
        return int(np.floor((duration_ms - self.window_ms) / self.step_ms + 1e-9)) + 1


DEFAULT_WINDOW = WindowSpec()


def segment_starts(window: WindowSpec, n_samples: int,
                   sample_rate_hz: float) -> tuple[np.ndarray, int]:
    """Segment start indices and window length, both in samples.

    Raises WindowTooLong when the window exceeds the signal.
    """
    win_n = int(round(window.window_ms * sample_rate_hz / 1000.0))
    if win_n > n_samples:
        raise WindowTooLong(
            f"window {window.window_ms} ms = {win_n} samples exceeds "
            f"signal of {n_samples} samples"
        )
    duration_ms = n_samples / sample_rate_hz * 1000.0
    count = window.count_for(duration_ms)
    starts = np.round(
        np.arange(count) * (window.step_ms * sample_rate_hz / 1000.0)
    ).astype(np.intp)
    starts = starts[starts + win_n <= n_samples]
    return starts, win_n


def segment(epoch: SignalEpoch, window: WindowSpec) -> list[SignalEpoch]:
    """Cut an epoch into sliding-window segments, in temporal order.

    Segment i covers [i*step, i*step + window) ms. Index alignment between
    two epochs (e.g. EEG and EMG) is guaranteed when the same WindowSpec and
    duration are used.
    """
    starts, win_n = segment_starts(window, epoch.n_samples, epoch.sample_rate_hz)
    out = []
    for i, s in enumerate(starts):
        out.append(
            SignalEpoch(
                epoch.samples[:, s:s + win_n],
                epoch.sample_rate_hz,
                epoch.channel_names,
                t0_ms=epoch.t0_ms + i * window.step_ms,
            )
        )
    return out


@dataclass(frozen=True)
class FilterBankSpec:
    """Plan of overlapping band-pass filters covering [low_hz, high_hz].

    Band k spans [low + k*step, low + k*step + width] for k = 0, 1, ...
    while the upper edge stays within high_hz.
    """

    low_hz: float
    high_hz: float
    band_width_hz: float
    band_step_hz: float
    filter_order: int = 4
    notch_hz: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.low_hz < self.high_hz:
            raise InvalidBand("need 0 < low_hz < high_hz")
        if self.band_width_hz <= 0 or self.band_step_hz <= 0:
            raise InvalidConfig("band width and step must be positive")
        if self.filter_order < 1:
            raise InvalidConfig("filter_order must be a positive integer")
        if self.notch_hz is not None and self.notch_hz <= 0:
            raise InvalidConfig("notch_hz must be positive")
        if not self.bands():
            raise InvalidConfig("band plan produces no bands")

    def bands(self) -> list[tuple[float, float]]:
        """Enumerate (low, high) band edges."""
        out = []
        k = 0
        while True:
            lo = self.low_hz + k * self.band_step_hz
            hi = lo + self.band_width_hz
            if hi > self.high_hz + 1e-9:
                break
            out.append((lo, hi))
            k += 1
        return out

    @property
    def n_bands(self) -> int:
        return len(self.bands())

    def validate_for(self, sample_rate_hz: float) -> None:
        if self.high_hz >= sample_rate_hz / 2:
            raise InvalidBand(
                f"band plan reaches {self.high_hz} Hz, at or above the "
                f"Nyquist frequency {sample_rate_hz / 2} Hz"
            )


# Named band plans accepted by the CLI. "default" covers 4-40 Hz with
# 4 Hz bands every 2 Hz (17 bands); "eleven" uses a 3.2 Hz step so the
# same range splits into exactly 11 bands; "broadband" is the single
# 4-40 Hz band used by the simplest baseline.
BAND_PRESETS = {
    "default": FilterBankSpec(4.0, 40.0, 4.0, 2.0),
    "eleven": FilterBankSpec(4.0, 40.0, 4.0, 3.2),
    "broadband": FilterBankSpec(4.0, 40.0, 36.0, 1.0),
}
