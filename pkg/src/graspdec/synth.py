"""Synthetic EEG/EMG trials with scripted muscle-activation ground truth.

Each grasp class is a temporal schedule: every muscle channel bursts once
per trial, and the class determines in which time slot. Per-channel signal
power is identical across classes, so class identity lives only in burst
timing — recoverable by the segment-level pipeline but invisible to a
whole-trial classifier. EEG carries the schedule through band-limited
oscillations on a fixed channel subset per muscle; EMG carries it as
amplitude bursts over a noise floor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .activation import ActivationPattern
from .errors import InvalidConfig
from .signals import (
    DEFAULT_TRIAL_MS,
    DEFAULT_WINDOW,
    EEG_CHANNELS_DEFAULT,
    EMG_CHANNELS_DEFAULT,
    GraspClass,
    Paradigm,
    SignalEpoch,
    Trial,
    WindowSpec,
)

_SLOT_STARTS_MS = (200.0, 800.0, 1400.0, 2000.0, 2600.0, 3200.0)
_BURST_MS = 700.0
# class-specific rotation of muscle channels over time slots
_CLASS_SLOT_SHIFT = {
    GraspClass.LATERAL: 0,
    GraspClass.PINCER: 2,
    GraspClass.PALMAR: 4,
}
_COUPLING_BASE_HZ = 9.0
_COUPLING_STEP_HZ = 3.0
_CHANNELS_PER_MUSCLE = 3
# sub-stream tags so movement, imagery, and jitter draws never collide
_STREAM_MOVEMENT = 0
_STREAM_IMAGERY = 1
_STREAM_JITTER = 2


@dataclass(frozen=True)
class ActivationSchedule:
    """Ground-truth active intervals per muscle channel, in milliseconds."""

    per_channel_intervals: tuple[tuple[tuple[float, float], ...], ...]
    class_label: GraspClass
    duration_ms: float = DEFAULT_TRIAL_MS

    def __post_init__(self):
        normalized = tuple(
            tuple((float(lo), float(hi)) for lo, hi in channel)
            for channel in self.per_channel_intervals
        )
        object.__setattr__(self, "per_channel_intervals", normalized)
        for c, channel in enumerate(normalized):
            last_end = -np.inf
            for lo, hi in sorted(channel):
                if not 0 <= lo < hi <= self.duration_ms:
                    raise InvalidConfig(
                        f"channel {c}: interval [{lo}, {hi}) outside "
                        f"[0, {self.duration_ms})"
                    )
                if lo < last_end:
                    raise InvalidConfig(f"channel {c}: overlapping intervals")
                last_end = hi

    @property
    def n_channels(self) -> int:
        return len(self.per_channel_intervals)


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters. snr_db measures the EEG burst oscillation
    power (amplitude^2 / 2, at coupling_gain 1) against the unit-variance
    1/f background."""

    n_trials_per_class: int = 50
    eeg_channels: int = 20
    emg_channels: int = 6
    sample_rate_hz: float = 250.0
    snr_db: float = -6.0
    coupling_gain: float = 1.0
    rng_seed: int = 7
    emg_burst_gain: float = 10.0
    jitter_ms: float = 100.0
    class_freq_shift_hz: float = 0.0
    trial_ms: float = DEFAULT_TRIAL_MS

    def __post_init__(self):
        if self.n_trials_per_class < 1:
            raise InvalidConfig("n_trials_per_class must be positive")
        if self.eeg_channels < 1 or self.emg_channels < 1:
            raise InvalidConfig("channel counts must be positive")
        if self.sample_rate_hz < 100:
            raise InvalidConfig(
                "sample_rate_hz below 100 cannot carry the 4-40 Hz band plan"
            )
        if self.coupling_gain < 0 or self.emg_burst_gain <= 0:
            raise InvalidConfig("gains must be positive")
        if self.jitter_ms < 0 or self.trial_ms <= 0:
            raise InvalidConfig("jitter_ms and trial_ms must be non-negative")

    @property
    def n_samples(self) -> int:
        return int(round(self.trial_ms * self.sample_rate_hz / 1000.0))


def muscle_coupling(config: SynthConfig, channel: int,
                    class_label: Optional[GraspClass]) -> tuple[list[int], float]:
    """EEG channel subset and oscillation frequency driven by one muscle."""
    eeg = [
        (_CHANNELS_PER_MUSCLE * channel + j) % config.eeg_channels
        for j in range(_CHANNELS_PER_MUSCLE)
    ]
    freq = _COUPLING_BASE_HZ + _COUPLING_STEP_HZ * channel
    if class_label is not None:
        freq += config.class_freq_shift_hz * int(class_label)
    return eeg, freq


def default_schedules(duration_ms: float = DEFAULT_TRIAL_MS,
                      n_channels: int = 6) -> dict[GraspClass, ActivationSchedule]:
    """The three class schedules: same slots, class-rotated assignment.

    Every channel is active for the same total time in every class, so the
    schedules differ only temporally.
    """
    if n_channels != len(_SLOT_STARTS_MS):
        raise InvalidConfig(
            f"default schedules are defined for {len(_SLOT_STARTS_MS)} "
            f"muscle channels"
        )
    if duration_ms < _SLOT_STARTS_MS[-1] + _BURST_MS:
        raise InvalidConfig(f"duration {duration_ms} ms too short for the slots")
    out = {}
    for cls, shift in _CLASS_SLOT_SHIFT.items():
        intervals = []
        for c in range(n_channels):
            start = _SLOT_STARTS_MS[(c + shift) % n_channels]
            intervals.append(((start, start + _BURST_MS),))
        out[cls] = ActivationSchedule(tuple(intervals), cls, duration_ms)
    return out


def jitter_schedule(schedule: ActivationSchedule, rng: np.random.Generator,
                    max_jitter_ms: float) -> ActivationSchedule:
    """Shift every interval by an independent uniform offset, kept in bounds."""
    jittered = []
    for channel in schedule.per_channel_intervals:
        moved = []
        for lo, hi in channel:
            shift = rng.uniform(-max_jitter_ms, max_jitter_ms)
            shift = float(np.clip(shift, -lo, schedule.duration_ms - hi))
            moved.append((lo + shift, hi + shift))
        jittered.append(tuple(moved))
    return ActivationSchedule(tuple(jittered), schedule.class_label,
                              schedule.duration_ms)


def expected_pattern(schedule: ActivationSchedule,
                     window: WindowSpec = DEFAULT_WINDOW,
                     burst_gain: float = 10.0) -> ActivationPattern:
    """Noise-free oracle for what EMG binarization recovers.

    Segment RMS of unit noise plus a gain-g burst covering fraction f of
    the window is sqrt(1 + g^2 f); a segment is active when that exceeds
    the per-channel mean, mirroring the per-trial threshold rule.
    """
    n_segments = window.count_for(schedule.duration_ms)
    rows = []
    for channel in schedule.per_channel_intervals:
        fractions = np.zeros(n_segments)
        for t in range(n_segments):
            w_lo = t * window.step_ms
            w_hi = w_lo + window.window_ms
            overlap = sum(
                max(0.0, min(hi, w_hi) - max(lo, w_lo)) for lo, hi in channel
            )
            fractions[t] = overlap / window.window_ms
        levels = np.sqrt(1.0 + burst_gain ** 2 * fractions)
        rows.append((levels > levels.mean()).astype(np.uint8))
    return ActivationPattern(np.stack(rows), "expected", schedule.class_label)


def _pink_noise(rng: np.random.Generator, n_channels: int, n_samples: int,
                sample_rate_hz: float) -> np.ndarray:
    """1/f-shaped Gaussian noise, unit variance per channel."""
    white = rng.standard_normal((n_channels, n_samples))
    spectrum = np.fft.rfft(white, axis=-1)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate_hz)
    shaping = 1.0 / np.sqrt(np.maximum(freqs, 1.0))  # flat below 1 Hz
    shaping[0] = 0.0
    x = np.fft.irfft(spectrum * shaping, n=n_samples, axis=-1)
    return x / x.std(axis=-1, keepdims=True)


def _interval_mask(intervals, n_samples: int,
                   sample_rate_hz: float) -> np.ndarray:
    mask = np.zeros(n_samples)
    for lo, hi in intervals:
        a = int(round(lo * sample_rate_hz / 1000.0))
        b = int(round(hi * sample_rate_hz / 1000.0))
        mask[a:min(b, n_samples)] = 1.0
    return mask


def _channel_names(prefix: str, defaults: tuple, n: int) -> tuple:
    if n == len(defaults):
        return defaults
    return tuple(f"{prefix}{i + 1:02d}" for i in range(n))


def generate_trial(schedule: ActivationSchedule, config: SynthConfig,
                   paradigm: Paradigm, trial_seed: int) -> Trial:
    """One deterministic trial following a schedule.

    Movement trials carry EMG with burst-gain amplitude steps; imagery
    trials omit EMG and halve the EEG coupling. All randomness derives
    from (config.rng_seed, paradigm, trial_seed).
    """
    if schedule.n_channels != config.emg_channels:
        raise InvalidConfig(
            f"schedule has {schedule.n_channels} channels, config expects "
            f"{config.emg_channels}"
        )
    if abs(schedule.duration_ms - config.trial_ms) > 1e-6:
        raise InvalidConfig("schedule duration disagrees with config.trial_ms")
    imagery = paradigm is Paradigm.IMAGERY
    stream = _STREAM_IMAGERY if imagery else _STREAM_MOVEMENT
    rng = np.random.default_rng([config.rng_seed, stream, trial_seed])
    n = config.n_samples
    fs = config.sample_rate_hz
    t = np.arange(n) / fs

    eeg = _pink_noise(rng, config.eeg_channels, n, fs)
    amplitude = np.sqrt(2.0 * 10.0 ** (config.snr_db / 10.0)) \
        * config.coupling_gain * (0.5 if imagery else 1.0)
    masks = []
    for c in range(config.emg_channels):
        mask = _interval_mask(schedule.per_channel_intervals[c], n, fs)
        masks.append(mask)
        coupled, freq = muscle_coupling(config, c, schedule.class_label)
        for e in coupled:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            eeg[e] += amplitude * np.sin(2.0 * np.pi * freq * t + phase) * mask

    eeg_epoch = SignalEpoch(
        eeg, fs, _channel_names("EEG", EEG_CHANNELS_DEFAULT, config.eeg_channels)
    )

    emg_epoch = None
    if not imagery:
        emg = rng.standard_normal((config.emg_channels, n))
        for c, mask in enumerate(masks):
            emg[c] += config.emg_burst_gain * rng.standard_normal(n) * mask
        emg_epoch = SignalEpoch(
            emg, fs,
            _channel_names("EMG", EMG_CHANNELS_DEFAULT, config.emg_channels),
        )

    prefix = "mi" if imagery else "mov"
    label = "rest" if schedule.class_label is None \
        else schedule.class_label.name.lower()
    trial_id = f"{prefix}-{label}-{trial_seed:04d}"
    return Trial(trial_id, eeg_epoch, paradigm, emg_epoch,
                 schedule.class_label, duration_ms=config.trial_ms)


def generate_dataset(config: SynthConfig) -> list[Trial]:
    """Full dataset: n_trials_per_class x 3 movement trials, then the same
    count of imagery trials. Schedules are jittered per trial so patterns
    vary within a class."""
    schedules = default_schedules(config.trial_ms, config.emg_channels)
    trials = []
    for paradigm in (Paradigm.MOVEMENT, Paradigm.IMAGERY):
        stream = _STREAM_IMAGERY if paradigm is Paradigm.IMAGERY \
            else _STREAM_MOVEMENT
        for k, cls in enumerate(sorted(schedules)):
            for i in range(config.n_trials_per_class):
                trial_seed = k * config.n_trials_per_class + i
                jitter_rng = np.random.default_rng(
                    [config.rng_seed, _STREAM_JITTER, stream, trial_seed]
                )
                jittered = jitter_schedule(
                    schedules[cls], jitter_rng, config.jitter_ms
                )
                trials.append(
                    generate_trial(jittered, config, paradigm, trial_seed)
                )
    return trials
