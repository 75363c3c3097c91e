"""Zero-phase IIR band-pass and notch filtering, and filter-bank application.

All filters are Butterworth designs applied forward-backward (sosfiltfilt /
filtfilt), so filtered signals keep their temporal alignment with the raw
EMG-derived labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal as sps

from .errors import InvalidBand, InvalidConfig, UnstableDesign
from .signals import FilterBankSpec, SignalEpoch


@dataclass(frozen=True)
class FilterCoefficients:
    """Second-order sections of a band-pass design, with its provenance."""

    sos: np.ndarray
    band_low_hz: float
    band_high_hz: float
    order: int
    sample_rate_hz: float

    def __post_init__(self):
        sos = np.ascontiguousarray(self.sos, dtype=np.float64)
        sos.setflags(write=False)
        object.__setattr__(self, "sos", sos)


def design_bandpass(band_low_hz: float, band_high_hz: float, order: int,
                    sample_rate_hz: float) -> FilterCoefficients:
    """Design a stable Butterworth band-pass for forward-backward use.

    Raises InvalidBand unless 0 < low < high < Nyquist, and UnstableDesign
    if any pole lands on or outside the unit circle.
    """
    nyquist = sample_rate_hz / 2.0
    if not (0 < band_low_hz < band_high_hz < nyquist):
        raise InvalidBand(
            f"band [{band_low_hz}, {band_high_hz}] Hz invalid for "
            f"Nyquist {nyquist} Hz"
        )
    if order < 2:
        raise InvalidConfig("filter order must be at least 2")
    sos = sps.butter(order, [band_low_hz, band_high_hz], btype="bandpass",
                     output="sos", fs=sample_rate_hz)
    # poles of each biquad section: roots of z^2 + a1 z + a2
    for section in sos:
        poles = np.roots(section[3:])
        if np.any(np.abs(poles) >= 1.0):
            raise UnstableDesign(
                f"band [{band_low_hz}, {band_high_hz}] Hz at order {order} "
                f"yields poles outside the unit circle"
            )
    return FilterCoefficients(sos, band_low_hz, band_high_hz, order,
                              sample_rate_hz)


# same designs recur for every trial of a dataset; coefficients are immutable
_design_cached = lru_cache(maxsize=512)(design_bandpass)


def magnitude_response(coeffs: FilterCoefficients,
                       freqs_hz) -> np.ndarray:
    """Single-pass |H(f)| on a frequency grid (forward-backward squares it)."""
    _, h = sps.sosfreqz(coeffs.sos, worN=np.atleast_1d(np.asarray(freqs_hz, dtype=float)),
                        fs=coeffs.sample_rate_hz)
    return np.abs(h)


def apply_bandpass(epoch: SignalEpoch, coeffs: FilterCoefficients) -> SignalEpoch:
    """Zero-phase band-pass of every channel."""
    # scipy's sosfilt kernel needs a writable sos buffer; ours is frozen
    filtered = sps.sosfiltfilt(np.array(coeffs.sos), epoch.samples, axis=-1)
    return epoch.with_samples(filtered)


def apply_filter_bank(epoch: SignalEpoch, spec: FilterBankSpec) -> list[SignalEpoch]:
    """Split an epoch into its filter-bank sub-bands.

    Returns one epoch per band, each with the input's shape and channel
    names. When the spec carries a notch frequency, the notch is applied
    once before band splitting.
    """
    spec.validate_for(epoch.sample_rate_hz)
    if spec.notch_hz is not None:
        epoch = notch_filter(epoch, spec.notch_hz)
    out = []
    for lo, hi in spec.bands():
        coeffs = _design_cached(lo, hi, spec.filter_order, epoch.sample_rate_hz)
        out.append(apply_bandpass(epoch, coeffs))
    return out


def notch_filter(epoch: SignalEpoch, notch_hz: float,
                 quality: float = 30.0) -> SignalEpoch:
    """Zero-phase notch, e.g. to remove 50/60 Hz mains interference.

    The pad length is stretched to several notch time constants so the
    narrow notch settles within the padding rather than in the data.
    """
    nyquist = epoch.sample_rate_hz / 2.0
    if not 0 < notch_hz < nyquist:
        raise InvalidBand(f"notch {notch_hz} Hz invalid for Nyquist {nyquist} Hz")
    if quality <= 0:
        raise InvalidConfig("notch quality must be positive")
    b, a = sps.iirnotch(notch_hz, quality, fs=epoch.sample_rate_hz)
    bandwidth_hz = notch_hz / quality
    padlen = min(epoch.n_samples - 1,
                 int(10 * epoch.sample_rate_hz / bandwidth_hz))
    filtered = sps.filtfilt(b, a, epoch.samples, axis=-1, padlen=padlen)
    return epoch.with_samples(filtered)
