"""Common spatial patterns over filter-bank EEG, and log-power features.

CSP filters solve the two-class generalized eigenproblem
C_active w = lambda (C_active + C_rest) w via whitening of the composite
covariance; the retained filters are the most discriminative directions
(largest and smallest lambda). Features are log-normalized powers of the
projected signal, concatenated across filter-bank bands.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg as spla

from . import _kernels
from .errors import (
    DegenerateSegment,
    DimensionMismatch,
    EmptyInput,
    InvalidConfig,
    SingularComposite,
)
from .signals import FilterBankSpec

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class CspModel:
    """Spatial filters for one band: top-m and bottom-m eigenvectors.

    Rows of ``projection`` are unit-composite-variance generalized
    eigenvectors; ``eigenvalues`` are the matching active-class variance
    ratios in [0, 1], stored in the same row order (m largest first,
    then m smallest).
    """

    projection: np.ndarray
    eigenvalues: np.ndarray
    m_pairs: int
    band_index: int = -1

    def __post_init__(self):
        projection = np.ascontiguousarray(self.projection, dtype=np.float64)
        projection.setflags(write=False)
        eigenvalues = np.ascontiguousarray(self.eigenvalues, dtype=np.float64)
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def n_filters(self) -> int:
        return self.projection.shape[0]

    @property
    def n_channels(self) -> int:
        return self.projection.shape[1]


@dataclass(frozen=True)
class SpatialFilterModel:
    """One CSP model per filter-bank band."""

    per_band: tuple[CspModel, ...]
    filter_bank: FilterBankSpec
    regularization_gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "per_band", tuple(self.per_band))
        if len(self.per_band) != self.filter_bank.n_bands:
            raise DimensionMismatch(
                f"{len(self.per_band)} band models for "
                f"{self.filter_bank.n_bands} bands"
            )


@dataclass(frozen=True)
class FeatureVector:
    """Concatenated per-band log-power features of one segment."""

    values: np.ndarray
    segment_index: int = -1
    trial_id: str = ""

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not np.isfinite(values).all():
            raise InvalidConfig("feature values must be finite")


def normalized_cov(x: np.ndarray) -> np.ndarray:
    """Trace-normalized second-moment matrix X X^T / trace(X X^T)."""
    x = np.asarray(x, dtype=np.float64)
    s = x @ x.T
    tr = np.trace(s)
    if not np.isfinite(tr) or tr <= 0:
        raise DegenerateSegment("segment has zero total power")
    return s / tr


def normalized_cov_stack(segments: np.ndarray) -> np.ndarray:
    """Trace-normalized covariance of each segment in a (s, ch, n) stack."""
    segments = np.asarray(segments, dtype=np.float64)
    covs = segments @ segments.transpose(0, 2, 1)
    traces = np.trace(covs, axis1=1, axis2=2)
    if not np.isfinite(traces).all() or np.any(traces <= 0):
        raise DegenerateSegment("a segment has zero total power")
    return covs / traces[:, None, None]


def class_covariance(segments) -> np.ndarray:
    """Average trace-normalized covariance over a list of segments.

    The result is symmetric positive semi-definite with unit trace.
    """
    if isinstance(segments, np.ndarray) and segments.ndim == 3:
        stack = segments
    else:
        segments = list(segments)
        if not segments:
            raise EmptyInput("need at least one segment")
        shapes = {np.shape(s) for s in segments}
        if len(shapes) > 1:
            raise DimensionMismatch(f"segments disagree in shape: {shapes}")
        stack = np.stack([np.asarray(s, dtype=np.float64) for s in segments])
    if stack.shape[0] == 0:
        raise EmptyInput("need at least one segment")
    return normalized_cov_stack(stack).mean(axis=0)


def shrink_covariance(cov: np.ndarray, gamma: float) -> np.ndarray:
    """Shrink toward the scaled identity: (1-g) C + g (trace(C)/n) I."""
    n = cov.shape[0]
    return (1.0 - gamma) * cov + gamma * (np.trace(cov) / n) * np.eye(n)


def fit_csp(cov_active: np.ndarray, cov_rest: np.ndarray, m_pairs: int,
            gamma: float = 0.0, band_index: int = -1) -> CspModel:
    """Fit CSP filters from two class covariances.

    Both covariances are shrunk toward the scaled identity by ``gamma``,
    then the generalized eigenproblem is solved by whitening the composite
    covariance. Retains the m_pairs largest and m_pairs smallest
    eigenvalues; each retained filter w satisfies w^T (C1 + C2) w = 1.
    """
    cov_active = np.asarray(cov_active, dtype=np.float64)
    cov_rest = np.asarray(cov_rest, dtype=np.float64)
    if cov_active.shape != cov_rest.shape or cov_active.ndim != 2 \
            or cov_active.shape[0] != cov_active.shape[1]:
        raise DimensionMismatch(
            f"covariance shapes disagree: {cov_active.shape} vs {cov_rest.shape}"
        )
    n = cov_active.shape[0]
    if not 0 <= gamma <= 1:
        raise InvalidConfig("gamma must lie in [0, 1]")
    if m_pairs < 1 or 2 * m_pairs > n:
        raise InvalidConfig(f"need 1 <= 2*m_pairs <= {n}, got m_pairs={m_pairs}")

    cov_active = shrink_covariance(cov_active, gamma)
    cov_rest = shrink_covariance(cov_rest, gamma)
    composite = cov_active + cov_rest

    evals, evecs = np.linalg.eigh(composite)
    if evals[-1] <= 0 or evals[0] <= _RANK_TOL * evals[-1]:
        raise SingularComposite(
            "composite covariance is numerically singular; raise gamma"
        )
    whitener = (evecs / np.sqrt(evals)).T  # rows whiten the composite
    s_active = whitener @ cov_active @ whitener.T
    s_active = 0.5 * (s_active + s_active.T)
    lambdas, v = np.linalg.eigh(s_active)  # ascending in [0, 1]
    full = v.T @ whitener  # rows are generalized eigenvectors

    order = np.argsort(lambdas)[::-1]
    keep = np.concatenate([order[:m_pairs], order[n - m_pairs:]])
    projection = full[keep]
    eigenvalues = lambdas[keep]

    # deterministic sign: largest-magnitude entry of each filter positive
    flips = np.sign(projection[np.arange(len(keep)),
                               np.argmax(np.abs(projection), axis=1)])
    projection = projection * flips[:, None]
    return CspModel(projection, eigenvalues, m_pairs, band_index)


def log_power_features(model: CspModel, power: np.ndarray) -> np.ndarray:
    """Log of normalized filter powers; ``power`` is (n_segments, n_filters)."""
    totals = power.sum(axis=1, keepdims=True)
    if np.any(totals <= 0) or not np.isfinite(totals).all():
        raise DegenerateSegment("projected segment has zero power")
    return np.log(power / totals)


def features_from_covs(model: CspModel, covs: np.ndarray) -> np.ndarray:
    """Per-segment features from (already trace-normalized) covariances."""
    power = _kernels.projected_power(model.projection, covs)
    return log_power_features(model, power)


def extract_features(model: SpatialFilterModel,
                     eeg_segment_per_band: Sequence[np.ndarray],
                     segment_index: int = -1,
                     trial_id: str = "") -> FeatureVector:
    """Features of one segment, concatenated across filter-bank bands.

    For each band the segment is projected through that band's filters,
    per-filter mean power is normalized by the band total, and the log is
    taken. Positive rescaling of the input leaves the result unchanged.
    """
    if len(eeg_segment_per_band) != len(model.per_band):
        raise DimensionMismatch(
            f"{len(eeg_segment_per_band)} band segments for "
            f"{len(model.per_band)} band models"
        )
    parts = []
    for band_model, seg in zip(model.per_band, eeg_segment_per_band):
        seg = np.asarray(seg, dtype=np.float64)
        if seg.ndim != 2 or seg.shape[0] != band_model.n_channels:
            raise DimensionMismatch(
                f"segment shape {seg.shape} does not match "
                f"{band_model.n_channels} model channels"
            )
        projected = band_model.projection @ seg
        power = np.mean(projected * projected, axis=1)[None, :]
        parts.append(log_power_features(band_model, power)[0])
    return FeatureVector(np.concatenate(parts), segment_index, trial_id)
