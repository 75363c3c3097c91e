"""Numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable,
and the reference the native kernels are tested against.
"""
import numpy as np


def sliding_rms(x, starts, win_n):
    """RMS of each window x[s : s + win_n].

    Args:
        x: 1-D float64 signal.
        starts: window start indices, intp.
        win_n: window length in samples.

    Returns:
        float64 vector of per-window RMS values.
    """
    idx = np.asarray(starts).reshape(-1, 1) + np.arange(win_n)
    windows = x[idx]
    return np.sqrt(np.mean(windows * windows, axis=1))


def mse_to_stack(pattern, stack):
    """Mean squared difference of one pattern against a stack of patterns.

    Args:
        pattern: float64 array (channels, segments).
        stack: float64 array (n_patterns, channels, segments).

    Returns:
        float64 vector of n_patterns mean squared errors.
    """
    diff = stack - pattern
    return np.mean(diff * diff, axis=(1, 2))


def projected_power(projection, covs):
    """Per-segment power of each spatial filter: diag(P C P^T).

    Args:
        projection: float64 array (n_filters, n_channels).
        covs: float64 array (n_segments, n_channels, n_channels).

    Returns:
        float64 array (n_segments, n_filters).
    """
    return np.einsum("fi,sij,fj->sf", projection, covs, projection,
                     optimize=True)
