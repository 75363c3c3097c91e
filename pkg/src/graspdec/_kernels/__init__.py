"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is selected automatically when it was built;
set GRASPDEC_KERNELS=reference to force the numpy implementations,
or GRASPDEC_KERNELS=native to insist on the compiled ones.
"""
import os

import numpy as np

from . import _reference

_FORCED = os.environ.get("GRASPDEC_KERNELS", "").strip().lower()

# note: assigning _native before the from-import would shadow the submodule
# (package attributes are this module's globals), so the None default lives
# in the except/else branches only
if _FORCED != "reference":
    try:
        from . import _native
    except ImportError:
        _native = None
        if _FORCED == "native":
            raise ImportError(
                "GRASPDEC_KERNELS=native but the compiled kernels are not "
                "built; reinstall with a C compiler available"
            )
else:
    _native = None

_impl = _native if _native is not None else _reference


def backend() -> str:
    """Name of the active kernel backend: 'native' or 'reference'."""
    return "native" if _impl is _native else "reference"


def backend_module(name: str):
    """Fetch a backend module by name (for tests and benchmarks)."""
    if name == "reference":
        return _reference
    if name == "native":
        if _native is None:
            raise ImportError("native kernels are not built")
        return _native
    raise ValueError(f"unknown kernel backend {name!r}")


def sliding_rms(x, starts, win_n):
    """RMS of each window x[s : s + win_n]; see _reference.sliding_rms."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.intp)
    return _impl.sliding_rms(x, starts, int(win_n))


def mse_to_stack(pattern, stack):
    """MSE of one pattern against a stack; see _reference.mse_to_stack."""
    pattern = np.ascontiguousarray(pattern, dtype=np.float64)
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    return _impl.mse_to_stack(pattern, stack)


def projected_power(projection, covs):
    """diag(P C P^T) per segment; see _reference.projected_power."""
    projection = np.ascontiguousarray(projection, dtype=np.float64)
    covs = np.ascontiguousarray(covs, dtype=np.float64)
    return _impl.projected_power(projection, covs)
