"""Kernel dispatch.

The backend is picked once at import time from the environment variable
``BREGMAN_MARGIN_BACKEND`` (``numba``, the default, or ``numpy``). If numba
cannot be imported the numpy path is used.

``bppa_inner`` status codes:
    0  finished (step budget used up or gradient tolerance met)
    1  backtracking exhausted with a genuine increase of the objective
    2  stopped early: the trial step no longer changes x at double precision

Steps are accepted when phi rises by at most 64 eps phi, since a
decrease smaller than that cannot be resolved.
"""
import os
import warnings

from . import _kernels_numpy

STATUS_OK = 0
STATUS_BACKTRACK_FAILED = 1
STATUS_STALLED = 2

_requested = os.environ.get("BREGMAN_MARGIN_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"BREGMAN_MARGIN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from . import _kernels_numba as _impl
    except ImportError:  # pragma: no cover
        warnings.warn("numba unavailable, falling back to the numpy kernels")
        _impl = _kernels_numpy
else:
    _impl = _kernels_numpy

BACKEND = "numba" if _impl is not _kernels_numpy else "numpy"

exp_loss = _impl.exp_loss
exp_loss_grad = _impl.exp_loss_grad
bppa_inner = _impl.bppa_inner
grid_min_margins = _impl.grid_min_margins
dual_coordinate_ascent = _impl.dual_coordinate_ascent


def implementations():
    """Both kernel modules keyed by name (numba only if importable)."""
    out = {"numpy": _kernels_numpy}
    try:
        from . import _kernels_numba
    except ImportError:  # pragma: no cover
        return out
    out["numba"] = _kernels_numba
    return out
