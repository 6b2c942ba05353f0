"""Kernel backend selection.

The compiled Cython extension is preferred when present; setting the
environment variable ``FRACMFG_KERNELS=python`` forces the numpy fallback.
Both backends expose the same three functions and are interchangeable.
"""

import os

import numpy as np

from fracmfg.kernels import _reference

if os.environ.get("FRACMFG_KERNELS", "").lower() == "python":
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from fracmfg.kernels import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _reference
        BACKEND = "python"


def godunov_value(q, beta, scale):
    """Godunov upwind Hamiltonian power term at each grid point.

    ``q`` has shape (2*dim, npts); rows alternate (minus-part, plus-part)
    per axis. Returns an array of shape (npts,).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty(q.shape[1])
    _impl.godunov_value(q, float(beta), float(scale), out)
    return out


def godunov_grad(q, beta, scale):
    """Gradient of ``godunov_value`` w.r.t. q, shape (2*dim, npts)."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty_like(q)
    _impl.godunov_grad(q, float(beta), float(scale), out)
    return out


def weighted_history_sum(w, hist):
    """sum_k w[k] * hist[k, :] for a stacked time history, shape (npts,)."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    hist = np.ascontiguousarray(hist, dtype=np.float64)
    out = np.empty(hist.shape[1])
    _impl.weighted_history_sum(w, hist, out)
    return out
