"""Pure-numpy fallback implementations of the hot kernels.

Used when the compiled extension ``fracmfg.kernels._core`` is unavailable,
and as the reference the compiled kernels are tested against.
"""

import numpy as np


def _upwind_square_sum(q):
    # even rows act through their negative part, odd rows through the positive
    s = np.zeros(q.shape[1])
    for k in range(0, q.shape[0], 2):
        s += np.minimum(q[k], 0.0) ** 2
        s += np.maximum(q[k + 1], 0.0) ** 2
    return s


def godunov_value(q, beta, scale, out):
    """out[i] = scale * (sum of squared upwind parts at point i)**(beta/2)."""
    np.copyto(out, scale * _upwind_square_sum(q) ** (0.5 * beta))


def godunov_grad(q, beta, scale, out):
    """Partial derivatives of ``godunov_value``; 0 at the kinks."""
    s = _upwind_square_sum(q)
    if beta == 2.0:
        fac = np.full_like(s, scale * beta)
    else:
        fac = scale * beta * np.where(s > 0.0, s, 1.0) ** (0.5 * beta - 1.0)
        fac[s == 0.0] = 0.0
    for k in range(0, q.shape[0], 2):
        out[k] = fac * np.minimum(q[k], 0.0)
        out[k + 1] = fac * np.maximum(q[k + 1], 0.0)


def weighted_history_sum(w, hist, out):
    """out[i] = sum_k w[k] * hist[k, i] (the L1 memory accumulation)."""
    np.copyto(out, w @ hist)
