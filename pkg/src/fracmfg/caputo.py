"""L1 discretization of forward and backward Caputo derivatives.

Coefficient tables are stored in full lower/upper triangular form:
``c[n, k]`` holds the forward coefficient c_k^n (0 <= k < n <= N) and
``cbar[n, k]`` the backward coefficient cbar_n^k (0 <= n < k <= N).
The b-weights give the equivalent backward-difference form of the forward
operator. alpha = 1 is handled as the backward-Euler limit, where the
generic power formulas degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from fracmfg.kernels import weighted_history_sum

COEFF_TOL = 1e-13


class CaputoError(ValueError):
    """Invalid fractional-order / time-axis data."""


@dataclass(frozen=True)
class TimeAxis:
    """Uniform time grid t_n = n * dt on [0, T]."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise CaputoError(f"horizon must be positive, got {self.horizon}")
        if self.n_steps < 1:
            raise CaputoError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class L1Weights:
    """Coefficient tables of the L1 scheme for a fixed (alpha, dt, N)."""

    alpha: float
    dt: float
    n_steps: int
    rho: float
    c: np.ndarray = field(repr=False)
    cbar: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)


def build_weights(alpha: float, axis: TimeAxis) -> L1Weights:
    """Build and validate the L1 coefficient tables.

    Raises ``CaputoError`` if alpha is outside (0, 1] or if the constructed
    tables violate positivity or the partition-of-unity sums.
    """
    if not 0.0 < alpha <= 1.0:
        raise CaputoError(f"alpha must be in (0, 1], got {alpha}")
    N = axis.n_steps
    dt = axis.dt
    rho = math.gamma(2.0 - alpha) * dt**alpha

    c = np.zeros((N + 1, N + 1))
    cbar = np.zeros((N + 1, N + 1))
    b = np.zeros(N + 1)
    if alpha == 1.0:
        # backward-Euler limit: only the most recent step contributes
        for n in range(1, N + 1):
            c[n, n - 1] = 1.0
        for n in range(N):
            cbar[n, n + 1] = 1.0
        b[0] = 1.0
    else:
        # d[j] = j^(1-alpha); differences of d build every coefficient
        d = np.arange(N + 2, dtype=float) ** (1.0 - alpha)
        for n in range(1, N + 1):
            c[n, 0] = d[n] - d[n - 1]
            if n > 1:
                j = np.arange(n - 1, 0, -1)  # j = n - k for k = 1..n-1
                c[n, 1:n] = 2.0 * d[j] - d[j + 1] - d[j - 1]
        for n in range(N):
            if n < N - 1:
                j = np.arange(1, N - n)  # j = k - n for k = n+1..N-1
                cbar[n, n + 1 : N] = 2.0 * d[j] - d[j + 1] - d[j - 1]
            cbar[n, N] = d[N - n] - d[N - n - 1]
        b = dt ** (1.0 - alpha) / math.gamma(2.0 - alpha) * (d[1 : N + 2] - d[: N + 1])

    w = L1Weights(alpha=alpha, dt=dt, n_steps=N, rho=rho, c=c, cbar=cbar, b=b)
    _validate(w)
    return w


def _validate(w: L1Weights) -> None:
    # strict positivity of every coefficient holds for alpha < 1 only; the
    # backward-Euler limit stores a single unit weight per row
    strict = w.alpha < 1.0
    N = w.n_steps
    for n in range(1, N + 1):
        row = w.c[n, :n]
        if strict and row.min() <= 0.0:
            raise CaputoError(f"nonpositive forward coefficient at n={n}")
        if abs(row.sum() - 1.0) > COEFF_TOL:
            raise CaputoError(f"forward coefficients at n={n} do not sum to 1")
    for n in range(N):
        row = w.cbar[n, n + 1 :]
        if strict and row.min() <= 0.0:
            raise CaputoError(f"nonpositive backward coefficient at n={n}")
        if abs(row.sum() - 1.0) > COEFF_TOL:
            raise CaputoError(f"backward coefficients at n={n} do not sum to 1")
    if w.rho <= 0.0:
        raise CaputoError("rho must be positive")


def forward_caputo(weights: L1Weights, history: np.ndarray) -> np.ndarray:
    """Discrete forward Caputo derivative at step n = len(history) - 1.

    ``history`` stacks M^0..M^n along axis 0 (length n+1 >= 2). Returns
    (M^n - sum_k c_k^n M^k) / rho.
    """
    hist = np.asarray(history, dtype=float)
    n = hist.shape[0] - 1
    if n < 1:
        raise CaputoError("history must contain at least two steps")
    if n > weights.n_steps:
        raise CaputoError(f"history length {n + 1} exceeds table size {weights.n_steps + 1}")
    shape = hist.shape[1:]
    flat = hist.reshape(n + 1, -1)
    mem = weighted_history_sum(weights.c[n, :n], flat[:n]).reshape(shape)
    return (hist[n] - mem) / weights.rho


def backward_caputo(weights: L1Weights, future: np.ndarray) -> np.ndarray:
    """Discrete backward Caputo derivative at step n = N - len(future) + 1.

    ``future`` stacks U^n..U^N along axis 0 (length N-n+1 >= 2). Returns
    (U^n - sum_k cbar_n^k U^k) / rho.
    """
    fut = np.asarray(future, dtype=float)
    m = fut.shape[0]
    if m < 2:
        raise CaputoError("future must contain at least two steps")
    N = weights.n_steps
    n = N - m + 1
    if n < 0:
        raise CaputoError(f"future length {m} exceeds table size {N + 1}")
    shape = fut.shape[1:]
    flat = fut.reshape(m, -1)
    mem = weighted_history_sum(weights.cbar[n, n + 1 :], flat[1:]).reshape(shape)
    return (fut[0] - mem) / weights.rho


def forward_caputo_bform(weights: L1Weights, history: np.ndarray) -> np.ndarray:
    """Equivalent b-weight form: sum_k b_k (M^{n-k} - M^{n-1-k}) / dt."""
    hist = np.asarray(history, dtype=float)
    n = hist.shape[0] - 1
    if n < 1:
        raise CaputoError("history must contain at least two steps")
    diffs = (hist[1:] - hist[:-1]) / weights.dt  # index k-1 holds (M^k - M^{k-1})/dt
    shape = hist.shape[1:]
    flat = diffs.reshape(n, -1)[::-1]  # reversed: row k is (M^{n-k} - M^{n-1-k})/dt
    return weighted_history_sum(weights.b[:n], np.ascontiguousarray(flat)).reshape(shape)


def discrete_ibp_residual(weights: L1Weights, u_seq: np.ndarray, m_seq: np.ndarray, grid=None) -> float:
    """Absolute residual of the discrete fractional integration-by-parts identity.

    Both sequences stack N+1 grid functions along axis 0. The spatial inner
    product is h^dim-weighted when ``grid`` is given, plain summation otherwise
    (the identity holds either way; the weight is a common factor).
    """
    U = np.asarray(u_seq, dtype=float)
    M = np.asarray(m_seq, dtype=float)
    N = weights.n_steps
    if U.shape[0] != N + 1 or M.shape[0] != N + 1:
        raise CaputoError("sequences must have length N + 1")
    if U.shape != M.shape:
        raise CaputoError("sequences must share a grid shape")
    scale = grid.h**grid.dim if grid is not None else 1.0

    def dot(a, b):
        return scale * float(np.sum(a * b))

    lhs = 0.0
    rhs = 0.0
    for n in range(N):
        lhs += dot(backward_caputo(weights, U[n:]), M[n + 1])
        lhs += weights.cbar[n, N] * dot(U[N], M[n + 1]) / weights.rho
        rhs += dot(forward_caputo(weights, M[: n + 2]), U[n])
        rhs += weights.c[n + 1, 0] * dot(M[0], U[n]) / weights.rho
    return abs(lhs - rhs)


def barrier_margin(weights: L1Weights) -> float:
    """Worst-case slack of the barrier inequality for phi^n = ((N-n) dt)^alpha.

    Returns min_n [backward Caputo of phi at n] - alpha(1-alpha)/Gamma(2-alpha);
    the inequality asserts this is >= 0 (up to round-off).
    """
    N = weights.n_steps
    alpha = weights.alpha
    phi = ((N - np.arange(N + 1)) * weights.dt) ** alpha
    rhs = alpha * (1.0 - alpha) / math.gamma(2.0 - alpha)
    worst = math.inf
    for n in range(N):
        deriv = float(backward_caputo(weights, phi[n:, np.newaxis])[0])
        worst = min(worst, deriv - rhs)
    return worst


def mittag_leffler(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) = sum z^k / Gamma(1+k*alpha).

    Series evaluation with term-ratio truncation at relative 1e-14, carried
    out in extended precision to avoid cancellation for negative arguments.
    Valid for alpha in (0, 1] and |z| <= 50.
    """
    if not 0.0 < alpha <= 1.0:
        raise CaputoError(f"alpha must be in (0, 1], got {alpha}")
    if abs(z) > 50.0:
        raise CaputoError(f"|z| = {abs(z)} outside the validity window [0, 50]")
    with mpmath.workdps(60):
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k / mpmath.gamma(1 + k * alpha)
            total += term
            if k > 0 and abs(term) <= 1e-14 * abs(total):
                break
            if k > 10000:
                raise CaputoError("Mittag-Leffler series failed to converge")
            k += 1
        return float(total)
