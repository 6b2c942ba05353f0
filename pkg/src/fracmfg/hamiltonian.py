"""Godunov-type numerical Hamiltonians for the upwind scheme.

The reference family is

    g(x, q) = scale * ((q1^-)^2 + (q2^+)^2 [+ (q3^-)^2 + (q4^+)^2])^(beta/2) + c(x)

which is monotone in the upwind sense, consistent with
H(x, p) = scale * |p|^beta + c(x), continuously differentiable and convex.
``scale = 1/2, beta = 2`` gives the quadratic Hamiltonian |p|^2 / 2 + c(x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fracmfg import kernels
from fracmfg.grid import TorusGrid


@dataclass(frozen=True)
class GodunovHamiltonian:
    """Upwind numerical Hamiltonian with power ``beta`` and sampled potential c."""

    grid: TorusGrid
    beta: float = 2.0
    scale: float = 1.0
    potential: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.beta < 2.0:
            raise ValueError(f"beta must be >= 2, got {self.beta}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.potential is not None:
            object.__setattr__(self, "potential", self.grid.function(self.potential))

    def _c(self) -> np.ndarray:
        if self.potential is None:
            return np.zeros(self.grid.shape)
        return self.potential

    def value_grid(self, q: np.ndarray) -> np.ndarray:
        """g at every grid point; ``q`` has shape (2*dim,) + grid.shape."""
        flat = q.reshape(q.shape[0], -1)
        out = kernels.godunov_value(flat, self.beta, self.scale)
        return out.reshape(self.grid.shape) + self._c()

    def grad_grid(self, q: np.ndarray) -> np.ndarray:
        """dg/dq at every grid point, same shape as ``q``."""
        flat = q.reshape(q.shape[0], -1)
        out = kernels.godunov_grad(flat, self.beta, self.scale)
        return out.reshape(q.shape)

    def grad_directional(self, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        """Directional derivative of ``grad_grid`` at q along dq (semismooth).

        Per point, with r_k the active one-sided part of q_k and s = sum r^2:

            d(g_q)_k = scale * beta * [(beta/2 - 1) s^(beta/2-2) ds r_k
                                       + s^(beta/2-1) dr_k],

        where dr_k = dq_k on the active side and 0 at kinks (one-sided value).
        """
        if q.shape != dq.shape:
            raise ValueError("q and dq must have the same shape")
        even = (np.arange(q.shape[0]) % 2 == 0).reshape((-1,) + (1,) * (q.ndim - 1))
        active = np.where(even, q < 0.0, q > 0.0)
        r = np.where(active, q, 0.0)
        dr = np.where(active, dq, 0.0)
        if self.beta == 2.0:
            return 2.0 * self.scale * dr
        s = np.sum(r * r, axis=0)
        ds = 2.0 * np.sum(r * dr, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            pow1 = np.where(s > 0.0, s ** (0.5 * self.beta - 1.0), 0.0)
            pow2 = np.where(s > 0.0, s ** (0.5 * self.beta - 2.0), 0.0)
        return self.scale * self.beta * ((0.5 * self.beta - 1.0) * pow2 * ds * r + pow1 * dr)

    def eval_g(self, cell_index, q) -> float:
        """g at one cell for a single one-sided difference tuple ``q``."""
        qa = np.asarray(q, dtype=float).reshape(-1, 1)
        val = float(kernels.godunov_value(qa, self.beta, self.scale)[0])
        return val + float(self._c()[cell_index])

    def grad_g(self, cell_index, q) -> np.ndarray:
        """dg/dq at one cell; the kink at q_k = 0 uses the one-sided value 0."""
        qa = np.asarray(q, dtype=float).reshape(-1, 1)
        return kernels.godunov_grad(qa, self.beta, self.scale)[:, 0]

    def eval_H(self, cell_index, p) -> float:
        """Reference Hamiltonian H(x, p) = scale * |p|^beta + c(x)."""
        p = np.asarray(p, dtype=float)
        return self.scale * float(np.sum(p**2)) ** (0.5 * self.beta) + float(self._c()[cell_index])


@dataclass(frozen=True)
class AssumptionReport:
    """Worst-case violations of the structural assumptions, sampled randomly."""

    monotonicity: float
    consistency: float
    convexity: float

    @property
    def worst(self) -> float:
        return max(self.monotonicity, self.consistency, self.convexity)


def verify_assumptions(ham: GodunovHamiltonian, sample_count: int = 200, seed: int = 0) -> AssumptionReport:
    """Sample random arguments and report worst-case assumption violations.

    Monotonicity is probed by finite perturbations in the signed upwind
    directions, consistency by collapsing the one-sided tuple onto a single
    gradient, convexity by the midpoint inequality.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    dim = ham.grid.dim
    ncomp = 2 * dim
    cell = (0,) * dim
    mono = 0.0
    cons = 0.0
    conv = 0.0
    for _ in range(sample_count):
        q = rng.uniform(-2.0, 2.0, ncomp)
        eps = rng.uniform(0.05, 0.5)
        base = ham.eval_g(cell, q)
        for k in range(ncomp):
            qp = q.copy()
            qp[k] += eps
            delta = ham.eval_g(cell, qp) - base
            # even components: g nonincreasing; odd components: nondecreasing
            mono = max(mono, delta if k % 2 == 0 else -delta)
        p = rng.uniform(-2.0, 2.0, dim)
        collapsed = np.repeat(p, 2)
        cons = max(cons, abs(ham.eval_g(cell, collapsed) - ham.eval_H(cell, p)))
        q2 = rng.uniform(-2.0, 2.0, ncomp)
        mid = ham.eval_g(cell, 0.5 * (q + q2))
        conv = max(conv, mid - 0.5 * (ham.eval_g(cell, q) + ham.eval_g(cell, q2)))
    return AssumptionReport(monotonicity=mono, consistency=cons, convexity=conv)
