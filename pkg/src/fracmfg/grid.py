"""Periodic grids on the unit torus and discrete differential operators.

Grid functions are plain numpy arrays of shape ``grid.shape`` (``(n_h,)`` in
1D, ``(n_h, n_h)`` in 2D); axis 0 is the first spatial coordinate. All index
arithmetic wraps around (periodic boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MASS_TOL = 1e-12

# 5-point Gauss-Legendre rule on [-1/2, 1/2], weights summing to 1
_GL_NODES = 0.5 * np.array(
    [
        -0.9061798459386640,
        -0.5384693101056831,
        0.0,
        0.5384693101056831,
        0.9061798459386640,
    ]
)
_GL_WEIGHTS = 0.5 * np.array(
    [
        0.2369268850561891,
        0.4786286704993665,
        0.5688888888888889,
        0.4786286704993665,
        0.2369268850561891,
    ]
)


class GridError(ValueError):
    """Invalid grid data or mismatched grids."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on the unit torus, ``n_h`` cells per axis."""

    dim: int
    n_h: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.n_h < 2:
            raise GridError(f"n_h must be >= 2, got {self.n_h}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_h

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_h,) * self.dim

    @property
    def n_points(self) -> int:
        return self.n_h**self.dim

    def points(self) -> np.ndarray:
        """Grid point coordinates, shape ``shape + (dim,)``."""
        axes = [np.arange(self.n_h) * self.h] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def function(self, values) -> np.ndarray:
        """Validate and return an array as a grid function on this grid."""
        arr = np.asarray(values, dtype=float)
        if arr.shape != self.shape:
            raise GridError(f"expected shape {self.shape}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise GridError("grid function contains non-finite values")
        return arr

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative grid function with unit discrete mass (element of K_h)."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = self.grid.function(self.values)
        object.__setattr__(self, "values", vals)
        if vals.min() < 0.0:
            raise GridError(f"measure has negative value {vals.min():.3e}")
        mass = inner_product(self.grid, vals, np.ones(self.grid.shape))
        if abs(mass - 1.0) > MASS_TOL:
            raise GridError(f"measure mass {mass!r} deviates from 1 by more than {MASS_TOL}")


def inner_product(grid: TorusGrid, u: np.ndarray, v: np.ndarray) -> float:
    """(u, v)_2 = h^dim * sum_i u_i v_i."""
    u = grid.function(u)
    v = grid.function(v)
    return grid.h**grid.dim * float(np.sum(u * v))


def norm_2(grid: TorusGrid, u: np.ndarray) -> float:
    """Discrete L2 norm induced by ``inner_product``."""
    return float(np.sqrt(inner_product(grid, u, u)))


def norm_inf(u: np.ndarray) -> float:
    """Max absolute value."""
    return float(np.max(np.abs(u)))


def forward_diff(grid: TorusGrid, u: np.ndarray, axis: int) -> np.ndarray:
    """(D+ u)_i = (u_{i+1} - u_i)/h along ``axis``, periodic."""
    if not 0 <= axis < grid.dim:
        raise GridError(f"axis {axis} invalid for dim {grid.dim}")
    u = grid.function(u)
    return (np.roll(u, -1, axis=axis) - u) / grid.h


def discrete_gradient(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """One-sided difference tuple per point, shape ``(2*dim,) + grid.shape``.

    Entries per axis a are ((D_a+ u) at the point, (D_a+ u) one cell back),
    i.e. the forward and backward differences entering the upwind Hamiltonian.
    """
    u = grid.function(u)
    comps = []
    for axis in range(grid.dim):
        fd = forward_diff(grid, u, axis)
        comps.append(fd)
        comps.append(np.roll(fd, 1, axis=axis))
    return np.stack(comps)


def discrete_laplacian(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """Standard 3/5-point periodic Laplacian."""
    u = grid.function(u)
    out = -2.0 * grid.dim * u
    for axis in range(grid.dim):
        out += np.roll(u, -1, axis=axis) + np.roll(u, 1, axis=axis)
    return out / grid.h**2


def cell_average_density(grid: TorusGrid, m0: Callable[[np.ndarray], np.ndarray]) -> DiscreteMeasure:
    """Embed a continuous density into K_h by per-cell quadrature averages.

    ``m0`` must accept an array of points of shape ``(..., dim)`` and return
    values of shape ``(...,)``. Cell means are computed with a tensorized
    5-point Gauss-Legendre rule and renormalized to unit discrete mass.
    """
    pts = grid.points()  # shape + (dim,)
    vals = np.zeros(grid.shape)
    if grid.dim == 1:
        for xi, w in zip(_GL_NODES, _GL_WEIGHTS):
            vals += w * m0(pts + xi * grid.h)
    else:
        for xi, wi in zip(_GL_NODES, _GL_WEIGHTS):
            for xj, wj in zip(_GL_NODES, _GL_WEIGHTS):
                shifted = pts + np.array([xi, xj]) * grid.h
                vals += wi * wj * m0(shifted)
    vals = grid.function(vals)
    if vals.min() < 0.0:
        raise GridError("density sampler returned negative values")
    mass = grid.h**grid.dim * vals.sum()
    if mass <= 0.0:
        raise GridError("density sampler is identically zero on the grid")
    return DiscreteMeasure(grid, vals / mass)
