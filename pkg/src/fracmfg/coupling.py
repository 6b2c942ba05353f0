"""Local affine coupling cost f_h[M] = F0(x, t) + lambda * M.

F0 defaults to the moving-well running cost
``5 * (x - (1 - sin(2 pi t)) / 2)^2`` acting on the first coordinate.
``lam >= 0`` makes the coupling monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fracmfg.caputo import TimeAxis
from fracmfg.grid import TorusGrid, inner_product


def moving_well_potential(points: np.ndarray, t: float) -> np.ndarray:
    """5 * (x1 - (1 - sin(2 pi t)) / 2)^2 on points of shape (..., dim)."""
    target = (1.0 - np.sin(2.0 * np.pi * t)) / 2.0
    return 5.0 * (points[..., 0] - target) ** 2


@dataclass(frozen=True)
class AffineCoupling:
    """Running cost F0(x, t) plus a local density penalization lambda * M."""

    grid: TorusGrid
    time_axis: TimeAxis
    lam: float = 0.0
    potential: Callable[[np.ndarray, float], np.ndarray] = moving_well_potential
    _points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        object.__setattr__(self, "_points", self.grid.points())

    def potential_grid(self, time_index: int) -> np.ndarray:
        """F0 sampled on the grid at t_{time_index}."""
        if not 0 <= time_index <= self.time_axis.n_steps:
            raise ValueError(f"time_index {time_index} outside 0..{self.time_axis.n_steps}")
        t = time_index * self.time_axis.dt
        return self.grid.function(self.potential(self._points, t))

    def eval(self, m: np.ndarray, time_index: int) -> np.ndarray:
        """f_h[M] at t_{time_index}: pointwise F0 + lambda * M."""
        return self.potential_grid(time_index) + self.lam * self.grid.function(m)

    def monotonicity_gap(self, m: np.ndarray, m_bar: np.ndarray, time_index: int) -> float:
        """(f_h[M] - f_h[Mbar], M - Mbar)_2; equals lambda * ||M - Mbar||_2^2 here."""
        diff = self.grid.function(m) - self.grid.function(m_bar)
        fd = self.eval(m, time_index) - self.eval(m_bar, time_index)
        return inner_product(self.grid, fd, diff)
