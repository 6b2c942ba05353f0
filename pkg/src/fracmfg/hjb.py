"""Backward-in-time sweep for the discrete fractional HJB equation.

Each time step is the monotone stationary problem

    delta * U - sigma * Lap_h U + g(x, [D_h U]) = V,

solved by a damped semismooth Newton method with a relaxation fallback. The
sweep feeds the nonlocal L1 memory sum into V at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from fracmfg.assembly import drift_diffusion_matrix, solve_sparse
from fracmfg.caputo import L1Weights
from fracmfg.coupling import AffineCoupling
from fracmfg.grid import TorusGrid, discrete_gradient, discrete_laplacian, norm_inf
from fracmfg.hamiltonian import GodunovHamiltonian
from fracmfg.kernels import weighted_history_sum


class HjbSolveError(RuntimeError):
    """Stationary solve failed to reach the requested tolerance."""


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for the stationary solves and the MFG fixed point."""

    newton_tol: float = 1e-10
    newton_max: int = 100
    fp_tol: float = 1e-6
    fp_max: int = 200
    theta: float = 0.5
    picard_max: int = 20
    gmres_tol: float = 1e-4

    def __post_init__(self):
        if self.newton_tol <= 0.0 or self.fp_tol <= 0.0 or self.gmres_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if self.picard_max < 0:
            raise ValueError(f"picard_max must be >= 0, got {self.picard_max}")


@dataclass(frozen=True)
class HjbStepProblem:
    """One implicit step: delta * U - sigma * Lap U + g(., [DU]) = rhs."""

    grid: TorusGrid
    hamiltonian: GodunovHamiltonian
    sigma: float
    delta: float
    rhs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        object.__setattr__(self, "rhs", self.grid.function(self.rhs))

    def residual(self, u: np.ndarray) -> np.ndarray:
        grid = self.grid
        out = self.delta * u + self.hamiltonian.value_grid(discrete_gradient(grid, u)) - self.rhs
        if self.sigma != 0.0:
            out -= self.sigma * discrete_laplacian(grid, u)
        return out


def solve_stationary(problem: HjbStepProblem, config: SolverConfig, initial: np.ndarray | None = None) -> np.ndarray:
    """Damped semismooth Newton for the monotone stationary problem.

    Initial guess defaults to zero. On residual increase the Newton step is
    halved; if no decrease is found, one relaxation step U <- U - residual /
    (2 * delta) is taken instead. Raises ``HjbSolveError`` on nonconvergence.
    """
    grid = problem.grid
    u = grid.zeros() if initial is None else grid.function(initial).copy()
    res = problem.residual(u)
    rnorm = norm_inf(res)
    eye = sp.identity(grid.n_points, format="csr")
    for _ in range(config.newton_max):
        if rnorm <= config.newton_tol:
            return u
        jac = problem.delta * eye + drift_diffusion_matrix(grid, problem.hamiltonian, u, problem.sigma)
        step = solve_sparse(jac, -res.ravel()).reshape(grid.shape)
        damping = 1.0
        accepted = False
        while damping >= 1.0 / 64.0:
            trial = u + damping * step
            tres = problem.residual(trial)
            tnorm = norm_inf(tres)
            if tnorm < rnorm:
                u, res, rnorm = trial, tres, tnorm
                accepted = True
                break
            damping *= 0.5
        if not accepted:
            # monotone relaxation fallback; contraction factor < 1 for this system
            u = u - res / (2.0 * problem.delta)
            res = problem.residual(u)
            rnorm = norm_inf(res)
    if rnorm <= config.newton_tol:
        return u
    raise HjbSolveError(f"stationary solve stalled at residual {rnorm:.3e} (tol {config.newton_tol:.1e})")


def backward_sweep(
    grid: TorusGrid,
    weights: L1Weights,
    ham: GodunovHamiltonian,
    coupling: AffineCoupling,
    sigma: float,
    m_traj: np.ndarray,
    u_terminal: np.ndarray,
    config: SolverConfig,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """Solve the backward HJB scheme for a frozen density trajectory.

    ``m_traj`` stacks M^0..M^N; ``source`` optionally stacks the HJB
    perturbations a^0..a^{N-1}. Returns U^0..U^N stacked along axis 0.
    """
    N = weights.n_steps
    if m_traj.shape[0] != N + 1:
        raise ValueError(f"m_traj must have length N + 1 = {N + 1}")
    u = np.empty((N + 1,) + grid.shape)
    u[N] = grid.function(u_terminal)
    for n in range(N - 1, -1, -1):
        mem = weighted_history_sum(weights.cbar[n, n + 1 :], u[n + 1 :].reshape(N - n, -1))
        rhs = mem.reshape(grid.shape) / weights.rho + coupling.eval(m_traj[n + 1], n + 1)
        if source is not None:
            rhs = rhs + source[n]
        step = HjbStepProblem(grid=grid, hamiltonian=ham, sigma=sigma, delta=1.0 / weights.rho, rhs=rhs)
        try:
            u[n] = solve_stationary(step, config, initial=u[n + 1])
        except HjbSolveError as exc:
            raise HjbSolveError(f"backward sweep failed at step n={n}: {exc}") from exc
    return u


def hjb_residual(
    grid: TorusGrid,
    weights: L1Weights,
    ham: GodunovHamiltonian,
    coupling: AffineCoupling,
    sigma: float,
    u_traj: np.ndarray,
    m_traj: np.ndarray,
) -> float:
    """Sup-norm residual of the backward scheme over all steps and points."""
    N = weights.n_steps
    worst = 0.0
    for n in range(N):
        mem = weighted_history_sum(weights.cbar[n, n + 1 :], u_traj[n + 1 :].reshape(N - n, -1))
        dalpha = (u_traj[n] - mem.reshape(grid.shape)) / weights.rho
        res = dalpha + ham.value_grid(discrete_gradient(grid, u_traj[n])) - coupling.eval(m_traj[n + 1], n + 1)
        if sigma != 0.0:
            res -= sigma * discrete_laplacian(grid, u_traj[n])
        worst = max(worst, norm_inf(res))
    return worst


def lipschitz_seminorm(grid: TorusGrid, u_traj: np.ndarray) -> np.ndarray:
    """Per-step sup norm of the one-sided difference tuple, ||D_h U^n||_inf."""
    return np.array([norm_inf(discrete_gradient(grid, u_traj[n])) for n in range(u_traj.shape[0])])


def barrier_bound(
    grid: TorusGrid,
    weights: L1Weights,
    ham: GodunovHamiltonian,
    coupling: AffineCoupling,
    u_terminal: np.ndarray,
    m_traj: np.ndarray,
) -> np.ndarray:
    """Sup-norm barrier ||U^N||_inf + M0 * Gamma(2-a)/(a(1-a)) * ((N-n) dt)^a per step.

    M0 bounds |H(x, 0) - f_h[M^{n+1}]| over all cells and steps.
    """
    import math

    alpha = weights.alpha
    if alpha >= 1.0:
        raise ValueError("barrier bound requires alpha < 1")
    N = weights.n_steps
    h_at_zero = ham.value_grid(np.zeros((2 * grid.dim,) + grid.shape))
    m0_const = max(norm_inf(h_at_zero - coupling.eval(m_traj[n + 1], n + 1)) for n in range(N))
    n_idx = np.arange(N + 1)
    growth = m0_const * math.gamma(2.0 - alpha) / (alpha * (1.0 - alpha)) * ((N - n_idx) * weights.dt) ** alpha
    return norm_inf(u_terminal) + growth
