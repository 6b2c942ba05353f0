"""Coupled solver for the discrete fractional MFG system.

The composed map Phi = Psi2 o Psi1 (backward HJB sweep then forward FP
sweep) is first iterated with damping on the density trajectory; if that
stalls (the linearized best response can be strongly amplifying for sigma =
0 with a stiff density coupling), the solver switches to a semismooth
Newton-GMRES iteration on the fixed-point residual Phi(M) - M, with exact
Jacobian-vector products computed by linearized backward/forward sweeps.
The duality-gap diagnostics expose the three nonnegative terms that drive
uniqueness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from fracmfg import fp, hjb
from fracmfg.assembly import drift_diffusion_matrix, transport_transpose_apply
from fracmfg.caputo import L1Weights, TimeAxis, build_weights
from fracmfg.coupling import AffineCoupling
from fracmfg.grid import TorusGrid, cell_average_density, discrete_gradient, inner_product, norm_2
from fracmfg.hamiltonian import GodunovHamiltonian
from fracmfg.hjb import SolverConfig


class FixedPointError(RuntimeError):
    """Coupled iteration did not reach the requested tolerance."""


@dataclass(frozen=True)
class MfgProblem:
    """Full problem data for one discretized MFG system."""

    grid: TorusGrid
    time_axis: TimeAxis
    alpha: float
    sigma: float
    hamiltonian: GodunovHamiltonian
    coupling: AffineCoupling
    m0: Callable[[np.ndarray], np.ndarray]
    u_terminal: Callable[[np.ndarray], np.ndarray] | None = None

    def build_weights(self) -> L1Weights:
        return build_weights(self.alpha, self.time_axis)

    def initial_measure(self) -> np.ndarray:
        return cell_average_density(self.grid, self.m0).values

    def terminal_value(self) -> np.ndarray:
        if self.u_terminal is None:
            return self.grid.zeros()
        return self.grid.function(self.u_terminal(self.grid.points()))


@dataclass(frozen=True)
class MfgSolution:
    """Converged (or best-effort) trajectories plus iteration diagnostics."""

    u: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    iterations: int
    residual: float
    residual_history: list[float] = field(repr=False)
    converged: bool


def map_psi1(
    problem: MfgProblem,
    config: SolverConfig,
    m_traj: np.ndarray,
    weights: L1Weights | None = None,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """Density trajectory -> value trajectory (backward HJB sweep)."""
    w = weights if weights is not None else problem.build_weights()
    return hjb.backward_sweep(
        problem.grid,
        w,
        problem.hamiltonian,
        problem.coupling,
        problem.sigma,
        m_traj,
        problem.terminal_value(),
        config,
        source=source,
    )


def map_psi2(
    problem: MfgProblem,
    config: SolverConfig,
    u_traj: np.ndarray,
    weights: L1Weights | None = None,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """Value trajectory -> density trajectory (forward FP sweep)."""
    w = weights if weights is not None else problem.build_weights()
    return fp.forward_sweep(
        problem.grid,
        w,
        problem.hamiltonian,
        problem.sigma,
        u_traj,
        problem.initial_measure(),
        source=source,
    )


def _renormalize(grid: TorusGrid, m_traj: np.ndarray) -> np.ndarray:
    # round-off cleanup only: damped averages of K_h elements are in K_h
    scale = grid.h**grid.dim
    masses = scale * m_traj.reshape(m_traj.shape[0], -1).sum(axis=1)
    return m_traj / masses[:, None].reshape((-1,) + (1,) * grid.dim)


class _StepFactorizations:
    """Per-step LU factorizations of J_n = I/rho + K(U^n), reused for both
    linearized sweeps (the FP step matrix is rho * J_n^T)."""

    def __init__(self, grid: TorusGrid, ham: GodunovHamiltonian, sigma: float, rho: float, u_traj: np.ndarray):
        self.dense = grid.n_points <= 1024
        self._lus = []
        delta_eye = sp.identity(grid.n_points, format="csr") / rho
        for n in range(u_traj.shape[0] - 1):
            jac = delta_eye + drift_diffusion_matrix(grid, ham, u_traj[n], sigma)
            if self.dense:
                self._lus.append(scipy.linalg.lu_factor(jac.toarray()))
            else:
                self._lus.append(spla.splu(jac.tocsc()))

    def solve(self, n: int, rhs: np.ndarray, transpose: bool = False) -> np.ndarray:
        if self.dense:
            return scipy.linalg.lu_solve(self._lus[n], rhs, trans=1 if transpose else 0)
        return self._lus[n].solve(rhs, trans="T" if transpose else "N")


def _fixed_point_jacobian(
    problem: MfgProblem,
    weights: L1Weights,
    u_traj: np.ndarray,
    phi_traj: np.ndarray,
    lus: _StepFactorizations,
) -> spla.LinearOperator:
    """Linear operator x -> (d Phi - I) x for x = (dM^1, ..., dM^N) flattened.

    d Phi is evaluated by exact linearized sweeps around (U, Phi(M)): the
    backward sweep propagates the coupling perturbation lam * dM through the
    per-step Jacobians J_n, and the forward sweep propagates both the L1
    memory of dM and the transport perturbation T^T(dg_q) Phi^{n+1}.
    """
    grid = problem.grid
    N = weights.n_steps
    npts = grid.n_points
    lam = problem.coupling.lam
    rho = weights.rho
    dq_base = [discrete_gradient(grid, u_traj[n]) for n in range(N)]

    def matvec(x: np.ndarray) -> np.ndarray:
        dm = x.reshape(N, npts)
        du = np.zeros((N + 1, npts))
        for n in range(N - 1, -1, -1):
            rhs = (weights.cbar[n, n + 1 :] @ du[n + 1 :]) / rho + lam * dm[n]
            du[n] = lus.solve(n, rhs)
        dM = np.zeros((N + 1, npts))
        for n in range(N):
            dgq = problem.hamiltonian.grad_directional(
                dq_base[n], discrete_gradient(grid, du[n].reshape(grid.shape))
            )
            transport = transport_transpose_apply(grid, dgq, phi_traj[n + 1])
            rhs = weights.c[n + 1, : n + 1] @ dM[: n + 1] - rho * transport.ravel()
            dM[n + 1] = lus.solve(n, rhs / rho, transpose=True)
        return (dM[1:] - dm).ravel()

    return spla.LinearOperator((N * npts, N * npts), matvec=matvec)


def solve_mfg(
    problem: MfgProblem,
    config: SolverConfig | None = None,
    initial_density: np.ndarray | None = None,
) -> MfgSolution:
    """Two-phase solve of the coupled fixed point M = Phi(M).

    Phase 1 is the damped iteration M <- (1 - theta) M + theta Phi(M) for up
    to ``picard_max`` iterations, with convergence measured as the
    sup-over-time L2 distance between consecutive outputs of Phi (so a
    decoupled problem converges at the second iteration). If that does not
    converge, phase 2 runs a semismooth Newton-GMRES iteration on the
    residual Phi(M) - M with a backtracking line search. On nonconvergence
    the best iterate is returned with ``converged=False`` inside a raised
    ``FixedPointError``'s ``solution`` attribute.
    """
    cfg = config if config is not None else SolverConfig()
    weights = problem.build_weights()
    grid = problem.grid
    N = problem.time_axis.n_steps
    if initial_density is None:
        m0 = problem.initial_measure()
        m_traj = np.broadcast_to(m0, (N + 1,) + grid.shape).copy()
    else:
        m_traj = np.asarray(initial_density, dtype=float).copy()
        if m_traj.shape != (N + 1,) + grid.shape:
            raise ValueError("initial_density has wrong shape")

    history: list[float] = []
    phi_prev: np.ndarray | None = None
    u_traj: np.ndarray | None = None
    converged = False
    iterations = 0
    residual = np.inf
    for iterations in range(1, min(cfg.picard_max, cfg.fp_max) + 1):
        u_traj = map_psi1(problem, cfg, m_traj, weights)
        phi = map_psi2(problem, cfg, u_traj, weights)
        if phi_prev is not None:
            residual = max(norm_2(grid, phi[n] - phi_prev[n]) for n in range(N + 1))
            history.append(residual)
            if residual < cfg.fp_tol:
                converged = True
                m_traj = phi
                break
        phi_prev = phi
        m_traj = _renormalize(grid, (1.0 - cfg.theta) * m_traj + cfg.theta * phi)

    def sup_l2(traj: np.ndarray) -> float:
        return max(norm_2(grid, traj[n]) for n in range(traj.shape[0]))

    if not converged and iterations < cfg.fp_max:
        u_traj = map_psi1(problem, cfg, m_traj, weights)
        phi = map_psi2(problem, cfg, u_traj, weights)
    while not converged and iterations < cfg.fp_max:
        iterations += 1
        res_traj = phi - m_traj
        residual = sup_l2(res_traj)
        history.append(residual)
        if residual < cfg.fp_tol:
            converged = True
            m_traj = phi
            break
        lus = _StepFactorizations(grid, problem.hamiltonian, problem.sigma, weights.rho, u_traj)
        op = _fixed_point_jacobian(problem, weights, u_traj, phi, lus)
        rhs = -res_traj[1:].reshape(-1)
        accepted = False
        # deep backtracking matters: near active-set switches of the upwind
        # gradient the useful step fraction can be well below 1/16; retry
        # with a tighter Krylov solve before giving up on the direction
        for rtol, maxiter in ((cfg.gmres_tol, 4), (1e-2 * cfg.gmres_tol, 40)):
            step, _ = spla.gmres(op, rhs, rtol=rtol, atol=0.0, restart=50, maxiter=maxiter)
            step = step.reshape((N,) + grid.shape)
            damping = 1.0
            while damping >= 1.0 / 256.0:
                trial = m_traj.copy()
                trial[1:] += damping * step
                trial_u = map_psi1(problem, cfg, trial, weights)
                trial_phi = map_psi2(problem, cfg, trial_u, weights)
                if sup_l2(trial_phi - trial) < residual:
                    m_traj, u_traj, phi = trial, trial_u, trial_phi
                    accepted = True
                    break
                damping *= 0.5
            if accepted:
                break
        if not accepted:
            # gentle relaxation step: perturb away from a bad linearization
            # point without discarding the progress made so far
            m_traj = _renormalize(grid, 0.9 * m_traj + 0.1 * phi)
            u_traj = map_psi1(problem, cfg, m_traj, weights)
            phi = map_psi2(problem, cfg, u_traj, weights)

    solution = MfgSolution(
        u=u_traj,
        m=m_traj,
        iterations=iterations,
        residual=float(residual) if np.isfinite(residual) else np.inf,
        residual_history=history,
        converged=converged,
    )
    if not converged:
        err = FixedPointError(
            f"fixed point not converged after {iterations} iterations (residual {residual:.3e})"
        )
        err.solution = solution
        raise err
    return solution


def bregman_term(
    grid: TorusGrid,
    ham: GodunovHamiltonian,
    m_traj: np.ndarray,
    u_traj: np.ndarray,
    u_other: np.ndarray,
) -> float:
    """sum_n h^dim sum_i M^{n+1}_i * [g(DW) - g(DV) - D(W - V) . g_q(DV)]_i

    with V = u_traj, W = u_other; nonnegative for convex g and M >= 0.
    """
    N = m_traj.shape[0] - 1
    total = 0.0
    scale = grid.h**grid.dim
    for n in range(N):
        dv = discrete_gradient(grid, u_traj[n])
        dw = discrete_gradient(grid, u_other[n])
        gv = ham.value_grid(dv)
        gw = ham.value_grid(dw)
        gq = ham.grad_grid(dv)
        bregman = gw - gv - np.sum((dw - dv) * gq, axis=0)
        total += scale * float(np.sum(m_traj[n + 1] * bregman))
    return total


def duality_gap(
    problem: MfgProblem,
    u: np.ndarray,
    m: np.ndarray,
    u_tilde: np.ndarray,
    m_tilde: np.ndarray,
) -> tuple[float, float, float]:
    """The three duality terms separating two (possibly perturbed) solutions.

    Returns (coupling monotonicity sum, Bregman sum weighted by M, Bregman
    sum weighted by M-tilde); each is nonnegative for monotone coupling and
    convex g, and all three vanish at a common solution.
    """
    grid = problem.grid
    N = problem.time_axis.n_steps
    for traj in (u, m, u_tilde, m_tilde):
        if traj.shape != (N + 1,) + grid.shape:
            raise ValueError("trajectory shape does not match the discretization")
    coupling_term = 0.0
    for n in range(N):
        f_diff = problem.coupling.eval(m[n + 1], n + 1) - problem.coupling.eval(m_tilde[n + 1], n + 1)
        coupling_term += inner_product(grid, f_diff, m[n + 1] - m_tilde[n + 1])
    term2 = bregman_term(grid, problem.hamiltonian, m, u, u_tilde)
    term3 = bregman_term(grid, problem.hamiltonian, m_tilde, u_tilde, u)
    return coupling_term, term2, term3
