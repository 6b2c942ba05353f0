"""Forward-in-time sweep for the discrete fractional Fokker-Planck equation.

The transport operator B is defined as the negative adjoint of the gradient
pairing that appears in the weak form, so the summation-by-parts identity
holds to machine precision by construction. Each step solves the M-matrix
system (I + rho * A) M^{n+1} = memory sum, which conserves discrete mass and
preserves nonnegativity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from fracmfg.assembly import drift_diffusion_matrix, solve_sparse
from fracmfg.caputo import L1Weights, forward_caputo_bform
from fracmfg.grid import TorusGrid, inner_product
from fracmfg.hamiltonian import GodunovHamiltonian
from fracmfg.kernels import weighted_history_sum

MASS_DEV_TOL = 1e-10
NEGATIVITY_TOL = 1e-12
SIGN_TOL = 1e-13
LINEAR_RESIDUAL_TOL = 1e-12


class FpSolveError(RuntimeError):
    """Density step failed (sign pattern, singularity, or negativity)."""


def assemble_transport(grid: TorusGrid, ham: GodunovHamiltonian, u_step: np.ndarray) -> sp.csr_matrix:
    """Matrix of the duality-derived transport term B(U, .) at a frozen U.

    B = -T^T where (T w)_i = grad_g(x_i, [D_h u]_i) . [D_h w]_i, which is
    exactly the divergence-form stencil of the scheme.
    """
    K = drift_diffusion_matrix(grid, ham, u_step, sigma=0.0)
    return (-K.T).tocsr()


def full_operator(grid: TorusGrid, ham: GodunovHamiltonian, u_step: np.ndarray, sigma: float) -> sp.csr_matrix:
    """A = -sigma * Lap_h - B(U, .), the transpose of the HJB linearization."""
    return drift_diffusion_matrix(grid, ham, u_step, sigma).T.tocsr()


def _check_m_matrix(system: sp.csr_matrix) -> None:
    diag = system.diagonal()
    if diag.min() <= 0.0:
        raise FpSolveError(f"system diagonal not positive (min {diag.min():.3e}); reduce dt")
    off = system - sp.diags(diag)
    if off.count_nonzero() and off.max() > SIGN_TOL:
        raise FpSolveError(f"positive off-diagonal entry {off.max():.3e} breaks the M-matrix sign pattern; reduce dt")


def fp_step(
    grid: TorusGrid,
    weights: L1Weights,
    operator: sp.spmatrix,
    history: np.ndarray,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """One implicit density step: (I + rho A) M^{n+1} = sum_k c_k^{n+1} M^k [+ rho b].

    ``history`` stacks M^0..M^n. The assembled system is checked for the
    M-matrix sign pattern and the linear solve for a small relative residual.
    """
    hist = np.asarray(history, dtype=float)
    n = hist.shape[0] - 1
    if n + 1 > weights.n_steps:
        raise FpSolveError("history longer than the time axis")
    rhs = weighted_history_sum(weights.c[n + 1, : n + 1], hist.reshape(n + 1, -1))
    if source is not None:
        rhs = rhs + weights.rho * np.asarray(source, dtype=float).ravel()
    system = (sp.identity(grid.n_points, format="csr") + weights.rho * operator).tocsr()
    _check_m_matrix(system)
    m_new = solve_sparse(system, rhs)
    scale = max(float(np.max(np.abs(rhs))), 1e-300)
    residual = float(np.max(np.abs(system @ m_new - rhs))) / scale
    if residual > LINEAR_RESIDUAL_TOL:
        raise FpSolveError(f"linear solve residual {residual:.3e} exceeds {LINEAR_RESIDUAL_TOL}")
    return m_new.reshape(grid.shape)


def forward_sweep(
    grid: TorusGrid,
    weights: L1Weights,
    ham: GodunovHamiltonian,
    sigma: float,
    u_traj: np.ndarray,
    m_initial: np.ndarray,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """Solve the forward Fokker-Planck scheme along a frozen value trajectory.

    ``u_traj`` stacks U^0..U^N; ``source`` optionally stacks b^1..b^N.
    Returns M^0..M^N. Raises ``FpSolveError`` if any step leaves K_h beyond
    round-off.
    """
    N = weights.n_steps
    if u_traj.shape[0] != N + 1:
        raise ValueError(f"u_traj must have length N + 1 = {N + 1}")
    m = np.empty((N + 1,) + grid.shape)
    m[0] = grid.function(m_initial)
    for n in range(N):
        operator = full_operator(grid, ham, u_traj[n], sigma)
        b = source[n] if source is not None else None
        try:
            m[n + 1] = fp_step(grid, weights, operator, m[: n + 1], source=b)
        except FpSolveError as exc:
            raise FpSolveError(f"forward sweep failed at step n={n}: {exc}") from exc
        if source is None and m[n + 1].min() < -NEGATIVITY_TOL:
            raise FpSolveError(f"density fell below -{NEGATIVITY_TOL} at step n={n + 1}: min {m[n + 1].min():.3e}")
    return m


@dataclass(frozen=True)
class ConservationReport:
    """Per-step mass deviation and minimum value of a density trajectory."""

    mass_deviation: np.ndarray = field(repr=False)
    min_value: np.ndarray = field(repr=False)
    bform_residual: float | None = None

    @property
    def max_mass_deviation(self) -> float:
        return float(np.max(self.mass_deviation))

    @property
    def min_density(self) -> float:
        return float(np.min(self.min_value))

    @property
    def ok(self) -> bool:
        return self.max_mass_deviation <= MASS_DEV_TOL and self.min_density >= -NEGATIVITY_TOL

    def violations(self) -> list[int]:
        """Step indices that break conservation or positivity."""
        bad = (self.mass_deviation > MASS_DEV_TOL) | (self.min_value < -NEGATIVITY_TOL)
        return list(np.flatnonzero(bad))


def mass_and_positivity_report(grid: TorusGrid, m_traj: np.ndarray, weights: L1Weights | None = None) -> ConservationReport:
    """Audit a density trajectory against the K_h invariants.

    When ``weights`` is given, also recomputes the mass balance through the
    equivalent b-weight form of the forward Caputo operator.
    """
    ones = np.ones(grid.shape)
    mass_dev = np.array([abs(inner_product(grid, m, ones) - 1.0) for m in m_traj])
    min_val = np.array([float(m.min()) for m in m_traj])
    bform = None
    if weights is not None:
        masses = np.array([[inner_product(grid, m, ones)] for m in m_traj])
        bform = max(
            abs(float(forward_caputo_bform(weights, masses[: n + 1])[0])) for n in range(1, weights.n_steps + 1)
        )
    return ConservationReport(mass_deviation=mass_dev, min_value=min_val, bform_residual=bform)
