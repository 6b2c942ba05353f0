"""Finite-difference solver for time-fractional mean field game systems.

L1 time stepping for forward/backward Caputo derivatives, Godunov upwind
Hamiltonians on the periodic torus, a duality-preserving Fokker-Planck
discretization, and a damped fixed-point solver for the coupled system.
"""

from fracmfg.caputo import (
    L1Weights,
    TimeAxis,
    backward_caputo,
    barrier_margin,
    build_weights,
    discrete_ibp_residual,
    forward_caputo,
    mittag_leffler,
)
from fracmfg.coupling import AffineCoupling
from fracmfg.grid import (
    DiscreteMeasure,
    TorusGrid,
    cell_average_density,
    discrete_gradient,
    discrete_laplacian,
    forward_diff,
    inner_product,
    norm_2,
    norm_inf,
)
from fracmfg.hamiltonian import GodunovHamiltonian, verify_assumptions
from fracmfg.hjb import (
    HjbSolveError,
    SolverConfig,
    backward_sweep,
    hjb_residual,
    lipschitz_seminorm,
    solve_stationary,
)
from fracmfg.fp import FpSolveError, assemble_transport, forward_sweep, fp_step, mass_and_positivity_report
from fracmfg.kernels import BACKEND as KERNEL_BACKEND
from fracmfg.mfg import FixedPointError, MfgProblem, MfgSolution, duality_gap, map_psi1, map_psi2, solve_mfg

__version__ = "0.1.0"

__all__ = [
    "AffineCoupling",
    "DiscreteMeasure",
    "FixedPointError",
    "FpSolveError",
    "GodunovHamiltonian",
    "HjbSolveError",
    "KERNEL_BACKEND",
    "L1Weights",
    "MfgProblem",
    "MfgSolution",
    "SolverConfig",
    "TimeAxis",
    "TorusGrid",
    "assemble_transport",
    "backward_caputo",
    "backward_sweep",
    "barrier_margin",
    "build_weights",
    "cell_average_density",
    "discrete_gradient",
    "discrete_ibp_residual",
    "discrete_laplacian",
    "duality_gap",
    "forward_caputo",
    "forward_diff",
    "forward_sweep",
    "fp_step",
    "hjb_residual",
    "inner_product",
    "lipschitz_seminorm",
    "map_psi1",
    "map_psi2",
    "mass_and_positivity_report",
    "mittag_leffler",
    "norm_2",
    "norm_inf",
    "solve_mfg",
    "solve_stationary",
    "verify_assumptions",
]
