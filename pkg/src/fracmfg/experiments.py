"""Preset experiments, convergence studies, and plot-ready data export.

The three presets reproduce the 1D benchmark runs: a moving-well running
cost, Gaussian initial density, zero terminal value, T = 2, quadratic
Hamiltonian u_x^2 / 2, with (sigma, lambda) = (0, 0), (0.1, 0) and (0, 1).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fracmfg import fp, mfg
from fracmfg.caputo import TimeAxis, build_weights, mittag_leffler
from fracmfg.coupling import AffineCoupling
from fracmfg.grid import TorusGrid, discrete_gradient, norm_2
from fracmfg.hamiltonian import GodunovHamiltonian
from fracmfg.hjb import SolverConfig
from fracmfg.mfg import MfgProblem, MfgSolution, solve_mfg

TEST_PRESETS = {
    1: {"sigma": 0.0, "lam": 0.0},
    2: {"sigma": 0.1, "lam": 0.0},
    3: {"sigma": 0.0, "lam": 1.0},
}
PRESET_ALPHAS = (1.0, 0.85, 0.7)
PRESET_NH = 50
PRESET_NT_DESK = 200
PRESET_NT_FULL = 2000
PRESET_HORIZON = 2.0


def gaussian_density(points: np.ndarray) -> np.ndarray:
    """Unnormalized Gaussian bump exp(-(x - 0.5)^2 / 0.1^2) on the first axis."""
    return np.exp(-((points[..., 0] - 0.5) ** 2) / 0.01)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run (preset or custom)."""

    alphas: tuple[float, ...] = PRESET_ALPHAS
    sigma: float = 0.0
    lam: float = 0.0
    beta: float = 2.0
    scale: float = 0.5
    n_h: int = PRESET_NH
    n_t: int = PRESET_NT_DESK
    horizon: float = PRESET_HORIZON
    out_dir: Path | None = None

    def __post_init__(self):
        if not all(0.0 < a <= 1.0 for a in self.alphas):
            raise ValueError("all alpha values must lie in (0, 1]")

    @classmethod
    def preset(cls, test_id: int, full_scale: bool = False, **overrides) -> "ExperimentConfig":
        if test_id not in TEST_PRESETS:
            raise ValueError(f"unknown test preset {test_id}")
        params = dict(TEST_PRESETS[test_id])
        params["n_t"] = PRESET_NT_FULL if full_scale else PRESET_NT_DESK
        params.update(overrides)
        return cls(**params)


def make_problem(config: ExperimentConfig, alpha: float) -> MfgProblem:
    grid = TorusGrid(dim=1, n_h=config.n_h)
    axis = TimeAxis(horizon=config.horizon, n_steps=config.n_t)
    ham = GodunovHamiltonian(grid=grid, beta=config.beta, scale=config.scale)
    coupling = AffineCoupling(grid=grid, time_axis=axis, lam=config.lam)
    return MfgProblem(
        grid=grid,
        time_axis=axis,
        alpha=alpha,
        sigma=config.sigma,
        hamiltonian=ham,
        coupling=coupling,
        m0=gaussian_density,
    )


def solve_problem(problem: MfgProblem, solver_config: SolverConfig | None = None) -> MfgSolution:
    """Solve one problem, taking the decoupled fast path when lambda = 0."""
    cfg = solver_config if solver_config is not None else SolverConfig()
    if problem.coupling.lam == 0.0:
        # decoupled: one HJB sweep, then one FP sweep
        weights = problem.build_weights()
        n = problem.time_axis.n_steps
        m_guess = np.broadcast_to(problem.initial_measure(), (n + 1,) + problem.grid.shape)
        u = mfg.map_psi1(problem, cfg, m_guess, weights)
        m = mfg.map_psi2(problem, cfg, u, weights)
        return MfgSolution(u=u, m=m, iterations=1, residual=0.0, residual_history=[], converged=True)
    return solve_mfg(problem, cfg)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (config, alpha) solve, with output file manifest."""

    alpha: float
    solution: MfgSolution = field(repr=False)
    report: fp.ConservationReport = field(repr=False)
    wall_time: float
    manifest: list[Path]


def _fmt(x: float) -> str:
    return repr(float(x))


def export_csv(
    grid: TorusGrid,
    time_axis: TimeAxis,
    u_traj: np.ndarray,
    m_traj: np.ndarray,
    out_dir: Path,
    summary_extra: dict | None = None,
) -> list[Path]:
    """Write density.csv, value.csv and summary.json under ``out_dir``.

    CSV rows are ordered time-outer, space-inner, with full round-trip
    decimal precision. 1D grids only.
    """
    if grid.dim != 1:
        raise ValueError("CSV export supports 1D grids only")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = np.arange(grid.n_h) * grid.h
    ts = time_axis.times()
    manifest = []
    for name, header, traj in (("density.csv", "t,x,m", m_traj), ("value.csv", "t,x,u", u_traj)):
        path = out_dir / name
        with path.open("w", newline="\n") as handle:
            handle.write(header + "\n")
            for n, t in enumerate(ts):
                for i, x in enumerate(xs):
                    handle.write(f"{_fmt(t)},{_fmt(x)},{_fmt(traj[n, i])}\n")
        manifest.append(path)
    report = fp.mass_and_positivity_report(grid, m_traj)
    summary = {
        "mass_max_dev": report.max_mass_deviation,
        "min_density": report.min_density,
        "n_h": grid.n_h,
        "n_t": time_axis.n_steps,
        "T": time_axis.horizon,
    }
    if summary_extra:
        summary.update(summary_extra)
    path = out_dir / "summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    manifest.append(path)
    return manifest


def run_test(config: ExperimentConfig, solver_config: SolverConfig | None = None) -> list[RunRecord]:
    """Solve the configured problem for every alpha and export results."""
    records = []
    for alpha in config.alphas:
        problem = make_problem(config, alpha)
        started = time.perf_counter()
        solution = solve_problem(problem, solver_config)
        elapsed = time.perf_counter() - started
        report = fp.mass_and_positivity_report(problem.grid, solution.m)
        manifest: list[Path] = []
        if config.out_dir is not None:
            run_dir = Path(config.out_dir) / f"alpha_{alpha:g}"
            manifest = export_csv(
                problem.grid,
                problem.time_axis,
                solution.u,
                solution.m,
                run_dir,
                summary_extra={
                    "alpha": alpha,
                    "sigma": config.sigma,
                    "lambda": config.lam,
                    "fp_iterations": solution.iterations,
                    "wall_time_s": elapsed,
                },
            )
        records.append(RunRecord(alpha=alpha, solution=solution, report=report, wall_time=elapsed, manifest=manifest))
    return records


def relaxation_solution(alpha: float, n_steps: int, horizon: float = 1.0) -> float:
    """Implicit L1 solve of the scalar relaxation D^alpha y = -y, y(0) = 1,
    returning y(horizon)."""
    axis = TimeAxis(horizon=horizon, n_steps=n_steps)
    weights = build_weights(alpha, axis)
    y = np.zeros(n_steps + 1)
    y[0] = 1.0
    for n in range(1, n_steps + 1):
        mem = float(weights.c[n, :n] @ y[:n])
        y[n] = mem / (1.0 + weights.rho)
    return y[-1]


@dataclass(frozen=True)
class OrderStudy:
    """Observed temporal order of the L1 scheme on the relaxation oracle."""

    alpha: float
    dts: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    slope: float


def temporal_order_study(alpha: float, dt_list, horizon: float = 1.0) -> OrderStudy:
    """Error at t = horizon against the Mittag-Leffler oracle, with the
    least-squares slope of log error vs log dt."""
    dts = np.asarray(sorted(dt_list, reverse=True), dtype=float)
    if dts.size < 4:
        raise ValueError("need at least 4 dt values")
    exact = mittag_leffler(alpha, -(horizon**alpha))
    errors = []
    for dt in dts:
        n = round(horizon / dt)
        if abs(n * dt - horizon) > 1e-12 * horizon:
            raise ValueError(f"dt = {dt} does not divide the horizon")
        errors.append(abs(relaxation_solution(alpha, n, horizon) - exact))
    errors = np.array(errors)
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return OrderStudy(alpha=alpha, dts=dts, errors=errors, slope=slope)


def _restrict_space(values: np.ndarray, factor: int) -> np.ndarray:
    return values[..., ::factor]


@dataclass(frozen=True)
class RefinementStudy:
    """Successive-difference norms across nested refinements."""

    density_diffs: list[float]
    value_gradient_diffs: list[float]

    @property
    def monotone(self) -> bool:
        d_ok = all(a > b for a, b in zip(self.density_diffs, self.density_diffs[1:]))
        v_ok = all(a > b for a, b in zip(self.value_gradient_diffs, self.value_gradient_diffs[1:]))
        return d_ok and v_ok


def self_convergence_study(
    base_config: ExperimentConfig,
    alpha: float,
    levels: int = 3,
    solver_config: SolverConfig | None = None,
) -> RefinementStudy:
    """Solve on ``levels`` nested grids (h, dt halved per level) and compare
    consecutive solutions restricted to the coarser grid.

    Densities are compared in sup-in-time L2; values through the space-time
    L^beta norm of the one-sided gradient of the difference.
    """
    if levels < 3:
        raise ValueError("need at least 3 refinement levels")
    solutions = []
    for level in range(levels):
        cfg = ExperimentConfig(
            alphas=(alpha,),
            sigma=base_config.sigma,
            lam=base_config.lam,
            beta=base_config.beta,
            scale=base_config.scale,
            n_h=base_config.n_h * 2**level,
            n_t=base_config.n_t * 2**level,
            horizon=base_config.horizon,
        )
        problem = make_problem(cfg, alpha)
        solutions.append((problem, solve_problem(problem, solver_config)))

    beta = base_config.beta
    density_diffs = []
    value_diffs = []
    for (coarse_problem, coarse), (_, fine) in zip(solutions, solutions[1:]):
        grid = coarse_problem.grid
        m_f = _restrict_space(fine.m[::2], 2)
        u_f = _restrict_space(fine.u[::2], 2)
        density_diffs.append(max(norm_2(grid, coarse.m[n] - m_f[n]) for n in range(coarse.m.shape[0])))
        total = 0.0
        for n in range(coarse.u.shape[0]):
            dgrad = discrete_gradient(grid, coarse.u[n] - u_f[n])
            total += coarse_problem.time_axis.dt * grid.h * float(np.sum(np.abs(dgrad) ** beta))
        value_diffs.append(total ** (1.0 / beta))
    return RefinementStudy(density_diffs=density_diffs, value_gradient_diffs=value_diffs)
