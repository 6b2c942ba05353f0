import csv
import json
import math

import numpy as np
import pytest

from fracmfg.caputo import mittag_leffler
from fracmfg.experiments import (
    ExperimentConfig,
    gaussian_density,
    make_problem,
    relaxation_solution,
    run_test,
    self_convergence_study,
    solve_problem,
    temporal_order_study,
)


def test_preset_parameters():
    cfg1 = ExperimentConfig.preset(1)
    assert (cfg1.sigma, cfg1.lam, cfg1.n_h, cfg1.n_t, cfg1.horizon) == (0.0, 0.0, 50, 200, 2.0)
    cfg2 = ExperimentConfig.preset(2, full_scale=True)
    assert (cfg2.sigma, cfg2.lam, cfg2.n_t) == (0.1, 0.0, 2000)
    cfg3 = ExperimentConfig.preset(3, n_t=40)
    assert (cfg3.sigma, cfg3.lam, cfg3.n_t) == (0.0, 1.0, 40)
    with pytest.raises(ValueError):
        ExperimentConfig.preset(4)
    with pytest.raises(ValueError):
        ExperimentConfig(alphas=(1.2,))


def test_gaussian_density_shape():
    pts = np.zeros((5, 1))
    pts[:, 0] = np.linspace(0, 1, 5)
    vals = gaussian_density(pts)
    assert vals.shape == (5,)
    assert vals.argmax() == 2


def test_run_test_exports_csv(tmp_path):
    cfg = ExperimentConfig.preset(1, alphas=(0.85,), n_h=12, n_t=8, horizon=0.5, out_dir=tmp_path)
    records = run_test(cfg)
    assert len(records) == 1
    record = records[0]
    assert record.report.ok
    run_dir = tmp_path / "alpha_0.85"
    assert {p.name for p in record.manifest} == {"density.csv", "value.csv", "summary.json"}
    with (run_dir / "density.csv").open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 9 * 12
    # round-trip precision: the stored first-row density equals the solver output
    first = [float(r["m"]) for r in rows[:12]]
    assert first == pytest.approx(record.solution.m[0], abs=0.0)
    summary = json.loads((run_dir / "summary.json").read_text())
    assert summary["alpha"] == 0.85
    assert summary["n_h"] == 12
    assert summary["mass_max_dev"] < 1e-10


def test_relaxation_solution_matches_mittag_leffler():
    # implicit L1 solution of D^alpha y = -y converges to E_alpha(-t^alpha)
    for alpha in (0.5, 1.0):
        exact = mittag_leffler(alpha, -1.0)
        coarse = abs(relaxation_solution(alpha, 100) - exact)
        fine = abs(relaxation_solution(alpha, 800) - exact)
        assert fine < coarse / 4.0
        assert fine < 5e-4


def test_relaxation_alpha_one_closed_form():
    # backward Euler on y' = -y: y_N = (1 + dt)^(-N)
    n = 50
    assert relaxation_solution(1.0, n) == pytest.approx((1 + 1 / n) ** (-n), rel=1e-12)
    assert relaxation_solution(1.0, 3200) == pytest.approx(math.exp(-1.0), abs=2e-4)


def test_temporal_order_study_positive_slope():
    study = temporal_order_study(0.6, [1 / n for n in (20, 40, 80, 160)])
    assert study.errors.shape == (4,)
    assert np.all(np.diff(study.errors) < 0)
    assert 0.8 < study.slope < 1.4
    with pytest.raises(ValueError):
        temporal_order_study(0.6, [0.1, 0.05, 0.025])
    with pytest.raises(ValueError):
        temporal_order_study(0.6, [0.3, 0.1, 0.05, 0.025])


def test_solve_problem_decoupled_fast_path():
    cfg = ExperimentConfig.preset(1, alphas=(0.7,), n_h=16, n_t=10, horizon=0.5)
    problem = make_problem(cfg, 0.7)
    solution = solve_problem(problem)
    assert solution.converged
    assert solution.iterations == 1
    assert solution.u.shape == (11, 16)
    assert solution.m.shape == (11, 16)


def test_self_convergence_tiny_decoupled():
    base = ExperimentConfig.preset(1, alphas=(0.7,), n_h=8, n_t=6, horizon=0.5)
    study = self_convergence_study(base, 0.7, levels=3)
    assert len(study.density_diffs) == 2
    assert len(study.value_gradient_diffs) == 2
    assert study.monotone
    with pytest.raises(ValueError):
        self_convergence_study(base, 0.7, levels=2)
