import numpy as np
import pytest
import scipy.special

from fracmfg.grid import (
    DiscreteMeasure,
    GridError,
    TorusGrid,
    cell_average_density,
    discrete_gradient,
    discrete_laplacian,
    forward_diff,
    inner_product,
    norm_2,
    norm_inf,
)


def test_grid_basic_properties():
    grid = TorusGrid(dim=1, n_h=50)
    assert grid.h == pytest.approx(0.02)
    assert grid.shape == (50,)
    assert grid.n_points == 50
    grid2 = TorusGrid(dim=2, n_h=8)
    assert grid2.shape == (8, 8)
    assert grid2.n_points == 64
    pts = grid2.points()
    assert pts.shape == (8, 8, 2)
    assert pts[3, 5, 0] == pytest.approx(3 / 8)
    assert pts[3, 5, 1] == pytest.approx(5 / 8)


def test_grid_validation():
    with pytest.raises(GridError):
        TorusGrid(dim=3, n_h=10)
    with pytest.raises(GridError):
        TorusGrid(dim=1, n_h=1)
    grid = TorusGrid(dim=1, n_h=4)
    with pytest.raises(GridError):
        grid.function(np.zeros(5))
    with pytest.raises(GridError):
        grid.function(np.array([0.0, np.inf, 0.0, 0.0]))


def test_inner_product_and_norms():
    grid = TorusGrid(dim=1, n_h=10)
    ones = np.ones(grid.shape)
    assert inner_product(grid, ones, ones) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    u = rng.normal(size=grid.shape)
    assert norm_2(grid, u) == pytest.approx(np.sqrt(0.1 * np.sum(u**2)))
    assert norm_inf(u) == pytest.approx(np.max(np.abs(u)))


def test_forward_diff_periodic_wrap():
    grid = TorusGrid(dim=1, n_h=4)
    u = np.array([0.0, 1.0, 3.0, 2.0])
    fd = forward_diff(grid, u, axis=0)
    assert fd == pytest.approx(np.array([1.0, 2.0, -1.0, -2.0]) / grid.h)


def test_discrete_gradient_components():
    # components per axis are the forward difference and its one-cell-back copy
    grid = TorusGrid(dim=2, n_h=6)
    rng = np.random.default_rng(1)
    u = rng.normal(size=grid.shape)
    dg = discrete_gradient(grid, u)
    assert dg.shape == (4, 6, 6)
    for axis in range(2):
        fd = forward_diff(grid, u, axis)
        assert dg[2 * axis] == pytest.approx(fd)
        assert dg[2 * axis + 1] == pytest.approx(np.roll(fd, 1, axis=axis))


def test_discrete_laplacian_exact_on_fourier_mode():
    # eigenfunction of the periodic 3-point stencil with known eigenvalue
    grid = TorusGrid(dim=1, n_h=32)
    x = grid.points()[..., 0]
    k = 3
    u = np.cos(2 * np.pi * k * x)
    lam = -4.0 / grid.h**2 * np.sin(np.pi * k * grid.h) ** 2
    assert discrete_laplacian(grid, u) == pytest.approx(lam * u, abs=1e-8)


def test_laplacian_is_divergence_of_gradient():
    grid = TorusGrid(dim=2, n_h=7)
    rng = np.random.default_rng(2)
    u = rng.normal(size=grid.shape)
    v = rng.normal(size=grid.shape)
    lhs = inner_product(grid, discrete_laplacian(grid, u), v)
    rhs = -sum(
        inner_product(grid, forward_diff(grid, u, ax), forward_diff(grid, v, ax)) for ax in range(2)
    )
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_discrete_measure_validation():
    grid = TorusGrid(dim=1, n_h=4)
    good = DiscreteMeasure(grid, np.full(4, 1.0))
    assert good.values.sum() * grid.h == pytest.approx(1.0)
    with pytest.raises(GridError):
        DiscreteMeasure(grid, np.array([2.0, -0.5, 1.0, 1.5]))
    with pytest.raises(GridError):
        DiscreteMeasure(grid, np.full(4, 2.0))


def test_cell_average_density_unit_mass_and_accuracy():
    grid = TorusGrid(dim=1, n_h=50)
    measure = cell_average_density(grid, lambda p: np.exp(-((p[..., 0] - 0.5) ** 2) / 0.01))
    assert inner_product(grid, measure.values, np.ones(grid.shape)) == pytest.approx(1.0, abs=1e-13)
    assert measure.values.min() >= 0.0
    # quadrature cell means agree with exact cell integrals (erf antiderivative)
    centers = grid.points()[..., 0]
    c = 0.1  # exp(-(x-1/2)^2 / c^2)
    lo = (centers - grid.h / 2 - 0.5) / c
    hi = (centers + grid.h / 2 - 0.5) / c
    ref_cells = c * np.sqrt(np.pi) / 2 * (scipy.special.erf(hi) - scipy.special.erf(lo)) / grid.h
    ref_cells /= grid.h * ref_cells.sum()
    assert np.max(np.abs(measure.values - ref_cells)) < 1e-10


def test_cell_average_density_2d():
    grid = TorusGrid(dim=2, n_h=12)
    measure = cell_average_density(
        grid, lambda p: 1.0 + 0.5 * np.sin(2 * np.pi * p[..., 0]) * np.cos(2 * np.pi * p[..., 1])
    )
    assert inner_product(grid, measure.values, np.ones(grid.shape)) == pytest.approx(1.0, abs=1e-13)
