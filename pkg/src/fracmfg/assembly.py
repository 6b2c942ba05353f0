"""Sparse operator assembly on the periodic grid.

The drift-diffusion building block is K = -sigma * L + T(u), where L is the
periodic Laplacian matrix and (T w)_i = grad_g(x_i, [D_h u]_i) . [D_h w]_i.
The HJB Newton Jacobian is delta*I + K; the Fokker-Planck operator is its
transpose, A = -sigma*L - B = K^T, which makes the discrete duality between
the two equations literal at the matrix level.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from fracmfg.grid import TorusGrid, discrete_gradient
from fracmfg.hamiltonian import GodunovHamiltonian


@lru_cache(maxsize=None)
def _shift_1d(n: int, step: int) -> sp.csr_matrix:
    # (S u)_i = u_{i+step}, cyclic
    idx = (np.arange(n) + step) % n
    return sp.csr_matrix((np.ones(n), (np.arange(n), idx)), shape=(n, n))


@lru_cache(maxsize=None)
def shift_matrix(dim: int, n_h: int, axis: int, step: int) -> sp.csr_matrix:
    """Cyclic shift of a flattened (row-major) grid function along ``axis``."""
    s = _shift_1d(n_h, step)
    eye = sp.identity(n_h, format="csr")
    if dim == 1:
        return s
    return sp.kron(s, eye, format="csr") if axis == 0 else sp.kron(eye, s, format="csr")


@lru_cache(maxsize=None)
def laplacian_matrix(dim: int, n_h: int) -> sp.csr_matrix:
    """Matrix of the periodic 3/5-point Laplacian on flattened grid functions."""
    npts = n_h**dim
    L = sp.csr_matrix((npts, npts))
    eye = sp.identity(npts, format="csr")
    for axis in range(dim):
        L = L + shift_matrix(dim, n_h, axis, 1) + shift_matrix(dim, n_h, axis, -1) - 2.0 * eye
    return (L * n_h**2).tocsr()


@lru_cache(maxsize=None)
def _pairing_indices(dim: int, n_h: int) -> tuple[np.ndarray, np.ndarray]:
    # COO (rows, cols) for the diagonal followed by the +1/-1 neighbors per axis
    npts = n_h**dim
    idx = np.arange(npts).reshape((n_h,) * dim)
    rows = [np.arange(npts)]
    cols = [np.arange(npts)]
    for axis in range(dim):
        for step in (-1, 1):
            rows.append(np.arange(npts))
            cols.append(np.roll(idx, step, axis=axis).ravel())
    return np.concatenate(rows), np.concatenate(cols)


def gradient_pairing_matrix(grid: TorusGrid, grad: np.ndarray) -> sp.csr_matrix:
    """Matrix T with (T w)_i = grad_i . [D_h w]_i for a frozen gradient field.

    ``grad`` has shape (2*dim,) + grid.shape: per axis, the first component
    pairs with the forward difference at the point and the second with the
    forward difference one cell back.
    """
    dim, h = grid.dim, grid.h
    npts = grid.n_points
    diag = np.zeros(grid.shape)
    data = [None]
    for axis in range(dim):
        g_fwd = grad[2 * axis]
        g_bwd = grad[2 * axis + 1]
        diag += (g_bwd - g_fwd) / h
        data.append((g_fwd / h).ravel())  # column i+1 (rolled by -1)
        data.append((-g_bwd / h).ravel())  # column i-1 (rolled by +1)
    data[0] = diag.ravel()
    rows, cols = _pairing_indices(dim, grid.n_h)
    return sp.csr_matrix((np.concatenate(data), (rows, cols)), shape=(npts, npts))


def transport_transpose_apply(grid: TorusGrid, grad: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Apply T^T for a frozen gradient field without assembling the matrix.

    T is the gradient pairing of ``gradient_pairing_matrix``; its transpose is
    the divergence-form stencil sum_ax [(S^- - I)(g_f w) + (I - S^+)(g_b w)]/h.
    """
    out = np.zeros(grid.shape)
    for axis in range(grid.dim):
        gf = grad[2 * axis] * w
        gb = grad[2 * axis + 1] * w
        out += (np.roll(gf, 1, axis=axis) - gf + gb - np.roll(gb, -1, axis=axis)) / grid.h
    return out


def drift_diffusion_matrix(grid: TorusGrid, ham: GodunovHamiltonian, u: np.ndarray, sigma: float) -> sp.csr_matrix:
    """K = -sigma * L + T(grad_g at [D_h u])."""
    grad = ham.grad_grid(discrete_gradient(grid, u))
    K = gradient_pairing_matrix(grid, grad)
    if sigma != 0.0:
        K = K - sigma * laplacian_matrix(grid.dim, grid.n_h)
    return K.tocsr()


def solve_sparse(matrix: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse solve; dense LAPACK path for small systems."""
    if matrix.shape[0] <= 1024:
        return np.linalg.solve(matrix.toarray(), rhs)
    return sp.linalg.spsolve(matrix.tocsc(), rhs)
