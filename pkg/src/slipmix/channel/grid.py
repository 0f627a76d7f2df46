# Copyright 2025 The slipmix Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Channel geometry, quadrature and the staggered-grid calculus.

Layout: cell (i, j) has centre ((i + 1/2) hx, (j + 1/2) hy). ``u[i, j]`` sits
on the left face of cell (i, j); ``vy[i, j]`` on its bottom face, with
``vy[:, 0]`` and ``vy[:, ny]`` on the walls. The x-direction is periodic.

The array-level kernels below (``face_gradient``, ``cell_divergence``,
``solve_modes``) are shared by every solver. ``face_gradient`` is exactly
minus the transpose of ``cell_divergence`` over the interior degrees of
freedom, which is what makes the projection symmetric.
"""
import math
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.linalg import solve_banded

from slipmix.exceptions import ConfigError, GridError
from slipmix.channel.models import Grid, ScalarField, VectorField, check_same_grid


def make_grid(
    nx: int, ny: int, Lx: float = 2.0 * math.pi, Ly: float = 1.0
) -> Grid:
    """Build a uniform channel grid.

    Args:
        nx: Cells in the periodic x-direction (>= 4, powers of two preferred)
        ny: Cells across the channel (>= 4)
        Lx: Period in x
        Ly: Channel width

    Returns:
        Grid instance

    Raises:
        GridError: If a dimension is below 4 or a length is not positive
    """
    return Grid(int(nx), int(ny), float(Lx), float(Ly))


def inner_product(f: ScalarField, g: ScalarField) -> float:
    """Quadrature L2 inner product (f, g) over the channel."""
    grid = check_same_grid(f.grid, g.grid)
    return float(np.sum(f.values * g.values) * grid.cell_area)


def lp_norm(f: ScalarField, p: float) -> float:
    """Quadrature L^p norm; ``p = math.inf`` gives max |f|.

    Raises:
        ConfigError: If p < 1
    """
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ConfigError(f"L^p norm needs p >= 1, got {p}")
    area = f.grid.cell_area
    if p == 2:
        return math.sqrt(float(np.sum(f.values**2)) * area)
    return float(np.sum(np.abs(f.values) ** p) * area) ** (1.0 / p)


def face_gradient(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Compact gradient from cell centres to faces with zero normal flux at walls.

    Returns:
        Tuple (gx, gy) with gx of shape (nx, ny) and gy of shape (nx, ny + 1);
        the wall rows of gy are zero.
    """
    gx = (values - np.roll(values, 1, axis=0)) / grid.hx
    gy = np.zeros((grid.nx, grid.ny + 1))
    gy[:, 1:-1] = (values[:, 1:] - values[:, :-1]) / grid.hy
    return gx, gy


def cell_divergence(u: np.ndarray, vy: np.ndarray, grid: Grid) -> np.ndarray:
    """Conservative MAC divergence, one value per cell."""
    return (np.roll(u, -1, axis=0) - u) / grid.hx + (vy[:, 1:] - vy[:, :-1]) / grid.hy


def neumann_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Five-point Laplacian with homogeneous Neumann walls (div of face_gradient)."""
    return cell_divergence(*face_gradient(values, grid), grid)


def gradient(f: ScalarField) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of a cell-centred field sampled to the staggered layout.

    Interior faces use compact centred differences. The wall rows of the
    y-component use second-order one-sided stencils, so the result is not a
    VectorField (which carries zero wall-normal velocity by construction).

    Returns:
        Tuple (df/dx at x-faces, df/dy at y-faces)
    """
    grid = f.grid
    vals = f.values
    gx, gy = face_gradient(vals, grid)
    gy[:, 0] = (-2.0 * vals[:, 0] + 3.0 * vals[:, 1] - vals[:, 2]) / grid.hy
    gy[:, -1] = (2.0 * vals[:, -1] - 3.0 * vals[:, -2] + vals[:, -3]) / grid.hy
    return gx, gy


def divergence(v: VectorField) -> ScalarField:
    """MAC divergence of a staggered velocity field."""
    return ScalarField(v.grid, cell_divergence(v.u, v.vy, v.grid))


def fd_symbol(grid: Grid) -> np.ndarray:
    """Eigenvalues of the periodic second difference -d2/dx2 per rfft mode."""
    m = np.arange(grid.nx // 2 + 1)
    return (4.0 / grid.hx**2) * np.sin(np.pi * m / grid.nx) ** 2


def spectral_symbol(grid: Grid) -> np.ndarray:
    """Exact eigenvalues of -d2/dx2 per rfft mode."""
    m = np.arange(grid.nx // 2 + 1)
    return (2.0 * np.pi * m / grid.Lx) ** 2


def neumann_tridiagonal(n: int, h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bands (sub, main, sup) of -d2/dy2 on n cells with zero-flux ends."""
    off = np.full(n - 1, -1.0 / h**2)
    main = np.full(n, 2.0 / h**2)
    main[0] = main[-1] = 1.0 / h**2
    return off, main, off.copy()


def dirichlet_tridiagonal(n: int, h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bands (sub, main, sup) of -d2/dy2 on n interior nodes with zero ends."""
    off = np.full(n - 1, -1.0 / h**2)
    return off, np.full(n, 2.0 / h**2), off.copy()


def solve_modes(
    rhs: np.ndarray,
    shift: np.ndarray,
    bands: Tuple[np.ndarray, np.ndarray, np.ndarray],
    scale: float = 1.0,
    identity: float = 0.0,
    pin_zero_mode: bool = False,
) -> np.ndarray:
    """Solve (identity + scale * (shift_m + T)) q = rhs mode by mode.

    The x-direction is diagonalised by a real FFT; for every x-mode m the
    remaining tridiagonal system in y (bands of T, plus the x-eigenvalue
    shift_m on the diagonal) is solved with a banded LU.

    Args:
        rhs: Array of shape (nx, n)
        shift: x-eigenvalue per rfft mode, length nx // 2 + 1
        bands: (sub, main, sup) of T
        scale: Multiplier of the operator part
        identity: Multiple of the identity added to the operator
        pin_zero_mode: Fix the first unknown of mode 0 to zero; used for the
            singular Neumann Poisson problem whose solution is needed only up
            to a constant

    Returns:
        Solution array of shape (nx, n)
    """
    nx, n = rhs.shape
    if len(shift) != nx // 2 + 1:
        raise GridError("Mode shift does not match the x-dimension of the right-hand side")
    sub, main, sup = bands
    rhat = sfft.rfft(rhs, axis=0)
    out = np.empty_like(rhat)
    ab = np.zeros((3, n))
    ab[0, 1:] = scale * sup
    ab[2, :-1] = scale * sub
    for m, s in enumerate(shift):
        ab[1] = identity + scale * (main + s)
        r = rhat[m]
        if pin_zero_mode and m == 0:
            pinned = ab.copy()
            pinned[1, 0] = 1.0
            pinned[0, 1] = 0.0
            r = r.copy()
            r[0] = 0.0
            out[m] = solve_banded((1, 1), pinned, r)
        else:
            out[m] = solve_banded((1, 1), ab, r)
    return sfft.irfft(out, n=nx, axis=0)


def apply_tridiagonal_y(
    values: np.ndarray, bands: Tuple[np.ndarray, np.ndarray, np.ndarray]
) -> np.ndarray:
    """Multiply every x-row of ``values`` by the tridiagonal matrix in y."""
    sub, main, sup = bands
    out = values * main
    out[:, :-1] += values[:, 1:] * sup
    out[:, 1:] += values[:, :-1] * sub
    return out


def apply_fd_xx(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Periodic -d2/dx2 by second differences."""
    return (2.0 * values - np.roll(values, 1, axis=0) - np.roll(values, -1, axis=0)) / grid.hx**2


def wall_extrapolate(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Quadratic extrapolation of cell-row data to both walls.

    Returns:
        Tuple (bottom value, bottom d/dy, top value, top d/dy), one entry per
        x-sample
    """
    h = grid.hy
    c0, c1, c2 = values[:, 0], values[:, 1], values[:, 2]
    t0, t1, t2 = values[:, -1], values[:, -2], values[:, -3]
    bottom = (15.0 * c0 - 10.0 * c1 + 3.0 * c2) / 8.0
    bottom_dy = (-2.0 * c0 + 3.0 * c1 - c2) / h
    top = (15.0 * t0 - 10.0 * t1 + 3.0 * t2) / 8.0
    top_dy = (2.0 * t0 - 3.0 * t1 + t2) / h
    return bottom, bottom_dy, top, top_dy


def random_field(grid: Grid, seed: Optional[int] = None) -> ScalarField:
    """Uniform random samples in [-1, 1), for property tests."""
    rng = np.random.default_rng(seed)
    return ScalarField(grid, rng.uniform(-1.0, 1.0, (grid.nx, grid.ny)))
