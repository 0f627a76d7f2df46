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
"""Unsteady Stokes flow driven by Navier slip wall controls.

One step is Crank-Nicolson diffusion of both velocity components followed by
a Leray projection. The wall closure for u uses a ghost row that enforces

    k * u_wall - du/dy = g_bottom   (y = 0)
    k * u_wall + du/dy = g_top      (y = Ly)

with u_wall the average of the first interior row and its ghost. This keeps
the diffusion operator symmetric, so the step is a symmetric linear map plus
a wall-forcing injection, and ``apply_L_star`` is its exact transpose run
backwards in time.
"""
import functools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from slipmix.exceptions import ConfigError, GridError, NumericalError
from slipmix.channel.grid import (
    apply_fd_xx,
    apply_tridiagonal_y,
    cell_divergence,
    dirichlet_tridiagonal,
    face_gradient,
    fd_symbol,
    neumann_tridiagonal,
    solve_modes,
    wall_extrapolate,
)
from slipmix.channel.models import (
    BoundarySlice,
    ControlTrajectory,
    Grid,
    StokesConfig,
    VectorField,
    VelocityTrajectory,
    check_same_grid,
    trapezoid_weights,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _StokesOperators:
    """Precomputed bands and coefficients for one (grid, k, dt)."""

    grid: Grid
    dt: float
    wall_gain: float
    u_bands: Tuple[np.ndarray, np.ndarray, np.ndarray]
    vy_bands: Tuple[np.ndarray, np.ndarray, np.ndarray]
    p_bands: Tuple[np.ndarray, np.ndarray, np.ndarray]
    shift: np.ndarray


@functools.lru_cache(maxsize=32)
def _operators(grid: Grid, k: float, dt: float) -> _StokesOperators:
    h = grid.hy
    # ghost row: u_ghost = a * u_0 + b * g
    a = (2.0 - k * h) / (2.0 + k * h)
    b = 2.0 * h / (2.0 + k * h)
    sub, main, sup = dirichlet_tridiagonal(grid.ny, h)
    main = main.copy()
    main[0] = main[-1] = (2.0 - a) / h**2
    return _StokesOperators(
        grid=grid,
        dt=dt,
        wall_gain=b / h**2,
        u_bands=(sub, main, sup),
        vy_bands=dirichlet_tridiagonal(grid.ny - 1, h),
        p_bands=neumann_tridiagonal(grid.ny, h),
        shift=fd_symbol(grid),
    )


def _project_arrays(u: np.ndarray, vy: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Leray projection of staggered arrays (walls of vy treated as zero)."""
    vy = vy.copy()
    vy[:, 0] = 0.0
    vy[:, -1] = 0.0
    div = cell_divergence(u, vy, grid)
    mean = float(np.mean(div))
    if abs(mean) > 1e-12 * max(float(np.max(np.abs(div))), 1e-300):
        logger.warning("Projection input violates compatibility (mean div %.3e); subtracting mean", mean)
    div -= mean
    ops = _operators(grid, 1.0, 1.0)
    q = solve_modes(-div, ops.shift, ops.p_bands, pin_zero_mode=True)
    gx, gy = face_gradient(q, grid)
    return u - gx, vy - gy


def leray_project(
    v: Union[VectorField, Tuple[np.ndarray, np.ndarray]], grid: Optional[Grid] = None
) -> VectorField:
    """L2-orthogonal projection onto discretely divergence-free fields.

    Args:
        v: VectorField, or a (u, vy) array pair together with ``grid``
        grid: Grid for raw array input

    Returns:
        Projected VectorField
    """
    if isinstance(v, VectorField):
        grid, u, vy = v.grid, v.u, v.vy
    else:
        if grid is None:
            raise GridError("leray_project needs a grid for raw array input")
        u, vy = v
    pu, pvy = _project_arrays(np.asarray(u, dtype=float), np.asarray(vy, dtype=float), grid)
    return VectorField(grid, pu, pvy)


def _apply_u_operator(ops: _StokesOperators, u: np.ndarray) -> np.ndarray:
    """Homogeneous part of -Laplacian on u (Robin rows folded in)."""
    return apply_fd_xx(u, ops.grid) + apply_tridiagonal_y(u, ops.u_bands)


def _apply_vy_operator(ops: _StokesOperators, w: np.ndarray) -> np.ndarray:
    return apply_fd_xx(w, ops.grid) + apply_tridiagonal_y(w, ops.vy_bands)


def _solve_u(ops: _StokesOperators, rhs: np.ndarray) -> np.ndarray:
    return solve_modes(rhs, ops.shift, ops.u_bands, scale=0.5 * ops.dt, identity=1.0)


def _solve_vy(ops: _StokesOperators, rhs: np.ndarray) -> np.ndarray:
    return solve_modes(rhs, ops.shift, ops.vy_bands, scale=0.5 * ops.dt, identity=1.0)


def _step_arrays(
    ops: _StokesOperators,
    u: np.ndarray,
    vy: np.ndarray,
    g_bottom: np.ndarray,
    g_top: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """One CN + projection step; g_* are the midpoint wall values."""
    dt = ops.dt
    rhs_u = u - 0.5 * dt * _apply_u_operator(ops, u)
    rhs_u[:, 0] += dt * ops.wall_gain * g_bottom
    rhs_u[:, -1] += dt * ops.wall_gain * g_top
    u_star = _solve_u(ops, rhs_u)
    w = vy[:, 1:-1]
    vy_star = np.zeros_like(vy)
    vy_star[:, 1:-1] = _solve_vy(ops, w - 0.5 * dt * _apply_vy_operator(ops, w))
    return _project_arrays(u_star, vy_star, ops.grid)


def _step_transpose(
    ops: _StokesOperators, lam_u: np.ndarray, lam_vy: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Transpose of ``_step_arrays``.

    Returns:
        Tuple (adjoint u, adjoint vy, adjoint of bottom midpoint control,
        adjoint of top midpoint control)
    """
    dt = ops.dt
    mu, mvy = _project_arrays(lam_u, lam_vy, ops.grid)
    mu = _solve_u(ops, mu)
    g_bottom = dt * ops.wall_gain * mu[:, 0]
    g_top = dt * ops.wall_gain * mu[:, -1]
    prev_u = mu - 0.5 * dt * _apply_u_operator(ops, mu)
    w = _solve_vy(ops, mvy[:, 1:-1])
    prev_vy = np.zeros_like(lam_vy)
    prev_vy[:, 1:-1] = w - 0.5 * dt * _apply_vy_operator(ops, w)
    return prev_u, prev_vy, g_bottom, g_top


def _check_control(g: ControlTrajectory, cfg: StokesConfig) -> None:
    if g.nt != cfg.nt:
        raise ConfigError(f"Control has {g.nt} steps, flow configuration has {cfg.nt}")
    if not np.isclose(g.dt, cfg.dt, rtol=1e-12, atol=0.0):
        raise ConfigError(f"Control dt {g.dt} differs from flow dt {cfg.dt}")


def stokes_step(
    v: VectorField, g_now: BoundarySlice, g_next: BoundarySlice, cfg: StokesConfig
) -> VectorField:
    """Advance the velocity by one step with the midpoint wall control.

    Raises:
        NumericalError: If the step produces non-finite values
    """
    grid = check_same_grid(v.grid, g_now.grid, g_next.grid)
    ops = _operators(grid, cfg.k, cfg.dt)
    u, vy = _step_arrays(
        ops,
        v.u,
        np.array(v.vy),
        0.5 * (g_now.bottom + g_next.bottom),
        0.5 * (g_now.top + g_next.top),
    )
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(vy))):
        raise NumericalError("Stokes step produced non-finite velocity", field="velocity")
    out = VectorField(grid, u, vy)
    div = float(np.max(np.abs(cell_divergence(out.u, out.vy, grid))))
    if div > cfg.div_tol(grid, out.max_abs):
        logger.warning("Stokes step divergence %.3e exceeds tolerance", div)
    return out


def solve_stokes(
    v0: Optional[VectorField], g: ControlTrajectory, cfg: StokesConfig
) -> VelocityTrajectory:
    """Velocity trajectory from v0 driven by wall control g.

    Args:
        v0: Initial velocity (None for rest); projected before stepping
        g: Control on the time grid of cfg
        cfg: Flow configuration

    Returns:
        VelocityTrajectory with cfg.nt + 1 snapshots

    Raises:
        ConfigError: If g and cfg disagree on the time grid
        NumericalError: If a step produces non-finite values
    """
    grid = g.grid
    _check_control(g, cfg)
    ops = _operators(grid, cfg.k, cfg.dt)
    us = np.zeros((cfg.nt + 1, grid.nx, grid.ny))
    vys = np.zeros((cfg.nt + 1, grid.nx, grid.ny + 1))
    if v0 is not None:
        check_same_grid(grid, v0.grid)
        us[0], vys[0] = _project_arrays(v0.u, np.array(v0.vy), grid)
    gmid_b = 0.5 * (g.bottom[:-1] + g.bottom[1:])
    gmid_t = 0.5 * (g.top[:-1] + g.top[1:])
    for n in range(cfg.nt):
        us[n + 1], vys[n + 1] = _step_arrays(ops, us[n], vys[n], gmid_b[n], gmid_t[n])
        if not np.isfinite(us[n + 1]).all():
            raise NumericalError(
                f"Stokes solve produced non-finite velocity at step {n + 1}",
                step=n + 1,
                field="velocity",
            )
    logger.debug("Stokes solve: nt=%d, max|v|=%.3e", cfg.nt, float(np.max(np.abs(us))))
    return VelocityTrajectory(grid, cfg.dt, us, vys, cfg.k)


def apply_L(g: ControlTrajectory, cfg: StokesConfig) -> VelocityTrajectory:
    """Control-to-velocity map from rest: (Lg)(t)."""
    return solve_stokes(None, g, cfg)


def apply_L_star(
    f: Union[VelocityTrajectory, Sequence[VectorField]],
    cfg: StokesConfig,
    mode_cap: Optional[int] = None,
) -> ControlTrajectory:
    """Space-time adjoint of ``apply_L``.

    Satisfies, with trapezoidal time weights w_n,

        sum_n w_n (L g(t_n), f(t_n))_Omega = sum_n w_n <g(t_n), L* f(t_n)>_Gamma

    exactly up to roundoff.

    Args:
        f: nt + 1 velocity snapshots
        cfg: Flow configuration used by ``apply_L``
        mode_cap: Optional x-mode cap of the returned control

    Returns:
        ControlTrajectory representing L* f in L2(0, T; L2(Gamma))
    """
    if isinstance(f, VelocityTrajectory):
        grid, fu, fvy = f.grid, f.u, f.vy
    else:
        grid = check_same_grid(*[s.grid for s in f])
        fu = np.stack([s.u for s in f])
        fvy = np.stack([s.vy for s in f])
    if fu.shape[0] != cfg.nt + 1:
        raise ConfigError(f"L* needs {cfg.nt + 1} snapshots, got {fu.shape[0]}")
    ops = _operators(grid, cfg.k, cfg.dt)
    w = trapezoid_weights(cfg.nt, cfg.dt)
    scale = w[:, None, None] * grid.cell_area
    eu = fu * scale
    evy = fvy * scale
    gb, gt = _transpose_sweep(ops, eu, evy, cfg.nt)
    denom = w[:, None] * grid.hx
    return ControlTrajectory(grid, cfg.dt, gb / denom, gt / denom, mode_cap)


def _transpose_sweep(
    ops: _StokesOperators, eu: np.ndarray, evy: np.ndarray, nt: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Backward sweep of the transposed stepping; returns Euclidean control adjoints."""
    grid = ops.grid
    gb = np.zeros((nt + 1, grid.nx))
    gt = np.zeros((nt + 1, grid.nx))
    lam_u = eu[nt].copy()
    lam_vy = evy[nt].copy()
    for n in range(nt - 1, -1, -1):
        prev_u, prev_vy, ab, at = _step_transpose(ops, lam_u, lam_vy)
        gb[n] += 0.5 * ab
        gb[n + 1] += 0.5 * ab
        gt[n] += 0.5 * at
        gt[n + 1] += 0.5 * at
        lam_u = eu[n] + prev_u
        lam_vy = evy[n] + prev_vy
    return gb, gt


def control_inner(g: ControlTrajectory, h: ControlTrajectory) -> float:
    """L2(0, T; L2(Gamma)) inner product with trapezoidal time weights."""
    check_same_grid(g.grid, h.grid)
    if g.bottom.shape != h.bottom.shape:
        raise GridError("Controls live on different time grids")
    w = trapezoid_weights(g.nt, g.dt)
    per_step = np.sum(g.bottom * h.bottom + g.top * h.top, axis=1) * g.grid.hx
    return float(np.dot(w, per_step))


def velocity_inner(a: VelocityTrajectory, b: VelocityTrajectory) -> float:
    """L2(0, T; L2(Omega)) inner product of two velocity trajectories (trapezoidal in t)."""
    grid = check_same_grid(a.grid, b.grid)
    if a.nt != b.nt:
        raise GridError(f"Velocity trajectories span {a.nt} and {b.nt} steps")
    per_step = np.sum(a.u * b.u, axis=(1, 2)) + np.sum(a.vy * b.vy, axis=(1, 2))
    return float(np.dot(trapezoid_weights(a.nt, a.dt), per_step)) * grid.cell_area


def control_norm(g: ControlTrajectory) -> float:
    return float(np.sqrt(max(control_inner(g, g), 0.0)))


def boundary_trace_tangential(v: VectorField) -> BoundarySlice:
    """Tangential velocity extrapolated to both walls (second order)."""
    bottom, _, top, _ = wall_extrapolate(v.u, v.grid)
    return BoundarySlice(v.grid, bottom, top)


def navier_slip_residual(v: VectorField, g: BoundarySlice, k: float) -> float:
    """Max over both walls of |k u -/+ du/dy - g|; a diagnostic."""
    check_same_grid(v.grid, g.grid)
    bottom, bottom_dy, top, top_dy = wall_extrapolate(v.u, v.grid)
    res_b = np.abs(k * bottom - bottom_dy - g.bottom)
    res_t = np.abs(k * top + top_dy - g.top)
    return float(max(np.max(res_b), np.max(res_t)))


def grad_v_infty_integral(v: VelocityTrajectory) -> float:
    """Trapezoidal integral over time of max |grad v| (all four components)."""
    grid = v.grid
    u, vy = v.u, v.vy
    dudx = np.abs(np.roll(u, -1, axis=1) - u) / grid.hx
    dudy = np.abs(u[:, :, 1:] - u[:, :, :-1]) / grid.hy
    dvdx = np.abs(vy - np.roll(vy, 1, axis=1)) / grid.hx
    dvdy = np.abs(vy[:, :, 1:] - vy[:, :, :-1]) / grid.hy
    per_step = np.max(
        np.stack(
            [
                dudx.max(axis=(1, 2)),
                dudy.max(axis=(1, 2)),
                dvdx.max(axis=(1, 2)),
                dvdy.max(axis=(1, 2)),
            ]
        ),
        axis=0,
    )
    return float(np.dot(trapezoid_weights(v.nt, v.dt), per_step))


def random_control(
    grid: Grid,
    dt: float,
    nt: int,
    seed: Optional[int] = None,
    amplitude: float = 1.0,
    mode_cap: Optional[int] = None,
) -> ControlTrajectory:
    """Random wall control, uniform in [-amplitude, amplitude) before the mode cap."""
    rng = np.random.default_rng(seed)
    shape = (nt + 1, grid.nx)
    return ControlTrajectory(
        grid,
        dt,
        amplitude * rng.uniform(-1.0, 1.0, shape),
        amplitude * rng.uniform(-1.0, 1.0, shape),
        mode_cap,
    )


def random_velocity(grid: Grid, seed: Optional[int] = None) -> VectorField:
    """Random staggered field (not projected)."""
    rng = np.random.default_rng(seed)
    return VectorField(
        grid,
        rng.uniform(-1.0, 1.0, (grid.nx, grid.ny)),
        rng.uniform(-1.0, 1.0, (grid.nx, grid.ny + 1)),
    )
