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
"""Scalar transport: pure advection (eps = 0) and advection-diffusion (eps > 0).

Advection is a conservative finite-volume scheme: third-order upwind-biased
face values, written as a fourth-order central part plus a dissipative part
proportional to |u|, integrated with SSP-RK3. Diffusion follows as one
Crank-Nicolson solve with zero-flux walls (Lie splitting). Steps that exceed
the CFL bound can be split into equal substeps with linearly interpolated
velocities; the optimizer runs every solve that way. The same kernel
exposes its transpose in theta and its derivative in the velocity so the
adjoint module can run the exact backward sweep.
"""
import functools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from slipmix.exceptions import CFLError, ConfigError, GridError, NumericalError
from slipmix.channel.grid import (
    face_gradient,
    fd_symbol,
    neumann_laplacian,
    neumann_tridiagonal,
    solve_modes,
)
from slipmix.channel.models import (
    ControlTrajectory,
    Grid,
    ScalarField,
    ScalarTrajectory,
    StokesConfig,
    TransportDiagnostics,
    VectorField,
    VelocityTrajectory,
    check_same_grid,
)

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.5

# face value = sum_s (c_s * u + d_s * |u|) * theta_{face + s}
_OFFSETS = (-2, -1, 0, 1)
_CENTRAL = np.array([-1.0, 7.0, 7.0, -1.0]) / 12.0
_DISSIPATIVE = np.array([-1.0, 3.0, -3.0, 1.0]) / 12.0

# SSP-RK3 stage velocities as weights on (v_now, v_next)
_STAGE_VELOCITY = ((1.0, 0.0), (0.0, 1.0), (0.5, 0.5))


class TransportKernel:
    """Advection and diffusion operators on one grid, with their transposes.

    Velocities are passed as (u, w) with u of shape (nx, ny) and w the interior
    rows of vy, shape (nx, ny - 1).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        ny = grid.ny
        faces = np.arange(1, ny)
        self._y_index = [np.clip(faces + s, 0, ny - 1) for s in _OFFSETS]
        self._y_scatter = []
        for idx in self._y_index:
            mat = np.zeros((ny - 1, ny))
            np.add.at(mat, (np.arange(ny - 1), idx), 1.0)
            self._y_scatter.append(mat)
        self._shift = fd_symbol(grid)
        self._bands = neumann_tridiagonal(ny, grid.hy)

    def _x_parts(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        shifted = [np.roll(theta, -s, axis=0) for s in _OFFSETS]
        central = sum(c * t for c, t in zip(_CENTRAL, shifted))
        dissip = sum(d * t for d, t in zip(_DISSIPATIVE, shifted))
        return central, dissip

    def _y_parts(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        gathered = [theta[:, idx] for idx in self._y_index]
        central = sum(c * t for c, t in zip(_CENTRAL, gathered))
        dissip = sum(d * t for d, t in zip(_DISSIPATIVE, gathered))
        return central, dissip

    def _flux_divergence(self, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
        grid = self.grid
        full = np.zeros((grid.nx, grid.ny + 1))
        full[:, 1:-1] = fy
        return (np.roll(fx, -1, axis=0) - fx) / grid.hx + (full[:, 1:] - full[:, :-1]) / grid.hy

    def _face_weights(self, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        gx, gy = face_gradient(lam, self.grid)
        return gx, gy[:, 1:-1]

    def rhs(
        self,
        theta: np.ndarray,
        u: np.ndarray,
        w: np.ndarray,
        du: Optional[np.ndarray] = None,
        dw: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """-div(v theta_face).

        With (du, dw) given, returns the derivative in the velocity direction
        (du, dw) at velocity (u, w) instead.
        """
        cx, dx = self._x_parts(theta)
        cy, dy = self._y_parts(theta)
        if du is None:
            fx = u * cx + np.abs(u) * dx
            fy = w * cy + np.abs(w) * dy
        else:
            fx = du * (cx + np.sign(u) * dx)
            fy = dw * (cy + np.sign(w) * dy)
        return -self._flux_divergence(fx, fy)

    def rhs_transpose(self, lam: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Transpose of ``rhs`` in theta at fixed velocity."""
        mx, my = self._face_weights(lam)
        au, aw = np.abs(u), np.abs(w)
        out = np.zeros_like(lam)
        for s, c, d, scatter in zip(_OFFSETS, _CENTRAL, _DISSIPATIVE, self._y_scatter):
            out += np.roll(mx * (c * u + d * au), s, axis=0)
            out += (my * (c * w + d * aw)) @ scatter
        return out

    def velocity_transpose(
        self, lam: np.ndarray, theta: np.ndarray, u: np.ndarray, w: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Gradient of <lam, rhs(theta, u, w)> with respect to (u, w)."""
        mx, my = self._face_weights(lam)
        cx, dx = self._x_parts(theta)
        cy, dy = self._y_parts(theta)
        return mx * (cx + np.sign(u) * dx), my * (cy + np.sign(w) * dy)

    def diffuse(self, theta: np.ndarray, eps: float, dt: float) -> np.ndarray:
        """Crank-Nicolson step of d/dt theta = eps Laplacian theta (symmetric in theta)."""
        if eps == 0.0:
            return theta
        a = 0.5 * eps * dt
        rhs = theta + a * neumann_laplacian(theta, self.grid)
        return solve_modes(rhs, self._shift, self._bands, scale=a, identity=1.0)

    def stages(
        self,
        theta: np.ndarray,
        vel_now: Tuple[np.ndarray, np.ndarray],
        vel_next: Tuple[np.ndarray, np.ndarray],
        dt: float,
    ) -> Tuple[List[np.ndarray], List[Tuple[np.ndarray, np.ndarray]]]:
        """SSP-RK3 stage inputs [theta, theta1, theta2], stage velocities, and theta3."""
        vels = [stage_velocity(vel_now, vel_next, a, b) for a, b in _STAGE_VELOCITY]
        t1 = theta + dt * self.rhs(theta, *vels[0])
        t2 = 0.75 * theta + 0.25 * (t1 + dt * self.rhs(t1, *vels[1]))
        t3 = theta / 3.0 + (2.0 / 3.0) * (t2 + dt * self.rhs(t2, *vels[2]))
        return [theta, t1, t2, t3], vels

    def step(
        self,
        theta: np.ndarray,
        vel_now: Tuple[np.ndarray, np.ndarray],
        vel_next: Tuple[np.ndarray, np.ndarray],
        eps: float,
        dt: float,
    ) -> np.ndarray:
        states, _ = self.stages(theta, vel_now, vel_next, dt)
        return self.diffuse(states[3], eps, dt)

    def advance(
        self,
        theta: np.ndarray,
        vel_now: Tuple[np.ndarray, np.ndarray],
        vel_next: Tuple[np.ndarray, np.ndarray],
        eps: float,
        dt: float,
        substeps: int = 1,
    ) -> np.ndarray:
        """One step of length dt taken as ``substeps`` equal steps."""
        if substeps == 1:
            return self.step(theta, vel_now, vel_next, eps, dt)
        h = dt / substeps
        for k in range(substeps):
            theta = self.step(theta, *substep_velocities(vel_now, vel_next, k, substeps), eps, h)
        return theta

    def tangent_step(
        self,
        theta: np.ndarray,
        z: np.ndarray,
        vels: Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
        dvels: Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
        eps: float,
        dt: float,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Advance (theta, z) by one step, z along the velocity direction dvels."""
        thetas, stage_vels = self.stages(theta, *vels, dt)
        stage_dvels = [stage_velocity(*dvels, a, b) for a, b in _STAGE_VELOCITY]

        def tangent(k, zs):
            return self.rhs(zs, *stage_vels[k]) + self.rhs(thetas[k], *stage_vels[k], *stage_dvels[k])

        z1 = z + dt * tangent(0, z)
        z2 = 0.75 * z + 0.25 * (z1 + dt * tangent(1, z1))
        z3 = z / 3.0 + (2.0 / 3.0) * (z2 + dt * tangent(2, z2))
        return self.diffuse(thetas[3], eps, dt), self.diffuse(z3, eps, dt)


def stage_velocity(vel_now, vel_next, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    if b == 0.0:
        return vel_now
    if a == 0.0:
        return vel_next
    return (a * vel_now[0] + b * vel_next[0], a * vel_now[1] + b * vel_next[1])


def substep_velocities(vel_now, vel_next, k: int, m: int):
    """End velocities of substep k of m, interpolated linearly across the step."""
    a, b = k / m, (k + 1) / m
    return stage_velocity(vel_now, vel_next, 1.0 - a, a), stage_velocity(vel_now, vel_next, 1.0 - b, b)


@functools.lru_cache(maxsize=16)
def kernel_for(grid: Grid) -> TransportKernel:
    return TransportKernel(grid)


def velocity_arrays(v: VelocityTrajectory, n: int) -> Tuple[np.ndarray, np.ndarray]:
    return v.u[n], v.vy[n][:, 1:-1]


def max_stable_dt(grid: Grid, vmax: float, cfl: float = DEFAULT_CFL) -> float:
    """Largest dt allowed by dt <= cfl * min(hx, hy) / max|v|."""
    return cfl * min(grid.hx, grid.hy) / max(vmax, 1e-300)


def cfl_steps(grid: Grid, T: float, u_ref: float, cfl: float = DEFAULT_CFL) -> int:
    """Smallest step count over [0, T] that keeps velocities up to u_ref admissible."""
    if not T > 0:
        raise ConfigError(f"Final time T must be positive, got {T}")
    return max(1, math.ceil(T / max_stable_dt(grid, abs(u_ref), cfl) - 1e-9))


def check_cfl(v: VelocityTrajectory, cfl: float = DEFAULT_CFL) -> None:
    """Reject a velocity trajectory whose steps violate the CFL bound.

    Raises:
        CFLError: Naming the first offending step and the dt it requires
    """
    vmax = v.max_abs
    step_max = np.maximum(vmax[:-1], vmax[1:])
    bound = cfl * min(v.grid.hx, v.grid.hy) * (1.0 + 1e-12)
    bad = np.nonzero(step_max * v.dt > bound)[0]
    if bad.size:
        n = int(bad[0])
        limit = max_stable_dt(v.grid, float(step_max[n]), cfl)
        raise CFLError(
            f"CFL violated at step {n}: dt={v.dt:.4e} exceeds {limit:.4e} "
            f"(max|v|={float(np.max(step_max)):.4e}, cfl={cfl})",
            step=n,
            dt=v.dt,
            required_dt=limit,
        )


def substep_counts(v: VelocityTrajectory, cfl: float = DEFAULT_CFL) -> Tuple[int, ...]:
    """Per-step number of equal substeps that brings every substep within the CFL bound."""
    vmax = v.max_abs
    step_max = np.maximum(vmax[:-1], vmax[1:])
    ratio = step_max * v.dt / (cfl * min(v.grid.hx, v.grid.hy) * (1.0 + 1e-12))
    return tuple(max(1, math.ceil(r)) for r in ratio)


def _check_eps(eps: float) -> None:
    if eps < 0 or not math.isfinite(eps):
        raise ConfigError(f"Diffusivity eps must be finite and >= 0, got {eps}")


def transport_step(
    theta: ScalarField,
    v_now: VectorField,
    v_next: VectorField,
    eps: float,
    dt: float,
    cfl: float = DEFAULT_CFL,
) -> ScalarField:
    """Advance theta by one step of the (eps-regularized) transport equation.

    Raises:
        CFLError: If dt violates the advective CFL bound
        NumericalError: If the update is not finite
    """
    grid = check_same_grid(theta.grid, v_now.grid, v_next.grid)
    _check_eps(eps)
    limit = max_stable_dt(grid, max(v_now.max_abs, v_next.max_abs), cfl)
    if dt > limit * (1.0 + 1e-12):
        raise CFLError(
            f"CFL violated: dt={dt:.4e} exceeds {limit:.4e}", step=0, dt=dt, required_dt=limit
        )
    kernel = kernel_for(grid)
    out = kernel.step(
        theta.values, (v_now.u, v_now.vy[:, 1:-1]), (v_next.u, v_next.vy[:, 1:-1]), eps, dt
    )
    if not np.all(np.isfinite(out)):
        raise NumericalError("Transport step produced non-finite values", step=0, field="theta")
    return ScalarField(grid, out)


def _record(diag: TransportDiagnostics, t: float, theta: np.ndarray, grid: Grid, mixnorm) -> None:
    area = grid.cell_area
    diag.times.append(t)
    diag.mass.append(float(np.sum(theta)) * area)
    diag.l1.append(float(np.sum(np.abs(theta))) * area)
    diag.l2.append(math.sqrt(float(np.sum(theta**2)) * area))
    diag.linf.append(float(np.max(np.abs(theta))))
    diag.mixnorm.append(mixnorm(ScalarField(grid, theta)))
    gx, gy = face_gradient(theta, grid)
    diag.grad_l2.append(math.sqrt((float(np.sum(gx**2)) + float(np.sum(gy**2))) * area))


def stored_steps(nt: int, stride: int) -> List[int]:
    steps = list(range(0, nt + 1, stride))
    if steps[-1] != nt:
        steps.append(nt)
    return steps


def solve_forward(
    theta0: ScalarField,
    v: VelocityTrajectory,
    eps: float,
    cfl: float = DEFAULT_CFL,
    store_stride: int = 1,
    diagnostics: bool = True,
    substep: bool = False,
) -> ScalarTrajectory:
    """Solve the scalar equation along a velocity trajectory.

    Args:
        theta0: Initial scalar
        v: Velocity trajectory (its dt is the scalar time step)
        eps: Diffusivity (0 for pure transport)
        cfl: CFL number used for the admissibility check
        store_stride: Keep every store_stride-th snapshot (final always kept)
        diagnostics: Record mass, L^p norms, mix-norm and ||grad theta||_L2 per step
        substep: Split steps that violate the CFL bound into equal substeps
            instead of rejecting the trajectory

    Returns:
        ScalarTrajectory

    Raises:
        CFLError: Naming the offending step (only when substep is False)
        NumericalError: If the solve produces non-finite values
    """
    from slipmix.channel.mixnorm import mix_norm

    grid = check_same_grid(theta0.grid, v.grid)
    _check_eps(eps)
    if store_stride < 1:
        raise ConfigError("store_stride must be >= 1")
    counts = None
    if substep:
        counts = substep_counts(v, cfl)
        if max(counts) > 1:
            logger.debug("Transport takes %d substeps over %d steps", sum(counts), v.nt)
    else:
        check_cfl(v, cfl)
    kernel = kernel_for(grid)
    steps = stored_steps(v.nt, store_stride)
    keep = set(steps)
    stored = [theta0.values]
    diag = TransportDiagnostics() if diagnostics else None
    theta = np.array(theta0.values)
    if diag is not None:
        _record(diag, 0.0, theta, grid, mix_norm)
    for n in range(v.nt):
        theta = kernel.advance(
            theta,
            velocity_arrays(v, n),
            velocity_arrays(v, n + 1),
            eps,
            v.dt,
            counts[n] if counts else 1,
        )
        if not np.all(np.isfinite(theta)):
            raise NumericalError(
                f"Transport produced non-finite values at step {n + 1}", step=n + 1, field="theta"
            )
        if n + 1 in keep:
            stored.append(theta)
        if diag is not None:
            _record(diag, (n + 1) * v.dt, theta, grid, mix_norm)
    if diag is not None:
        logger.debug(
            "Transport eps=%.3g: mass drift %.3e, L2 drift %.3e",
            eps,
            diag.drift("mass"),
            diag.drift("l2"),
        )
    return ScalarTrajectory(grid, v.dt, np.stack(stored), steps, eps, v, diag, counts)


def full_states(base: ScalarTrajectory, v: VelocityTrajectory) -> np.ndarray:
    """All nt + 1 states of a trajectory, recomputed from checkpoints when thinned."""
    if base.is_full:
        return base.values
    kernel = kernel_for(base.grid)
    out = np.empty((base.nt + 1, base.grid.nx, base.grid.ny))
    for i, start in enumerate(base.steps[:-1]):
        theta = base.values[i]
        out[start] = theta
        for n in range(start, base.steps[i + 1]):
            theta = kernel.advance(
                theta,
                velocity_arrays(v, n),
                velocity_arrays(v, n + 1),
                base.epsilon,
                v.dt,
                base.substeps_at(n),
            )
            out[n + 1] = theta
    return out


def solve_linearized(
    h: ControlTrajectory,
    base: ScalarTrajectory,
    v: VelocityTrajectory,
    eps: float,
    cfg: StokesConfig,
) -> ScalarTrajectory:
    """Derivative of the scalar trajectory in the control direction h.

    Solves the tangent of the discrete scheme: z(0) = 0 and, per step, the
    linearization of the transport update in theta (along z) and in the
    velocity (along w = L h), substep by substep when base was substepped.

    Raises:
        GridError: If base does not belong to (v, eps)
    """
    from slipmix.channel.stokes import apply_L

    grid = check_same_grid(h.grid, base.grid, v.grid)
    if base.nt != v.nt or base.epsilon != eps:
        raise GridError("Base trajectory does not match the velocity trajectory or eps")
    w = apply_L(h, cfg)
    kernel = kernel_for(grid)
    states = full_states(base, v)
    z = np.zeros((grid.nx, grid.ny))
    out = [z]
    for n in range(v.nt):
        m = base.substeps_at(n)
        theta = states[n]
        for k in range(m):
            theta, z = kernel.tangent_step(
                theta,
                z,
                substep_velocities(velocity_arrays(v, n), velocity_arrays(v, n + 1), k, m),
                substep_velocities(velocity_arrays(w, n), velocity_arrays(w, n + 1), k, m),
                eps,
                v.dt / m,
            )
        out.append(z)
    return ScalarTrajectory(
        grid, v.dt, np.stack(out), list(range(v.nt + 1)), eps, v, substeps=base.substeps
    )
