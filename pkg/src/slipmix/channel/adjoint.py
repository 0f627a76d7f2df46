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
"""Backward adjoint of the scalar transport.

The default ("discrete") sweep is the exact transpose of the forward stepping
in ``transport``, run from t = T down to t = 0. Alongside rho it accumulates
the velocity sensitivity F(t), the discrete counterpart of theta * grad rho,
so that for every velocity perturbation w

    (rho(T), z(T)) = sum_n w_n (F(t_n), w(t_n))

where z is the linearized scalar response. The "continuous" mode integrates
the backward equation with the forward scheme on the reversed, negated
velocity and forms theta * grad rho directly; it agrees with the discrete
sweep only to discretization error.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from slipmix.exceptions import ConfigError, GridError, NumericalError
from slipmix.channel.grid import face_gradient
from slipmix.channel.mixnorm import helmholtz_neumann_solve
from slipmix.channel.models import (
    ADJOINT_MODES,
    ScalarField,
    ScalarTrajectory,
    VelocityTrajectory,
    check_same_grid,
    trapezoid_weights,
)
from slipmix.channel.transport import (
    TransportKernel,
    full_states,
    kernel_for,
    solve_forward,
    substep_velocities,
    velocity_arrays,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AdjointSweep:
    """Result of one backward sweep.

    Attributes:
        rho: Adjoint scalar at every step, t_0..t_nt
        forcing: Velocity sensitivity F(t_n) (theta * grad rho in the continuous limit)
        grad_rho_l2: ||grad rho(t_n)||_L2 per step
        mode: "discrete" or "continuous"
    """

    rho: ScalarTrajectory
    forcing: VelocityTrajectory
    grad_rho_l2: List[float]
    mode: str

    @property
    def grad_rho_sup(self) -> float:
        return float(max(self.grad_rho_l2))


def terminal_condition(theta_T: ScalarField) -> ScalarField:
    """rho(T) = (-Laplacian + I)^{-1} theta(T) with Neumann walls."""
    return helmholtz_neumann_solve(theta_T)


def _grad_l2(values: np.ndarray, grid) -> float:
    gx, gy = face_gradient(values, grid)
    return math.sqrt((float(np.sum(gx**2)) + float(np.sum(gy**2))) * grid.cell_area)


def _step_back(
    kernel: TransportKernel,
    theta: np.ndarray,
    vel_now,
    vel_next,
    eps: float,
    dt: float,
    lam: np.ndarray,
):
    """Transpose of one forward step.

    Returns:
        Tuple (lambda at t_n, sensitivity to v(t_n), sensitivity to v(t_n+1)),
        sensitivities as (u, interior vy) pairs in Euclidean form
    """
    thetas, vels = kernel.stages(theta, vel_now, vel_next, dt)
    lam3 = kernel.diffuse(lam, eps, dt)
    su_c, sw_c = kernel.velocity_transpose(lam3, thetas[2], *vels[2])
    lam2 = (2.0 / 3.0) * (lam3 + dt * kernel.rhs_transpose(lam3, *vels[2]))
    su_b, sw_b = kernel.velocity_transpose(lam2, thetas[1], *vels[1])
    lam1 = 0.25 * (lam2 + dt * kernel.rhs_transpose(lam2, *vels[1]))
    su_a, sw_a = kernel.velocity_transpose(lam1, thetas[0], *vels[0])
    prev = lam3 / 3.0 + 0.75 * lam2 + lam1 + dt * kernel.rhs_transpose(lam1, *vels[0])
    c = dt / 3.0  # half of (2/3) dt, shared by both ends of the averaged stage velocity
    now = (dt * su_a + c * su_c, dt * sw_a + c * sw_c)
    nxt = (0.25 * dt * su_b + c * su_c, 0.25 * dt * sw_b + c * sw_c)
    return prev, now, nxt


def _advance_back(kernel, theta, vel_now, vel_next, eps, dt, lam, substeps):
    """Transpose of ``TransportKernel.advance``; substep sensitivities are spread
    back onto the two step ends with the interpolation weights."""
    if substeps == 1:
        return _step_back(kernel, theta, vel_now, vel_next, eps, dt, lam)
    h = dt / substeps
    pairs = [substep_velocities(vel_now, vel_next, k, substeps) for k in range(substeps)]
    states = [theta]
    for k in range(substeps - 1):
        states.append(kernel.step(states[-1], *pairs[k], eps, h))
    now = [np.zeros_like(vel_now[0]), np.zeros_like(vel_now[1])]
    nxt = [np.zeros_like(vel_now[0]), np.zeros_like(vel_now[1])]
    for k in range(substeps - 1, -1, -1):
        lam, sa, sb = _step_back(kernel, states[k], *pairs[k], eps, h, lam)
        a, b = k / substeps, (k + 1) / substeps
        for i in range(2):
            now[i] += (1.0 - a) * sa[i] + (1.0 - b) * sb[i]
            nxt[i] += a * sa[i] + b * sb[i]
    return lam, tuple(now), tuple(nxt)


def _discrete_sweep(theta_T: ScalarField, base: ScalarTrajectory, v: VelocityTrajectory, eps: float):
    grid = base.grid
    kernel = kernel_for(grid)
    nt, dt, area = v.nt, v.dt, grid.cell_area
    rho = np.empty((nt + 1, grid.nx, grid.ny))
    rho[nt] = terminal_condition(theta_T).values
    lam = area * rho[nt]
    eu = np.zeros((nt + 1, grid.nx, grid.ny))
    ew = np.zeros((nt + 1, grid.nx, grid.ny - 1))
    steps = base.steps
    for seg in range(len(steps) - 2, -1, -1):
        start, stop = steps[seg], steps[seg + 1]
        states = [base.values[seg]]
        for n in range(start, stop - 1):
            states.append(
                kernel.advance(
                    states[-1],
                    velocity_arrays(v, n),
                    velocity_arrays(v, n + 1),
                    eps,
                    dt,
                    base.substeps_at(n),
                )
            )
        for n in range(stop - 1, start - 1, -1):
            lam, now, nxt = _advance_back(
                kernel,
                states[n - start],
                velocity_arrays(v, n),
                velocity_arrays(v, n + 1),
                eps,
                dt,
                lam,
                base.substeps_at(n),
            )
            eu[n] += now[0]
            ew[n] += now[1]
            eu[n + 1] += nxt[0]
            ew[n + 1] += nxt[1]
            rho[n] = lam / area
            if not np.all(np.isfinite(lam)):
                raise NumericalError(
                    f"Adjoint sweep produced non-finite values at step {n}", step=n, field="rho"
                )
    scale = trapezoid_weights(nt, dt)[:, None, None] * area
    fvy = np.zeros((nt + 1, grid.nx, grid.ny + 1))
    fvy[:, :, 1:-1] = ew / scale
    forcing = VelocityTrajectory(grid, dt, eu / scale, fvy, v.k)
    return rho, forcing


def _cell_gradient(rho: np.ndarray, grid):
    """Centred gradient at cell centres; wall rows use the mirrored ghost."""
    gx = (np.roll(rho, -1, axis=0) - np.roll(rho, 1, axis=0)) / (2.0 * grid.hx)
    padded = np.concatenate([rho[:, :1], rho, rho[:, -1:]], axis=1)
    gy = (padded[:, 2:] - padded[:, :-2]) / (2.0 * grid.hy)
    return gx, gy


def _continuous_sweep(theta_T: ScalarField, base: ScalarTrajectory, v: VelocityTrajectory, eps: float):
    grid = base.grid
    nt = v.nt
    reversed_v = VelocityTrajectory(grid, v.dt, -v.u[::-1], -v.vy[::-1], v.k)
    backward = solve_forward(
        terminal_condition(theta_T),
        reversed_v,
        eps,
        diagnostics=False,
        substep=True,
    )
    rho = np.array(backward.values[::-1])
    thetas = full_states(base, v)
    fu = np.zeros((nt + 1, grid.nx, grid.ny))
    fvy = np.zeros((nt + 1, grid.nx, grid.ny + 1))
    for n in range(nt + 1):
        gx, gy = _cell_gradient(rho[n], grid)
        ax, ay = thetas[n] * gx, thetas[n] * gy
        fu[n] = 0.5 * (np.roll(ax, 1, axis=0) + ax)
        fvy[n, :, 1:-1] = 0.5 * (ay[:, :-1] + ay[:, 1:])
    return rho, VelocityTrajectory(grid, v.dt, fu, fvy, v.k)


def adjoint_sweep(
    theta_T: ScalarField,
    base: ScalarTrajectory,
    v: VelocityTrajectory,
    eps: float,
    mode: str = "discrete",
) -> AdjointSweep:
    """Run the backward sweep and collect rho, the velocity sensitivity and monitors.

    Args:
        theta_T: Terminal scalar (normally base.final)
        base: Forward scalar trajectory, full or checkpointed
        v: Velocity trajectory that produced base
        eps: Diffusivity used by base
        mode: "discrete" (exact transpose) or "continuous" (independent scheme)

    Raises:
        ConfigError: For an unknown mode
        GridError: If base, v and eps are inconsistent
        CFLError: From the forward scheme in continuous mode
    """
    if mode not in ADJOINT_MODES:
        raise ConfigError(f"adjoint mode must be one of {ADJOINT_MODES}, got {mode!r}")
    grid = check_same_grid(theta_T.grid, base.grid, v.grid)
    if base.nt != v.nt or base.epsilon != eps:
        raise GridError("Base trajectory does not match the velocity trajectory or eps")
    if mode == "discrete":
        rho, forcing = _discrete_sweep(theta_T, base, v, eps)
    else:
        rho, forcing = _continuous_sweep(theta_T, base, v, eps)
    grad_rho = [_grad_l2(r, grid) for r in rho]
    logger.debug(
        "Adjoint sweep (%s): nt=%d, stride=%d, sup|grad rho|=%.3e",
        mode,
        v.nt,
        base.stride,
        max(grad_rho),
    )
    traj = ScalarTrajectory(grid, v.dt, rho, list(range(v.nt + 1)), eps, v)
    return AdjointSweep(rho=traj, forcing=forcing, grad_rho_l2=grad_rho, mode=mode)


def solve_adjoint(
    theta_T: ScalarField,
    base: ScalarTrajectory,
    v: VelocityTrajectory,
    eps: float,
    mode: str = "discrete",
) -> ScalarTrajectory:
    """Adjoint scalar rho from t = T down to t = 0 (see ``adjoint_sweep``)."""
    return adjoint_sweep(theta_T, base, v, eps, mode).rho
