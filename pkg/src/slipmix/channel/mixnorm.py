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
"""(H^1)' mix-norm through the Neumann Helmholtz operator, and the cost."""
import math

import numpy as np
from scipy import fft as sfft

from slipmix.exceptions import ConfigError
from slipmix.channel.grid import (
    apply_tridiagonal_y,
    inner_product,
    neumann_tridiagonal,
    solve_modes,
    spectral_symbol,
)
from slipmix.channel.models import ControlTrajectory, CostReport, ScalarField
from slipmix.channel.stokes import control_inner


def helmholtz_neumann_solve(theta: ScalarField) -> ScalarField:
    """Solve (-Laplacian + I) phi = theta with zero normal derivative at the walls.

    Spectral in x, second-order finite differences in y.
    """
    grid = theta.grid
    phi = solve_modes(
        theta.values,
        spectral_symbol(grid),
        neumann_tridiagonal(grid.ny, grid.hy),
        identity=1.0,
    )
    return ScalarField(grid, phi)


def helmholtz_apply(phi: ScalarField) -> ScalarField:
    """Apply the discrete (-Laplacian + I) inverted by ``helmholtz_neumann_solve``."""
    grid = phi.grid
    spec = sfft.rfft(phi.values, axis=0)
    spec *= spectral_symbol(grid)[:, None]
    dxx = sfft.irfft(spec, n=grid.nx, axis=0)
    dyy = apply_tridiagonal_y(phi.values, neumann_tridiagonal(grid.ny, grid.hy))
    return ScalarField(grid, phi.values + dxx + dyy)


def mix_norm(theta: ScalarField) -> float:
    """||theta||_{(H^1)'} = sqrt((A^{-1} theta, theta))."""
    q = inner_product(helmholtz_neumann_solve(theta), theta)
    return math.sqrt(max(q, 0.0))


def cost(
    g: ControlTrajectory, theta_T: ScalarField, gamma: float, epsilon: float
) -> CostReport:
    """Evaluate J_eps(g) = 1/2 ||theta(T)||^2_{(H^1)'} + gamma/2 ||g||^2.

    Raises:
        ConfigError: If gamma is not positive
    """
    if not gamma > 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    mix_term = 0.5 * mix_norm(theta_T) ** 2
    control_term = 0.5 * gamma * control_inner(g, g)
    return CostReport(
        mix_term=mix_term,
        control_term=control_term,
        total=mix_term + control_term,
        gamma=gamma,
        epsilon=epsilon,
    )
