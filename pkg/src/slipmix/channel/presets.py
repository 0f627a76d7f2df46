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
"""Named initial scalars, simple wall controls and the reference scenario."""
import math
from typing import Optional

import numpy as np

from slipmix.exceptions import ConfigError
from slipmix.channel.grid import make_grid
from slipmix.channel.models import ControlTrajectory, Grid, ScalarField, StokesConfig
from slipmix.channel.optimize import MixingProblem
from slipmix.channel.transport import DEFAULT_CFL, cfl_steps

PRESETS = ("stripe", "checkerboard", "blob", "constant")

BLOB_WIDTH = 0.15


def initial_scalar(name: str, grid: Grid) -> ScalarField:
    """Initial scalar by preset name.

    stripe: sin(2 pi x / Lx). checkerboard: sin(2 pi x / Lx) cos(pi y / Ly).
    blob: centred Gaussian shifted to zero mean. constant: 1 (already mixed).

    Raises:
        ConfigError: For an unknown name
    """
    if name == "stripe":
        return ScalarField.from_function(grid, lambda x, y: np.sin(2.0 * math.pi * x / grid.Lx))
    if name == "checkerboard":
        return ScalarField.from_function(
            grid,
            lambda x, y: np.sin(2.0 * math.pi * x / grid.Lx) * np.cos(math.pi * y / grid.Ly),
        )
    if name == "blob":
        width = BLOB_WIDTH * min(grid.Lx, grid.Ly)
        field = ScalarField.from_function(
            grid,
            lambda x, y: np.exp(
                -((x - 0.5 * grid.Lx) ** 2 + (y - 0.5 * grid.Ly) ** 2) / (2.0 * width**2)
            ),
        )
        return ScalarField(grid, field.values - np.mean(field.values))
    if name == "constant":
        return ScalarField(grid, np.ones((grid.nx, grid.ny)))
    raise ConfigError(f"Unknown initial data preset {name!r}; choose one of {PRESETS}")


def wall_control(
    grid: Grid,
    dt: float,
    nt: int,
    plug: float = 0.0,
    shear: float = 0.0,
    mode_cap: Optional[int] = None,
) -> ControlTrajectory:
    """Steady control: plug drives both walls alike, shear drives them oppositely."""
    shape = (nt + 1, grid.nx)
    return ControlTrajectory(
        grid, dt, np.full(shape, plug - shear), np.full(shape, plug + shear), mode_cap
    )


def reference_problem(
    nx: int = 128,
    ny: int = 129,
    T: float = 1.0,
    k: float = 1.0,
    u_ref: float = 1.0,
    cfl: float = DEFAULT_CFL,
    preset: str = "stripe",
) -> MixingProblem:
    """Stripe initial data, fluid at rest, k = 1 and T = 1; nt from the CFL bound at u_ref."""
    grid = make_grid(nx, ny)
    nt = cfl_steps(grid, T, u_ref, cfl)
    return MixingProblem(initial_scalar(preset, grid), StokesConfig(k=k, dt=T / nt, nt=nt))
