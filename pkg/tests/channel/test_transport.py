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
"""Tests for scalar transport and its linearization."""
import math

import numpy as np
import pytest

from slipmix.exceptions import CFLError, ConfigError, GridError
from slipmix.channel.grid import make_grid, random_field
from slipmix.channel.models import (
    ControlTrajectory,
    ScalarField,
    ScalarTrajectory,
    StokesConfig,
    TransportDiagnostics,
    VectorField,
    VelocityTrajectory,
)
from slipmix.channel.presets import initial_scalar, wall_control
from slipmix.channel.stokes import apply_L, random_control
from slipmix.channel.transport import (
    cfl_steps,
    check_cfl,
    full_states,
    max_stable_dt,
    solve_forward,
    solve_linearized,
    transport_step,
)


def _uniform_flow(grid, u, dt, nt):
    v = VectorField(grid, np.full((grid.nx, grid.ny), u), np.zeros((grid.nx, grid.ny + 1)))
    return VelocityTrajectory.steady(v, dt, nt)


def _rest(grid, dt, nt):
    return VelocityTrajectory.steady(VectorField.zeros(grid), dt, nt)


def test_rest_leaves_scalar_unchanged(grid):
    theta0 = random_field(grid, seed=1)
    theta = solve_forward(theta0, _rest(grid, 0.05, 10), 0.0)
    np.testing.assert_allclose(theta.final.values, theta0.values, rtol=1e-13, atol=1e-15)


def test_uniform_translation():
    grid = make_grid(128, 4)
    nt = 41
    theta0 = ScalarField.from_function(grid, lambda x, y: np.cos(x))
    theta = solve_forward(theta0, _uniform_flow(grid, 1.0, 1.0 / nt, nt), 0.0)
    x, _ = grid.cell_mesh()
    np.testing.assert_allclose(theta.final.values, np.cos(x - 1.0), atol=1e-3)


def test_heat_mode_decay():
    grid = make_grid(32, 8)
    eps = 0.1
    theta0 = ScalarField.from_function(grid, lambda x, y: np.cos(x))
    theta = solve_forward(theta0, _rest(grid, 0.05, 20), eps)
    np.testing.assert_allclose(
        theta.final.values, math.exp(-eps * 1.0) * theta0.values, atol=1e-3
    )


def test_mass_conserved_under_random_flow(grid, stokes, control):
    v = apply_L(control, stokes)
    theta = solve_forward(random_field(grid, seed=2), v, 0.01)
    assert theta.diagnostics.drift("mass") <= 1e-12


def test_constant_is_preserved(grid, stokes, control):
    v = apply_L(control, stokes)
    theta0 = ScalarField(grid, np.full((grid.nx, grid.ny), 2.0))
    theta = solve_forward(theta0, v, 0.0)
    np.testing.assert_allclose(theta.final.values, 2.0, atol=1e-10)


def test_l2_does_not_grow_with_diffusion(grid):
    theta = solve_forward(random_field(grid, seed=3), _rest(grid, 0.05, 10), 0.1)
    l2 = theta.diagnostics.l2
    assert all(b <= a + 1e-14 for a, b in zip(l2, l2[1:]))


def test_diagnostics_cover_every_step(grid, stokes, control):
    theta = solve_forward(initial_scalar("stripe", grid), apply_L(control, stokes), 0.0)
    rows = theta.diagnostics.rows()
    assert len(rows) == stokes.nt + 1
    assert rows[0]["t"] == 0.0
    assert set(rows[0]) == {"t", "mass", "L1", "L2", "Linf", "mixnorm"}


def test_cfl_violation_raises(grid):
    v = _uniform_flow(grid, 10.0, 0.05, 4)
    with pytest.raises(CFLError) as excinfo:
        solve_forward(initial_scalar("stripe", grid), v, 0.0)
    assert excinfo.value.step == 0
    assert excinfo.value.required_dt == pytest.approx(max_stable_dt(grid, 10.0))


def test_cfl_error_names_first_offending_step(grid):
    u = np.zeros((6, grid.nx, grid.ny))
    u[3] = 50.0
    v = VelocityTrajectory(grid, 0.01, u, np.zeros((6, grid.nx, grid.ny + 1)))
    with pytest.raises(CFLError) as excinfo:
        check_cfl(v)
    assert excinfo.value.step == 2


def test_transport_step_checks_cfl(grid):
    fast = VectorField(grid, np.full((grid.nx, grid.ny), 10.0), np.zeros((grid.nx, grid.ny + 1)))
    with pytest.raises(CFLError):
        transport_step(initial_scalar("stripe", grid), fast, fast, 0.0, 0.05)


def test_negative_epsilon_rejected(grid):
    with pytest.raises(ConfigError):
        solve_forward(initial_scalar("stripe", grid), _rest(grid, 0.05, 2), -1.0)


def test_cfl_steps():
    grid = make_grid(128, 129)
    assert cfl_steps(grid, 1.0, 1.0, 0.5) == 258
    with pytest.raises(ConfigError):
        cfl_steps(grid, 0.0, 1.0)


def test_checkpointed_run_recomputes_full_states(grid, stokes, control):
    v = apply_L(control, stokes)
    theta0 = initial_scalar("checkerboard", grid)
    full = solve_forward(theta0, v, 0.01)
    thin = solve_forward(theta0, v, 0.01, store_stride=5)
    assert thin.steps == (0, 5, 10, 12)
    np.testing.assert_allclose(full_states(thin, v), full.values, atol=1e-14)


class TestLinearized:
    """Tangent of the transport scheme along L h."""

    def test_zero_direction_gives_zero(self, grid, stokes, control):
        v = apply_L(control, stokes)
        base = solve_forward(initial_scalar("stripe", grid), v, 0.01)
        z = solve_linearized(ControlTrajectory.zeros(grid, stokes.dt, stokes.nt), base, v, 0.01, stokes)
        assert np.max(np.abs(z.values)) == 0.0

    def test_linear_in_direction(self, grid, stokes, control):
        v = apply_L(control, stokes)
        base = solve_forward(initial_scalar("stripe", grid), v, 0.01)
        h1 = random_control(grid, stokes.dt, stokes.nt, seed=11)
        h2 = random_control(grid, stokes.dt, stokes.nt, seed=12)
        z1 = solve_linearized(h1, base, v, 0.01, stokes).final.values
        z2 = solve_linearized(h2, base, v, 0.01, stokes).final.values
        z12 = solve_linearized(h1 + h2 * 2.0, base, v, 0.01, stokes).final.values
        np.testing.assert_allclose(z12, z1 + 2.0 * z2, atol=1e-12 * np.max(np.abs(z12)))

    def test_constant_scalar_does_not_respond(self, grid, stokes, control):
        v = apply_L(control, stokes)
        base = solve_forward(initial_scalar("constant", grid), v, 0.0)
        h = random_control(grid, stokes.dt, stokes.nt, seed=13)
        z = solve_linearized(h, base, v, 0.0, stokes)
        np.testing.assert_allclose(z.final.values, 0.0, atol=1e-10)

    def test_matches_finite_difference(self, grid, stokes, control):
        theta0 = initial_scalar("checkerboard", grid)
        h = random_control(grid, stokes.dt, stokes.nt, seed=14)
        v = apply_L(control, stokes)
        base = solve_forward(theta0, v, 0.01)
        z = solve_linearized(h, base, v, 0.01, stokes).final.values
        delta = 1e-6
        plus = solve_forward(theta0, apply_L(control + h * delta, stokes), 0.01).final.values
        minus = solve_forward(theta0, apply_L(control - h * delta, stokes), 0.01).final.values
        fd = (plus - minus) / (2.0 * delta)
        assert np.linalg.norm(fd - z) <= 1e-5 * np.linalg.norm(z)

    def test_base_must_match_epsilon(self, grid, stokes, control):
        v = apply_L(control, stokes)
        base = solve_forward(initial_scalar("stripe", grid), v, 0.01)
        with pytest.raises(GridError):
            solve_linearized(control, base, v, 0.02, stokes)


@pytest.mark.slow
def test_pure_transport_conservation_acceptance():
    grid = make_grid(128, 129)
    nt = cfl_steps(grid, 1.0, 1.0)
    g = wall_control(grid, 1.0 / nt, nt, plug=0.0, shear=0.5)
    v = apply_L(g, StokesConfig(k=1.0, dt=1.0 / nt, nt=nt))
    theta = solve_forward(initial_scalar("stripe", grid), v, 0.0)
    diag = theta.diagnostics
    assert diag.drift("mass") <= 1e-12
    for name in ("l1", "l2", "linf"):
        assert diag.drift(name) <= 1e-3


def test_substeps_replace_cfl_rejection():
    grid = make_grid(128, 4)
    nt = 5
    theta0 = ScalarField.from_function(grid, lambda x, y: np.cos(x))
    v = _uniform_flow(grid, 1.0, 1.0 / nt, nt)
    with pytest.raises(CFLError):
        solve_forward(theta0, v, 0.0)
    theta = solve_forward(theta0, v, 0.0, substep=True)
    assert len(theta.substeps) == nt
    assert len(set(theta.substeps)) == 1
    assert theta.substeps[0] > 1
    assert theta.substeps_at(0) == theta.substeps[0]
    assert theta.diagnostics.drift("mass") <= 1e-12
    x, _ = grid.cell_mesh()
    np.testing.assert_allclose(theta.final.values, np.cos(x - 1.0), atol=1e-3)


def test_substeps_leave_admissible_runs_unchanged(grid, stokes, control):
    v = apply_L(control, stokes)
    theta0 = initial_scalar("checkerboard", grid)
    plain = solve_forward(theta0, v, 1e-2)
    split = solve_forward(theta0, v, 1e-2, substep=True)
    assert plain.substeps is None
    assert split.substeps == (1,) * stokes.nt
    np.testing.assert_array_equal(split.values, plain.values)


def test_checkpointed_substep_run_recomputes_full_states(grid, stokes, control):
    v = apply_L(control * 100.0, stokes)
    theta0 = initial_scalar("checkerboard", grid)
    full = solve_forward(theta0, v, 1e-2, substep=True)
    thin = solve_forward(theta0, v, 1e-2, store_stride=5, substep=True)
    assert max(thin.substeps) > 1
    np.testing.assert_allclose(full_states(thin, v), full.values, atol=1e-14)


@pytest.mark.parametrize("eps", [0.0, 1e-2])
def test_stays_within_initial_range(eps):
    grid = make_grid(32, 33)
    stokes = StokesConfig(k=1.0, dt=0.02, nt=25)
    v = apply_L(wall_control(grid, stokes.dt, stokes.nt, plug=0.5, shear=0.25), stokes)
    theta0 = initial_scalar("stripe", grid)
    theta = solve_forward(theta0, v, eps)
    lo, hi = float(np.min(theta0.values)), float(np.max(theta0.values))
    tol = 1e-2 * (hi - lo)
    assert np.min(theta.values) >= lo - tol
    assert np.max(theta.values) <= hi + tol


def test_trajectory_shape_is_checked(grid):
    with pytest.raises(GridError, match="shape"):
        ScalarTrajectory(grid, 0.05, np.zeros((3, grid.nx + 1, grid.ny)), (0, 1, 2))
    with pytest.raises(GridError, match="Substep"):
        ScalarTrajectory(grid, 0.05, np.zeros((3, grid.nx, grid.ny)), (0, 1, 2), substeps=(1,))
    with pytest.raises(GridError, match="Substep"):
        ScalarTrajectory(grid, 0.05, np.zeros((3, grid.nx, grid.ny)), (0, 1, 2), substeps=(1, 0))


def test_mass_drift_scale():
    diag = TransportDiagnostics(
        times=[0.0, 1.0], mass=[0.0, 1e-10], l1=[2.0, 2.0], l2=[1.0, 1.0], linf=[1.0, 1.0]
    )
    assert diag.drift("mass") == pytest.approx(5e-11)
    assert diag.drift("l2") == 0.0
    empty = TransportDiagnostics(times=[0.0, 1.0], mass=[0.0, 1e-13], l1=[0.0, 1e-13])
    assert empty.drift("mass") == pytest.approx(1e-13)
