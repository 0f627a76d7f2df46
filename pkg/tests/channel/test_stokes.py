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
"""Tests for the slip-driven Stokes solver and its adjoint."""
import numpy as np
import pytest

from slipmix.exceptions import ConfigError, GridError
from slipmix.channel.grid import cell_divergence, make_grid
from slipmix.channel.models import (
    BoundarySlice,
    ControlTrajectory,
    StokesConfig,
    VectorField,
    VelocityTrajectory,
)
from slipmix.channel.stokes import (
    apply_L,
    apply_L_star,
    boundary_trace_tangential,
    control_inner,
    grad_v_infty_integral,
    leray_project,
    navier_slip_residual,
    random_control,
    random_velocity,
    solve_stokes,
    stokes_step,
    velocity_inner,
)


def _projected_trajectory(grid, cfg, seed):
    return VelocityTrajectory.from_snapshots(
        [leray_project(random_velocity(grid, seed + n)) for n in range(cfg.nt + 1)], cfg.dt
    )


def _max_div(v):
    return float(np.max(np.abs(cell_divergence(v.u, v.vy, v.grid))))


class TestProjection:
    """Leray projection."""

    def test_output_is_divergence_free(self, grid):
        assert _max_div(leray_project(random_velocity(grid, 1))) < 1e-10

    def test_idempotent(self, grid):
        once = leray_project(random_velocity(grid, 2))
        twice = leray_project(once)
        np.testing.assert_allclose(twice.u, once.u, atol=1e-12)
        np.testing.assert_allclose(twice.vy, once.vy, atol=1e-12)

    def test_symmetric(self, grid):
        a = random_velocity(grid, 3)
        b = random_velocity(grid, 4)
        pa, pb = leray_project(a), leray_project(b)
        lhs = np.sum(pa.u * b.u) + np.sum(pa.vy * b.vy)
        rhs = np.sum(a.u * pb.u) + np.sum(a.vy * pb.vy)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_raw_arrays_need_grid(self, grid):
        v = random_velocity(grid, 5)
        with pytest.raises(GridError):
            leray_project((v.u, v.vy))
        assert _max_div(leray_project((v.u, v.vy), grid)) < 1e-10

    def test_gradient_field_is_removed(self, grid):
        x, _ = grid.u_mesh()
        v = leray_project(VectorField(grid, np.cos(x), np.zeros((grid.nx, grid.ny + 1))))
        np.testing.assert_allclose(v.u, 0.0, atol=1e-12)
        np.testing.assert_allclose(v.vy, 0.0, atol=1e-12)

    def test_divergence_free_field_is_kept(self, grid):
        _, y = grid.u_mesh()
        shear = VectorField(grid, np.cos(np.pi * y) + 0.5, np.zeros((grid.nx, grid.ny + 1)))
        v = leray_project(shear)
        np.testing.assert_allclose(v.u, shear.u, atol=1e-12)
        np.testing.assert_allclose(v.vy, 0.0, atol=1e-12)


class TestStokesSolve:
    """Forward stepping."""

    def test_rest_stays_at_rest(self, grid, stokes):
        v = apply_L(ControlTrajectory.zeros(grid, stokes.dt, stokes.nt), stokes)
        assert np.max(np.abs(v.u)) == 0.0
        assert np.max(np.abs(v.vy)) == 0.0
        assert v.nt == stokes.nt

    def test_trajectory_is_divergence_free(self, grid, stokes, control):
        v = apply_L(control, stokes)
        for n in range(v.nt + 1):
            assert _max_div(v[n]) < 1e-10

    def test_single_step_matches_solve(self, grid, stokes, control):
        v = apply_L(control, stokes)
        one = stokes_step(VectorField.zeros(grid), control[0], control[1], stokes)
        np.testing.assert_allclose(one.u, v.u[1], atol=1e-14)

    def test_plug_flow_reaches_slip_velocity(self):
        grid = make_grid(16, 17)
        cfg = StokesConfig(k=1.0, dt=0.05, nt=600)
        g = ControlTrajectory.constant(grid, cfg.dt, cfg.nt, 0.8, 0.8)
        v = solve_stokes(None, g, cfg)
        np.testing.assert_allclose(v.u[-1], 0.8, atol=1e-8)
        assert np.max(np.abs(v.vy[-1])) < 1e-8
        assert navier_slip_residual(v[cfg.nt], g[cfg.nt], cfg.k) < 1e-8

    def test_control_time_grid_must_match(self, grid, stokes):
        g = ControlTrajectory.zeros(grid, stokes.dt, stokes.nt + 1)
        with pytest.raises(ConfigError, match="steps"):
            solve_stokes(None, g, stokes)

    def test_initial_velocity_is_projected(self, grid, stokes):
        v0 = random_velocity(grid, 9)
        v = solve_stokes(v0, ControlTrajectory.zeros(grid, stokes.dt, stokes.nt), stokes)
        assert _max_div(v[0]) < 1e-10

    def test_energy_decays_without_control(self, grid, stokes):
        _, y = grid.u_mesh()
        x, _ = grid.cell_mesh()
        raw = VectorField(
            grid, 1.0 + np.cos(np.pi * y) * np.sin(x), np.zeros((grid.nx, grid.ny + 1))
        )
        rest = ControlTrajectory.zeros(grid, stokes.dt, stokes.nt)
        v = solve_stokes(leray_project(raw), rest, stokes)
        energy = [np.sum(v.u[n] ** 2) + np.sum(v.vy[n] ** 2) for n in range(v.nt + 1)]
        assert energy[0] > 0.0
        assert all(b < a for a, b in zip(energy, energy[1:]))

    def test_superposition(self, grid, stokes, control):
        v0 = leray_project(random_velocity(grid, 12))
        zero = ControlTrajectory.zeros(grid, stokes.dt, stokes.nt)
        full = solve_stokes(v0, control, stokes)
        free = solve_stokes(v0, zero, stokes)
        lifted = apply_L(control, stokes)
        np.testing.assert_allclose(full.u, free.u + lifted.u, atol=1e-12)
        np.testing.assert_allclose(full.vy, free.vy + lifted.vy, atol=1e-12)


class TestAdjointOperator:
    """L* against L."""

    def test_adjoint_identity(self, grid, stokes, control):
        f = _projected_trajectory(grid, stokes, seed=20)
        lhs = velocity_inner(apply_L(control, stokes), f)
        rhs = control_inner(control, apply_L_star(f, stokes))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_adjoint_identity_with_mode_cap(self, grid, stokes):
        g = random_control(grid, stokes.dt, stokes.nt, seed=8, mode_cap=3)
        f = _projected_trajectory(grid, stokes, seed=40)
        lstar = apply_L_star(f, stokes, mode_cap=3)
        spec = np.fft.rfft(lstar.bottom, axis=-1)
        assert np.max(np.abs(spec[:, 3:])) < 1e-10
        lhs = velocity_inner(apply_L(g, stokes), f)
        assert control_inner(g, lstar) == pytest.approx(lhs, rel=1e-10)

    def test_uniform_forcing_gives_symmetric_traces(self, grid, stokes):
        snapshot = VectorField(
            grid, np.ones((grid.nx, grid.ny)), np.zeros((grid.nx, grid.ny + 1))
        )
        f = VelocityTrajectory.steady(snapshot, stokes.dt, stokes.nt)
        lstar = apply_L_star(f, stokes)
        np.testing.assert_allclose(lstar.bottom, lstar.top, atol=1e-12)
        assert np.max(np.abs(lstar.bottom)) > 0.0

    def test_snapshot_count_must_match(self, grid, stokes):
        f = _projected_trajectory(grid, StokesConfig(dt=stokes.dt, nt=stokes.nt - 1), seed=1)
        with pytest.raises(ConfigError):
            apply_L_star(f, stokes)


def test_velocity_inner_rejects_step_mismatch(grid, stokes):
    a = VelocityTrajectory.steady(VectorField.zeros(grid), stokes.dt, 3)
    b = VelocityTrajectory.steady(VectorField.zeros(grid), stokes.dt, 4)
    with pytest.raises(GridError):
        velocity_inner(a, b)


def test_boundary_trace_of_uniform_flow(grid):
    v = VectorField(grid, np.full((grid.nx, grid.ny), 0.5), np.zeros((grid.nx, grid.ny + 1)))
    trace = boundary_trace_tangential(v)
    np.testing.assert_allclose(trace.bottom, 0.5, atol=1e-14)
    np.testing.assert_allclose(trace.top, 0.5, atol=1e-14)
    assert navier_slip_residual(v, BoundarySlice.constant(grid, 1.0, 1.0), k=2.0) < 1e-12


def test_grad_v_infty_integral(grid, stokes, control):
    rest = VelocityTrajectory.steady(VectorField.zeros(grid), stokes.dt, stokes.nt)
    assert grad_v_infty_integral(rest) == 0.0
    assert grad_v_infty_integral(apply_L(control, stokes)) > 0.0


def test_linear_shear_examples(grid, stokes):
    _, y = grid.u_mesh()
    shear = VectorField(grid, y.copy(), np.zeros((grid.nx, grid.ny + 1)))
    trace = boundary_trace_tangential(shear)
    np.testing.assert_allclose(trace.bottom, 0.0, atol=1e-12)
    np.testing.assert_allclose(trace.top, grid.Ly, atol=1e-12)
    v = VelocityTrajectory.steady(shear, stokes.dt, stokes.nt)
    assert grad_v_infty_integral(v) == pytest.approx(stokes.T, rel=1e-12)


@pytest.mark.slow
def test_plug_flow_acceptance():
    grid = make_grid(32, 65)
    cfg = StokesConfig(k=1.0, dt=0.01, nt=2000)
    g = ControlTrajectory.constant(grid, cfg.dt, cfg.nt, 1.0, 1.0)
    v = solve_stokes(None, g, cfg)
    np.testing.assert_allclose(v.u[-1], 1.0, atol=1e-8)
