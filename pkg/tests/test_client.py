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
"""Tests for the MixingClient facade."""
import math

import pytest

from slipmix import MixingClient
from slipmix.exceptions import CFLError
from slipmix.channel.models import VelocityTrajectory
from slipmix.channel.presets import wall_control
from slipmix.channel.stokes import (
    control_inner,
    control_norm,
    leray_project,
    random_velocity,
    velocity_inner,
)


@pytest.fixture
def client():
    return MixingClient.create(16, 17, T=0.2, nt=10).with_options(gamma=1e-3, epsilon=1e-2)


def test_create(client):
    assert client.grid.nx == 16
    assert client.stokes.nt == 10
    assert client.stokes.dt == pytest.approx(0.02)
    assert client.problem.theta0.values.shape == (16, 17)


def test_with_options_returns_copy(client):
    other = client.with_options(gamma=0.5)
    assert other.opt.gamma == 0.5
    assert client.opt.gamma == 1e-3
    assert other.problem.theta0 is client.problem.theta0


def test_cost_matches_objective(client):
    g = client.random_control(seed=3, amplitude=0.2)
    report = client.cost(g)
    assert report.total == pytest.approx(report.mix_term + report.control_term)
    assert report.total == pytest.approx(client.objective(g), rel=1e-12)


def test_lift_adjoint_identity(client):
    g = client.random_control(seed=5)
    f = VelocityTrajectory.from_snapshots(
        [leray_project(random_velocity(client.grid, 20 + n)) for n in range(client.stokes.nt + 1)],
        client.stokes.dt,
    )
    lhs = velocity_inner(client.lift(g), f)
    rhs = control_inner(g, client.lift_adjoint(f))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_optimize_constant_scalar():
    client = MixingClient.create(16, 17, T=0.2, nt=10, theta0="constant").with_options(
        gamma=1e-3, epsilon=1e-2, max_iters=5
    )
    result = client.optimize(client.random_control(seed=1, amplitude=0.1))
    assert result.converged
    assert control_norm(result.g_final) <= 1e-8


def test_transport_stores_requested_steps(client):
    theta = client.transport(client.zero_control(), store_stride=5)
    assert theta.nt == 10
    assert theta.final.values.shape == (16, 17)


def test_fast_flow_needs_substeps(client):
    g = wall_control(client.grid, client.stokes.dt, client.stokes.nt, plug=50.0)
    with pytest.raises(CFLError):
        client.transport(g)
    theta = client.transport(g, substep=True)
    assert max(theta.substeps) > 1
    report = client.cost(g)
    assert math.isfinite(report.total)
    assert report.total == pytest.approx(client.objective(g), rel=1e-12)
