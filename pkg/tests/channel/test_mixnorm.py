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
"""Tests for the mix-norm and the cost functional."""
import math

import numpy as np
import pytest

from slipmix.exceptions import ConfigError
from slipmix.channel.grid import inner_product, lp_norm, make_grid, random_field
from slipmix.channel.mixnorm import cost, helmholtz_apply, helmholtz_neumann_solve, mix_norm
from slipmix.channel.models import ControlTrajectory, ScalarField, VectorField, VelocityTrajectory
from slipmix.channel.presets import initial_scalar
from slipmix.channel.transport import solve_forward


@pytest.fixture
def channel():
    return make_grid(64, 64)


def test_helmholtz_of_constant_is_constant(channel):
    phi = helmholtz_neumann_solve(ScalarField(channel, np.ones((64, 64))))
    np.testing.assert_allclose(phi.values, 1.0, atol=1e-12)


def test_helmholtz_of_cos_x_halves(channel):
    theta = ScalarField.from_function(channel, lambda x, y: np.cos(x))
    phi = helmholtz_neumann_solve(theta)
    np.testing.assert_allclose(phi.values, 0.5 * theta.values, atol=1e-12)


def test_helmholtz_of_cos_pi_y_second_order(channel):
    theta = ScalarField.from_function(channel, lambda x, y: np.cos(math.pi * y))
    phi = helmholtz_neumann_solve(theta)
    np.testing.assert_allclose(phi.values, theta.values / (1.0 + math.pi**2), atol=1e-4)


def test_helmholtz_apply_inverts_solve(channel):
    theta = random_field(channel, seed=2)
    back = helmholtz_apply(helmholtz_neumann_solve(theta))
    np.testing.assert_allclose(back.values, theta.values, atol=1e-10)


def test_helmholtz_solve_is_symmetric(channel):
    a = random_field(channel, seed=5)
    b = random_field(channel, seed=6)
    lhs = inner_product(helmholtz_neumann_solve(a), b)
    rhs = inner_product(a, helmholtz_neumann_solve(b))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_mix_norm_examples(channel):
    ones = ScalarField(channel, np.ones((64, 64)))
    cos_x = ScalarField.from_function(channel, lambda x, y: np.cos(x))
    cos_y = ScalarField.from_function(channel, lambda x, y: np.cos(math.pi * y))
    assert mix_norm(ones) == pytest.approx(math.sqrt(2.0 * math.pi), rel=1e-12)
    assert mix_norm(cos_x) == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-12)
    assert mix_norm(cos_y) == pytest.approx(math.sqrt(math.pi / (1.0 + math.pi**2)), rel=1e-3)


def test_mix_norm_is_homogeneous_and_below_l2(channel):
    theta = random_field(channel, seed=7)
    assert mix_norm(theta * 3.0) == pytest.approx(3.0 * mix_norm(theta), rel=1e-12)
    assert mix_norm(theta) <= lp_norm(theta, 2)


def test_cost_of_zero_control(channel):
    theta_T = ScalarField.from_function(channel, lambda x, y: np.cos(x))
    g = ControlTrajectory.zeros(channel, 0.1, 10)
    report = cost(g, theta_T, gamma=1.0, epsilon=0.0)
    assert report.total == pytest.approx(math.pi / 4.0, rel=1e-12)
    assert report.control_term == 0.0


def test_cost_of_unit_control(channel):
    g = ControlTrajectory.constant(channel, 0.1, 10, 1.0, 1.0)
    report = cost(g, ScalarField.zeros(channel), gamma=2.0, epsilon=0.0)
    assert report.mix_term == 0.0
    assert report.total == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_cost_rejects_nonpositive_gamma(channel):
    g = ControlTrajectory.zeros(channel, 0.1, 4)
    with pytest.raises(ConfigError, match="gamma"):
        cost(g, ScalarField.zeros(channel), gamma=0.0, epsilon=0.0)


def test_plug_flow_does_not_mix(channel):
    plug = VectorField(channel, np.full((64, 64), 0.5), np.zeros((64, 65)))
    v = VelocityTrajectory.steady(plug, 0.01, 50)
    theta0 = initial_scalar("stripe", channel)
    theta = solve_forward(theta0, v, 0.0)
    before, after = mix_norm(theta0), mix_norm(theta.final)
    assert after == pytest.approx(before, rel=1e-3)
    assert max(abs(m - before) for m in theta.diagnostics.mixnorm) <= 1e-3 * before
