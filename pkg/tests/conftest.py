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
"""Pytest configuration and fixtures."""
import os
import sys

import pytest

from slipmix.channel import MixingProblem, OptConfig, StokesConfig, initial_scalar, make_grid
from slipmix.channel.stokes import random_control

# Add tests directory to Python path
TEST_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, TEST_DIR)


@pytest.fixture
def grid():
    """Small channel used by the unit tests."""
    return make_grid(16, 17)


@pytest.fixture
def stokes():
    """12 steps of 0.02 with k = 1."""
    return StokesConfig(k=1.0, dt=0.02, nt=12)


@pytest.fixture
def problem(grid, stokes):
    """Stripe initial data on the small channel, fluid at rest."""
    return MixingProblem(initial_scalar("stripe", grid), stokes)


@pytest.fixture
def constant_problem(grid, stokes):
    """Already mixed initial data."""
    return MixingProblem(initial_scalar("constant", grid), stokes)


@pytest.fixture
def opt_config():
    return OptConfig(gamma=1e-3, epsilon=1e-2, max_iters=5)


@pytest.fixture
def control(grid, stokes):
    """Small random control; keeps the flow well inside the CFL bound."""
    return random_control(grid, stokes.dt, stokes.nt, seed=3, amplitude=0.3)
