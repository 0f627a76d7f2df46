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

"""Main client for slipmix."""
import dataclasses
from typing import Optional, Sequence, Union

from slipmix.channel.grid import make_grid
from slipmix.channel.models import (
    ContinuationReport,
    ControlTrajectory,
    CostReport,
    GradientCheckReport,
    Grid,
    OptConfig,
    OptResult,
    RateReport,
    ScalarField,
    ScalarTrajectory,
    StokesConfig,
    UniquenessSweepReport,
    VectorField,
    VelocityTrajectory,
)
from slipmix.channel.stokes import (
    apply_L as _apply_L,
    apply_L_star as _apply_L_star,
    random_control as _random_control,
    solve_stokes as _solve_stokes,
)
from slipmix.channel.transport import solve_forward as _solve_forward
from slipmix.channel.mixnorm import cost as _cost, mix_norm as _mix_norm
from slipmix.channel.adjoint import AdjointSweep
from slipmix.channel.optimize import (
    MixingProblem,
    adjoint_state as _adjoint_state,
    descend as _descend,
    epsilon_continuation as _epsilon_continuation,
    gradient as _gradient,
    gradient_check as _gradient_check,
    objective as _objective,
    penalized_descend as _penalized_descend,
    rate_study as _rate_study,
    uniqueness_sweep as _uniqueness_sweep,
)
from slipmix.channel.presets import initial_scalar as _initial_scalar


class MixingClient:
    """Client bound to one channel, flow setup and initial scalar."""

    def __init__(
        self,
        grid: Grid,
        stokes: StokesConfig,
        theta0: Union[str, ScalarField] = "stripe",
        opt: Optional[OptConfig] = None,
        v0: Optional[VectorField] = None,
    ):
        """Initialize the client.

        Args:
            grid: Channel grid
            stokes: Friction coefficient and time grid of the flow
            theta0: Initial scalar, or the name of a preset
            opt: Optimizer configuration (defaults to OptConfig())
            v0: Initial velocity (None for rest)
        """
        self.grid = grid
        self.stokes = stokes
        if isinstance(theta0, str):
            theta0 = _initial_scalar(theta0, grid)
        self.opt = opt or OptConfig()
        self.problem = MixingProblem(theta0, stokes, v0)

    @classmethod
    def create(
        cls, nx: int, ny: int, T: float = 1.0, nt: int = 100, k: float = 1.0, **kwargs
    ) -> "MixingClient":
        """Build a client on a default-size channel with nt steps over [0, T]."""
        return cls(make_grid(nx, ny), StokesConfig(k=k, dt=T / nt, nt=nt), **kwargs)

    def with_options(self, **changes) -> "MixingClient":
        """Copy of this client with some OptConfig fields replaced."""
        return MixingClient(
            self.grid,
            self.stokes,
            self.problem.theta0,
            dataclasses.replace(self.opt, **changes),
            self.problem.v0,
        )

    def zero_control(self, mode_cap: Optional[int] = None) -> ControlTrajectory:
        return self.problem.zero_control(mode_cap)

    def random_control(
        self, seed: Optional[int] = None, amplitude: float = 1.0, mode_cap: Optional[int] = None
    ) -> ControlTrajectory:
        return _random_control(
            self.grid,
            self.stokes.dt,
            self.stokes.nt,
            seed=self.opt.seed if seed is None else seed,
            amplitude=amplitude,
            mode_cap=mode_cap,
        )

    def velocity(self, g: ControlTrajectory) -> VelocityTrajectory:
        """Velocity trajectory driven by g from the initial velocity."""
        return _solve_stokes(self.problem.v0, g, self.stokes)

    def lift(self, g: ControlTrajectory) -> VelocityTrajectory:
        """Control-to-velocity map from rest, L g."""
        return _apply_L(g, self.stokes)

    def lift_adjoint(self, f: VelocityTrajectory) -> ControlTrajectory:
        """L* f."""
        return _apply_L_star(f, self.stokes)

    def transport(
        self,
        g: ControlTrajectory,
        epsilon: Optional[float] = None,
        store_stride: int = 1,
        substep: bool = False,
    ) -> ScalarTrajectory:
        """Scalar trajectory under the flow driven by g; see ``solve_forward`` for substep."""
        eps = self.opt.epsilon if epsilon is None else epsilon
        return _solve_forward(
            self.problem.theta0,
            self.velocity(g),
            eps,
            cfl=self.opt.cfl,
            store_stride=store_stride,
            substep=substep,
        )

    def mix_norm(self, theta: ScalarField) -> float:
        return _mix_norm(theta)

    def cost(self, g: ControlTrajectory, epsilon: Optional[float] = None) -> CostReport:
        eps = self.opt.epsilon if epsilon is None else epsilon
        theta = self.transport(g, eps, store_stride=self.stokes.nt, substep=True)
        return _cost(g, theta.final, self.opt.gamma, eps)

    def objective(self, g: ControlTrajectory) -> float:
        return _objective(g, self.problem, self.opt)

    def gradient(self, g: ControlTrajectory) -> ControlTrajectory:
        return _gradient(g, self.problem, self.opt)

    def adjoint(self, g: ControlTrajectory) -> AdjointSweep:
        return _adjoint_state(g, self.problem, self.opt)

    def check_gradient(
        self, g: ControlTrajectory, directions: int = 10, delta: float = 1e-5
    ) -> GradientCheckReport:
        return _gradient_check(g, self.problem, self.opt, directions, delta)

    def optimize(self, g0: Optional[ControlTrajectory] = None) -> OptResult:
        """Run ``descend`` (or the Picard iteration) from g0, default zero."""
        return _descend(g0 if g0 is not None else self.zero_control(), self.problem, self.opt)

    def optimize_penalized(
        self, g_anchor: ControlTrajectory, g0: Optional[ControlTrajectory] = None
    ) -> OptResult:
        g0 = g0 if g0 is not None else self.zero_control(g_anchor.mode_cap)
        return _penalized_descend(g0, g_anchor, self.problem, self.opt)

    def continuation(
        self, schedule: Sequence[float], g0: Optional[ControlTrajectory] = None
    ) -> ContinuationReport:
        g0 = g0 if g0 is not None else self.zero_control()
        return _epsilon_continuation(g0, self.problem, self.opt, schedule)

    def rate_study(self, g: ControlTrajectory, schedule: Sequence[float]) -> RateReport:
        return _rate_study(g, self.problem, schedule, self.opt.cfl)

    def uniqueness(
        self,
        seeds: Sequence[int] = (1, 2),
        amplitude: float = 1.0,
        gamma_max: float = 1e3,
        tol: float = 1e-3,
    ) -> UniquenessSweepReport:
        """Uniqueness sweep from two random controls, doubling gamma up to gamma_max."""
        g_a = self.random_control(seeds[0], amplitude)
        g_b = self.random_control(seeds[1], amplitude)
        return _uniqueness_sweep(self.problem, self.opt, g_a, g_b, gamma_max, tol)
