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
"""Solvers for the slip-controlled channel: flow, transport, adjoint and optimization."""

from slipmix.channel.models import (
    Grid,
    ScalarField,
    VectorField,
    BoundarySlice,
    ControlTrajectory,
    VelocityTrajectory,
    ScalarTrajectory,
    TransportDiagnostics,
    StokesConfig,
    CostReport,
    LineSearchConfig,
    OptConfig,
    OptResult,
    IterationRecord,
    ContinuationReport,
    RateReport,
    UniquenessReport,
    UniquenessSweepReport,
    GradientCheckReport,
)
from slipmix.channel.grid import (
    make_grid,
    inner_product,
    lp_norm,
    gradient as grid_gradient,
    divergence,
)
from slipmix.channel.stokes import (
    leray_project,
    stokes_step,
    solve_stokes,
    apply_L,
    apply_L_star,
    boundary_trace_tangential,
    navier_slip_residual,
    control_inner,
    control_norm,
    velocity_inner,
    grad_v_infty_integral,
)
from slipmix.channel.transport import (
    transport_step,
    solve_forward,
    solve_linearized,
    cfl_steps,
)
from slipmix.channel.mixnorm import helmholtz_neumann_solve, mix_norm, cost
from slipmix.channel.adjoint import (
    AdjointSweep,
    terminal_condition,
    solve_adjoint,
    adjoint_sweep,
)
from slipmix.channel.optimize import (
    MixingProblem,
    evaluate,
    objective,
    gradient,
    optimality_residual,
    linearized_derivative,
    descend,
    penalized_descend,
    epsilon_continuation,
    rate_study,
    uniqueness_probe,
    uniqueness_sweep,
    gradient_check,
)
from slipmix.channel.presets import PRESETS, initial_scalar, wall_control, reference_problem

__all__ = [
    # Models
    "Grid",
    "ScalarField",
    "VectorField",
    "BoundarySlice",
    "ControlTrajectory",
    "VelocityTrajectory",
    "ScalarTrajectory",
    "TransportDiagnostics",
    "StokesConfig",
    "CostReport",
    "LineSearchConfig",
    "OptConfig",
    "OptResult",
    "IterationRecord",
    "ContinuationReport",
    "RateReport",
    "UniquenessReport",
    "UniquenessSweepReport",
    "GradientCheckReport",
    # Grid
    "make_grid",
    "inner_product",
    "lp_norm",
    "grid_gradient",
    "divergence",
    # Flow
    "leray_project",
    "stokes_step",
    "solve_stokes",
    "apply_L",
    "apply_L_star",
    "boundary_trace_tangential",
    "navier_slip_residual",
    "control_inner",
    "control_norm",
    "velocity_inner",
    "grad_v_infty_integral",
    # Transport
    "transport_step",
    "solve_forward",
    "solve_linearized",
    "cfl_steps",
    # Mix-norm
    "helmholtz_neumann_solve",
    "mix_norm",
    "cost",
    # Adjoint
    "AdjointSweep",
    "terminal_condition",
    "solve_adjoint",
    "adjoint_sweep",
    # Optimization
    "MixingProblem",
    "evaluate",
    "objective",
    "gradient",
    "optimality_residual",
    "linearized_derivative",
    "descend",
    "penalized_descend",
    "epsilon_continuation",
    "rate_study",
    "uniqueness_probe",
    "uniqueness_sweep",
    "gradient_check",
    # Presets
    "PRESETS",
    "initial_scalar",
    "wall_control",
    "reference_problem",
]
