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
"""Gradient of the mixing cost and the optimizers built on it.

The cost of a control g is

    J_eps(g) = 1/2 ||theta(T)||^2_{(H^1)'} + gamma/2 ||g||^2

with theta transported by the Stokes velocity that g drives. Its gradient in
L2(0, T; L2(Gamma)) is gamma g + L* P(F), F the velocity sensitivity from the
adjoint sweep.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from slipmix.exceptions import ConfigError, ConvergenceError
from slipmix.channel.adjoint import AdjointSweep, adjoint_sweep, terminal_condition
from slipmix.channel.grid import inner_product
from slipmix.channel.mixnorm import cost
from slipmix.channel.models import (
    ContinuationReport,
    ControlTrajectory,
    CostReport,
    GradientCheckReport,
    Grid,
    IterationRecord,
    OptConfig,
    OptResult,
    RateReport,
    ScalarField,
    ScalarTrajectory,
    StokesConfig,
    UniquenessReport,
    UniquenessSweepReport,
    VectorField,
    VelocityTrajectory,
    check_same_grid,
)
from slipmix.channel.stokes import (
    apply_L_star,
    control_inner,
    control_norm,
    grad_v_infty_integral,
    leray_project,
    random_control,
    solve_stokes,
)
from slipmix.channel.transport import solve_forward, solve_linearized

logger = logging.getLogger(__name__)

# Relative size of J changes treated as evaluation noise by the line search.
_J_ROUNDOFF = 1e-12


@dataclass(frozen=True, eq=False)
class MixingProblem:
    """Fixed data of the control problem: initial scalar, flow setup and initial velocity."""

    theta0: ScalarField
    stokes: StokesConfig
    v0: Optional[VectorField] = None

    def __post_init__(self):
        if self.v0 is not None:
            check_same_grid(self.theta0.grid, self.v0.grid)

    @property
    def grid(self) -> Grid:
        return self.theta0.grid

    def zero_control(self, mode_cap: Optional[int] = None) -> ControlTrajectory:
        return ControlTrajectory.zeros(self.grid, self.stokes.dt, self.stokes.nt, mode_cap)


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Forward state of one control: velocity, scalar trajectory and cost."""

    g: ControlTrajectory
    velocity: VelocityTrajectory
    theta: ScalarTrajectory
    report: CostReport

    @property
    def J(self) -> float:
        return self.report.total


def evaluate(
    g: ControlTrajectory,
    problem: MixingProblem,
    cfg: OptConfig,
    epsilon: Optional[float] = None,
    diagnostics: bool = False,
) -> Evaluation:
    """Solve flow and scalar for control g and evaluate the cost.

    Transport steps whose velocity exceeds the CFL bound are split into
    substeps, so any finite control can be evaluated.
    """
    check_same_grid(g.grid, problem.grid)
    eps = cfg.epsilon if epsilon is None else epsilon
    v = solve_stokes(problem.v0, g, problem.stokes)
    theta = solve_forward(
        problem.theta0,
        v,
        eps,
        cfl=cfg.cfl,
        store_stride=cfg.checkpoint_stride,
        diagnostics=diagnostics,
        substep=True,
    )
    return Evaluation(g, v, theta, cost(g, theta.final, cfg.gamma, eps))


def objective(g: ControlTrajectory, problem: MixingProblem, cfg: OptConfig) -> float:
    """J_eps(g)."""
    return evaluate(g, problem, cfg).J


def _project_forcing(forcing: VelocityTrajectory) -> VelocityTrajectory:
    return VelocityTrajectory.from_snapshots(
        [leray_project(forcing[n]) for n in range(forcing.nt + 1)], forcing.dt, forcing.k
    )


def _sensitivity(ev: Evaluation, problem: MixingProblem, cfg: OptConfig):
    """L* P(F) together with the adjoint sweep that produced F."""
    eps = ev.theta.epsilon
    if not eps > 0:
        raise ConfigError(
            "Gradient requests need epsilon > 0; approach epsilon = 0 with epsilon_continuation"
        )
    sweep = adjoint_sweep(ev.theta.final, ev.theta, ev.velocity, eps, cfg.adjoint)
    lstar = apply_L_star(_project_forcing(sweep.forcing), problem.stokes, ev.g.mode_cap)
    return lstar, sweep


def gradient(
    g: ControlTrajectory,
    problem: MixingProblem,
    cfg: OptConfig,
    evaluation: Optional[Evaluation] = None,
) -> ControlTrajectory:
    """grad J_eps(g) = gamma g + L* P(theta grad rho), mode-capped like g.

    Args:
        g: Control
        problem: Problem data
        cfg: Optimizer configuration (gamma, epsilon, adjoint mode)
        evaluation: Forward state of g, reused when given

    Raises:
        ConfigError: If epsilon is 0
    """
    ev = evaluation if evaluation is not None else evaluate(g, problem, cfg)
    lstar, _ = _sensitivity(ev, problem, cfg)
    return g * cfg.gamma + lstar


def optimality_residual(g: ControlTrajectory, grad: ControlTrajectory, gamma: float) -> float:
    """||gamma g + L* P(theta grad rho)|| / ||gamma g||."""
    num = control_norm(grad)
    den = gamma * control_norm(g)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def linearized_derivative(
    g: ControlTrajectory, h: ControlTrajectory, problem: MixingProblem, cfg: OptConfig
) -> float:
    """Directional derivative of J_eps at g along h from the linearized scalar z.

    dJ = (rho(T), z(T)) + gamma <g, h>
    """
    ev = evaluate(g, problem, cfg)
    z = solve_linearized(h, ev.theta, ev.velocity, ev.theta.epsilon, problem.stokes)
    rho_T = terminal_condition(ev.theta.final)
    return inner_product(rho_T, z.final) + cfg.gamma * control_inner(g, h)


class _Objective:
    """J_eps, optionally plus 1/2 ||g - anchor||^2, and its gradient."""

    def __init__(self, problem: MixingProblem, cfg: OptConfig, anchor: Optional[ControlTrajectory]):
        self.problem = problem
        self.cfg = cfg
        self.anchor = anchor

    @property
    def curvature(self) -> float:
        return self.cfg.gamma + (1.0 if self.anchor is not None else 0.0)

    def value(self, g: ControlTrajectory):
        ev = evaluate(g, self.problem, self.cfg)
        total = ev.J
        if self.anchor is not None:
            pen = 0.5 * control_norm(g - self.anchor) ** 2
            report = dataclasses.replace(ev.report, penalty_term=pen, total=ev.report.total + pen)
            ev = Evaluation(ev.g, ev.velocity, ev.theta, report)
            total = report.total
        return total, ev

    def gradient(self, ev: Evaluation) -> ControlTrajectory:
        grad = gradient(ev.g, self.problem, self.cfg, ev)
        if self.anchor is not None:
            grad = grad + (ev.g - self.anchor)
        return grad


def _record(it: int, ev: Evaluation, grad_norm: float, step: float, residual: float) -> IterationRecord:
    return IterationRecord(
        iteration=it,
        J=ev.report.total,
        mix_term=ev.report.mix_term,
        control_term=ev.report.control_term,
        grad_norm=grad_norm,
        step=step,
        residual=residual,
    )


def _converged(gnorm: float, gnorm0: float, residual: float, tol: float) -> bool:
    return gnorm == 0.0 or gnorm <= tol * gnorm0 or residual <= tol


def _run(g0: ControlTrajectory, objective_: _Objective) -> OptResult:
    cfg = objective_.cfg
    ls = cfg.line_search
    g = g0
    J, ev = objective_.value(g)
    grad = objective_.gradient(ev)
    gnorm = control_norm(grad)
    gnorm0 = gnorm
    residual = optimality_residual(g, grad, objective_.curvature)
    history = [_record(0, ev, gnorm, 0.0, residual)]
    converged = _converged(gnorm, gnorm0, residual, cfg.tol_g)
    message = "converged" if converged else "maximum iterations reached"
    prev = None
    omega = 1.0
    it = 0
    while not converged and it < cfg.max_iters:
        if cfg.mode == "picard":
            alpha = omega / objective_.curvature
        elif ls.bb and prev is not None:
            s, y = prev
            sy = control_inner(s, y)
            alpha = control_inner(s, s) / sy if sy > 0 else ls.step0 / objective_.curvature
        else:
            alpha = ls.step0 / objective_.curvature
        accepted = None
        for _ in range(ls.max_backtracks):
            g_new = g - grad * alpha
            J_new, ev_new = objective_.value(g_new)
            grad_new = None
            if cfg.mode == "picard":
                ok = J_new < J or (J_new == J and control_norm(g_new - g) == 0.0)
            else:
                ok = J_new <= J - ls.armijo_c1 * alpha * gnorm**2
            if not ok and abs(J_new - J) <= _J_ROUNDOFF * abs(J):
                # J no longer resolves the decrease; fall back on the gradient norm
                grad_new = objective_.gradient(ev_new)
                ok = control_norm(grad_new) <= (1.0 - ls.armijo_c1) * gnorm
            if ok:
                accepted = (g_new, J_new, ev_new, grad_new)
                break
            logger.debug("Rejected step %.3e (J %.6e -> %.6e)", alpha, J, J_new)
            if cfg.mode == "picard":
                omega *= 0.5
                alpha = omega / objective_.curvature
            else:
                alpha *= ls.backtrack
        if accepted is None:
            logger.warning("Line search failed after %d backtracks at iteration %d", ls.max_backtracks, it)
            message = "line search failed; returning best iterate"
            break
        it += 1
        omega = 1.0
        g_new, J, ev, grad_new = accepted
        if grad_new is None:
            grad_new = objective_.gradient(ev)
        prev = (g_new - g, grad_new - grad)
        g, grad = g_new, grad_new
        gnorm = control_norm(grad)
        residual = optimality_residual(g, grad, objective_.curvature)
        history.append(_record(it, ev, gnorm, alpha, residual))
        logger.info(
            "iter %d: J=%.6e |grad|=%.3e step=%.3e residual=%.3e", it, J, gnorm, alpha, residual
        )
        if _converged(gnorm, gnorm0, residual, cfg.tol_g):
            converged = True
            message = "converged"
    if not converged and message.startswith("maximum"):
        logger.warning("No convergence after %d iterations (|grad|=%.3e)", it, gnorm)
    return OptResult(
        g_final=g,
        history=history,
        optimality_residual=residual,
        grad_v_infty_integral=grad_v_infty_integral(ev.velocity),
        iterations=it,
        converged=converged,
        message=message,
        gamma=cfg.gamma,
        epsilon=cfg.epsilon,
    )


def descend(g0: ControlTrajectory, problem: MixingProblem, cfg: OptConfig) -> OptResult:
    """Minimize J_eps from g0.

    ``cfg.mode == "descent"`` runs Armijo backtracking gradient descent with
    trial step step0 / gamma (or a Barzilai-Borwein step when enabled).
    ``"picard"`` iterates g <- g - (omega / gamma) grad J, i.e. the fixed-point
    map g <- -(1/gamma) L* P(theta grad rho) for omega = 1, halving omega
    whenever J does not decrease and resetting it after every accepted step.
    Once J changes by less than its evaluation noise, a trial step is accepted
    when it shrinks the gradient norm instead. The run stops when the gradient
    norm falls by tol_g relative to the start or the optimality residual drops
    to tol_g.

    Returns:
        OptResult; a failed line search is reported in ``message`` and the
        best iterate is returned

    Raises:
        ConfigError: If epsilon is 0
    """
    return _run(g0, _Objective(problem, cfg, None))


def penalized_descend(
    g0: ControlTrajectory,
    g_anchor: ControlTrajectory,
    problem: MixingProblem,
    cfg: OptConfig,
) -> OptResult:
    """Minimize J_eps(g) + 1/2 ||g - g_anchor||^2 from g0."""
    return _run(g0, _Objective(problem, cfg, g_anchor))


def _check_schedule(schedule: Sequence[float]) -> List[float]:
    sched = [float(e) for e in schedule]
    if not sched:
        raise ConfigError("Epsilon schedule is empty")
    if any(not e > 0 for e in sched):
        raise ConfigError(f"Epsilon schedule entries must be positive: {sched}")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ConfigError(f"Epsilon schedule must be strictly decreasing: {sched}")
    return sched


def epsilon_continuation(
    g0: ControlTrajectory,
    problem: MixingProblem,
    cfg: OptConfig,
    schedule: Sequence[float],
) -> ContinuationReport:
    """Run ``descend`` along a decreasing epsilon schedule with warm starts."""
    sched = _check_schedule(schedule)
    results: List[OptResult] = []
    g = g0
    for eps in sched:
        res = descend(g, problem, dataclasses.replace(cfg, epsilon=eps))
        logger.info("continuation eps=%.3e: J=%.6e after %d iterations", eps, res.J_final, res.iterations)
        results.append(res)
        g = res.g_final
    distances = [
        control_norm(a.g_final - b.g_final) for a, b in zip(results, results[1:])
    ]
    return ContinuationReport(schedule=sched, results=results, control_distances=distances)


def rate_study(
    g: ControlTrajectory,
    problem: MixingProblem,
    schedule: Sequence[float],
    cfl: float = 0.5,
) -> RateReport:
    """sup_t ||theta_eps(t) - theta(t)||_L2 for each eps and the fitted log-log slope.

    Raises:
        ConfigError: If the schedule has fewer than 3 entries
    """
    eps_list = sorted((float(e) for e in schedule), reverse=True)
    if len(eps_list) < 3:
        raise ConfigError("Rate study needs at least 3 epsilon values to fit a slope")
    if any(not e > 0 for e in eps_list):
        raise ConfigError("Rate study epsilon values must be positive")
    v = solve_stokes(problem.v0, g, problem.stokes)
    area = problem.grid.cell_area
    reference = solve_forward(problem.theta0, v, 0.0, cfl=cfl, diagnostics=False).values
    errors = []
    for eps in eps_list:
        theta = solve_forward(problem.theta0, v, eps, cfl=cfl, diagnostics=False).values
        diff = np.sqrt(np.sum((theta - reference) ** 2, axis=(1, 2)) * area)
        errors.append(float(np.max(diff)))
    if min(errors) > 0:
        slope = float(np.polyfit(np.log(eps_list), np.log(errors), 1)[0])
    else:
        slope = math.nan
    logger.info("Rate study: errors %s, slope %.3f", errors, slope)
    return RateReport(epsilons=eps_list, errors=errors, slope=slope)


def uniqueness_probe(
    problem: MixingProblem,
    cfg: OptConfig,
    g0_a: ControlTrajectory,
    g0_b: ControlTrajectory,
    tol: float = 1e-3,
) -> UniquenessReport:
    """Run ``descend`` from two controls and compare the results.

    The distance is reported relative to ||g_a||. An optimum no larger than
    tol_g times the starting controls counts as zero; the distance is then
    measured against that floor (infinite if the floor is zero too and the
    runs differ).

    Raises:
        ConvergenceError: If either run fails to converge
    """
    res_a = descend(g0_a, problem, cfg)
    res_b = descend(g0_b, problem, cfg)
    for name, res in (("a", res_a), ("b", res_b)):
        if not res.converged:
            raise ConvergenceError(
                f"Uniqueness run {name} did not converge at gamma={cfg.gamma}: {res.message}"
            )
    distance = control_norm(res_a.g_final - res_b.g_final)
    scale = control_norm(res_a.g_final)
    floor = cfg.tol_g * max(control_norm(g0_a), control_norm(g0_b))
    if scale > floor:
        relative = distance / scale
    elif floor > 0.0:
        logger.info("Optimum at gamma=%.3e is numerically zero (||g_a|| = %.3e)", cfg.gamma, scale)
        relative = distance / floor
    else:
        relative = 0.0 if distance == 0.0 else math.inf
    return UniquenessReport(
        gamma=cfg.gamma,
        distance=distance,
        relative_distance=relative,
        result_a=res_a,
        result_b=res_b,
        passed=relative <= tol,
    )


def uniqueness_sweep(
    problem: MixingProblem,
    cfg: OptConfig,
    g0_a: ControlTrajectory,
    g0_b: ControlTrajectory,
    gamma_max: float = 1e3,
    tol: float = 1e-3,
) -> UniquenessSweepReport:
    """Double gamma from cfg.gamma until two runs agree or gamma_max is exceeded."""
    attempts: List[UniquenessReport] = []
    gamma = cfg.gamma
    while gamma <= gamma_max * (1.0 + 1e-12):
        try:
            report = uniqueness_probe(problem, dataclasses.replace(cfg, gamma=gamma), g0_a, g0_b, tol)
        except ConvergenceError as e:
            logger.warning("%s", e)
        else:
            attempts.append(report)
            logger.info("gamma=%.3e: relative distance %.3e", gamma, report.relative_distance)
            if report.passed:
                return UniquenessSweepReport(threshold=gamma, attempts=attempts)
        gamma *= 2.0
    return UniquenessSweepReport(threshold=None, attempts=attempts)


def gradient_check(
    g: ControlTrajectory,
    problem: MixingProblem,
    cfg: OptConfig,
    directions: int = 10,
    delta: float = 1e-5,
) -> GradientCheckReport:
    """Compare <grad J, h> with (J(g + delta h) - J(g - delta h)) / (2 delta).

    Directions are random controls drawn from ``cfg.seed``.
    """
    ev = evaluate(g, problem, cfg)
    grad = gradient(g, problem, cfg, ev)
    adjoint, fd = [], []
    for i in range(directions):
        h = random_control(
            g.grid, g.dt, g.nt, seed=cfg.seed + i, mode_cap=g.mode_cap
        )
        adjoint.append(control_inner(grad, h))
        j_plus = objective(g + h * delta, problem, cfg)
        j_minus = objective(g - h * delta, problem, cfg)
        fd.append((j_plus - j_minus) / (2.0 * delta))
    report = GradientCheckReport(delta=delta, adjoint=adjoint, finite_difference=fd)
    logger.info("Gradient check over %d directions: max relative error %.3e", directions, report.max_error)
    return report


def adjoint_state(g: ControlTrajectory, problem: MixingProblem, cfg: OptConfig) -> AdjointSweep:
    """Adjoint sweep at g (rho, velocity sensitivity and grad rho monitor)."""
    ev = evaluate(g, problem, cfg)
    return adjoint_sweep(ev.theta.final, ev.theta, ev.velocity, ev.theta.epsilon, cfg.adjoint)
