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
"""Data models for the channel solvers.

Every field type is an immutable value object: arrays are copied on
construction and marked read-only.
"""
import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import fft as sfft

from slipmix.exceptions import ConfigError, GridError, NumericalError


def _frozen_array(values: Any, shape: Tuple[int, ...], name: str) -> np.ndarray:
    """Copy values into a read-only float array of the expected shape."""
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise GridError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite values", field=name)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Periodic channel [0, Lx) x [0, Ly] with walls at y = 0 and y = Ly."""

    nx: int
    ny: int
    Lx: float = 2.0 * math.pi
    Ly: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise GridError(
                f"Grid dimension too small: nx={self.nx}, ny={self.ny} (need >= 4)"
            )
        if not (self.Lx > 0 and self.Ly > 0):
            raise GridError(f"Grid lengths must be positive: Lx={self.Lx}, Ly={self.Ly}")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def weights(self) -> np.ndarray:
        """Per-cell quadrature weights."""
        return np.full((self.nx, self.ny), self.cell_area)

    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.hx

    @property
    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.hy

    @property
    def x_faces(self) -> np.ndarray:
        """x coordinates of the u samples (left face of each cell)."""
        return np.arange(self.nx) * self.hx

    @property
    def y_faces(self) -> np.ndarray:
        """y coordinates of the vy samples, walls included."""
        return np.arange(self.ny + 1) * self.hy

    @property
    def wall_x(self) -> np.ndarray:
        """x samples of the wall data (co-located with u)."""
        return self.x_faces

    def cell_mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_centers, self.y_centers, indexing="ij")

    def u_mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_faces, self.y_centers, indexing="ij")

    def vy_mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_centers, self.y_faces, indexing="ij")

    def to_dict(self) -> Dict[str, Any]:
        return {"nx": self.nx, "ny": self.ny, "Lx": self.Lx, "Ly": self.Ly}


def check_same_grid(*grids: Grid) -> Grid:
    """Return the common grid or raise GridError."""
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridError(f"Grid mismatch: {first} vs {other}")
    return first


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Cell-centred scalar samples, shape (nx, ny)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self,
            "values",
            _frozen_array(self.values, (self.grid.nx, self.grid.ny), "ScalarField"),
        )

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarField":
        x, y = grid.cell_mesh()
        return cls(grid, np.broadcast_to(func(x, y), x.shape))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, alpha: float) -> "ScalarField":
        return ScalarField(self.grid, alpha * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Staggered (MAC) velocity.

    u has shape (nx, ny) at x-faces, vy has shape (nx, ny + 1) at y-faces.
    The wall rows of vy are zeroed on construction (no penetration).
    """

    grid: Grid
    u: np.ndarray
    vy: np.ndarray

    def __post_init__(self):
        g = self.grid
        u = _frozen_array(self.u, (g.nx, g.ny), "VectorField.u")
        vy = np.array(self.vy, dtype=float)
        if vy.shape != (g.nx, g.ny + 1):
            raise GridError(
                f"VectorField.vy has shape {vy.shape}, expected {(g.nx, g.ny + 1)}"
            )
        vy[:, 0] = 0.0
        vy[:, -1] = 0.0
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "vy", _frozen_array(vy, vy.shape, "VectorField.vy"))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.nx, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    @property
    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.u)), np.max(np.abs(self.vy))))

    def __add__(self, other: "VectorField") -> "VectorField":
        check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.u + other.u, self.vy + other.vy)

    def __sub__(self, other: "VectorField") -> "VectorField":
        check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.u - other.u, self.vy - other.vy)

    def __mul__(self, alpha: float) -> "VectorField":
        return VectorField(self.grid, alpha * self.u, alpha * self.vy)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class BoundarySlice:
    """Tangential wall data at one instant: one value per wall x-sample."""

    grid: Grid
    bottom: np.ndarray
    top: np.ndarray

    def __post_init__(self):
        n = (self.grid.nx,)
        object.__setattr__(self, "bottom", _frozen_array(self.bottom, n, "bottom"))
        object.__setattr__(self, "top", _frozen_array(self.top, n, "top"))

    @classmethod
    def constant(cls, grid: Grid, bottom: float, top: float) -> "BoundarySlice":
        return cls(grid, np.full(grid.nx, bottom), np.full(grid.nx, top))


def cap_modes(values: np.ndarray, mode_cap: Optional[int]) -> np.ndarray:
    """Zero every x-Fourier mode >= mode_cap along the last axis."""
    if mode_cap is None:
        return values
    n = values.shape[-1]
    spec = sfft.rfft(values, axis=-1)
    spec[..., mode_cap:] = 0.0
    return sfft.irfft(spec, n=n, axis=-1)


def trapezoid_weights(nt: int, dt: float) -> np.ndarray:
    """Trapezoidal quadrature weights on nt + 1 equispaced time levels."""
    w = np.full(nt + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


@dataclass(frozen=True, eq=False)
class ControlTrajectory:
    """Wall controls g(t_n, x) on both walls, arrays of shape (nt + 1, nx)."""

    grid: Grid
    dt: float
    bottom: np.ndarray
    top: np.ndarray
    mode_cap: Optional[int] = None

    def __post_init__(self):
        bottom = np.atleast_2d(np.array(self.bottom, dtype=float))
        top = np.atleast_2d(np.array(self.top, dtype=float))
        if bottom.shape != top.shape or bottom.ndim != 2 or bottom.shape[0] < 2:
            raise GridError(
                f"Control arrays must share shape (nt + 1, nx) with nt >= 1, "
                f"got {bottom.shape} and {top.shape}"
            )
        if self.dt <= 0:
            raise ConfigError(f"Control time step must be positive, got {self.dt}")
        if self.mode_cap is not None and not (1 <= self.mode_cap <= self.grid.nx // 2 + 1):
            raise ConfigError(f"mode_cap must lie in [1, {self.grid.nx // 2 + 1}]")
        shape = (bottom.shape[0], self.grid.nx)
        object.__setattr__(
            self, "bottom", _frozen_array(cap_modes(bottom, self.mode_cap), shape, "g.bottom")
        )
        object.__setattr__(
            self, "top", _frozen_array(cap_modes(top, self.mode_cap), shape, "g.top")
        )

    @classmethod
    def zeros(
        cls, grid: Grid, dt: float, nt: int, mode_cap: Optional[int] = None
    ) -> "ControlTrajectory":
        z = np.zeros((nt + 1, grid.nx))
        return cls(grid, dt, z, z, mode_cap)

    @classmethod
    def constant(
        cls, grid: Grid, dt: float, nt: int, bottom: float, top: float
    ) -> "ControlTrajectory":
        shape = (nt + 1, grid.nx)
        return cls(grid, dt, np.full(shape, bottom), np.full(shape, top))

    @property
    def nt(self) -> int:
        return self.bottom.shape[0] - 1

    @property
    def T(self) -> float:
        return self.nt * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt

    def __len__(self) -> int:
        return self.nt + 1

    def __getitem__(self, n: int) -> BoundarySlice:
        return BoundarySlice(self.grid, self.bottom[n], self.top[n])

    def like(self, bottom: np.ndarray, top: np.ndarray) -> "ControlTrajectory":
        """New control on the same grid, time grid and mode cap."""
        return ControlTrajectory(self.grid, self.dt, bottom, top, self.mode_cap)

    def _check(self, other: "ControlTrajectory") -> None:
        check_same_grid(self.grid, other.grid)
        if other.bottom.shape != self.bottom.shape or other.dt != self.dt:
            raise GridError("Control trajectories live on different time grids")

    def __add__(self, other: "ControlTrajectory") -> "ControlTrajectory":
        self._check(other)
        return self.like(self.bottom + other.bottom, self.top + other.top)

    def __sub__(self, other: "ControlTrajectory") -> "ControlTrajectory":
        self._check(other)
        return self.like(self.bottom - other.bottom, self.top - other.top)

    def __mul__(self, alpha: float) -> "ControlTrajectory":
        return self.like(alpha * self.bottom, alpha * self.top)

    __rmul__ = __mul__

    def __neg__(self) -> "ControlTrajectory":
        return self * -1.0


@dataclass(frozen=True, eq=False)
class VelocityTrajectory:
    """Velocity snapshots v(t_0..t_nt)."""

    grid: Grid
    dt: float
    u: np.ndarray
    vy: np.ndarray
    k: Optional[float] = None

    def __post_init__(self):
        g = self.grid
        u = np.array(self.u, dtype=float)
        if u.ndim != 3 or u.shape[1:] != (g.nx, g.ny):
            raise GridError(f"Velocity u trajectory has shape {u.shape}")
        vy = np.array(self.vy, dtype=float)
        if vy.shape != (u.shape[0], g.nx, g.ny + 1):
            raise GridError(f"Velocity vy trajectory has shape {vy.shape}")
        vy[:, :, 0] = 0.0
        vy[:, :, -1] = 0.0
        object.__setattr__(self, "u", _frozen_array(u, u.shape, "velocity.u"))
        object.__setattr__(self, "vy", _frozen_array(vy, vy.shape, "velocity.vy"))

    @classmethod
    def from_snapshots(
        cls, snapshots: List[VectorField], dt: float, k: Optional[float] = None
    ) -> "VelocityTrajectory":
        grid = check_same_grid(*[s.grid for s in snapshots])
        return cls(
            grid,
            dt,
            np.stack([s.u for s in snapshots]),
            np.stack([s.vy for s in snapshots]),
            k,
        )

    @classmethod
    def steady(cls, v: VectorField, dt: float, nt: int) -> "VelocityTrajectory":
        """A frozen velocity field repeated over nt steps."""
        return cls.from_snapshots([v] * (nt + 1), dt)

    @property
    def nt(self) -> int:
        return self.u.shape[0] - 1

    @property
    def T(self) -> float:
        return self.nt * self.dt

    def __len__(self) -> int:
        return self.nt + 1

    def __getitem__(self, n: int) -> VectorField:
        return VectorField(self.grid, self.u[n], self.vy[n])

    def __neg__(self) -> "VelocityTrajectory":
        return VelocityTrajectory(self.grid, self.dt, -self.u, -self.vy, self.k)

    @property
    def max_abs(self) -> np.ndarray:
        """Per-snapshot max-norm of the velocity."""
        return np.maximum(
            np.max(np.abs(self.u), axis=(1, 2)), np.max(np.abs(self.vy), axis=(1, 2))
        )


@dataclass
class TransportDiagnostics:
    """Per-step conservation record of a scalar solve."""

    times: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    l1: List[float] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    linf: List[float] = field(default_factory=list)
    mixnorm: List[float] = field(default_factory=list)
    grad_l2: List[float] = field(default_factory=list)

    def drift(self, name: str) -> float:
        """Largest relative deviation of a monitored norm from its initial value.

        Mass is scaled by max(|mass_0|, L1_0), which is the L1 norm for the
        mean-free presets. A field with zero L1 norm reports the absolute drift.
        """
        series = np.asarray(getattr(self, name))
        ref = abs(series[0])
        if name == "mass":
            ref = max(ref, self.l1[0])
        if ref == 0.0:
            return float(np.max(np.abs(series - series[0])))
        return float(np.max(np.abs(series - series[0])) / ref)

    @property
    def grad_l2_sup(self) -> float:
        return float(max(self.grad_l2)) if self.grad_l2 else 0.0

    def rows(self) -> List[Dict[str, float]]:
        return [
            {
                "t": t,
                "mass": m,
                "L1": a,
                "L2": b,
                "Linf": c,
                "mixnorm": d,
            }
            for t, m, a, b, c, d in zip(
                self.times, self.mass, self.l1, self.l2, self.linf, self.mixnorm
            )
        ]


@dataclass(frozen=True, eq=False)
class ScalarTrajectory:
    """Scalar snapshots, possibly thinned to every ``stride``-th step.

    ``values[i]`` is the state at step ``steps[i]``; the final step is always
    stored. ``substeps[n]`` is the number of equal transport substeps taken
    over step n, None when every step was taken whole.
    """

    grid: Grid
    dt: float
    values: np.ndarray
    steps: Tuple[int, ...]
    epsilon: float = 0.0
    velocity: Optional[VelocityTrajectory] = None
    diagnostics: Optional[TransportDiagnostics] = None
    substeps: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 3 or vals.shape[0] != len(self.steps):
            raise GridError(
                f"Scalar trajectory has {vals.shape[0]} snapshots for {len(self.steps)} steps"
            )
        if vals.shape[1:] != (self.grid.nx, self.grid.ny):
            raise GridError(
                f"Scalar trajectory snapshots have shape {vals.shape[1:]}, "
                f"grid is {(self.grid.nx, self.grid.ny)}"
            )
        object.__setattr__(self, "values", _frozen_array(vals, vals.shape, "scalar"))
        object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))
        if self.velocity is not None and self.velocity.nt != self.nt:
            raise GridError(
                f"Scalar trajectory spans {self.nt} steps, velocity spans {self.velocity.nt}"
            )
        if self.substeps is not None:
            counts = tuple(int(m) for m in self.substeps)
            if len(counts) != self.nt or min(counts) < 1:
                raise GridError(f"Substep counts {counts} do not cover {self.nt} steps")
            object.__setattr__(self, "substeps", counts)

    @property
    def nt(self) -> int:
        return self.steps[-1]

    @property
    def is_full(self) -> bool:
        return len(self.steps) == self.nt + 1

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.values[i])

    def at_step(self, n: int) -> ScalarField:
        try:
            return self[self.steps.index(n)]
        except ValueError:
            raise GridError(f"Step {n} is not stored (stored every {self.stride})")

    @property
    def stride(self) -> int:
        return self.steps[1] - self.steps[0] if len(self.steps) > 1 else 1

    def substeps_at(self, n: int) -> int:
        return 1 if self.substeps is None else self.substeps[n]

    @property
    def final(self) -> ScalarField:
        return self[len(self.steps) - 1]


@dataclass(frozen=True)
class StokesConfig:
    """Flow parameters: friction k, time step dt, nt steps, divergence tolerance factor."""

    k: float = 1.0
    dt: float = 1e-2
    nt: int = 100
    div_tol_factor: float = 1e-10

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigError(f"Friction coefficient k must be positive, got {self.k}")
        if not self.dt > 0:
            raise ConfigError(f"Time step dt must be positive, got {self.dt}")
        if self.nt < 1:
            raise ConfigError(f"Number of steps nt must be >= 1, got {self.nt}")

    @property
    def T(self) -> float:
        return self.nt * self.dt

    def div_tol(self, grid: Grid, vmax: float) -> float:
        return self.div_tol_factor * max(vmax, 1.0) / min(grid.hx, grid.hy)


@dataclass(frozen=True)
class CostReport:
    """Value of J or J_eps split into its mixing and control parts."""

    mix_term: float
    control_term: float
    total: float
    gamma: float
    epsilon: float
    penalty_term: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        out = {
            "mix_term": self.mix_term,
            "control_term": self.control_term,
            "total": self.total,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
        }
        if self.penalty_term:
            out["penalty_term"] = self.penalty_term
        return out


@dataclass(frozen=True)
class LineSearchConfig:
    """Armijo backtracking parameters; trial steps are step0 / gamma."""

    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    step0: float = 1.0
    bb: bool = False
    max_backtracks: int = 30

    def __post_init__(self):
        if not 0 < self.armijo_c1 < 1:
            raise ConfigError("armijo_c1 must lie in (0, 1)")
        if not 0 < self.backtrack < 1:
            raise ConfigError("backtrack must lie in (0, 1)")
        if not self.step0 > 0:
            raise ConfigError("step0 must be positive")
        if self.max_backtracks < 1:
            raise ConfigError("max_backtracks must be >= 1")


OPT_MODES = ("descent", "picard")
ADJOINT_MODES = ("discrete", "continuous")


@dataclass(frozen=True)
class OptConfig:
    """Optimizer configuration."""

    gamma: float = 1e-3
    epsilon: float = 1e-3
    max_iters: int = 50
    tol_g: float = 1e-6
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    mode: str = "descent"
    seed: int = 0
    adjoint: str = "discrete"
    checkpoint_stride: int = 1
    cfl: float = 0.5

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.tol_g > 0:
            raise ConfigError("tol_g must be positive")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be >= 0")
        if self.mode not in OPT_MODES:
            raise ConfigError(f"mode must be one of {OPT_MODES}, got {self.mode!r}")
        if self.adjoint not in ADJOINT_MODES:
            raise ConfigError(f"adjoint must be one of {ADJOINT_MODES}, got {self.adjoint!r}")
        if self.checkpoint_stride < 1:
            raise ConfigError("checkpoint_stride must be >= 1")
        if not self.cfl > 0:
            raise ConfigError("cfl must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class IterationRecord:
    """One row of the optimizer history."""

    iteration: int
    J: float
    mix_term: float
    control_term: float
    grad_norm: float
    step: float
    residual: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "iter": self.iteration,
            "J": self.J,
            "mix_term": self.mix_term,
            "control_term": self.control_term,
            "grad_norm": self.grad_norm,
            "step": self.step,
            "residual": self.residual,
        }


@dataclass
class OptResult:
    """Outcome and telemetry of one optimization run."""

    g_final: ControlTrajectory
    history: List[IterationRecord] = field(default_factory=list)
    optimality_residual: float = math.inf
    grad_v_infty_integral: float = 0.0
    iterations: int = 0
    converged: bool = False
    message: str = ""
    gamma: float = 0.0
    epsilon: float = 0.0

    @property
    def J_history(self) -> List[float]:
        return [rec.J for rec in self.history]

    @property
    def grad_norm_history(self) -> List[float]:
        return [rec.grad_norm for rec in self.history]

    @property
    def J_final(self) -> float:
        return self.history[-1].J if self.history else math.nan

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "J_final": self.J_final,
            "J_history": self.J_history,
            "grad_norm_history": self.grad_norm_history,
            "optimality_residual": self.optimality_residual,
            "grad_v_infty_integral": self.grad_v_infty_integral,
        }


@dataclass
class ContinuationReport:
    """Results of an epsilon continuation run."""

    schedule: List[float]
    results: List[OptResult]
    control_distances: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schedule": self.schedule,
            "control_distances": self.control_distances,
            "stages": [r.to_dict() for r in self.results],
        }


@dataclass
class RateReport:
    """sup_t ||theta_eps - theta||_L2 against eps and the fitted log-log slope."""

    epsilons: List[float]
    errors: List[float]
    slope: float

    def to_dict(self) -> Dict[str, Any]:
        return {"epsilons": self.epsilons, "errors": self.errors, "slope": self.slope}


@dataclass
class UniquenessReport:
    """Distance between optimizer runs started from two controls."""

    gamma: float
    distance: float
    relative_distance: float
    result_a: OptResult
    result_b: OptResult
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "distance": self.distance,
            "relative_distance": self.relative_distance,
            "passed": self.passed,
            "run_a": self.result_a.to_dict(),
            "run_b": self.result_b.to_dict(),
        }


@dataclass
class UniquenessSweepReport:
    """Uniqueness runs at increasing gamma; ``threshold`` is the first passing gamma, if any."""

    threshold: Optional[float]
    attempts: List[UniquenessReport]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "threshold": self.threshold,
            "attempts": [
                {k: v for k, v in p.to_dict().items() if not k.startswith("run_")}
                for p in self.attempts
            ],
        }


@dataclass
class GradientCheckReport:
    """Adjoint gradient against central finite differences along random directions."""

    delta: float
    adjoint: List[float]
    finite_difference: List[float]

    @property
    def errors(self) -> List[float]:
        return [
            abs(a - f) / max(abs(f), 1e-300) for a, f in zip(self.adjoint, self.finite_difference)
        ]

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.adjoint else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "adjoint": self.adjoint,
            "finite_difference": self.finite_difference,
            "errors": self.errors,
            "max_error": self.max_error,
        }
