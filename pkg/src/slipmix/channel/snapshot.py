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
"""Reading and writing fields, trajectories, controls and run reports.

Field files: 24-byte header (magic ``MIXFLD01``, little-endian uint32 nx and
ny, 8 reserved bytes) followed by nx * ny little-endian float64 values with x
varying fastest. Trajectories are directories of field files plus a
``manifest.json``.
"""
import csv
import hashlib
import json
import os
import struct
from typing import Any, Dict, Iterable, Optional

import numpy as np

from slipmix.exceptions import ConfigError
from slipmix.channel.models import (
    ControlTrajectory,
    Grid,
    OptResult,
    ScalarField,
    ScalarTrajectory,
    TransportDiagnostics,
    VelocityTrajectory,
)

MAGIC = b"MIXFLD01"
_HEADER = struct.Struct("<8sII8x")
MANIFEST = "manifest.json"


def write_array(path: str, values: np.ndarray) -> None:
    """Write a 2D array indexed [x, y] in the field format."""
    arr = np.asarray(values, dtype="<f8")
    if arr.ndim != 2:
        raise ConfigError(f"Field files hold 2D arrays, got shape {arr.shape}")
    nx, ny = arr.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, nx, ny))
        f.write(np.ascontiguousarray(arr.T).tobytes())


def read_array(path: str) -> np.ndarray:
    """Read a field file into an array indexed [x, y].

    Raises:
        ConfigError: If the file is missing, truncated or not a field file
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read field file {path}: {e}")
    if len(data) < _HEADER.size:
        raise ConfigError(f"Field file {path} is truncated")
    magic, nx, ny = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ConfigError(f"{path} is not a field file (magic {magic!r})")
    expected = _HEADER.size + 8 * nx * ny
    if len(data) != expected:
        raise ConfigError(f"Field file {path} has {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    return values.reshape(ny, nx).T.astype(float)


def write_field(path: str, field: ScalarField) -> None:
    write_array(path, field.values)


def read_field(path: str, grid: Optional[Grid] = None) -> ScalarField:
    """Read a scalar field; without a grid the default channel lengths are assumed.

    Raises:
        ConfigError: If the stored dimensions differ from ``grid``
    """
    values = read_array(path)
    if grid is None:
        grid = Grid(*values.shape)
    elif values.shape != (grid.nx, grid.ny):
        raise ConfigError(
            f"Field file {path} is {values.shape[0]}x{values.shape[1]}, "
            f"grid is {grid.nx}x{grid.ny}"
        )
    return ScalarField(grid, values)


def write_json(path: str, payload: Dict[str, Any]) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read JSON file {path}: {e}")


def _grid_from(meta: Dict[str, Any]) -> Grid:
    return Grid(int(meta["nx"]), int(meta["ny"]), float(meta["Lx"]), float(meta["Ly"]))


def _kept(nt: int, stride: int):
    steps = list(range(0, nt + 1, max(stride, 1)))
    if steps[-1] != nt:
        steps.append(nt)
    return steps


def write_velocity_trajectory(directory: str, v: VelocityTrajectory, stride: int = 1) -> None:
    """Store u_NNNNN / vy_NNNNN field files and the trajectory manifest."""
    os.makedirs(directory, exist_ok=True)
    steps = _kept(v.nt, stride)
    for n in steps:
        write_array(os.path.join(directory, f"u_{n:05d}.mixfld"), v.u[n])
        write_array(os.path.join(directory, f"vy_{n:05d}.mixfld"), v.vy[n])
    meta = dict(v.grid.to_dict(), nt=v.nt, dt=v.dt, k=v.k, steps=steps)
    write_json(os.path.join(directory, MANIFEST), meta)


def read_velocity_trajectory(directory: str) -> VelocityTrajectory:
    """Load a full (stride 1) velocity trajectory directory.

    Raises:
        ConfigError: If snapshots are thinned or missing
    """
    meta = read_json(os.path.join(directory, MANIFEST))
    grid = _grid_from(meta)
    if len(meta["steps"]) != meta["nt"] + 1:
        raise ConfigError(f"Velocity trajectory in {directory} is thinned; cannot rebuild it")
    u = [read_array(os.path.join(directory, f"u_{n:05d}.mixfld")) for n in meta["steps"]]
    vy = [read_array(os.path.join(directory, f"vy_{n:05d}.mixfld")) for n in meta["steps"]]
    return VelocityTrajectory(grid, float(meta["dt"]), np.stack(u), np.stack(vy), meta.get("k"))


def write_scalar_trajectory(directory: str, theta: ScalarTrajectory, stride: int = 1) -> None:
    """Store theta_NNNNN field files (every stride-th stored step) and the manifest."""
    os.makedirs(directory, exist_ok=True)
    kept = set(_kept(theta.nt, stride))
    steps = [n for n in theta.steps if n in kept or n == theta.nt]
    for n in steps:
        write_array(os.path.join(directory, f"theta_{n:05d}.mixfld"), theta.at_step(n).values)
    meta = dict(theta.grid.to_dict(), nt=theta.nt, dt=theta.dt, epsilon=theta.epsilon, steps=steps)
    write_json(os.path.join(directory, MANIFEST), meta)


def read_scalar_trajectory(directory: str) -> ScalarTrajectory:
    meta = read_json(os.path.join(directory, MANIFEST))
    grid = _grid_from(meta)
    values = [read_array(os.path.join(directory, f"theta_{n:05d}.mixfld")) for n in meta["steps"]]
    return ScalarTrajectory(
        grid, float(meta["dt"]), np.stack(values), meta["steps"], float(meta["epsilon"])
    )


def write_control(directory: str, g: ControlTrajectory) -> None:
    """Store each wall's control as one field file of shape (nx, nt + 1)."""
    os.makedirs(directory, exist_ok=True)
    write_array(os.path.join(directory, "control_bottom.mixfld"), g.bottom.T)
    write_array(os.path.join(directory, "control_top.mixfld"), g.top.T)
    meta = dict(g.grid.to_dict(), nt=g.nt, dt=g.dt, mode_cap=g.mode_cap)
    write_json(os.path.join(directory, "control.json"), meta)


def read_control(directory: str) -> ControlTrajectory:
    meta = read_json(os.path.join(directory, "control.json"))
    bottom = read_array(os.path.join(directory, "control_bottom.mixfld")).T
    top = read_array(os.path.join(directory, "control_top.mixfld")).T
    return ControlTrajectory(_grid_from(meta), float(meta["dt"]), bottom, top, meta.get("mode_cap"))


def _write_rows(path: str, fields, rows: Iterable[Dict[str, Any]]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in row.items()})


def write_diagnostics_csv(path: str, diagnostics: TransportDiagnostics) -> None:
    """Per-step columns t, mass, L1, L2, Linf, mixnorm."""
    _write_rows(path, ["t", "mass", "L1", "L2", "Linf", "mixnorm"], diagnostics.rows())


def write_history_csv(path: str, result: OptResult) -> None:
    """Per-iteration columns iter, J, mix_term, control_term, grad_norm, step, residual."""
    fields = ["iter", "J", "mix_term", "control_term", "grad_norm", "step", "residual"]
    _write_rows(path, fields, (rec.to_dict() for rec in result.history))


def write_result(directory: str, result: OptResult) -> None:
    """OptResult JSON, iteration history CSV and the final control."""
    os.makedirs(directory, exist_ok=True)
    write_json(os.path.join(directory, "result.json"), result.to_dict())
    write_history_csv(os.path.join(directory, "history.csv"), result)
    write_control(os.path.join(directory, "control"), result.g_final)


def content_hash(config: Dict[str, Any], files: Iterable[str] = ()) -> str:
    """SHA-256 over the canonical JSON of the config and the bytes of input files."""
    digest = hashlib.sha256()
    digest.update(json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8"))
    for path in files:
        with open(path, "rb") as f:
            digest.update(f.read())
    return digest.hexdigest()
