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
"""Custom exceptions for the slipmix solver."""
from typing import Optional


class SlipMixError(Exception):
    """Base exception for slipmix."""

    pass


class ConfigError(SlipMixError):
    """Raised when a configuration value or run spec is invalid."""

    pass


class GridError(SlipMixError):
    """Raised for undersized grids or fields living on different grids."""

    pass


class NumericalError(SlipMixError):
    """Raised when a solve produces non-finite values."""

    def __init__(self, message: str, step: Optional[int] = None, field: Optional[str] = None):
        super().__init__(message)
        self.step = step
        self.field = field


class CFLError(NumericalError):
    """Raised when the time step violates the advective CFL bound."""

    def __init__(self, message: str, step: int, dt: float, required_dt: float):
        super().__init__(message, step=step, field="velocity")
        self.dt = dt
        self.required_dt = required_dt


class ConvergenceError(SlipMixError):
    """Raised when an optimization run required to converge does not."""

    pass
