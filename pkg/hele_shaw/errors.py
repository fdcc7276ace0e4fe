# Copyright 2025 DeepMind Technologies Limited. All Rights Reserved.
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
# ==============================================================================
"""Exceptions raised by the Hele-Shaw simulator.

Blow-up of a solution and exhaustion of the fluid are not errors: they are
reported through `pg_dynamics.BlowupReport` and
`pg_dynamics.TerminationReason`.
"""

from typing import Any


class HeleShawError(Exception):
  """Base class of all simulator errors."""


class AliasingError(HeleShawError, ValueError):
  """The sampling grid cannot resolve a series or a velocity field."""


class NonRealBoundaryDataError(HeleShawError, ValueError):
  """Boundary data passed to the Poisson operator is not real."""


class SingularIntegrandError(HeleShawError, ValueError):
  """f' vanishes where the Poisson integrand must be regular."""

  def __init__(self, message: str, root: complex | None = None):
    super().__init__(message)
    self.root = root


class NotUnivalentError(HeleShawError, ValueError):
  """A map required to be univalent is not.

  `witness` is either the offending zero of f' or a pair of distinct points
  with (numerically) equal images.
  """

  def __init__(self, message: str, witness: Any = None):
    super().__init__(message)
    self.witness = witness


class NotStarlikeError(HeleShawError, ValueError):
  """A map required to be starlike is not.

  `witness` is the boundary parameter where the polar angle of the image
  stops increasing, or a zero of f(xi)/xi in the closed disk.
  """

  def __init__(self, message: str, witness: Any = None):
    super().__init__(message)
    self.witness = witness


class DegenerateBoundaryError(HeleShawError, ValueError):
  """The curvature of a boundary curve is undefined."""


class NumericalFailure(HeleShawError, RuntimeError):
  """The time integrator could not continue (e.g. step-size underflow)."""

  def __init__(self, message: str, t: float | None = None):
    super().__init__(message)
    self.t = t


class InsufficientDataError(HeleShawError, ValueError):
  """Not enough (or incompatible) snapshots for an analysis."""


class ConfigError(HeleShawError, ValueError):
  """Invalid run configuration.

  The message is prefixed with the offending field name.
  """

  def __init__(self, field: str, reason: str):
    super().__init__(f'{field}: {reason}')
    self.field = field
    self.reason = reason
