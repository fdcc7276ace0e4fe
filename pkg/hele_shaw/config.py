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
"""Run configuration of the command-line experiments.

A run is described by one JSON file holding a `RunConfig`, optionally
overridden by command-line flags. `to_json` and `from_json` round-trip
exactly:

```json
{
  "kind": "evolve",
  "coefficients": [[1.0, 0.0], [0.4, 0.0]],
  "sign": 1,
  "t_end": 10.0,
  "schedule": {"kind": "linear", "count": 100}
}
```
"""

import dataclasses
import enum
import json
import math
from typing import Optional

import dataclasses_json
from hele_shaw import errors
from hele_shaw import pg_dynamics
from hele_shaw import series_core
from hele_shaw.core import rescaling
import numpy as np


class ExperimentKind(enum.StrEnum):
  EVOLVE = 'evolve'
  SUCTION = 'suction'
  PERTURB = 'perturb'
  CASCADE = 'cascade'
  DECAY = 'decay'
  MOMENTS = 'moments'


class ScheduleKind(enum.StrEnum):
  STEPS = 'steps'
  LINEAR = 'linear'
  LOG = 'log'


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class SnapshotSchedule:
  """When to record states.

  Attributes:
    kind: 'steps' records every accepted step, 'linear' records `count`
      equispaced times in `(0, t_end]`, 'log' records `per_decade` times per
      decade of `[t_lo, t_hi]`.
    count: number of linear snapshots.
    t_lo: start of the log schedule.
    t_hi: end of the log schedule; defaults to `t_end`.
    per_decade: density of the log schedule.
  """

  kind: str = ScheduleKind.STEPS.value
  count: int = 0
  t_lo: Optional[float] = None
  t_hi: Optional[float] = None
  per_decade: int = 24

  def times(self, t_end: float) -> list[float] | None:
    match ScheduleKind(self.kind):
      case ScheduleKind.STEPS:
        return None
      case ScheduleKind.LINEAR:
        return [float(t) for t in np.linspace(0.0, t_end, self.count + 1)[1:]]
      case ScheduleKind.LOG:
        t_hi = t_end if self.t_hi is None else self.t_hi
        times = rescaling.log_spaced_times(self.t_lo, t_hi, self.per_decade)
        return [float(t) for t in times]


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class RunConfig:
  """One experiment.

  Attributes:
    kind: which experiment to run.
    coefficients: `[re, im]` pairs of `a_1..a_N` of the initial (base) map.
    sign: +1 injection, -1 suction.
    t_end: final time (horizon `t_max` for suction sweeps, `T0` for
      perturbation and cascade runs).
    schedule: snapshot schedule.
    rtol: relative tolerance.
    atol: absolute tolerance.
    analysis_radius: radius of the blow-up monitor.
    min_fprime_floor: blow-up floor.
    n_grid: initial grid size, None for automatic.
    locally_univalent: strong* mode.
    moment_order: highest moment `K` reported.
    output_dir: directory receiving the outputs.
    seed: angular jitter of the quadrature oracle.
    deltas: perturbation amplitudes (suction and perturb).
    template: `[re, im]` pairs of the perturbation shape `v` (suction and
      perturb); entry i multiplies `xi^(i + 1)`.
    degrees: truncation degrees (cascade).
    window: `[t_lo, t_hi]` of the decay fit.
    r: radius of the `M(r)` norm in comparisons.
    jmax: highest derivative compared.
    rho: radius of the perturbation norm.
    norm_order: derivative order of the perturbation norm.
  """

  kind: str = ExperimentKind.EVOLVE.value
  coefficients: list[list[float]] = dataclasses.field(
      default_factory=lambda: [[1.0, 0.0]]
  )
  sign: int = 1
  t_end: float = 1.0
  schedule: SnapshotSchedule = dataclasses.field(
      default_factory=SnapshotSchedule
  )
  rtol: float = pg_dynamics.EvolveOptions.rtol
  atol: float = pg_dynamics.EvolveOptions.atol
  analysis_radius: float = pg_dynamics.EvolveOptions.analysis_radius
  min_fprime_floor: float = pg_dynamics.EvolveOptions.min_fprime_floor
  n_grid: Optional[int] = None
  locally_univalent: bool = False
  moment_order: int = 5
  output_dir: str = 'out'
  seed: Optional[int] = None
  deltas: list[float] = dataclasses.field(default_factory=list)
  template: list[list[float]] = dataclasses.field(default_factory=list)
  degrees: list[int] = dataclasses.field(default_factory=list)
  window: list[float] = dataclasses.field(default_factory=list)
  r: float = 1.0
  jmax: int = 1
  rho: float = 1.5
  norm_order: int = 1

  def initial_map(self) -> series_core.CoefficientSeries:
    return series_core.CoefficientSeries.from_pairs(self.coefficients)

  def template_map(self) -> series_core.CoefficientSeries:
    return series_core.CoefficientSeries.from_pairs(self.template)

  def evolve_options(self) -> pg_dynamics.EvolveOptions:
    return pg_dynamics.EvolveOptions(
        rtol=self.rtol,
        atol=self.atol,
        analysis_radius=self.analysis_radius,
        min_fprime_floor=self.min_fprime_floor,
        n_grid=self.n_grid,
        locally_univalent=self.locally_univalent,
    )

  def snapshot_times(self) -> list[float] | None:
    return self.schedule.times(self.t_end)

  def validate(self) -> 'RunConfig':
    """Checks the configuration.

    Returns:
      self, for chaining.

    Raises:
      ConfigError: naming the first offending field.
    """
    try:
      kind = ExperimentKind(self.kind)
    except ValueError:
      raise errors.ConfigError(
          'kind', f'unknown experiment {self.kind!r}'
      ) from None
    if not self.coefficients:
      raise errors.ConfigError('coefficients', 'at least a_1 is required')
    for i, pair in enumerate(self.coefficients):
      if len(pair) != 2:
        raise errors.ConfigError(
            f'coefficients[{i}]', f'expected an [re, im] pair, got {pair!r}'
        )
      if not all(math.isfinite(float(x)) for x in pair):
        raise errors.ConfigError(f'coefficients[{i}]', 'must be finite')
    a1 = self.coefficients[0]
    if a1[1] != 0 or not a1[0] > 0:
      raise errors.ConfigError(
          'coefficients[0]', f'a_1 must be real and positive, got {a1!r}'
      )
    if self.sign not in (1, -1):
      raise errors.ConfigError('sign', f'must be +1 or -1, got {self.sign}')
    if not self.t_end > 0:
      raise errors.ConfigError('t_end', f'must be positive, got {self.t_end}')
    try:
      schedule_kind = ScheduleKind(self.schedule.kind)
    except ValueError:
      raise errors.ConfigError(
          'schedule.kind', f'unknown schedule {self.schedule.kind!r}'
      ) from None
    if schedule_kind == ScheduleKind.LINEAR and self.schedule.count < 1:
      raise errors.ConfigError('schedule.count', 'must be positive')
    if schedule_kind == ScheduleKind.LOG:
      t_hi = self.t_end if self.schedule.t_hi is None else self.schedule.t_hi
      if self.schedule.t_lo is None or not 0 < self.schedule.t_lo < t_hi:
        raise errors.ConfigError(
            'schedule.t_lo', 'log schedules need 0 < t_lo < t_hi'
        )
      if t_hi > self.t_end:
        raise errors.ConfigError('schedule.t_hi', 'must not exceed t_end')
    if self.moment_order < 0:
      raise errors.ConfigError('moment_order', 'must be non-negative')
    try:
      self.evolve_options()
    except ValueError as e:
      raise errors.ConfigError('options', str(e)) from None
    if kind in (ExperimentKind.SUCTION, ExperimentKind.PERTURB):
      if not self.deltas:
        raise errors.ConfigError('deltas', 'at least one amplitude required')
      if not self.template:
        raise errors.ConfigError('template', 'a perturbation shape is required')
    if kind == ExperimentKind.CASCADE and len(self.degrees) < 2:
      raise errors.ConfigError('degrees', 'at least two degrees required')
    if kind == ExperimentKind.DECAY:
      if len(self.window) != 2 or not 0 < self.window[0] < self.window[1]:
        raise errors.ConfigError('window', 'expected [t_lo, t_hi], 0 < t_lo')
      if self.window[1] > self.t_end:
        raise errors.ConfigError('window', 'must end before t_end')
    if self.r < 1:
      raise errors.ConfigError('r', f'must be at least 1, got {self.r}')
    if not self.rho > 1:
      raise errors.ConfigError('rho', f'must exceed 1, got {self.rho}')
    return self


def load(path: str) -> RunConfig:
  """Reads a configuration file.

  Raises:
    ConfigError: if the file is not a valid configuration.
  """
  with open(path, 'rt') as f:
    text = f.read()
  try:
    json.loads(text)
  except json.JSONDecodeError as e:
    raise errors.ConfigError(
        'file', f'{path}: line {e.lineno}: {e.msg}'
    ) from None
  try:
    return RunConfig.from_json(text)
  except (KeyError, TypeError, ValueError) as e:
    raise errors.ConfigError('file', f'{path}: {e}') from None


def dump(cfg: RunConfig, path: str) -> None:
  with open(path, 'wt') as f:
    f.write(cfg.to_json(indent=2, sort_keys=True))
    f.write('\n')
