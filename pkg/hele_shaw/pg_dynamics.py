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
"""Evolution engine for the Polubarinova-Galin equation.

The moving domain `Omega(t) = f(D, t)` is described by a normalized conformal
map `f(xi, t) = a_1(t) xi + ... + a_N(t) xi^N` with `a_1 > 0`. Fluid is
injected (`sigma = +1`) or sucked (`sigma = -1`) at the origin with rate
`2 pi`, and the boundary moves according to

    Re[f_t conj(f' xi)] = sigma        on |xi| = 1,

or, equivalently, `f_t = xi f' P[sigma / |f'|^2]` with `P` the Poisson
operator of `poisson_kernel`. Polynomial data stays polynomial of the same
degree, so the coefficient vector `a_1..a_N` obeys a finite ODE system which
is integrated here with the embedded Runge-Kutta 4(5) pair of
`scipy.integrate.RK45`.

A strong solution ceases to exist when `min |f'|` over a closed disk of radius
`r > 1` tends to zero. `evolve` stops as soon as that minimum drops below a
floor and reports the crossing time, refined by bisection on the integrator's
dense output.

```python
from hele_shaw import pg_dynamics
from hele_shaw import series_core

f0 = series_core.CoefficientSeries([1.0])
traj = pg_dynamics.evolve(f0, pg_dynamics.FlowSign.SUCTION, t_end=0.6)
traj.termination  # TerminationReason.BLOWUP
traj.blowup.t_star  # ~0.5
```
"""

from collections.abc import Sequence
import dataclasses
import enum
import math

from absl import logging
from hele_shaw import errors
from hele_shaw import geometry
from hele_shaw import poisson_kernel
from hele_shaw import series_core
import numpy as np
from scipy import integrate

# Relative velocity tail above which an accepted step is discarded and retried
# on a finer grid.
HARD_RESIDUAL_LIMIT = 1e-6

# Drift of Im a_1 tolerated before the gauge correction is logged.
GAUGE_TOLERANCE = 1e-12

_ROUNDOFF = 64 * np.finfo(np.float64).eps


class FlowSign(enum.IntEnum):
  """Direction of the flow: rate `+2 pi` (injection) or `-2 pi` (suction)."""

  INJECTION = 1
  SUCTION = -1

  @classmethod
  def parse(cls, value: 'int | str | FlowSign') -> 'FlowSign':
    """Accepts +1/-1, '+1'/'-1' or the member names (case-insensitive)."""
    if isinstance(value, str):
      text = value.strip().lower()
      if text in ('injection', 'suction'):
        return cls[text.upper()]
      try:
        value = int(text)
      except ValueError:
        raise ValueError(f'Unknown flow sign {value!r}.') from None
    if value not in (1, -1):
      raise ValueError(f'Flow sign must be +1 or -1, got {value!r}.')
    return cls(value)


class TerminationReason(enum.StrEnum):
  COMPLETED = 'completed'
  BLOWUP = 'blowup'
  EXHAUSTED = 'exhausted'
  LOST_UNIVALENCE = 'lost_univalence'


@dataclasses.dataclass(frozen=True)
class EvolveOptions:
  """Options of `evolve` and `detect_blowup`.

  Attributes:
    rtol: relative local error tolerance of the embedded RK pair. The global
      error grows with the horizon: at the default a disk evolved to t = 10
      is off by a few 1e-8, so closed-form checks at 1e-8 and below need a
      tighter rtol.
    atol: absolute local error tolerance.
    analysis_radius: radius `r > 1` of the disk on which `min |f'|` is
      monitored.
    min_fprime_floor: blow-up is declared when `min |f'|` on the closed disk
      of radius `analysis_radius` drops below this value.
    n_grid: initial grid size; None picks `default_grid_size(degree)`.
    max_grid: largest grid the velocity may be refined to.
    residual_tol: the grid is doubled while the velocity tail exceeds
      `residual_tol * |f|_M`.
    locally_univalent: strong* mode; only `f' != 0` on the closed disk is
      required and univalence is not checked.
    univalence_check_every: accepted steps between univalence spot checks.
    exhaustion_threshold: suction stops when `M_0` drops to this value.
    bracket_tol: width of the bisection bracket around a floor crossing.
    max_steps: budget of accepted steps per run.
  """

  rtol: float = 1e-9
  atol: float = 1e-12
  analysis_radius: float = 1.05
  min_fprime_floor: float = 1e-3
  n_grid: int | None = None
  max_grid: int = 2**16
  residual_tol: float = 1e-10
  locally_univalent: bool = False
  univalence_check_every: int = 10
  exhaustion_threshold: float = 1e-6
  bracket_tol: float = 1e-6
  max_steps: int = 500_000

  def __post_init__(self):
    if not self.rtol > 0 or not self.atol > 0:
      raise ValueError(
          f'Tolerances must be positive, got rtol={self.rtol},'
          f' atol={self.atol}.'
      )
    if not self.analysis_radius > 1:
      raise ValueError(
          f'The analysis radius must exceed 1, got {self.analysis_radius}.'
      )
    if not self.min_fprime_floor > 0:
      raise ValueError(
          f'The blow-up floor must be positive, got {self.min_fprime_floor}.'
      )
    if self.n_grid is not None and (
        self.n_grid < 4 or self.n_grid & (self.n_grid - 1)
    ):
      raise ValueError(f'n_grid must be a power of two, got {self.n_grid}.')
    if not self.bracket_tol > 0:
      raise ValueError(f'bracket_tol must be positive, got {self.bracket_tol}.')
    if self.univalence_check_every < 1:
      raise ValueError(
          'univalence_check_every must be at least 1, got'
          f' {self.univalence_check_every}.'
      )


@dataclasses.dataclass(frozen=True)
class Velocity:
  """Velocity of the coefficients of `f`.

  Attributes:
    series: `f_t` truncated to the degree of `f`.
    residual: `|tail beyond deg f|_M` of `xi f' P[sigma / |f'|^2]`.
    n_grid: grid on which the Poisson operator was evaluated.
  """

  series: series_core.CoefficientSeries
  residual: float
  n_grid: int


@dataclasses.dataclass(frozen=True)
class StepDiagnostics:
  min_fprime: float
  degree_residual: float
  pg_residual: float
  step_size: float
  n_grid: int


@dataclasses.dataclass(frozen=True)
class BlowupReport:
  """Outcome of the blow-up monitor.

  Attributes:
    detected: whether `min |f'|` crossed the floor.
    t_star: midpoint of the bisection bracket around the crossing.
    bracket_width: width of that bracket, at most the requested tolerance.
    floor: the `min |f'|` threshold.
    analysis_radius: radius of the monitored disk.
    state: the map at `t_star`.
    message: human readable summary.
  """

  detected: bool
  t_star: float | None = None
  bracket_width: float | None = None
  floor: float = 0.0
  analysis_radius: float = 1.0
  state: series_core.CoefficientSeries | None = None
  message: str = ''


@dataclasses.dataclass(frozen=True, eq=False)
class Trajectory:
  """Recorded solution of one evolution.

  Attributes:
    sign: direction of the flow.
    times: strictly increasing record times, `times[0] = 0`.
    states: maps at `times`, each with a real positive `a_1`.
    diagnostics: per-record diagnostics.
    termination: why the integration stopped.
    blowup: the blow-up report when `termination` is BLOWUP.
    analysis_radius: radius of the monitored disk.
    nfev: number of right-hand side evaluations.
  """

  sign: FlowSign
  times: np.ndarray
  states: tuple[series_core.CoefficientSeries, ...]
  diagnostics: tuple[StepDiagnostics, ...]
  termination: TerminationReason = TerminationReason.COMPLETED
  blowup: BlowupReport | None = None
  analysis_radius: float = 1.05
  nfev: int = 0

  def __post_init__(self):
    times = np.array(self.times, dtype=np.float64, copy=True)
    times.setflags(write=False)
    object.__setattr__(self, 'times', times)
    if not (len(times) == len(self.states) == len(self.diagnostics)):
      raise ValueError(
          f'Trajectory has {len(times)} times, {len(self.states)} states and'
          f' {len(self.diagnostics)} diagnostics.'
      )
    if len(times) == 0 or times[0] != 0.0:
      raise ValueError('A trajectory must start at t = 0.')
    if np.any(np.diff(times) <= 0):
      raise ValueError('Trajectory times must be strictly increasing.')

  def __len__(self) -> int:
    return len(self.states)

  @property
  def initial_state(self) -> series_core.CoefficientSeries:
    return self.states[0]

  @property
  def final_state(self) -> series_core.CoefficientSeries:
    return self.states[-1]

  @property
  def final_time(self) -> float:
    return float(self.times[-1])

  @property
  def degree(self) -> int:
    return max(s.degree for s in self.states)

  def replace_state(
      self, index: int, state: series_core.CoefficientSeries
  ) -> 'Trajectory':
    """Returns a copy with `states[index]` replaced."""
    states = list(self.states)
    states[index] = state
    return dataclasses.replace(self, states=tuple(states))


def normalize_gauge(
    f: series_core.CoefficientSeries,
) -> series_core.CoefficientSeries:
  """Rotates `xi` so that `a_1` is real and positive.

  `f(exp(i phi) xi)` with `phi = -arg a_1` parametrizes the same domain. Maps
  that are already normalized are returned unchanged.
  """
  a1 = f.linear_coefficient
  if a1.imag == 0 and a1.real > 0:
    return f
  if a1 == 0:
    raise ValueError('Cannot normalize a map with a_1 = 0.')
  if abs(a1.imag) > GAUGE_TOLERANCE * abs(a1):
    logging.log_first_n(
        logging.WARNING,
        'Im a_1 drifted to %.3e; rotating the parametrization.',
        5,
        a1.imag,
    )
  a = np.array(f.rotate(-np.angle(a1)).a)
  a[0] = abs(a1)
  return series_core.CoefficientSeries(a)


def _area_moment(a: np.ndarray) -> float:
  n = np.arange(1, a.size + 1)
  return float(np.sum(n * np.abs(a) ** 2))


def _velocity_on_grid(
    a: np.ndarray, sign: FlowSign, n_grid: int
) -> tuple[np.ndarray, float, float]:
  """Velocity coefficients of `a_1..a_N` on a fixed grid.

  Returns:
    The velocity of `a_1..a_N`, the `|.|_M` norm of the discarded tail, and the
    round-off floor of that tail for this grid.
  """
  fprime = series_core.PowerSeries(np.arange(1, a.size + 1) * a)
  completion = poisson_kernel.poisson_fourier(
      poisson_kernel.inverse_modulus_squared(fprime, n_grid)
  )
  p = int(sign) * completion.as_series().coeffs
  b = fprime.padded(a.size)
  # Entry m of the product multiplies xi^(m + 1).
  full = np.convolve(b, p)
  residual = float(np.sum(np.abs(full[a.size :])))
  floor = _ROUNDOFF * n_grid * float(np.sum(np.abs(b)) * np.sum(np.abs(p)))
  return full[: a.size], residual, floor


def _resolve_velocity(
    a: np.ndarray,
    sign: FlowSign,
    n_grid: int,
    residual_tol: float,
    max_grid: int,
) -> tuple[np.ndarray, float, int]:
  """Doubles the grid until the velocity tail is below tolerance."""
  target = residual_tol * float(np.sum(np.abs(a)))
  while True:
    v, residual, floor = _velocity_on_grid(a, sign, n_grid)
    if residual <= max(target, floor):
      return v, residual, n_grid
    if 2 * n_grid > max_grid:
      raise errors.AliasingError(
          f'Velocity tail {residual:.3e} exceeds {target:.3e} on the largest'
          f' grid ({n_grid} points).'
      )
    logging.info(
        'Velocity tail %.3e exceeds %.3e on %d points; doubling the grid.',
        residual,
        target,
        n_grid,
    )
    n_grid *= 2


def _check_regular(f: series_core.CoefficientSeries) -> None:
  for root in geometry.derivative_roots(f):
    if abs(root) <= 1 + geometry.ROOT_BAND:
      raise errors.SingularIntegrandError(
          f"f' vanishes at {root:.6g} in the closed unit disk; the velocity is"
          ' undefined.',
          root=complex(root),
      )


def velocity(
    f: series_core.CoefficientSeries,
    sign: FlowSign | int,
    n_grid: int | None = None,
    residual_tol: float = EvolveOptions.residual_tol,
    max_grid: int = EvolveOptions.max_grid,
) -> Velocity:
  """Returns `f_t = xi f' P[sigma / |f'|^2]` truncated to the degree of `f`.

  Args:
    f: the map; `f'` must not vanish on the closed unit disk.
    sign: +1 for injection, -1 for suction.
    n_grid: starting grid size; doubled while the tail residual exceeds
      `residual_tol * |f|_M`.
    residual_tol: relative tolerance of the tail residual.
    max_grid: largest admissible grid.

  Returns:
    The truncated velocity, its tail residual and the grid used.

  Raises:
    SingularIntegrandError: if `f'` vanishes on the closed unit disk.
    AliasingError: if the grid is too coarse for `f` or the tail cannot be
      resolved on `max_grid` points.
  """
  sign = FlowSign.parse(sign)
  _check_regular(f)
  if n_grid is None:
    n_grid = series_core.default_grid_size(f.degree)
  if n_grid < series_core.ANTI_ALIASING_FACTOR * f.degree:
    raise errors.AliasingError(
        f'Grid of {n_grid} points cannot resolve a map of degree {f.degree}.'
    )
  a = f.padded(f.degree + 1)[1:]
  v, residual, n_grid = _resolve_velocity(
      a, sign, n_grid, residual_tol, max_grid
  )
  return Velocity(series_core.CoefficientSeries(v), residual, n_grid)


def residual_pg(
    f: series_core.CoefficientSeries,
    f_t: series_core.CoefficientSeries,
    sign: FlowSign | int,
    n_grid: int | None = None,
) -> float:
  """Returns `max |Re[f_t conj(f' xi)] - sigma|` over the unit circle."""
  sign = FlowSign.parse(sign)
  if n_grid is None:
    n_grid = series_core.default_grid_size(2 * max(f.degree, f_t.degree))
  xi = series_core.circle_points(1.0, n_grid)
  lhs = np.real(f_t(xi) * np.conj(f.derivative(1)(xi) * xi))
  return float(np.max(np.abs(lhs - int(sign))))


class _VelocityField:
  """Right-hand side of the coefficient ODE on a fixed grid."""

  def __init__(self, sign: FlowSign, n_grid: int):
    self.sign = sign
    self.n_grid = n_grid
    self.nfev = 0

  def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
    del t
    self.nfev += 1
    v, _, _ = _velocity_on_grid(y, self.sign, self.n_grid)
    return v


def _prepare(
    f0: series_core.CoefficientSeries, opts: EvolveOptions
) -> series_core.CoefficientSeries:
  """Checks the initial data and normalizes its gauge."""
  if opts.locally_univalent:
    _check_regular(f0)
  else:
    report = geometry.is_univalent(f0, 1.0)
    if not report:
      raise errors.NotUnivalentError(
          'The initial map is not univalent on the closed unit disk'
          f' ({report.reason}).',
          witness=report.witness,
      )
  return normalize_gauge(f0)


def _diagnose(
    state: series_core.CoefficientSeries,
    sign: FlowSign,
    field: _VelocityField,
    opts: EvolveOptions,
    step_size: float,
) -> StepDiagnostics:
  a = state.padded(state.degree + 1)[1:]
  v, residual, _ = _velocity_on_grid(a, sign, field.n_grid)
  return StepDiagnostics(
      min_fprime=geometry.min_abs_fprime(state, opts.analysis_radius),
      degree_residual=residual,
      pg_residual=residual_pg(
          state, series_core.CoefficientSeries(v), sign, field.n_grid
      ),
      step_size=step_size,
      n_grid=field.n_grid,
  )


def _bisect_floor(
    dense, lo: float, hi: float, opts: EvolveOptions
) -> tuple[float, float]:
  """Brackets the time at which `min |f'|` crosses the floor."""

  def below(t: float) -> bool:
    state = series_core.CoefficientSeries(dense(t))
    return (
        geometry.min_abs_fprime(state, opts.analysis_radius)
        < opts.min_fprime_floor
    )

  while hi - lo > opts.bracket_tol:
    mid = 0.5 * (lo + hi)
    if below(mid):
      hi = mid
    else:
      lo = mid
  return lo, hi


def _new_solver(field, t0, y0, t_end, opts) -> integrate.RK45:
  return integrate.RK45(
      field,
      t0,
      np.array(y0, dtype=np.complex128),
      t_end,
      rtol=opts.rtol,
      atol=opts.atol,
  )


def evolve(
    f0: series_core.CoefficientSeries,
    sign: FlowSign | int,
    t_end: float,
    opts: EvolveOptions | None = None,
    snapshot_times: Sequence[float] | None = None,
) -> Trajectory:
  """Integrates the Polubarinova-Galin flow from `f0` up to `t_end`.

  Args:
    f0: initial map, univalent on the closed unit disk (or only locally
      univalent when `opts.locally_univalent` is set).
    sign: +1 for injection, -1 for suction.
    t_end: final time.
    opts: integration options.
    snapshot_times: times in `(0, t_end]` at which to record the state, read
      from the dense output. None records every accepted step. The terminal
      state of a run that stops early is always recorded.

  Returns:
    The recorded trajectory. Blow-up, fluid exhaustion and loss of
    univalence end the run early and are reported through `termination`.

  Raises:
    NotUnivalentError: if `f0` is not univalent (default mode).
    SingularIntegrandError: if `f0'` vanishes on the closed unit disk.
    NumericalFailure: if the integrator cannot continue.
    AliasingError: if the velocity cannot be resolved on `opts.max_grid`
      points.
  """
  opts = opts or EvolveOptions()
  sign = FlowSign.parse(sign)
  if not t_end >= 0:
    raise ValueError(f't_end must be non-negative, got {t_end}.')
  pending = None
  if snapshot_times is not None:
    pending = sorted(float(t) for t in snapshot_times if t > 0)
    if pending and pending[-1] > t_end:
      raise ValueError(
          f'Snapshot time {pending[-1]} lies beyond t_end={t_end}.'
      )

  f0 = _prepare(f0, opts)
  degree = f0.degree
  y0 = f0.padded(degree + 1)[1:]
  n_grid = opts.n_grid or series_core.default_grid_size(degree)
  _, _, n_grid = _resolve_velocity(
      y0, sign, n_grid, opts.residual_tol, opts.max_grid
  )
  field = _VelocityField(sign, n_grid)
  logging.info(
      'Evolving a degree-%d map, sign %+d, to t=%g on %d grid points.',
      degree,
      int(sign),
      t_end,
      n_grid,
  )

  times = [0.0]
  states = [f0]
  diagnostics = [_diagnose(f0, sign, field, opts, 0.0)]
  termination = TerminationReason.COMPLETED
  blowup = None

  def record(t: float, y: np.ndarray, step_size: float):
    state = normalize_gauge(series_core.CoefficientSeries(y))
    times.append(float(t))
    states.append(state)
    diagnostics.append(_diagnose(state, sign, field, opts, step_size))

  if t_end == 0:
    return Trajectory(sign, times, tuple(states), tuple(diagnostics))

  solver = _new_solver(field, 0.0, y0, t_end, opts)
  steps = 0
  step_size = 0.0
  while solver.status == 'running':
    t_prev, y_prev = solver.t, solver.y.copy()
    message = solver.step()
    if solver.status == 'failed':
      raise errors.NumericalFailure(
          f'Integrator failed at t={solver.t:.6g}: {message}', t=solver.t
      )
    steps += 1
    if steps > opts.max_steps:
      raise errors.NumericalFailure(
          f'Step budget of {opts.max_steps} exhausted at t={solver.t:.6g}.',
          t=solver.t,
      )
    t, y = solver.t, solver.y.copy()
    step_size = t - t_prev
    dense = solver.dense_output()

    _, residual, _ = _velocity_on_grid(y, sign, field.n_grid)
    scale = float(np.sum(np.abs(y)))
    if residual > opts.residual_tol * scale:
      _, _, finer = _resolve_velocity(
          y, sign, field.n_grid, opts.residual_tol, opts.max_grid
      )
      if finer > field.n_grid:
        field.n_grid = finer
        if residual > HARD_RESIDUAL_LIMIT * scale:
          logging.info(
              'Retrying the step from t=%g on %d points.', t_prev, finer
          )
          solver = _new_solver(field, t_prev, y_prev, t_end, opts)
          continue
        solver = _new_solver(field, t, y, t_end, opts)
    logging.debug('t=%.6g h=%.3e residual=%.3e', t, step_size, residual)

    state = series_core.CoefficientSeries(y)
    if geometry.min_abs_fprime(state, opts.analysis_radius) < (
        opts.min_fprime_floor
    ):
      lo, hi = _bisect_floor(dense, t_prev, t, opts)
      t_star = 0.5 * (lo + hi)
      blowup = BlowupReport(
          detected=True,
          t_star=t_star,
          bracket_width=hi - lo,
          floor=opts.min_fprime_floor,
          analysis_radius=opts.analysis_radius,
          state=normalize_gauge(series_core.CoefficientSeries(dense(t_star))),
          message=(
              f"min |f'| on |xi| <= {opts.analysis_radius} fell below"
              f' {opts.min_fprime_floor} at t={t_star:.6g}'
          ),
      )
      termination = TerminationReason.BLOWUP
      logging.info('Blow-up detected: %s.', blowup.message)
      # The run ends at the crossing, not at the end of the step.
      t, y = t_star, dense(t_star)
    elif sign == FlowSign.SUCTION and (
        _area_moment(y) <= opts.exhaustion_threshold
    ):
      termination = TerminationReason.EXHAUSTED
      logging.info('Fluid exhausted at t=%.6g.', t)
    elif (
        not opts.locally_univalent
        and steps % opts.univalence_check_every == 0
        and not geometry.is_univalent(state, 1.0)
    ):
      termination = TerminationReason.LOST_UNIVALENCE
      logging.warning('The map stopped being univalent at t=%.6g.', t)

    if pending is None:
      if t > times[-1]:
        record(t, y, step_size)
    else:
      while pending and pending[0] <= t:
        snapshot = pending.pop(0)
        record(snapshot, dense(snapshot), step_size)
    if termination != TerminationReason.COMPLETED:
      break

  # The terminal state is always recorded.
  if termination == TerminationReason.COMPLETED:
    if solver.t > times[-1]:
      record(solver.t, solver.y, step_size)
  elif t > times[-1]:
    record(t, y, step_size)

  logging.info(
      'Evolution ended at t=%g (%s) after %d steps and %d evaluations.',
      times[-1],
      termination,
      steps,
      field.nfev,
  )
  return Trajectory(
      sign=sign,
      times=times,
      states=tuple(states),
      diagnostics=tuple(diagnostics),
      termination=termination,
      blowup=blowup,
      analysis_radius=opts.analysis_radius,
      nfev=field.nfev,
  )


def detect_blowup(
    f0: series_core.CoefficientSeries,
    sign: FlowSign | int,
    opts: EvolveOptions | None = None,
    t_max: float = 100.0,
) -> BlowupReport:
  """Integrates until `min |f'|` drops below the floor or `t_max` is reached.

  Args:
    f0: initial map.
    sign: +1 for injection, -1 for suction.
    opts: integration options; `min_fprime_floor`, `analysis_radius` and
      `bracket_tol` define the trigger.
    t_max: integration horizon.

  Returns:
    The blow-up report; `detected` is False when no crossing happened before
    `t_max` (or the fluid was exhausted first).
  """
  opts = opts or EvolveOptions()
  traj = evolve(f0, sign, t_max, opts, snapshot_times=())
  if traj.blowup is not None:
    return traj.blowup
  return BlowupReport(
      detected=False,
      floor=opts.min_fprime_floor,
      analysis_radius=opts.analysis_radius,
      state=traj.final_state,
      message=f'none up to t_max={t_max} ({traj.termination})',
  )


def integrate_fixed_rk4(
    f0: series_core.CoefficientSeries,
    sign: FlowSign | int,
    t_end: float,
    dt: float,
    n_grid: int | None = None,
) -> series_core.CoefficientSeries:
  """Integrates with the classical fixed-step RK4 scheme.

  An independent integrator for cross-checking `evolve`. The step is shrunk
  so that an integer number of steps lands on `t_end`.

  Args:
    f0: initial map.
    sign: +1 for injection, -1 for suction.
    t_end: final time.
    dt: requested step size.
    n_grid: grid size; None resolves the velocity of `f0` as `velocity` does.

  Returns:
    The map at `t_end`.
  """
  sign = FlowSign.parse(sign)
  if not dt > 0:
    raise ValueError(f'dt must be positive, got {dt}.')
  f0 = normalize_gauge(f0)
  if n_grid is None:
    n_grid = velocity(f0, sign).n_grid
  field = _VelocityField(sign, n_grid)
  steps = max(1, math.ceil(t_end / dt))
  h = t_end / steps
  y = f0.padded(f0.degree + 1)[1:]
  t = 0.0
  for _ in range(steps):
    k1 = field(t, y)
    k2 = field(t + h / 2, y + h / 2 * k1)
    k3 = field(t + h / 2, y + h / 2 * k2)
    k4 = field(t + h, y + h * k3)
    y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    t += h
  logging.info('RK4: %d steps of %.3e to t=%g.', steps, h, t_end)
  return normalize_gauge(series_core.CoefficientSeries(y))
