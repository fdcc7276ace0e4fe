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
"""Large-time rescaling diagnostics of injection flows.

Under injection the domain grows like a disk of radius `R(t) = sqrt(2t +
M_0(0))`. The rescaled domain `Omega'(t) = Omega(t) / R(t)` has area `pi`
and, for strongly starlike solutions, converges to the unit disk. Its
boundary is described in polar form

    |z| = 1 + rbar(t, theta),        theta = arg f(xi, t),  |xi| = 1,

which is well defined because `theta(s) = arg f(exp(i s))` is strictly
increasing for starlike maps. `rescaled_boundary` resamples `rbar` on a
uniform `theta` grid by Newton inversion of `theta(s)` on the exact
polynomial; derivatives in `theta` are spectral.

`decay_fit` fits the exponent of `sup_c2(t) = max(|rbar|, |rbar'|, |rbar''|)
~ t^-lambda` over a window of snapshots. The decay is expected to approach
`t^-(1 + n0 / 2)`, `n0` being the first non-vanishing moment.
"""

import dataclasses
import math

from absl import logging
from hele_shaw import errors
from hele_shaw import geometry
from hele_shaw import moments
from hele_shaw import pg_dynamics
from hele_shaw import series_core
from hele_shaw import sweeps
import numpy as np

DEFAULT_N_THETA = 256

# Snapshots per decade of a log-spaced schedule.
DEFAULT_PER_DECADE = 24

# Round-off floor of sup_c2; spectral second derivatives amplify eps by ~n^2.
ZERO_DEVIATION = 1e-10

# A snapshot whose sup_c2 is within this multiple of its radial drift is
# integration noise.
NOISE_FACTOR = 4.0

# Smallest curvature denominator accepted.
DEGENERATE_DENOMINATOR = 1e-12

# Increase of the starlike order tolerated before it is reported.
ORDER_INCREASE_TOLERANCE = 1e-6

_NEWTON_TOL = 1e-14
_NEWTON_MAX_ITER = 50


def spectral_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
  """Derivative of periodic real samples on a uniform grid of one period."""
  n = values.size
  k = np.fft.fftfreq(n, d=1.0 / n)
  if order % 2 == 1 and n % 2 == 0:
    k[n // 2] = 0.0
  return np.real(np.fft.ifft((1j * k) ** order * np.fft.fft(values)))


@dataclasses.dataclass(frozen=True, eq=False)
class RescaledBoundary:
  """Polar profile of the rescaled boundary on a uniform angle grid.

  Attributes:
    t: time of the snapshot.
    theta: uniform angles `2 pi j / n` of the image.
    rbar: `|z| - 1` of the boundary point at angle `theta`.
    d1: `d rbar / d theta`.
    d2: `d^2 rbar / d theta^2`.
    sup_c2: `max(|rbar|, |d1|, |d2|)`.
  """

  t: float
  theta: np.ndarray
  rbar: np.ndarray
  d1: np.ndarray
  d2: np.ndarray
  sup_c2: float

  @classmethod
  def from_profile(
      cls, theta: np.ndarray, rbar: np.ndarray, t: float = 0.0
  ) -> 'RescaledBoundary':
    """Builds the boundary from samples of `rbar` on a uniform grid."""
    theta = np.asarray(theta, dtype=np.float64)
    rbar = np.asarray(rbar, dtype=np.float64)
    if theta.shape != rbar.shape or theta.ndim != 1:
      raise ValueError(
          f'theta and rbar must be matching 1-D arrays, got {theta.shape} and'
          f' {rbar.shape}.'
      )
    if np.any(np.diff(theta) <= 0):
      raise ValueError('theta must be strictly increasing.')
    if np.any(rbar < -1):
      raise ValueError('rbar must be at least -1.')
    d1 = spectral_derivative(rbar, 1)
    d2 = spectral_derivative(rbar, 2)
    sup_c2 = max(
        float(np.max(np.abs(rbar))),
        float(np.max(np.abs(d1))),
        float(np.max(np.abs(d2))),
    )
    return cls(t=float(t), theta=theta, rbar=rbar, d1=d1, d2=d2, sup_c2=sup_c2)

  @property
  def radius(self) -> np.ndarray:
    return 1.0 + self.rbar

  def area(self) -> float:
    """Area of the rescaled domain, `(1/2) \\int (1 + rbar)^2 dtheta`."""
    return float(np.pi * np.mean(self.radius**2))


def _arg_rate(f: series_core.CoefficientSeries, xi: np.ndarray) -> np.ndarray:
  """`d arg f(exp(i s)) / ds = Re(xi f'(xi) / f(xi))`."""
  return np.real(xi * f.derivative(1)(xi) / f(xi))


def rescaled_boundary(
    f: series_core.CoefficientSeries,
    t: float,
    M0_0: float,  # pylint: disable=invalid-name
    n_theta: int = DEFAULT_N_THETA,
) -> RescaledBoundary:
  """Returns the polar profile of `f(D) / sqrt(2t + M0_0)`.

  Args:
    f: strongly starlike map at time `t`.
    t: time of the snapshot.
    M0_0: `M_0` of the initial map.
    n_theta: size of the uniform angle grid.

  Returns:
    The rescaled boundary.

  Raises:
    NotStarlikeError: if `f` is not starlike, i.e. `arg f(exp(i s))` is not
      strictly increasing in `s`.
  """
  report = geometry.starlike_order(f)
  if not report.starlike:
    raise errors.NotStarlikeError(
        'Map is not starlike; the polar profile of its image is undefined.',
        witness=report.witness,
    )
  scale = 2 * t + M0_0
  if not scale > 0:
    raise ValueError(f'2t + M0_0 must be positive, got {scale}.')

  # Monotone parametrization on a fine s grid gives the Newton start.
  n_fine = max(4 * n_theta, geometry.dense_size(f.degree))
  s_fine = 2 * np.pi * np.arange(n_fine + 1) / n_fine
  xi_fine = np.exp(1j * s_fine)
  rate = _arg_rate(f, xi_fine)
  if np.any(rate <= 0):
    j = int(np.argmin(rate))
    raise errors.NotStarlikeError(
        f'arg f(exp(i s)) decreases near s={s_fine[j]:.6g}.',
        witness=complex(xi_fine[j]),
    )
  # Increases by exactly 2 pi over one turn of s.
  theta_fine = np.unwrap(np.angle(f(xi_fine)))

  theta = 2 * np.pi * np.arange(n_theta) / n_theta
  target = theta_fine[0] + np.mod(theta - theta_fine[0], 2 * np.pi)
  s = np.interp(target, theta_fine, s_fine)
  for _ in range(_NEWTON_MAX_ITER):
    xi = np.exp(1j * s)
    mismatch = np.angle(f(xi) * np.exp(-1j * theta))
    step = mismatch / _arg_rate(f, xi)
    s = s - step
    if np.max(np.abs(step)) < _NEWTON_TOL:
      break
  else:
    logging.warning(
        'Newton inversion of the boundary angle stalled at %.3e.',
        np.max(np.abs(step)),
    )
  rbar = np.abs(f(np.exp(1j * s))) / math.sqrt(scale) - 1.0
  return RescaledBoundary.from_profile(theta, rbar, t)


@dataclasses.dataclass(frozen=True, eq=False)
class Curvature:
  kappa: np.ndarray
  max_deviation: float


def curvature(rb: RescaledBoundary) -> Curvature:
  """Curvature of the polar curve `|z| = 1 + rbar(theta)`.

      kappa = [(1+r)^2 + 2 r'^2 - r'' (1+r)] / [(1+r)^2 + r'^2]^(3/2)

  Raises:
    DegenerateBoundaryError: if the denominator vanishes somewhere.
  """
  rho = rb.radius
  denominator = (rho**2 + rb.d1**2) ** 1.5
  if np.min(denominator) < DEGENERATE_DENOMINATOR:
    j = int(np.argmin(denominator))
    raise errors.DegenerateBoundaryError(
        f'Curvature undefined at theta={rb.theta[j]:.6g}: the boundary speed'
        ' vanishes.'
    )
  kappa = (rho**2 + 2 * rb.d1**2 - rb.d2 * rho) / denominator
  return Curvature(kappa=kappa, max_deviation=float(np.max(np.abs(kappa - 1))))


def radius_deviation(rb: RescaledBoundary) -> float:
  """`max ||z| - 1|` over the rescaled boundary."""
  return float(np.max(np.abs(rb.rbar)))


def rescaled_curve(rb: RescaledBoundary) -> np.ndarray:
  """Boundary points of the rescaled domain as an `(n, 2)` array of x, y."""
  return np.column_stack(
      [rb.radius * np.cos(rb.theta), rb.radius * np.sin(rb.theta)]
  )


def log_spaced_times(
    t_lo: float, t_hi: float, per_decade: int = DEFAULT_PER_DECADE
) -> np.ndarray:
  """Log-spaced snapshot schedule covering `[t_lo, t_hi]`."""
  if not 0 < t_lo < t_hi:
    raise ValueError(f'Need 0 < t_lo < t_hi, got [{t_lo}, {t_hi}].')
  count = math.ceil(per_decade * math.log10(t_hi / t_lo)) + 1
  return np.geomspace(t_lo, t_hi, max(count, 2))


@dataclasses.dataclass(frozen=True)
class DecayRow:
  """Deviation of one rescaled snapshot from the unit circle.

  `noise_floor` is the part of `sup_c2` explained by integration drift: the
  rescaling divides by `sqrt(2t + M0_0)` while the evolved map has area
  `pi M_0(t)`, so a mismatch shows up as a constant `rbar`.
  """

  t: float
  sup_rbar: float
  sup_d1: float
  sup_d2: float
  sup_c2: float
  max_kappa_dev: float
  area_check: float
  noise_floor: float = ZERO_DEVIATION

  @property
  def at_noise_floor(self) -> bool:
    return self.sup_c2 <= self.noise_floor


@dataclasses.dataclass(frozen=True)
class DecayFit:
  """Fitted decay `sup_c2 ~ t^-exponent` over a window.

  Attributes:
    exponent: `-slope` of `log sup_c2` against `log t` over the snapshots
      above their noise floor; None when the deviation vanishes.
    exact_zero: every snapshot is at its noise floor.
    rows: per-snapshot diagnostics.
  """

  exponent: float | None
  exact_zero: bool
  rows: tuple[DecayRow, ...]

  def tail_is_nonincreasing(
      self, power: float, t_lo: float, t_hi: float, rtol: float = 1e-9
  ) -> bool:
    """Whether `sup_c2(t) t^power` is nonincreasing on `[t_lo, t_hi]`."""
    values = [r.sup_c2 * r.t**power for r in self.rows if t_lo <= r.t <= t_hi]
    return all(b <= a * (1 + rtol) for a, b in zip(values, values[1:]))


def integration_noise_floor(
    f: series_core.CoefficientSeries,
    t: float,
    M0_0: float,  # pylint: disable=invalid-name
) -> float:
  """Level below which `sup_c2` of `f` at time `t` is integration noise."""
  m0 = moments.moments_exact(f, 0, check_univalence=False).m0
  drift = abs(math.sqrt(m0 / (2 * t + M0_0)) - 1.0)
  return ZERO_DEVIATION + NOISE_FACTOR * drift


def _decay_row(
    rb: RescaledBoundary,
    f: series_core.CoefficientSeries,
    M0_0: float,  # pylint: disable=invalid-name
) -> DecayRow:
  return DecayRow(
      t=rb.t,
      sup_rbar=float(np.max(np.abs(rb.rbar))),
      sup_d1=float(np.max(np.abs(rb.d1))),
      sup_d2=float(np.max(np.abs(rb.d2))),
      sup_c2=rb.sup_c2,
      max_kappa_dev=curvature(rb).max_deviation,
      area_check=abs(rb.area() / np.pi - 1.0),
      noise_floor=integration_noise_floor(f, rb.t, M0_0),
  )


def decay_fit(
    traj: pg_dynamics.Trajectory,
    M0_0: float,  # pylint: disable=invalid-name
    window: tuple[float, float],
    n_theta: int = DEFAULT_N_THETA,
) -> DecayFit:
  """Fits the decay exponent of the rescaled boundary deviation.

  Snapshots whose `sup_c2` does not rise above `integration_noise_floor`
  carry no decay information and are left out of the fit. When all of them
  are at the floor, as for an expanding disk, the deviation is reported as
  exact zero.

  Args:
    traj: injection trajectory with snapshots in the window, ideally on a
      `log_spaced_times` schedule.
    M0_0: `M_0` of the initial map.
    window: `(t_lo, t_hi)`.
    n_theta: angle grid of the rescaled boundaries.

  Returns:
    The fitted exponent and the per-snapshot table.

  Raises:
    InsufficientDataError: if fewer than 4 snapshots lie in the window, or
      fewer than 4 of them rise above the noise floor while some do.
    NotStarlikeError: if a snapshot in the window is not starlike.
  """
  t_lo, t_hi = window
  picked = [
      (float(t), state)
      for t, state in zip(traj.times, traj.states)
      if t_lo <= t <= t_hi
  ]
  if len(picked) < 4:
    raise errors.InsufficientDataError(
        f'Need at least 4 snapshots in [{t_lo}, {t_hi}], got {len(picked)}.'
    )
  rows = tuple(
      sweeps.apply_sync(
          lambda item: _decay_row(
              rescaled_boundary(item[1], item[0], M0_0, n_theta),
              item[1],
              M0_0,
          ),
          picked,
      )
  )
  fitted = [r for r in rows if not r.at_noise_floor]
  if not fitted:
    logging.info('Exact zero deviation on [%g, %g].', t_lo, t_hi)
    return DecayFit(exponent=None, exact_zero=True, rows=rows)
  if len(fitted) < 4:
    raise errors.InsufficientDataError(
        f'Only {len(fitted)} snapshots in [{t_lo}, {t_hi}] rise above the'
        ' integration noise floor; need at least 4.'
    )
  if len(fitted) < len(rows):
    logging.warning(
        'Dropped %d snapshots at the noise floor from the decay fit.',
        len(rows) - len(fitted),
    )
  t = np.array([r.t for r in fitted])
  sup = np.array([r.sup_c2 for r in fitted])
  slope = np.polyfit(np.log(t), np.log(sup), 1)[0]
  logging.info('Decay exponent %.4f on [%g, %g].', -slope, t_lo, t_hi)
  return DecayFit(exponent=float(-slope), exact_zero=False, rows=rows)


@dataclasses.dataclass(frozen=True)
class StarlikeHistory:
  """Starlike order along a trajectory.

  Attributes:
    times: snapshot times.
    orders: order per snapshot, NaN where the map is not starlike.
    t0: first snapshot time from which every later snapshot is starlike.
    nonincreasing: the order never grows by more than
      `ORDER_INCREASE_TOLERANCE` after `t0`.
  """

  times: tuple[float, ...]
  orders: tuple[float, ...]
  t0: float | None
  nonincreasing: bool


def starlike_history(traj: pg_dynamics.Trajectory) -> StarlikeHistory:
  """Evaluates `starlike_order` on every snapshot of `traj`."""
  orders = [
      o if (o := geometry.starlike_order(s).order) is not None else math.nan
      for s in traj.states
  ]
  t0 = None
  for i in range(len(orders) - 1, -1, -1):
    if math.isnan(orders[i]):
      break
    t0 = float(traj.times[i])
  nonincreasing = True
  if t0 is not None:
    tail = [o for t, o in zip(traj.times, orders) if t >= t0]
    for prev, cur in zip(tail, tail[1:]):
      if cur > prev + ORDER_INCREASE_TOLERANCE:
        nonincreasing = False
        logging.warning(
            'Starlike order increased from %.6g to %.6g.', prev, cur
        )
        break
  return StarlikeHistory(
      times=tuple(float(t) for t in traj.times),
      orders=tuple(orders),
      t0=t0,
      nonincreasing=nonincreasing,
  )
