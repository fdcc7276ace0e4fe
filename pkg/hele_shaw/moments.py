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
"""Richardson complex moments of the image domain `Omega = f(D)`.

    M_k = (1 / pi) \\int_Omega z^k dx dy,        k = 0, 1, ...

`pi M_0` is the area of `Omega`; under injection or suction `M_0` grows like
`M_0(0) + 2 sigma t` while every `M_k` with `k >= 1` is conserved.

For a polynomial map `M_k` is the residue at the origin of
`f(xi)^k conj(f)(1/xi) f'(xi)`, a finite convolution of coefficient
sequences (`moments_exact`). `moments_quadrature` integrates the pull-back
`f^k |f'|^2` over the unit disk instead and serves as an independent oracle.
"""

import dataclasses

from absl import logging
from hele_shaw import geometry
from hele_shaw import pg_dynamics
from hele_shaw import series_core
import numpy as np

# |M_k| at or below this fraction of max(1, M_0^((k + 2) / 2)) counts as 0.
N0_THRESHOLD = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class MomentVector:
  """Moments `M_0..M_K` of one map.

  Attributes:
    values: complex `M_0..M_K`; `M_0` is real.
    n0: first `k >= 1` with a non-vanishing moment, None if all vanish.
    pushforward: True when the map was not univalent, so the values are
      moments of the pushed-forward area measure rather than of a domain.
    method: 'exact' or 'quadrature'.
  """

  values: np.ndarray
  n0: int | None
  pushforward: bool = False
  method: str = 'exact'

  def __post_init__(self):
    values = np.array(self.values, dtype=np.complex128, copy=True)
    values[0] = values[0].real
    values.setflags(write=False)
    object.__setattr__(self, 'values', values)

  @property
  def K(self) -> int:  # pylint: disable=invalid-name
    return self.values.size - 1

  @property
  def m0(self) -> float:
    return float(self.values[0].real)

  @property
  def area(self) -> float:
    return np.pi * self.m0

  def __getitem__(self, k: int) -> complex:
    return complex(self.values[k])


def first_nonzero_moment(values: np.ndarray) -> int | None:
  """Returns `n0`, the first `k >= 1` whose moment is not negligible."""
  m0 = max(float(np.real(values[0])), 0.0)
  for k in range(1, len(values)):
    threshold = N0_THRESHOLD * max(1.0, m0 ** ((k + 2) / 2))
    if abs(values[k]) > threshold:
      return k
  return None


def _check_order(K: int) -> None:  # pylint: disable=invalid-name
  if K < 0:
    raise ValueError(f'The moment order K must be non-negative, got {K}.')


def _pushforward(f: series_core.CoefficientSeries, check: bool) -> bool:
  if not check or geometry.is_univalent(f, 1.0):
    return False
  logging.log_first_n(
      logging.WARNING,
      'Map is not univalent; reporting pushforward moments.',
      5,
  )
  return True


def moments_exact(
    f: series_core.CoefficientSeries,
    K: int,  # pylint: disable=invalid-name
    check_univalence: bool = True,
) -> MomentVector:
  """Computes `M_0..M_K` by exact coefficient convolution.

  `M_k = sum_m conj(a_m) h_{m-1}` with `h = f^k f'`.

  Args:
    f: the map.
    K: highest moment order.
    check_univalence: flag non-univalent maps as pushforward moments.

  Returns:
    The moment vector.
  """
  _check_order(K)
  a = f.padded(f.degree + 1)[1:]
  conj_a = np.conj(a)
  fprime = f.derivative(1)
  values = np.zeros(K + 1, dtype=np.complex128)
  values[0] = np.sum(np.arange(1, a.size + 1) * np.abs(a) ** 2)
  h = fprime
  for k in range(1, K + 1):
    h = h * f
    values[k] = np.sum(conj_a * h.padded(a.size))
  return MomentVector(
      values=values,
      n0=first_nonzero_moment(values),
      pushforward=_pushforward(f, check_univalence),
      method='exact',
  )


def moments_quadrature(
    f: series_core.CoefficientSeries,
    K: int,  # pylint: disable=invalid-name
    n_radial: int = 200,
    n_angular: int = 512,
    seed: int | None = None,
    check_univalence: bool = True,
) -> MomentVector:
  """Computes `M_k = (1/pi) \\int_D f^k |f'|^2 dA` by product quadrature.

  Gauss-Legendre in the radius times the trapezoid rule in the angle.

  Args:
    f: the map.
    K: highest moment order.
    n_radial: number of Gauss-Legendre nodes on `[0, 1]`.
    n_angular: number of equispaced angles.
    seed: when given, the angular grid is shifted by a random offset drawn
      from `np.random.default_rng(seed)`; the trapezoid rule is exact for the
      polynomial integrand either way.
    check_univalence: flag non-univalent maps as pushforward moments.

  Returns:
    The moment vector.
  """
  _check_order(K)
  nodes, weights = np.polynomial.legendre.leggauss(n_radial)
  rho = 0.5 * (nodes + 1.0)
  w_rho = 0.5 * weights * rho
  shift = 0.0
  if seed is not None:
    shift = np.random.default_rng(seed).uniform(0.0, 2 * np.pi / n_angular)
  theta = shift + 2 * np.pi * np.arange(n_angular) / n_angular
  xi = rho[:, np.newaxis] * np.exp(1j * theta)[np.newaxis, :]
  z = f(xi)
  jacobian = np.abs(f.derivative(1)(xi)) ** 2
  weight = w_rho[:, np.newaxis] * jacobian * (2 * np.pi / n_angular) / np.pi
  values = np.zeros(K + 1, dtype=np.complex128)
  power = np.ones_like(z)
  for k in range(K + 1):
    values[k] = np.sum(power * weight)
    power = power * z
  return MomentVector(
      values=values,
      n0=first_nonzero_moment(values),
      pushforward=_pushforward(f, check_univalence),
      method='quadrature',
  )


def area(f: series_core.CoefficientSeries) -> float:
  """Area of `f(D)`, `pi M_0`."""
  return moments_exact(f, 0, check_univalence=False).area


@dataclasses.dataclass(frozen=True, eq=False)
class ConservationReport:
  """Moment drift along a trajectory.

  Attributes:
    times: snapshot times.
    moments: complex `M_0..M_K` per snapshot, shape `(T, K + 1)`.
    moment_deltas: `|M_k(t) - M_k(0)|` for `k = 1..K`, shape `(T, K)`.
    area_deltas: `|M_0(t) - M_0(0) - 2 sigma t|`, shape `(T,)`.
  """

  times: np.ndarray
  moments: np.ndarray
  moment_deltas: np.ndarray
  area_deltas: np.ndarray

  @property
  def max_moment_deltas(self) -> np.ndarray:
    """Max over time of each `|M_k(t) - M_k(0)|`, `k = 1..K`."""
    if self.moment_deltas.shape[1] == 0:
      return np.zeros(0)
    return np.max(self.moment_deltas, axis=0)

  @property
  def max_area_delta(self) -> float:
    return float(np.max(self.area_deltas))


def conservation_report(
    traj: pg_dynamics.Trajectory,
    K: int = 5,  # pylint: disable=invalid-name
) -> ConservationReport:
  """Measures the drift of the conserved moments along `traj`."""
  _check_order(K)
  if not len(traj):
    raise ValueError('Cannot report on an empty trajectory.')
  moments = np.array([
      moments_exact(state, K, check_univalence=False).values
      for state in traj.states
  ])
  times = np.asarray(traj.times)
  area_deltas = np.abs(
      moments[:, 0].real - moments[0, 0].real - 2 * int(traj.sign) * times
  )
  moment_deltas = np.abs(moments[:, 1:] - moments[0, 1:])
  return ConservationReport(
      times=times,
      moments=moments,
      moment_deltas=moment_deltas,
      area_deltas=area_deltas,
  )


def moment_table(
    traj: pg_dynamics.Trajectory,
    K: int = 5,  # pylint: disable=invalid-name
) -> list[dict[str, float]]:
  """Per-snapshot rows `t, M0, Mk_re, Mk_im, dM0, dMk` for reporting."""
  report = conservation_report(traj, K)
  rows = []
  for i, t in enumerate(report.times):
    row = {'t': float(t), 'M0': float(report.moments[i, 0].real)}
    for k in range(1, K + 1):
      row[f'M{k}_re'] = float(report.moments[i, k].real)
      row[f'M{k}_im'] = float(report.moments[i, k].imag)
    row['dM0'] = float(report.area_deltas[i])
    for k in range(1, K + 1):
      row[f'dM{k}'] = float(report.moment_deltas[i, k - 1])
    rows.append(row)
  return rows
