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
"""Numerical predicates on polynomial maps of the unit disk.

 *  `min_abs_fprime`: exact minimum of `|f'|` on a closed disk (blow-up
    monitor of the evolution engine).
 *  `is_univalent`: injectivity of `f` on a closed disk, with a witness when
    it fails.
 *  `starlike_order`: the order `alpha` of strong starlikeness,
    `|arg(xi f'(xi) / f(xi))| < alpha pi / 2`, and the coefficient sufficient
    condition `sum_{n>=2} n |a_n| < |a_1|`.

Polynomial zeros are eigenvalues of the companion matrix
(`numpy.polynomial.polynomial.polyroots`). Zeros within `ROOT_BAND` of a
circle count as lying on it.
"""

import dataclasses
import math

from hele_shaw import series_core
import numpy as np
from numpy.polynomial import polynomial as np_poly
from scipy import optimize
from scipy import spatial

ROOT_BAND = 1e-9

# Boundary samples closer than this fraction of the curve diameter collide.
COLLISION_TOLERANCE = 1e-8
# Samples this many grid steps apart (or fewer) are neighbours, not collisions.
_COLLISION_MIN_SEPARATION = 4

# Fractions of r at which interior probe points are placed.
_PROBE_RADII = (0.0, 0.3, 0.6, 0.8, 0.9, 0.95)
_PROBE_ANGLES = 64

_REFINE_XATOL = 1e-12


def polynomial_roots(p: series_core.PowerSeries) -> np.ndarray:
  """All zeros of the polynomial `p` (empty for constants)."""
  if p.degree == 0:
    return np.zeros(0, dtype=np.complex128)
  return np.asarray(np_poly.polyroots(p.coeffs), dtype=np.complex128)


def derivative_roots(f: series_core.PowerSeries) -> np.ndarray:
  """Zeros of `f'`, i.e. the critical points of the map."""
  return polynomial_roots(f.derivative(1))


def nearest_critical_radius(
    f: series_core.PowerSeries, outside: float = 0.0
) -> float:
  """Smallest modulus above `outside` of a zero of `f'` (inf if none)."""
  moduli = np.abs(derivative_roots(f))
  moduli = moduli[moduli > outside]
  return float(np.min(moduli)) if moduli.size else math.inf


def dense_size(degree: int) -> int:
  """Number of boundary samples used by the predicates."""
  return series_core.default_grid_size(16 * degree, minimum=1024)


def _refine_extremum(fn, thetas: np.ndarray, values: np.ndarray) -> tuple[
    float, float
]:
  """Refines the minimum of a sampled periodic function by Brent's method."""
  j = int(np.argmin(values))
  h = thetas[1] - thetas[0]
  result = optimize.minimize_scalar(
      fn,
      bounds=(thetas[j] - h, thetas[j] + h),
      method='bounded',
      options={'xatol': _REFINE_XATOL},
  )
  if result.fun < values[j]:
    return float(result.fun), float(result.x)
  return float(values[j]), float(thetas[j])


def boundary_minimum(
    p: series_core.PowerSeries, r: float, n: int | None = None
) -> tuple[float, float]:
  """Minimum of `|p|` on `|xi| = r` and the angle where it is attained."""
  n = n or dense_size(max(p.degree, 1))
  thetas = 2 * np.pi * np.arange(n) / n
  values = np.abs(p(r * np.exp(1j * thetas)))
  return _refine_extremum(
      lambda th: abs(p(r * np.exp(1j * th))), thetas, values
  )


def min_abs_fprime(f: series_core.PowerSeries, r: float = 1.0) -> float:
  """Returns `min |f'|` over the closed disk of radius `r`.

  By the minimum-modulus principle the minimum is 0 if `f'` vanishes in the
  disk and is attained on the boundary circle otherwise.
  """
  fprime = f.derivative(1)
  roots = polynomial_roots(fprime)
  if roots.size and np.min(np.abs(roots)) < r - ROOT_BAND:
    return 0.0
  value, _ = boundary_minimum(fprime, r)
  return value


@dataclasses.dataclass(frozen=True)
class UnivalenceReport:
  """Outcome of `is_univalent`.

  Attributes:
    univalent: the verdict.
    reason: empty when univalent, otherwise which test failed.
    witness: a zero of `f'` in the disk, or a pair of distinct points whose
      images coincide to tolerance.
  """

  univalent: bool
  reason: str = ''
  witness: complex | tuple[complex, complex] | None = None

  def __bool__(self) -> bool:
    return self.univalent


def _winding_numbers(curve: np.ndarray, points: np.ndarray) -> np.ndarray:
  """Winding numbers of the closed polygon `curve` around each point."""
  d = curve[np.newaxis, :] - points[:, np.newaxis]
  increments = np.angle(np.roll(d, -1, axis=1) / d)
  return np.rint(increments.sum(axis=1) / (2 * np.pi)).astype(int)


def _other_preimage(
    f: series_core.PowerSeries, xi: complex, r: float
) -> complex | None:
  """A point of the disk other than `xi` with the same image under `f`."""
  shifted = np.array(f.coeffs)
  shifted[0] -= f(xi)
  roots = polynomial_roots(series_core.PowerSeries(shifted))
  roots = roots[np.abs(roots) <= r + ROOT_BAND]
  if roots.size == 0:
    return None
  candidate = roots[np.argmax(np.abs(roots - xi))]
  if abs(candidate - xi) <= ROOT_BAND:
    return None
  return complex(candidate)


def is_univalent(
    f: series_core.PowerSeries, r: float = 1.0
) -> UnivalenceReport:
  """Checks that `f` is injective on the closed disk of radius `r`.

  The map is univalent iff `f'` is zero free on the disk and `f(|xi| = r)` is
  a simple curve. Simplicity is tested by (a) looking for colliding boundary
  samples and (b) requiring winding number 1 of the boundary image around the
  images of a lattice of interior probe points.

  Args:
    f: the map.
    r: disk radius.

  Returns:
    The verdict, with a witness when it is negative.
  """
  for root in derivative_roots(f):
    if abs(root) <= r + ROOT_BAND:
      return UnivalenceReport(False, 'critical point in disk', complex(root))

  n = dense_size(f.degree)
  params = r * np.exp(2j * np.pi * np.arange(n) / n)
  curve = f(params)
  diameter = max(np.ptp(curve.real), np.ptp(curve.imag))
  tree = spatial.cKDTree(np.column_stack([curve.real, curve.imag]))
  pairs = tree.query_pairs(
      COLLISION_TOLERANCE * diameter, output_type='ndarray'
  )
  if pairs.size:
    gap = np.abs(pairs[:, 0] - pairs[:, 1])
    gap = np.minimum(gap, n - gap)
    colliding = pairs[gap > _COLLISION_MIN_SEPARATION]
    if colliding.size:
      i, j = colliding[0]
      return UnivalenceReport(
          False,
          'boundary self-intersection',
          (complex(params[i]), complex(params[j])),
      )

  angles = 2 * np.pi * np.arange(_PROBE_ANGLES) / _PROBE_ANGLES
  probes = np.concatenate(
      [rho * r * np.exp(1j * angles) for rho in _PROBE_RADII if rho > 0]
      + [np.zeros(1, dtype=np.complex128)]
  )
  winding = _winding_numbers(curve, f(probes))
  bad = np.flatnonzero(winding != 1)
  if bad.size:
    xi = complex(probes[bad[0]])
    other = _other_preimage(f, xi, r)
    return UnivalenceReport(
        False,
        f'boundary winds {winding[bad[0]]} times around an interior image',
        (xi, other) if other is not None else xi,
    )
  return UnivalenceReport(True)


@dataclasses.dataclass(frozen=True)
class StarlikeReport:
  """Outcome of `starlike_order`.

  Attributes:
    order: `alpha = max_arg / (pi / 2)` when below 1, None if not starlike.
    max_arg: sup over the unit circle of `|arg(xi f' / f)|`; None when `f`
      vanishes on the closed punctured disk.
    coefficient_condition: `sum_{n>=2} n |a_n| < |a_1|`.
    witness: a zero of `f / xi` in the closed disk, or the boundary point
      where `|arg(xi f' / f)|` reaches `pi / 2`.
  """

  order: float | None
  max_arg: float | None
  coefficient_condition: bool
  witness: complex | None = None

  @property
  def starlike(self) -> bool:
    return self.order is not None


def coefficient_condition(f: series_core.CoefficientSeries) -> bool:
  """Sufficient condition for starlikeness: `sum n |a_n| < |a_1|`."""
  a = f.a
  n = np.arange(2, a.size + 1)
  return bool(np.sum(n * np.abs(a[1:])) < abs(a[0]))


def starlike_order(f: series_core.CoefficientSeries) -> StarlikeReport:
  """Computes the strongly-starlike order of `f` on the unit disk.

  The bound on `|arg(xi f'/f)|` over the disk is attained in the boundary
  limit, so the supremum is taken over a dense boundary grid and refined
  locally.
  """
  condition = coefficient_condition(f)
  quotient = series_core.PowerSeries(f.a)  # f(xi) / xi
  for root in polynomial_roots(quotient):
    if abs(root) <= 1 + ROOT_BAND:
      return StarlikeReport(None, None, condition, complex(root))

  fprime = f.derivative(1)

  def neg_abs_arg(theta):
    xi = np.exp(1j * theta)
    return -np.abs(np.angle(fprime(xi) / quotient(xi)))

  n = dense_size(f.degree)
  thetas = 2 * np.pi * np.arange(n) / n
  neg_max, theta = _refine_extremum(neg_abs_arg, thetas, neg_abs_arg(thetas))
  max_arg = -neg_max
  if max_arg >= np.pi / 2:
    return StarlikeReport(None, max_arg, condition, complex(np.exp(1j * theta)))
  return StarlikeReport(max_arg / (np.pi / 2), max_arg, condition)
