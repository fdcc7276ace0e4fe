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
"""Poisson operator: analytic completion of real boundary data.

For real data `g` on the unit circle, `P[g]` is the analytic function in the
disk whose real part on the circle is `g` and whose value at the origin is
real:

    P[g](xi) = g_0 + 2 * sum_{k>=1} g_k xi^k

where `g_k` are the Fourier coefficients of `g`. It drives the velocity of the
Polubarinova-Galin flow (see `pg_dynamics`).

Two independent realisations are provided:

 *  `poisson_fourier`: FFT of the sampled data.
 *  `poisson_contour`: for `g = 1 / |f'|^2`, the Cauchy integral

        P[g](xi) = 1/(2 pi i) \\oint_{|z|=r} [f'(z) conj(f')(1/z)]^{-1}
                   (z + xi) / (z - xi) dz / z

    evaluated by the trapezoid rule on a circle `|z| = r > 1` inside the zero
    free region of `f'`. The two must agree coefficientwise; the contour
    result does not depend on `r`.
"""

import dataclasses

from hele_shaw import errors
from hele_shaw import geometry
from hele_shaw import series_core
import numpy as np

# Largest imaginary part tolerated in boundary data, relative to max(1, |g|).
REAL_DATA_TOLERANCE = 1e-10

# Contour radius used when f' has no zero outside the unit disk.
_FREE_CONTOUR_RADIUS = 2.0


@dataclasses.dataclass(frozen=True, eq=False)
class AnalyticCompletion:
  """Power series `c_0 + c_1 xi + ... + c_K xi^K` of `P[g]` in the disk.

  Attributes:
    constant: real value `P[g](0)`, the mean of `g`.
    coeffs: complex `c_1..c_K`.
    tail: largest `|c_k|` over the upper half of the retained modes. A small
      tail means the truncation at `K` is resolved.
  """

  constant: float
  coeffs: np.ndarray
  tail: float = 0.0

  def __post_init__(self):
    coeffs = np.array(self.coeffs, dtype=np.complex128, copy=True)
    coeffs.setflags(write=False)
    object.__setattr__(self, 'coeffs', coeffs)
    object.__setattr__(self, 'constant', float(self.constant))

  @property
  def truncation(self) -> int:
    return self.coeffs.size

  def as_series(self) -> series_core.PowerSeries:
    return series_core.PowerSeries(
        np.concatenate([[self.constant], self.coeffs])
    )

  def __call__(self, xi: complex | np.ndarray) -> complex | np.ndarray:
    return self.as_series()(xi)


def _tail(coeffs: np.ndarray) -> float:
  if coeffs.size == 0:
    return 0.0
  return float(np.max(np.abs(coeffs[coeffs.size // 2 :])))


def poisson_fourier(g: series_core.BoundaryGrid) -> AnalyticCompletion:
  """Returns `P[g]` for real samples on the unit circle.

  Args:
    g: real boundary data on `|xi| = 1`; stored as complex samples whose
      imaginary parts must vanish to within `REAL_DATA_TOLERANCE`.

  Returns:
    The completion truncated at `n_grid / 2 - 1` modes.

  Raises:
    NonRealBoundaryDataError: if the samples are not real.
    ValueError: if the grid is not on the unit circle.
  """
  if abs(g.radius - 1.0) > 1e-14:
    raise ValueError(f'Boundary data must live on |xi| = 1, got r={g.radius}.')
  samples = g.samples
  scale = max(1.0, float(np.max(np.abs(samples.real))))
  residue = float(np.max(np.abs(samples.imag)))
  if residue > REAL_DATA_TOLERANCE * scale:
    raise errors.NonRealBoundaryDataError(
        f'Boundary data has imaginary residue {residue:.3e}; the Poisson'
        ' operator expects real data such as 1/|f\'|^2.'
    )
  n = g.n_grid
  ghat = np.fft.fft(samples.real) / n
  coeffs = 2.0 * ghat[1 : n // 2]
  return AnalyticCompletion(
      constant=float(ghat[0].real), coeffs=coeffs, tail=_tail(coeffs)
  )


def inverse_modulus_squared(
    fprime: series_core.PowerSeries, n_grid: int
) -> series_core.BoundaryGrid:
  """Samples `1 / |f'|^2` on the unit circle, pointwise on the grid.

  Raises:
    SingularIntegrandError: if `f'` vanishes at a grid point.
  """
  values = fprime(series_core.circle_points(1.0, n_grid))
  modulus_sq = values.real**2 + values.imag**2
  if not np.all(modulus_sq > 0):
    raise errors.SingularIntegrandError("f' vanishes on the unit circle.")
  return series_core.BoundaryGrid(radius=1.0, samples=1.0 / modulus_sq)


def default_contour_radius(f: series_core.PowerSeries) -> float:
  """Midpoint between 1 and the nearest zero of `f'` outside the unit disk."""
  rho = geometry.nearest_critical_radius(f, outside=1.0)
  if not np.isfinite(rho):
    return _FREE_CONTOUR_RADIUS
  return 0.5 * (1.0 + rho)


def poisson_contour(
    f: series_core.PowerSeries,
    r: float | None = None,
    xi_grid: series_core.BoundaryGrid | None = None,
) -> AnalyticCompletion:
  """Returns `P[1 / |f'|^2]` from the contour integral on `|z| = r`.

  Args:
    f: the map; `f'` must be zero free on the closed disk of radius `r`.
    r: contour radius, `r > 1`. Defaults to `default_contour_radius(f)`.
    xi_grid: unit-circle grid fixing the truncation `n_grid / 2 - 1`, to match
      a `poisson_fourier` result. Defaults to `default_grid_size(deg f)`.

  Returns:
    The completion, truncated like `poisson_fourier` on the same grid.

  Raises:
    SingularIntegrandError: if `f'` has a zero of modulus `<= r`.
  """
  if r is None:
    r = default_contour_radius(f)
  if r <= 1:
    raise ValueError(f'Contour radius must exceed 1, got {r}.')
  fprime = f.derivative(1)
  for root in geometry.derivative_roots(f):
    if abs(root) <= r:
      raise errors.SingularIntegrandError(
          f"f' has a zero at {root:.6g} inside the contour |z| = {r}.",
          root=complex(root),
      )
  if xi_grid is not None:
    n = xi_grid.n_grid
  else:
    n = series_core.default_grid_size(f.degree)
  z = series_core.circle_points(r, n)
  # conj(f')(1/z) = conj(f'(1/conj(z))) and 1/conj(z) = z / r^2 on |z| = r.
  integrand = 1.0 / (fprime(z) * np.conj(fprime(z / r**2)))
  laurent = np.fft.fft(integrand) / n
  k = np.arange(1, n // 2)
  coeffs = 2.0 * laurent[1 : n // 2] / float(r) ** k
  return AnalyticCompletion(
      constant=float(laurent[0].real), coeffs=coeffs, tail=_tail(coeffs)
  )
