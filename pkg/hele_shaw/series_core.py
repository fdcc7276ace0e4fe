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
"""Finite complex power series, their norms and their samples on circles.

Two value types are the numeric substrate of the simulator:

 *  `PowerSeries`: `sum_i c_i xi^i` for `i = 0..K`, index is the power of xi.
    Used for derivatives, Poisson completions and other series that may carry
    a constant term.
 *  `CoefficientSeries`: a conformal map `f(xi) = sum_{i>=1} a_i xi^i` with
    `f(0) = 0`. This is the state of the evolution engine.

Both are immutable: the coefficient array is copied and write-protected on
construction, so values can be shared between threads.

`BoundaryGrid` holds the values of a function at the `N` equispaced points
`r * exp(2 pi i j / N)` of the circle `|xi| = r`. Moving between coefficients
and grids is done with the FFT:

```python
from hele_shaw import series_core

f = series_core.CoefficientSeries([1.0, 0.4])  # xi + 2/5 xi^2
grid = series_core.sample(f, r=1.0, n_grid=256)
g = series_core.coefficients_from_grid(grid, degree=f.degree)
```
"""

from collections.abc import Iterable, Sequence
import dataclasses
from typing import Union

import dataclasses_json
from hele_shaw import errors
import numpy as np
from numpy.polynomial import polynomial as np_poly

# Smallest grid used to sample a series; doubled while 4 * degree exceeds it.
DEFAULT_GRID_SIZE = 256

# Oversampling factor between the grid size and the sampled degree.
ANTI_ALIASING_FACTOR = 4

Scalar = Union[int, float, complex]


def _frozen(values: Iterable[Scalar] | np.ndarray) -> np.ndarray:
  arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
  arr.setflags(write=False)
  return arr


def _trim(coeffs: np.ndarray, min_length: int) -> np.ndarray:
  """Drops trailing exact zeros, keeping at least `min_length` entries."""
  nonzero = np.flatnonzero(coeffs)
  length = max(min_length, (nonzero[-1] + 1) if nonzero.size else 0)
  if length > coeffs.size:
    return np.concatenate([coeffs, np.zeros(length - coeffs.size, complex)])
  return coeffs[:length]


class PowerSeries:
  """A finite complex power series `sum_{i=0..K} c_i xi^i`."""

  __slots__ = ('_coeffs',)

  def __init__(self, coeffs: Iterable[Scalar] | np.ndarray):
    """Initializes the series.

    Args:
      coeffs: coefficients `c_0, c_1, ...`; entry `i` multiplies `xi**i`.
        Trailing zeros are dropped.
    """
    self._coeffs = _frozen(_trim(_frozen(coeffs), min_length=1))

  @classmethod
  def _from_powers(cls, coeffs: np.ndarray) -> 'PowerSeries':
    return PowerSeries(coeffs)

  @property
  def coeffs(self) -> np.ndarray:
    """Read-only coefficient array, indexed by power."""
    return self._coeffs

  @property
  def constant(self) -> complex:
    return complex(self._coeffs[0])

  @property
  def degree(self) -> int:
    """Largest power with a nonzero coefficient (0 for constants)."""
    return self._coeffs.size - 1

  def __call__(self, xi: Scalar | np.ndarray) -> complex | np.ndarray:
    """Evaluates the series by Horner's scheme."""
    value = np_poly.polyval(xi, self._coeffs)
    if np.ndim(value) == 0:
      return complex(value)
    return value

  def padded(self, length: int) -> np.ndarray:
    """Returns the coefficients zero-padded (or cut) to `length` entries."""
    out = np.zeros(length, dtype=np.complex128)
    n = min(length, self._coeffs.size)
    out[:n] = self._coeffs[:n]
    return out

  def derivative(self, j: int = 1) -> 'PowerSeries':
    """Returns the `j`-fold derivative; `j=0` is the identity."""
    if j < 0:
      raise ValueError(f'Derivative order must be non-negative, got {j}.')
    c = np.asarray(self._coeffs)
    for _ in range(j):
      if c.size <= 1:
        return PowerSeries([0.0])
      c = c[1:] * np.arange(1, c.size)
    return PowerSeries(c)

  def conjugate(self) -> 'PowerSeries':
    """Series with conjugated coefficients, i.e. `conj(f(conj(xi)))`."""
    return self._from_powers(np.conj(self._coeffs))

  def truncate(self, degree: int) -> 'PowerSeries':
    """Drops every power above `degree`."""
    return self._from_powers(self._coeffs[: degree + 1])

  def dilate(self, s: float) -> 'PowerSeries':
    """Returns the coefficients of `xi -> f(xi / s)`."""
    powers = np.arange(self._coeffs.size)
    return self._from_powers(self._coeffs / float(s) ** powers)

  def rotate(self, phi: float) -> 'PowerSeries':
    """Returns the coefficients of `xi -> f(exp(i phi) xi)`."""
    powers = np.arange(self._coeffs.size)
    return self._from_powers(self._coeffs * np.exp(1j * phi * powers))

  def _binary(self, other: 'PowerSeries', op) -> 'PowerSeries':
    n = max(self._coeffs.size, other.coeffs.size)
    coeffs = op(self.padded(n), other.padded(n))
    if isinstance(self, CoefficientSeries) and isinstance(
        other, CoefficientSeries
    ):
      return CoefficientSeries._from_powers(coeffs)
    return PowerSeries(coeffs)

  def __add__(self, other: 'PowerSeries') -> 'PowerSeries':
    if not isinstance(other, PowerSeries):
      return NotImplemented
    return self._binary(other, np.add)

  def __sub__(self, other: 'PowerSeries') -> 'PowerSeries':
    if not isinstance(other, PowerSeries):
      return NotImplemented
    return self._binary(other, np.subtract)

  def __neg__(self) -> 'PowerSeries':
    return self._from_powers(-self._coeffs)

  def __mul__(self, other: Union['PowerSeries', Scalar]) -> 'PowerSeries':
    if isinstance(other, PowerSeries):
      coeffs = np.convolve(self._coeffs, other.coeffs)
      if isinstance(self, CoefficientSeries) and isinstance(
          other, CoefficientSeries
      ):
        return CoefficientSeries._from_powers(coeffs)
      return PowerSeries(coeffs)
    if isinstance(other, (int, float, complex, np.number)):
      return self._from_powers(self._coeffs * other)
    return NotImplemented

  __rmul__ = __mul__

  def __eq__(self, other: object) -> bool:
    if not isinstance(other, PowerSeries):
      return NotImplemented
    return np.array_equal(self._coeffs, other.coeffs)

  def __hash__(self) -> int:
    return hash(self._coeffs.tobytes())

  def __repr__(self) -> str:
    return f'{type(self).__name__}({self._coeffs.tolist()!r})'


@dataclasses_json.dataclass_json
@dataclasses.dataclass(frozen=True)
class SeriesRecord:
  """JSON form of a map: `[re, im]` pairs for `a_1..a_N`."""

  coefficients: list[list[float]]


class CoefficientSeries(PowerSeries):
  """A map `f(xi) = a_1 xi + ... + a_N xi^N` with `f(0) = 0`.

  `degree` is the largest index with a nonzero coefficient, or 1 when every
  coefficient above the first vanishes.
  """

  __slots__ = ()

  def __init__(self, coefficients: Sequence[Scalar] | np.ndarray):
    """Initializes the map.

    Args:
      coefficients: `a_1, ..., a_N`; entry `i` multiplies `xi**(i + 1)`.
    """
    a = _frozen(coefficients)
    if a.size == 0:
      raise ValueError('A map needs at least the linear coefficient a_1.')
    super().__init__(np.concatenate([[0.0], a]))
    self._coeffs = _frozen(_trim(np.asarray(self._coeffs), min_length=2))

  @classmethod
  def _from_powers(cls, coeffs: np.ndarray) -> 'CoefficientSeries':
    coeffs = np.asarray(coeffs)
    if coeffs.size and coeffs[0] != 0:
      raise ValueError(
          f'A map must satisfy f(0) = 0, got constant term {coeffs[0]}.'
      )
    return cls(coeffs[1:] if coeffs.size > 1 else [0.0])

  @classmethod
  def from_power_series(
      cls, series: PowerSeries, atol: float = 0.0
  ) -> 'CoefficientSeries':
    """Converts a series whose constant term is (numerically) zero."""
    if abs(series.constant) > atol:
      raise ValueError(
          f'A map must satisfy f(0) = 0, got constant term {series.constant}.'
      )
    c = np.asarray(series.coeffs)
    return cls(c[1:] if c.size > 1 else [0.0])

  @classmethod
  def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> 'CoefficientSeries':
    """Builds a map from `[re, im]` pairs of `a_1..a_N`."""
    values = []
    for pair in pairs:
      if len(pair) != 2:
        raise ValueError(f'Expected an [re, im] pair, got {pair!r}.')
      values.append(complex(float(pair[0]), float(pair[1])))
    return cls(values)

  @property
  def a(self) -> np.ndarray:
    """Read-only view of `a_1..a_N`."""
    return self._coeffs[1:]

  @property
  def degree(self) -> int:
    return max(1, self._coeffs.size - 1)

  @property
  def linear_coefficient(self) -> complex:
    return complex(self._coeffs[1])

  def to_pairs(self) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in self.a]

  def to_record(self) -> SeriesRecord:
    return SeriesRecord(coefficients=self.to_pairs())

  def to_json(self) -> str:
    return self.to_record().to_json()

  @classmethod
  def from_json(cls, text: str) -> 'CoefficientSeries':
    return cls.from_pairs(SeriesRecord.from_json(text).coefficients)


@dataclasses.dataclass(frozen=True, eq=False)
class BoundaryGrid:
  """Values of a function at `radius * exp(2 pi i j / n_grid)`.

  Attributes:
    radius: radius of the sampled circle.
    samples: complex values, `samples[j]` at angle `2 pi j / n_grid`.
  """

  radius: float
  samples: np.ndarray

  def __post_init__(self):
    samples = _frozen(self.samples)
    n = samples.size
    if n < 2 or n & (n - 1):
      raise ValueError(f'Grid size must be a power of two, got {n}.')
    if not self.radius > 0:
      raise ValueError(f'Grid radius must be positive, got {self.radius}.')
    object.__setattr__(self, 'samples', samples)
    object.__setattr__(self, 'radius', float(self.radius))

  @property
  def n_grid(self) -> int:
    return self.samples.size

  @property
  def angles(self) -> np.ndarray:
    return 2 * np.pi * np.arange(self.n_grid) / self.n_grid

  @property
  def points(self) -> np.ndarray:
    return self.radius * np.exp(1j * self.angles)


def circle_points(r: float, n_grid: int) -> np.ndarray:
  """The `n_grid` sample points of the circle `|xi| = r`."""
  return r * np.exp(2j * np.pi * np.arange(n_grid) / n_grid)


def default_grid_size(degree: int, minimum: int = DEFAULT_GRID_SIZE) -> int:
  """Smallest power of two >= `minimum` resolving a series of `degree`."""
  n = minimum
  while n < ANTI_ALIASING_FACTOR * degree:
    n *= 2
  return n


def evaluate(f: PowerSeries, xi: Scalar | np.ndarray) -> complex | np.ndarray:
  """Returns `f(xi)`."""
  return f(xi)


def derivative(f: PowerSeries, j: int) -> PowerSeries:
  """Returns `f^(j)`; orders above the degree give the zero series."""
  return f.derivative(j)


def _sum_descending(terms: np.ndarray) -> float:
  return float(np.sum(np.sort(terms)[::-1]))


def norm_mr(g: PowerSeries, r: float = 1.0) -> float:
  """Returns `|g|_{M(r)} = sum_i |c_i| r^i`, constant term included.

  Args:
    g: the series.
    r: radius, at least 1. `|g|_M` is `norm_mr(g, 1)`.
  """
  if r < 1:
    raise ValueError(f'The M(r) norm needs r >= 1, got {r}.')
  c = g.coeffs
  return _sum_descending(np.abs(c) * float(r) ** np.arange(c.size))


def norm_rho_n(v: PowerSeries, rho: float, n: int) -> float:
  """Returns `||v||_{rho,n} = sum_{j>=1} |v_j| rho^j j^(1/2 + n)`."""
  if rho <= 1:
    raise ValueError(f'The (rho, n) norm needs rho > 1, got {rho}.')
  if n < 0:
    raise ValueError(f'The (rho, n) norm needs n >= 0, got {n}.')
  c = v.coeffs[1:]
  j = np.arange(1, c.size + 1, dtype=np.float64)
  return _sum_descending(np.abs(c) * float(rho) ** j * j ** (0.5 + n))


def sample(
    f: PowerSeries, r: float = 1.0, n_grid: int | None = None
) -> BoundaryGrid:
  """Samples `f` on the circle `|xi| = r`.

  Args:
    f: the series to sample.
    r: circle radius.
    n_grid: number of points, a power of two with `n_grid >= 4 * degree`.
      Defaults to `default_grid_size(f.degree)`.

  Returns:
    The grid of values `f(r exp(2 pi i j / n_grid))`.

  Raises:
    AliasingError: if `n_grid` is too small for the degree of `f`.
  """
  if n_grid is None:
    n_grid = default_grid_size(f.degree)
  if n_grid < ANTI_ALIASING_FACTOR * f.degree:
    raise errors.AliasingError(
        f'Grid of {n_grid} points cannot resolve a series of degree'
        f' {f.degree}; need at least {ANTI_ALIASING_FACTOR * f.degree}.'
    )
  return BoundaryGrid(radius=r, samples=f(circle_points(r, n_grid)))


def coefficients_from_grid(
    grid: BoundaryGrid, degree: int | None = None
) -> PowerSeries:
  """Recovers power-series coefficients from samples on a circle.

  Args:
    grid: samples of an analytic function on `|xi| = grid.radius`.
    degree: highest power to keep. Defaults to `n_grid / 2 - 1`, the largest
      power that is not mixed with negative frequencies.

  Returns:
    The series `sum_k c_k xi^k` interpolating the samples.
  """
  n = grid.n_grid
  if degree is None:
    degree = n // 2 - 1
  if degree >= n // 2:
    raise errors.AliasingError(
        f'Cannot recover degree {degree} from {n} samples.'
    )
  c = np.fft.fft(grid.samples)[: degree + 1] / n
  return PowerSeries(c / grid.radius ** np.arange(degree + 1))
