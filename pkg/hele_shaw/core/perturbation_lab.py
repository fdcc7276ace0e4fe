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
"""Perturbation experiments on polynomial solutions.

 *  `compare_trajectories`: co-evolve a polynomial map and a perturbation of
    it and measure `sup_t |f_base^(n) - f^(n)|_M(r)`.
 *  `truncation_cascade`: evolve the successive truncations of a map with a
    long tail and measure how fast consecutive truncations agree.
 *  `suction_survival`: suck perturbed disks until blow-up and measure how
    much fluid is left.

Trajectories are compared on a common snapshot grid read from the
integrator's dense output, so every member of a sweep keeps its own optimal
steps. Sweep members run concurrently through `sweeps.apply_sync`.
"""

from collections.abc import Sequence
import dataclasses
import math

from absl import logging
from hele_shaw import cache as cache_lib
from hele_shaw import errors
from hele_shaw import geometry
from hele_shaw import moments
from hele_shaw import pg_dynamics
from hele_shaw import series_core
from hele_shaw import sweeps
import numpy as np

DEFAULT_RHO = 1.5


@dataclasses.dataclass(frozen=True)
class PerturbationSpec:
  """A polynomial map plus a perturbation measured in `||.||_{rho,k}`.

  Attributes:
    base: the polynomial map.
    tail: the perturbation `v`.
    rho: radius of the perturbation norm.
    k: derivative order of the perturbation norm.
    norm_value: `||v||_{rho,k}`.
  """

  base: series_core.CoefficientSeries
  tail: series_core.CoefficientSeries
  rho: float
  k: int
  norm_value: float

  @property
  def initial(self) -> series_core.CoefficientSeries:
    return self.base + self.tail


def make_perturbation(
    base: series_core.CoefficientSeries,
    tail: series_core.CoefficientSeries,
    rho: float = DEFAULT_RHO,
    k: int = 1,
) -> PerturbationSpec:
  """Builds a perturbation and measures it.

  Raises:
    ValueError: if `base + tail` does not have a real positive `a_1`.
  """
  a1 = (base + tail).linear_coefficient
  if a1.imag != 0 or not a1.real > 0:
    raise ValueError(
        f'The perturbed map must have a real positive a_1, got {a1}.'
    )
  return PerturbationSpec(
      base=base,
      tail=tail,
      rho=rho,
      k=k,
      norm_value=series_core.norm_rho_n(tail, rho, k),
  )


@dataclasses.dataclass(frozen=True, eq=False)
class DeviationTable:
  """Derivative deviations between two trajectories.

  Attributes:
    times: the common snapshot times.
    per_time: `|f_base^(n) - f^(n)|_M(r)`, shape `(T, jmax + 1)`.
  """

  times: np.ndarray
  per_time: np.ndarray

  @property
  def sup(self) -> np.ndarray:
    """Sup over time for each derivative order `n = 0..jmax`."""
    return np.max(self.per_time, axis=0)


def compare_trajectories(
    base_traj: pg_dynamics.Trajectory,
    pert_traj: pg_dynamics.Trajectory,
    r: float = 1.0,
    jmax: int = 1,
) -> DeviationTable:
  """Compares two trajectories recorded on the same snapshot grid.

  Raises:
    InsufficientDataError: if the snapshot grids differ.
  """
  if jmax < 0:
    raise ValueError(f'jmax must be non-negative, got {jmax}.')
  if len(base_traj) != len(pert_traj) or not np.array_equal(
      base_traj.times, pert_traj.times
  ):
    raise errors.InsufficientDataError(
        'Trajectories are not recorded on a common snapshot grid'
        f' ({len(base_traj)} vs {len(pert_traj)} snapshots).'
    )
  per_time = np.zeros((len(base_traj), jmax + 1))
  for i, (f_base, f) in enumerate(zip(base_traj.states, pert_traj.states)):
    base = series_core.PowerSeries(f_base.coeffs)
    difference = base - series_core.PowerSeries(f.coeffs)
    for n in range(jmax + 1):
      per_time[i, n] = series_core.norm_mr(difference.derivative(n), r)
  return DeviationTable(times=np.asarray(base_traj.times), per_time=per_time)


def snapshot_grid(t0: float, n_snapshots: int) -> np.ndarray:
  """`n_snapshots` equispaced times in `(0, t0]`."""
  if n_snapshots < 1:
    raise ValueError(f'n_snapshots must be positive, got {n_snapshots}.')
  return np.linspace(0.0, t0, n_snapshots + 1)[1:]


def perturbation_sweep(
    spec_list: Sequence[PerturbationSpec],
    sign: pg_dynamics.FlowSign | int,
    t0: float,
    r: float = 1.0,
    jmax: int = 1,
    n_snapshots: int = 10,
    opts: pg_dynamics.EvolveOptions | None = None,
    cache: cache_lib.TrajectoryCache | None = None,
) -> list[DeviationTable]:
  """Co-evolves base and perturbed maps and compares each pair.

  Each distinct base map is evolved once, before the perturbed members, and
  shared by every member built on it.
  """
  snapshots = tuple(snapshot_grid(t0, n_snapshots))
  bases = list(dict.fromkeys(spec.base for spec in spec_list))
  base_trajs = dict(
      zip(
          bases,
          sweeps.apply_sync(
              lambda f: cache_lib.evolve_cached(
                  cache, f, sign, t0, opts, snapshots
              ),
              bases,
          ),
      )
  )

  def run(spec: PerturbationSpec) -> DeviationTable:
    pert = pg_dynamics.evolve(spec.initial, sign, t0, opts, snapshots)
    return compare_trajectories(base_trajs[spec.base], pert, r, jmax)

  return sweeps.apply_sync(run, spec_list)


@dataclasses.dataclass(frozen=True)
class CascadeReport:
  """Agreement of successive truncations.

  Attributes:
    degrees: the truncation degrees.
    terminations: termination of each truncation's run.
    errors: `e_k = sup_t |g_k' - g_{k+1}'|_M(r)` for consecutive degrees; NaN
      when either run stopped before `t0`.
    ratios: `e_{k+1} / e_k`; NaN when undefined.
    final_deviation: `|g_k(t0) - g_{k+1}(t0)|_M` for consecutive degrees.
  """

  degrees: tuple[int, ...]
  terminations: tuple[pg_dynamics.TerminationReason, ...]
  errors: tuple[float, ...]
  ratios: tuple[float, ...]
  final_deviation: tuple[float, ...]

  @property
  def decreasing(self) -> bool:
    return all(b <= a for a, b in zip(self.errors, self.errors[1:]))


def truncation_cascade(
    f0: series_core.CoefficientSeries,
    degrees: Sequence[int],
    sign: pg_dynamics.FlowSign | int,
    t0: float,
    r: float = 1.0,
    n_snapshots: int = 10,
    opts: pg_dynamics.EvolveOptions | None = None,
) -> CascadeReport:
  """Evolves the truncations `g_k` of `f0` at `degrees` up to `t0`.

  Raises:
    NotUnivalentError: if `f0` is not univalent.
    ValueError: if `degrees` is not strictly increasing.
  """
  degrees = tuple(int(d) for d in degrees)
  if len(degrees) < 2 or any(b <= a for a, b in zip(degrees, degrees[1:])):
    raise ValueError(
        f'degrees must be strictly increasing with 2+ entries, got {degrees}.'
    )
  report = geometry.is_univalent(f0, 1.0)
  if not report:
    raise errors.NotUnivalentError(
        f'Initial map is not univalent ({report.reason}).',
        witness=report.witness,
    )
  snapshots = tuple(snapshot_grid(t0, n_snapshots))
  truncations = [f0.truncate(d) for d in degrees]
  trajectories = sweeps.apply_sync(
      lambda g: pg_dynamics.evolve(g, sign, t0, opts, snapshots), truncations
  )
  terminations = tuple(traj.termination for traj in trajectories)
  for degree, termination in zip(degrees, terminations):
    if termination != pg_dynamics.TerminationReason.COMPLETED:
      logging.warning(
          'Truncation of degree %d stopped: %s.', degree, termination
      )

  cascade_errors = []
  final = []
  for lo, hi in zip(trajectories, trajectories[1:]):
    try:
      table = compare_trajectories(lo, hi, r, jmax=1)
    except errors.InsufficientDataError:
      cascade_errors.append(math.nan)
      final.append(math.nan)
      continue
    cascade_errors.append(float(table.sup[1]))
    final.append(float(table.per_time[-1, 0]))
  ratios = tuple(
      b / a if a > 0 else math.nan
      for a, b in zip(cascade_errors, cascade_errors[1:])
  )
  return CascadeReport(
      degrees=degrees,
      terminations=terminations,
      errors=tuple(cascade_errors),
      ratios=ratios,
      final_deviation=tuple(final),
  )


@dataclasses.dataclass(frozen=True)
class SurvivalRow:
  delta: float
  t_star: float
  remaining_fraction: float
  termination: pg_dynamics.TerminationReason


def suction_survival(
    deltas: Sequence[float],
    template: series_core.CoefficientSeries,
    opts: pg_dynamics.EvolveOptions | None = None,
    t_max: float = 1.0,
) -> list[SurvivalRow]:
  """Sucks `xi + delta * template` until blow-up for every `delta`.

  Args:
    deltas: perturbation amplitudes.
    template: shape of the perturbation, e.g. `xi^3`; its linear coefficient
      should vanish.
    opts: integration options; the blow-up floor and analysis radius define
      `t*`.
    t_max: horizon, beyond the lifetime `1/2` of the unperturbed disk.

  Returns:
    One row per amplitude with `t*` and `M_0(t*) / M_0(0)`.
  """
  disk = series_core.CoefficientSeries([1.0])

  def run(delta: float) -> SurvivalRow:
    f0 = disk + float(delta) * template
    traj = pg_dynamics.evolve(
        f0, pg_dynamics.FlowSign.SUCTION, t_max, opts, snapshot_times=()
    )
    if traj.blowup is not None:
      t_star, state = traj.blowup.t_star, traj.blowup.state
    else:
      t_star, state = traj.final_time, traj.final_state
    m0 = moments.moments_exact(state, 0, check_univalence=False).m0
    m0_initial = moments.moments_exact(f0, 0, check_univalence=False).m0
    logging.info('delta=%g: t*=%.6g (%s).', delta, t_star, traj.termination)
    return SurvivalRow(
        delta=float(delta),
        t_star=float(t_star),
        remaining_fraction=m0 / m0_initial,
        termination=traj.termination,
    )

  return sweeps.apply_sync(run, deltas)
