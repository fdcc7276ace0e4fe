import math
import unittest
from unittest import mock

from absl.testing import parameterized
from hele_shaw import cache
from hele_shaw import errors
from hele_shaw import pg_dynamics
from hele_shaw import series_core
from hele_shaw.core import perturbation_lab
import numpy as np

CoefficientSeries = series_core.CoefficientSeries

DISK = CoefficientSeries([1.0])
QUADRATIC = CoefficientSeries([1.0, 0.4])
XI5 = CoefficientSeries([0.0, 0.0, 0.0, 0.0, 1.0])
XI3 = CoefficientSeries([0.0, 0.0, 1.0])


class MakePerturbationTest(parameterized.TestCase):

  def test_norm(self):
    spec = perturbation_lab.make_perturbation(DISK, 1e-3 * XI5, rho=1.5, k=1)
    self.assertAlmostEqual(spec.norm_value, 1e-3 * 1.5**5 * 5**1.5)
    self.assertEqual(spec.initial, CoefficientSeries([1.0, 0, 0, 0, 1e-3]))

  def test_rejects_bad_linear_coefficient(self):
    with self.assertRaises(ValueError):
      perturbation_lab.make_perturbation(DISK, CoefficientSeries([-2.0]))
    with self.assertRaises(ValueError):
      perturbation_lab.make_perturbation(DISK, CoefficientSeries([0.1j]))


class CompareTrajectoriesTest(parameterized.TestCase):

  def test_identical_trajectories(self):
    traj = pg_dynamics.evolve(QUADRATIC, +1, 1.0, snapshot_times=[0.5, 1.0])
    table = perturbation_lab.compare_trajectories(traj, traj, jmax=2)
    self.assertEqual(table.per_time.shape, (3, 3))
    np.testing.assert_array_equal(table.sup, 0.0)

  def test_initial_deviation(self):
    base = pg_dynamics.evolve(DISK, +1, 1.0, snapshot_times=[1.0])
    pert = pg_dynamics.evolve(
        DISK + 1e-3 * XI3, +1, 1.0, snapshot_times=[1.0]
    )
    table = perturbation_lab.compare_trajectories(base, pert, jmax=1)
    self.assertAlmostEqual(table.per_time[0, 0], 1e-3)
    self.assertAlmostEqual(table.per_time[0, 1], 3e-3)

  def test_mismatched_grids_raise(self):
    a = pg_dynamics.evolve(DISK, +1, 1.0, snapshot_times=[0.5, 1.0])
    b = pg_dynamics.evolve(DISK, +1, 1.0, snapshot_times=[1.0])
    with self.assertRaises(errors.InsufficientDataError):
      perturbation_lab.compare_trajectories(a, b)

  def test_negative_jmax_raises(self):
    a = pg_dynamics.evolve(DISK, +1, 1.0, snapshot_times=[1.0])
    with self.assertRaises(ValueError):
      perturbation_lab.compare_trajectories(a, a, jmax=-1)


class PerturbationSweepTest(parameterized.TestCase):

  def test_snapshot_grid(self):
    np.testing.assert_allclose(
        perturbation_lab.snapshot_grid(1.0, 4), [0.25, 0.5, 0.75, 1.0]
    )
    with self.assertRaises(ValueError):
      perturbation_lab.snapshot_grid(1.0, 0)

  def test_deviation_is_linear_in_amplitude(self):
    specs = [
        perturbation_lab.make_perturbation(DISK, delta * XI5)
        for delta in (1e-3, 5e-4)
    ]
    trajectory_cache = cache.TrajectoryCache()
    tables = perturbation_lab.perturbation_sweep(
        specs, +1, 1.0, jmax=1, n_snapshots=5, cache=trajectory_cache
    )
    self.assertLen(tables, 2)
    ratio = tables[1].sup[1] / tables[0].sup[1]
    self.assertBetween(ratio, 0.4, 0.6)
    for spec, table in zip(specs, tables):
      self.assertLessEqual(table.sup[0], spec.norm_value)
    # Both members share one base trajectory.
    self.assertLen(trajectory_cache, 1)

  def test_shared_base_is_evolved_once(self):
    specs = [
        perturbation_lab.make_perturbation(DISK, delta * XI5)
        for delta in (1e-3, 5e-4, 2.5e-4)
    ]
    with mock.patch.object(
        pg_dynamics, 'evolve', wraps=pg_dynamics.evolve
    ) as evolve:
      perturbation_lab.perturbation_sweep(
          specs, +1, 0.5, n_snapshots=2, cache=cache.TrajectoryCache()
      )
    initial_maps = [c.args[0] for c in evolve.call_args_list]
    self.assertLen(initial_maps, 4)
    self.assertEqual(sum(f == DISK for f in initial_maps), 1)

  def test_deviation_decreases_with_amplitude(self):
    specs = [
        perturbation_lab.make_perturbation(DISK, delta * XI5)
        for delta in (1e-3, 5e-4, 2.5e-4)
    ]
    tables = perturbation_lab.perturbation_sweep(
        specs, +1, 1.0, jmax=1, n_snapshots=5
    )
    for n in (0, 1):
      sups = [table.sup[n] for table in tables]
      self.assertGreater(sups[0], sups[1])
      self.assertGreater(sups[1], sups[2])

  def test_zero_perturbation_reproduces_base_exactly(self):
    spec = perturbation_lab.make_perturbation(
        QUADRATIC, CoefficientSeries([0.0, 0.0])
    )
    self.assertEqual(spec.norm_value, 0.0)
    (table,) = perturbation_lab.perturbation_sweep(
        [spec], +1, 1.0, jmax=2, n_snapshots=4
    )
    np.testing.assert_array_equal(table.per_time, 0.0)
    snapshots = tuple(perturbation_lab.snapshot_grid(1.0, 4))
    base = pg_dynamics.evolve(QUADRATIC, +1, 1.0, snapshot_times=snapshots)
    pert = pg_dynamics.evolve(spec.initial, +1, 1.0, snapshot_times=snapshots)
    np.testing.assert_array_equal(base.times, pert.times)
    for f_base, f in zip(base.states, pert.states):
      np.testing.assert_array_equal(f_base.coeffs, f.coeffs)


class TruncationCascadeTest(parameterized.TestCase):

  def test_polynomial_has_zero_errors(self):
    report = perturbation_lab.truncation_cascade(QUADRATIC, [2, 3, 4], +1, 0.5)
    self.assertEqual(report.errors, (0.0, 0.0))
    self.assertTrue(math.isnan(report.ratios[0]))
    self.assertTrue(report.decreasing)
    self.assertEqual(
        report.terminations, (pg_dynamics.TerminationReason.COMPLETED,) * 3
    )

  def test_geometric_tail_converges(self):
    q = 0.1
    f0 = CoefficientSeries([1.0] + [0.2 * q ** (n - 1) for n in range(2, 13)])
    report = perturbation_lab.truncation_cascade(f0, [3, 4, 5, 6], +1, 0.5)
    self.assertTrue(report.decreasing)
    self.assertLen(report.ratios, 2)
    for ratio in report.ratios:
      self.assertLess(ratio, 0.25)
    for deviation in report.final_deviation:
      self.assertLess(deviation, 1e-3)

  def test_doubling_degrees(self):
    f0 = CoefficientSeries([1.0] + [0.2 * 0.1 ** (n - 1) for n in range(2, 17)])
    report = perturbation_lab.truncation_cascade(f0, [2, 4, 8, 16], +1, 0.5)
    for ratio in report.ratios:
      self.assertLessEqual(ratio, 0.2)

  def test_degrees_must_increase(self):
    with self.assertRaises(ValueError):
      perturbation_lab.truncation_cascade(QUADRATIC, [3, 3], +1, 0.5)
    with self.assertRaises(ValueError):
      perturbation_lab.truncation_cascade(QUADRATIC, [3], +1, 0.5)

  def test_non_univalent_initial_map_raises(self):
    with self.assertRaises(errors.NotUnivalentError):
      perturbation_lab.truncation_cascade(
          CoefficientSeries([1.0, 1.0]), [2, 3], +1, 0.5
      )


class SuctionSurvivalTest(parameterized.TestCase):

  def test_smaller_perturbations_survive_longer(self):
    rows = perturbation_lab.suction_survival([1e-2, 1e-4], XI3)
    self.assertLen(rows, 2)
    for row in rows:
      self.assertEqual(row.termination, pg_dynamics.TerminationReason.BLOWUP)
      self.assertLess(row.t_star, 0.5)
    self.assertLess(rows[0].t_star, rows[1].t_star)
    self.assertGreater(rows[1].t_star, 0.48)
    self.assertLess(rows[1].remaining_fraction, 0.05)
    self.assertGreater(rows[0].remaining_fraction, rows[1].remaining_fraction)
    # Area decreases at rate 2 until blow-up.
    for row in rows:
      self.assertAlmostEqual(
          row.remaining_fraction,
          1 - 2 * row.t_star / (1 + 3 * row.delta**2),
          delta=1e-5,
      )

  def test_survival_time_rises_as_amplitude_falls(self):
    rows = perturbation_lab.suction_survival([0.05, 0.01, 0.001], XI3)
    self.assertLen(rows, 3)
    t_stars = [row.t_star for row in rows]
    self.assertLess(t_stars[0], t_stars[1])
    self.assertLess(t_stars[1], t_stars[2])
    self.assertAlmostEqual(t_stars[2], 0.4633, delta=1e-3)


if __name__ == '__main__':
  unittest.main()
