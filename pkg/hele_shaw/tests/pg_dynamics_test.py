import math
import unittest

from absl.testing import parameterized
from hele_shaw import errors
from hele_shaw import moments
from hele_shaw import pg_dynamics
from hele_shaw import series_core
import numpy as np
from scipy import optimize

CoefficientSeries = series_core.CoefficientSeries
FlowSign = pg_dynamics.FlowSign
TerminationReason = pg_dynamics.TerminationReason

DISK = CoefficientSeries([1.0])
QUADRATIC = CoefficientSeries([1.0, 0.4])
DEGREE_FOUR = CoefficientSeries([1.0, -15 / 14, 4 / 7, -1 / 7]).dilate(1.1)

# Global error stays below 1e-10 over the disk horizons.
ACCURATE = pg_dynamics.EvolveOptions(rtol=1e-12, atol=1e-14)


def _quadratic_suction_t_star(floor: float, r: float) -> float:
  """Crossing time of `min |f'| = a_1 - 2 a_2 r` for `xi + 0.4 xi^2`.

  `M_1 = a_1^2 a_2 = 0.4` and `M_0 = a_1^2 + 2 a_2^2 = 1.32 - 2t`.
  """
  a1 = optimize.brentq(lambda a: a - 0.8 * r / a**2 - floor, 0.5, 1.0)
  a2 = 0.4 / a1**2
  return (1.32 - a1**2 - 2 * a2**2) / 2


class FlowSignTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('int', 1, FlowSign.INJECTION),
      ('negative_int', -1, FlowSign.SUCTION),
      ('text', '-1', FlowSign.SUCTION),
      ('name', 'Injection', FlowSign.INJECTION),
  )
  def test_parse(self, value, expected):
    self.assertEqual(FlowSign.parse(value), expected)

  @parameterized.named_parameters(('zero', 0), ('word', 'sideways'))
  def test_parse_rejects(self, value):
    with self.assertRaises(ValueError):
      FlowSign.parse(value)


class OptionsTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('radius', dict(analysis_radius=1.0)),
      ('rtol', dict(rtol=0.0)),
      ('floor', dict(min_fprime_floor=0.0)),
      ('grid', dict(n_grid=100)),
      ('bracket', dict(bracket_tol=-1.0)),
      ('check_every', dict(univalence_check_every=0)),
  )
  def test_invalid_options(self, kwargs):
    with self.assertRaises(ValueError):
      pg_dynamics.EvolveOptions(**kwargs)


class VelocityTest(parameterized.TestCase):

  @parameterized.named_parameters(('one', 1.0), ('two', 2.0))
  def test_disk(self, c):
    v = pg_dynamics.velocity(CoefficientSeries([c]), +1)
    np.testing.assert_allclose(v.series.a, [1 / c], atol=1e-15)
    self.assertLess(v.residual, 1e-15)

  @parameterized.named_parameters(
      ('injection', FlowSign.INJECTION),
      ('suction', FlowSign.SUCTION),
  )
  def test_quadratic_closed_form(self, sign):
    v = pg_dynamics.velocity(QUADRATIC, sign)
    np.testing.assert_allclose(
        v.series.a, int(sign) * np.array([25 / 9, -20 / 9]), atol=1e-10
    )
    self.assertLess(v.residual, 1e-10)
    self.assertLessEqual(
        pg_dynamics.residual_pg(QUADRATIC, v.series, sign), 1e-10
    )

  def test_area_growth_rate(self):
    # d/dt (a1^2 + 2 a2^2) = 2 (25/9) - (8/5)(20/9) = 2.
    v = pg_dynamics.velocity(QUADRATIC, +1).series.a
    rate = 2 * 1.0 * v[0].real + 4 * 0.4 * v[1].real
    self.assertAlmostEqual(rate, 2.0, places=10)

  def test_degree_four_refines_the_grid(self):
    # f' vanishes at 1.1, so 1 / |f'|^2 has slowly decaying modes.
    v = pg_dynamics.velocity(DEGREE_FOUR, +1, n_grid=32)
    self.assertGreater(v.n_grid, 32)
    self.assertEqual(v.series.degree, 4)

  def test_degree_four_satisfies_boundary_identity(self):
    v = pg_dynamics.velocity(DEGREE_FOUR, +1, n_grid=1024)
    self.assertLessEqual(v.residual, 1e-8)
    self.assertLessEqual(
        pg_dynamics.residual_pg(DEGREE_FOUR, v.series, +1, n_grid=2048), 1e-8
    )

  def test_critical_point_in_disk_raises(self):
    with self.assertRaises(errors.SingularIntegrandError):
      pg_dynamics.velocity(CoefficientSeries([1.0, 1.0]), +1)

  def test_coarse_grid_raises(self):
    a = np.zeros(100)
    a[0], a[-1] = 1.0, 1e-4
    with self.assertRaises(errors.AliasingError):
      pg_dynamics.velocity(CoefficientSeries(a), +1, n_grid=256)

  def test_unresolvable_tail_raises(self):
    with self.assertRaises(errors.AliasingError):
      pg_dynamics.velocity(DEGREE_FOUR, +1, n_grid=16, max_grid=32)


class ResidualTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('injection', FlowSign.INJECTION, 0.0),
      ('wrong_sign', FlowSign.SUCTION, 2.0),
  )
  def test_disk(self, sign, expected):
    c = 1.5
    residual = pg_dynamics.residual_pg(
        CoefficientSeries([c]), CoefficientSeries([1 / c]), sign
    )
    self.assertAlmostEqual(residual, expected, places=14)


class GaugeTest(parameterized.TestCase):

  def test_rotates_parametrization(self):
    f = CoefficientSeries([1j, 0.4])
    g = pg_dynamics.normalize_gauge(f)
    np.testing.assert_allclose(g.a, [1.0, -0.4], atol=1e-15)
    self.assertEqual(g.linear_coefficient.imag, 0.0)
    # Same image domain: g(xi) = f(exp(-i pi / 2) xi).
    xi = np.exp(1j * np.linspace(0, 2 * np.pi, 7))
    np.testing.assert_allclose(g(xi), f(-1j * xi), atol=1e-15)

  def test_normalized_map_is_unchanged(self):
    self.assertIs(pg_dynamics.normalize_gauge(QUADRATIC), QUADRATIC)

  def test_zero_linear_coefficient_raises(self):
    with self.assertRaises(ValueError):
      pg_dynamics.normalize_gauge(CoefficientSeries([0.0, 1.0]))


class TrajectoryTest(unittest.TestCase):

  def _diagnostics(self, n):
    return tuple(
        pg_dynamics.StepDiagnostics(1.0, 0.0, 0.0, 0.0, 256) for _ in range(n)
    )

  def test_times_must_start_at_zero(self):
    with self.assertRaises(ValueError):
      pg_dynamics.Trajectory(
          FlowSign.INJECTION, [0.5], (DISK,), self._diagnostics(1)
      )

  def test_times_must_increase(self):
    with self.assertRaises(ValueError):
      pg_dynamics.Trajectory(
          FlowSign.INJECTION, [0.0, 0.0], (DISK, DISK), self._diagnostics(2)
      )

  def test_replace_state(self):
    traj = pg_dynamics.Trajectory(
        FlowSign.INJECTION, [0.0, 1.0], (DISK, DISK), self._diagnostics(2)
    )
    changed = traj.replace_state(1, QUADRATIC)
    self.assertEqual(changed.final_state, QUADRATIC)
    self.assertEqual(traj.final_state, DISK)
    self.assertEqual(changed.degree, 2)


class EvolveTest(parameterized.TestCase):

  def test_disk_injection(self):
    times = np.linspace(0.5, 10.0, 20)
    traj = pg_dynamics.evolve(DISK, +1, 10.0, ACCURATE, snapshot_times=times)
    self.assertEqual(traj.termination, TerminationReason.COMPLETED)
    np.testing.assert_allclose(traj.times, np.concatenate([[0.0], times]))
    a1 = np.array([s.linear_coefficient.real for s in traj.states])
    np.testing.assert_allclose(
        a1, np.sqrt(1 + 2 * traj.times), rtol=0, atol=1e-8
    )
    self.assertAlmostEqual(traj.states[8].a[0].real, 3.0, delta=1e-8)
    self.assertGreater(traj.nfev, 0)

  def test_disk_suction(self):
    traj = pg_dynamics.evolve(DISK, -1, 0.375, ACCURATE)
    self.assertEqual(traj.termination, TerminationReason.COMPLETED)
    self.assertEqual(traj.final_time, 0.375)
    self.assertAlmostEqual(traj.final_state.a[0].real, 0.5, delta=1e-8)
    a1 = np.array([s.linear_coefficient.real for s in traj.states])
    np.testing.assert_allclose(
        a1, np.sqrt(1 - 2 * traj.times), rtol=0, atol=1e-8
    )

  def test_disk_suction_blows_up(self):
    times = np.linspace(0.05, 0.45, 9)
    traj = pg_dynamics.evolve(DISK, -1, 0.6, ACCURATE, snapshot_times=times)
    self.assertEqual(traj.termination, TerminationReason.BLOWUP)
    self.assertTrue(traj.blowup.detected)
    self.assertAlmostEqual(traj.blowup.t_star, 0.5, delta=1e-3)
    self.assertLessEqual(traj.blowup.bracket_width, 1e-6)
    self.assertAlmostEqual(traj.final_time, traj.blowup.t_star)
    recorded = traj.times[1:-1]
    np.testing.assert_allclose(recorded, times)
    a1 = np.array([s.linear_coefficient.real for s in traj.states[:-1]])
    np.testing.assert_allclose(
        a1, np.sqrt(1 - 2 * traj.times[:-1]), rtol=0, atol=1e-8
    )

  def test_quadratic_injection_conserves_moments(self):
    traj = pg_dynamics.evolve(QUADRATIC, +1, 10.0)
    self.assertEqual(traj.termination, TerminationReason.COMPLETED)
    self.assertEqual(traj.final_time, 10.0)
    self.assertEqual(traj.degree, 2)
    for d in traj.diagnostics:
      self.assertLessEqual(d.degree_residual, 1e-8)
    final = moments.moments_exact(traj.final_state, 5)
    self.assertAlmostEqual(final.m0, 1.32 + 20, delta=1e-6)
    self.assertAlmostEqual(final[1], 0.4, delta=1e-6)
    report = moments.conservation_report(traj, 5)
    self.assertLessEqual(report.max_area_delta, 1e-6)
    self.assertLessEqual(float(np.max(report.max_moment_deltas)), 1e-6)

  def test_degree_four_injection_conserves_moments(self):
    opts = pg_dynamics.EvolveOptions(n_grid=1024)
    traj = pg_dynamics.evolve(
        DEGREE_FOUR,
        +1,
        10.0,
        opts,
        snapshot_times=np.linspace(1.0, 10.0, 10),
    )
    self.assertEqual(traj.termination, TerminationReason.COMPLETED)
    self.assertEqual(traj.degree, 4)
    for d in traj.diagnostics:
      self.assertLessEqual(d.degree_residual, 1e-8)
    report = moments.conservation_report(traj, 5)
    self.assertLessEqual(report.max_area_delta, 1e-6)
    self.assertLessEqual(float(np.max(report.max_moment_deltas)), 1e-6)

  def test_quadratic_suction_blows_up_at_closed_form_time(self):
    opts = pg_dynamics.EvolveOptions()
    report = pg_dynamics.detect_blowup(QUADRATIC, -1, opts, t_max=1.0)
    self.assertTrue(report.detected)
    expected = _quadratic_suction_t_star(
        opts.min_fprime_floor, opts.analysis_radius
    )
    self.assertAlmostEqual(report.t_star, expected, delta=1e-3)
    self.assertEqual(report.analysis_radius, 1.05)

  def test_disk_blowup_time(self):
    report = pg_dynamics.detect_blowup(DISK, -1)
    self.assertTrue(report.detected)
    self.assertAlmostEqual(report.t_star, 0.5, delta=1e-3)
    self.assertLess(report.state.a[0].real, 5e-3)

  def test_starlike_injection_does_not_blow_up(self):
    report = pg_dynamics.detect_blowup(QUADRATIC, +1, t_max=100.0)
    self.assertFalse(report.detected)
    self.assertIn('none up to t_max', report.message)
    self.assertIsNone(report.t_star)

  def test_gauge_stays_real(self):
    traj = pg_dynamics.evolve(CoefficientSeries([1.0, 0.2j, 0.05]), +1, 2.0)
    for state in traj.states:
      self.assertEqual(state.linear_coefficient.imag, 0.0)
      self.assertGreater(state.linear_coefficient.real, 0.0)

  def test_non_univalent_initial_map_raises(self):
    with self.assertRaises(errors.NotUnivalentError) as cm:
      pg_dynamics.evolve(CoefficientSeries([1.0, 1.0]), +1, 1.0)
    self.assertAlmostEqual(cm.exception.witness, -0.5)

  def test_locally_univalent_mode_still_needs_regular_map(self):
    opts = pg_dynamics.EvolveOptions(locally_univalent=True)
    with self.assertRaises(errors.SingularIntegrandError):
      pg_dynamics.evolve(CoefficientSeries([1.0, 1.0]), +1, 1.0, opts)

  def test_zero_horizon(self):
    traj = pg_dynamics.evolve(QUADRATIC, +1, 0.0)
    self.assertLen(traj, 1)
    self.assertEqual(traj.final_state, QUADRATIC)

  def test_snapshot_beyond_horizon_raises(self):
    with self.assertRaises(ValueError):
      pg_dynamics.evolve(DISK, +1, 1.0, snapshot_times=[2.0])

  def test_exhaustion_is_reported(self):
    # A tiny blow-up floor lets exhaustion fire first.
    opts = pg_dynamics.EvolveOptions(
        min_fprime_floor=1e-9, exhaustion_threshold=1e-2
    )
    traj = pg_dynamics.evolve(DISK, -1, 0.6, opts)
    self.assertEqual(traj.termination, TerminationReason.EXHAUSTED)
    self.assertIsNone(traj.blowup)
    self.assertLess(traj.final_time, 0.5)
    self.assertLessEqual(traj.final_state.a[0].real ** 2, 1e-2)

  @parameterized.named_parameters(
      ('quadratic', QUADRATIC),
      ('cubic', CoefficientSeries([1.0, 0.0, 0.1])),
      ('complex', CoefficientSeries([1.0, 0.1 + 0.1j, 0.02])),
  )
  def test_conformal_radius_grows_at_least_linearly(self, f0):
    times = np.linspace(0.5, 5.0, 10)
    traj = pg_dynamics.evolve(f0, +1, 5.0, snapshot_times=times)
    a1_squared = np.array([s.a[0].real ** 2 for s in traj.states])
    self.assertTrue(
        np.all(a1_squared >= a1_squared[0] + 2 * traj.times - 1e-8)
    )

  def test_rerun_is_bit_identical(self):
    times = np.linspace(0.5, 2.0, 4)
    first = pg_dynamics.evolve(DEGREE_FOUR, +1, 2.0, snapshot_times=times)
    second = pg_dynamics.evolve(DEGREE_FOUR, +1, 2.0, snapshot_times=times)
    np.testing.assert_array_equal(first.times, second.times)
    self.assertEqual(first.nfev, second.nfev)
    for a, b in zip(first.states, second.states):
      np.testing.assert_array_equal(a.coeffs, b.coeffs)

  @parameterized.named_parameters(
      ('disk', DISK, 0.45, -1),
      ('quadratic', QUADRATIC, 2.0, +1),
      ('degree_four', DEGREE_FOUR, 1.0, +1),
  )
  def test_agrees_with_fixed_step_rk4(self, f0, t_end, sign):
    # Every accepted step is recorded. RK4 runs at a tenth of the typical
    # step, and at most 1e-4 so that its dt^4 error stays far below 1e-6.
    traj = pg_dynamics.evolve(f0, sign, t_end)
    self.assertEqual(traj.final_time, t_end)
    dt = min(1e-4, float(np.median(np.diff(traj.times))) / 10)
    rk4 = pg_dynamics.integrate_fixed_rk4(f0, sign, t_end, dt=dt)
    difference = series_core.PowerSeries(
        traj.final_state.coeffs
    ) - series_core.PowerSeries(rk4.coeffs)
    self.assertLessEqual(series_core.norm_mr(difference, 1.0), 1e-6)


if __name__ == '__main__':
  unittest.main()
