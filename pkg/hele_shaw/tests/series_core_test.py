import unittest

from absl.testing import parameterized
from hele_shaw import errors
from hele_shaw import series_core
import numpy as np

CoefficientSeries = series_core.CoefficientSeries
PowerSeries = series_core.PowerSeries


class PowerSeriesTest(parameterized.TestCase):

  def test_evaluate(self):
    p = PowerSeries([1.0, 2.0, 3.0])
    self.assertEqual(p(2.0), 17.0)
    np.testing.assert_allclose(
        series_core.evaluate(p, np.array([0.0, 1.0])), [1.0, 6.0]
    )

  def test_trailing_zeros_are_dropped(self):
    self.assertEqual(PowerSeries([1.0, 0.0, 0.0]).degree, 0)
    self.assertEqual(PowerSeries([1.0, 2.0, 0.0]), PowerSeries([1.0, 2.0]))

  @parameterized.named_parameters(
      ('identity', 0, [1.0, 2.0, 3.0]),
      ('first', 1, [2.0, 6.0]),
      ('second', 2, [6.0]),
      ('beyond_degree', 5, [0.0]),
  )
  def test_derivative(self, order, expected):
    p = PowerSeries([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(
        series_core.derivative(p, order).coeffs, expected
    )

  def test_negative_derivative_order_raises(self):
    with self.assertRaises(ValueError):
      PowerSeries([1.0]).derivative(-1)

  def test_arithmetic(self):
    p = PowerSeries([1.0, 1.0])
    q = PowerSeries([0.0, 2.0, 1.0])
    np.testing.assert_array_equal((p + q).coeffs, [1.0, 3.0, 1.0])
    np.testing.assert_array_equal((p - q).coeffs, [1.0, -1.0, -1.0])
    np.testing.assert_array_equal((p * q).coeffs, [0.0, 2.0, 3.0, 1.0])
    np.testing.assert_array_equal((2.0 * p).coeffs, [2.0, 2.0])
    np.testing.assert_array_equal((-p).coeffs, [-1.0, -1.0])

  def test_dilate_and_rotate(self):
    f = PowerSeries([0.0, 1.0, 0.3 - 0.2j, 0.05j])
    xi = 0.7 * np.exp(1j * np.linspace(0, 2 * np.pi, 9))
    np.testing.assert_allclose(f.dilate(2.0)(xi), f(xi / 2.0), atol=1e-15)
    np.testing.assert_allclose(
        f.rotate(0.3)(xi), f(np.exp(0.3j) * xi), atol=1e-15
    )

  def test_conjugate(self):
    f = PowerSeries([0.0, 1.0, 0.2j])
    xi = 0.3 + 0.4j
    self.assertAlmostEqual(f.conjugate()(xi), np.conj(f(np.conj(xi))))


class CoefficientSeriesTest(parameterized.TestCase):

  def test_linear_coefficient_and_degree(self):
    f = CoefficientSeries([1.0, 0.4])
    np.testing.assert_array_equal(f.coeffs, [0.0, 1.0, 0.4])
    np.testing.assert_array_equal(f.a, [1.0, 0.4])
    self.assertEqual(f.degree, 2)
    self.assertEqual(f.linear_coefficient, 1.0)
    self.assertEqual(f.constant, 0.0)

  def test_degree_of_linear_map_with_zero_tail(self):
    self.assertEqual(CoefficientSeries([2.0, 0.0, 0.0]).degree, 1)

  def test_empty_raises(self):
    with self.assertRaises(ValueError):
      CoefficientSeries([])

  def test_operations_keep_the_map_type(self):
    f = CoefficientSeries([1.0, 0.4, 0.1])
    self.assertIsInstance(f + f, CoefficientSeries)
    self.assertIsInstance(0.5 * f, CoefficientSeries)
    self.assertIsInstance(f.truncate(2), CoefficientSeries)
    self.assertEqual(f.truncate(2), CoefficientSeries([1.0, 0.4]))

  def test_adding_a_constant_gives_a_power_series(self):
    f = CoefficientSeries([1.0])
    g = f + PowerSeries([1.0])
    self.assertNotIsInstance(g, CoefficientSeries)
    self.assertEqual(g.constant, 1.0)

  def test_from_power_series_rejects_constant(self):
    with self.assertRaises(ValueError):
      CoefficientSeries.from_power_series(PowerSeries([0.1, 1.0]))
    f = CoefficientSeries.from_power_series(
        PowerSeries([1e-16, 1.0]), atol=1e-12
    )
    self.assertEqual(f, CoefficientSeries([1.0]))

  def test_pairs_and_json(self):
    f = CoefficientSeries([1.0, 0.25 - 0.5j])
    self.assertEqual(f.to_pairs(), [[1.0, 0.0], [0.25, -0.5]])
    self.assertEqual(CoefficientSeries.from_pairs(f.to_pairs()), f)
    self.assertEqual(CoefficientSeries.from_json(f.to_json()), f)

  def test_from_pairs_rejects_bad_pair(self):
    with self.assertRaises(ValueError):
      CoefficientSeries.from_pairs([[1.0, 0.0, 2.0]])

  def test_coefficients_are_read_only(self):
    f = CoefficientSeries([1.0, 0.4])
    with self.assertRaises(ValueError):
      f.coeffs[1] = 2.0


class NormTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('unit', 1.0, 6.0),
      ('two', 2.0, 17.0),
  )
  def test_norm_mr(self, r, expected):
    self.assertAlmostEqual(
        series_core.norm_mr(PowerSeries([1.0, -2.0, 3j]), r), expected
    )

  @parameterized.named_parameters(('seed_0', 0), ('seed_1', 1), ('seed_2', 2))
  def test_norm_mr_properties_on_random_series(self, seed):
    rng = np.random.default_rng(seed)
    f, g = (
        PowerSeries(rng.normal(size=6) + 1j * rng.normal(size=6))
        for _ in range(2)
    )
    radii = (1.0, 1.2, 1.5, 2.0)
    norms = [series_core.norm_mr(f, r) for r in radii]
    self.assertEqual(norms, sorted(norms))
    for r in radii:
      norm_f = series_core.norm_mr(f, r)
      norm_g = series_core.norm_mr(g, r)
      slack = 1e-12 * (1 + norm_f * norm_g)
      self.assertLessEqual(
          series_core.norm_mr(f + g, r), norm_f + norm_g + slack
      )
      self.assertLessEqual(
          series_core.norm_mr(f * g, r), norm_f * norm_g + slack
      )

  def test_norm_mr_rejects_small_radius(self):
    with self.assertRaises(ValueError):
      series_core.norm_mr(PowerSeries([1.0]), 0.5)

  def test_norm_rho_n(self):
    v = CoefficientSeries([0.0, 0.0, 1e-3])
    self.assertAlmostEqual(
        series_core.norm_rho_n(v, 1.5, 1), 1e-3 * 1.5**3 * 3**1.5
    )
    self.assertAlmostEqual(
        series_core.norm_rho_n(v, 1.5, 0), 1e-3 * 1.5**3 * 3**0.5
    )

  @parameterized.named_parameters(
      ('rho_one', 1.0, 0),
      ('negative_order', 1.5, -1),
  )
  def test_norm_rho_n_validation(self, rho, n):
    with self.assertRaises(ValueError):
      series_core.norm_rho_n(CoefficientSeries([1.0]), rho, n)


class GridTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('small', 10, 256),
      ('boundary', 64, 256),
      ('large', 100, 512),
  )
  def test_default_grid_size(self, degree, expected):
    self.assertEqual(series_core.default_grid_size(degree), expected)

  def test_sample_and_recover(self):
    f = CoefficientSeries([1.0, 0.3 - 0.1j, 0.0, 0.02j])
    grid = series_core.sample(f, r=1.5, n_grid=64)
    self.assertEqual(grid.n_grid, 64)
    np.testing.assert_allclose(grid.points, series_core.circle_points(1.5, 64))
    recovered = series_core.coefficients_from_grid(grid, degree=f.degree)
    np.testing.assert_allclose(recovered.coeffs, f.coeffs, atol=1e-13)

  def test_sample_rejects_coarse_grid(self):
    f = CoefficientSeries(np.ones(100) / 100)
    with self.assertRaises(errors.AliasingError):
      series_core.sample(f, n_grid=256)

  def test_recover_rejects_degree_above_nyquist(self):
    grid = series_core.sample(CoefficientSeries([1.0]), n_grid=16)
    with self.assertRaises(errors.AliasingError):
      series_core.coefficients_from_grid(grid, degree=8)

  @parameterized.named_parameters(
      ('not_power_of_two', 1.0, 12),
      ('non_positive_radius', 0.0, 16),
  )
  def test_boundary_grid_validation(self, radius, n):
    with self.assertRaises(ValueError):
      series_core.BoundaryGrid(radius=radius, samples=np.ones(n))


if __name__ == '__main__':
  unittest.main()
