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
"""Command-line front end of the Hele-Shaw experiments.

```
hele-shaw evolve --config disk.json --t-end 4 --out runs/disk
hele-shaw suction-sweep --config survival.json
hele-shaw report runs/a/decay.csv
```

Exit codes: 0 success, 2 the run stopped before `t_end` (blow-up, fluid
exhaustion or lost univalence), 3 invalid input, 4 numerical failure.
"""

import argparse
from collections.abc import Sequence
import os
import sys

from absl import logging
from hele_shaw import cache as cache_lib
from hele_shaw import config as config_lib
from hele_shaw import debug
from hele_shaw import errors
from hele_shaw import moments
from hele_shaw import pg_dynamics
from hele_shaw import reports
from hele_shaw.core import perturbation_lab
from hele_shaw.core import rescaling

EXIT_OK = 0
EXIT_EARLY_TERMINATION = 2
EXIT_INVALID_INPUT = 3
EXIT_NUMERICAL_FAILURE = 4

_COMMAND_KINDS = {
    'evolve': config_lib.ExperimentKind.EVOLVE,
    'suction-sweep': config_lib.ExperimentKind.SUCTION,
    'perturb': config_lib.ExperimentKind.PERTURB,
    'cascade': config_lib.ExperimentKind.CASCADE,
    'moments': config_lib.ExperimentKind.MOMENTS,
    'decay': config_lib.ExperimentKind.DECAY,
}

_DEFAULT_PERTURB_SNAPSHOTS = 10


def _build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(
      prog='hele-shaw',
      description='Spectral simulation of Hele-Shaw flows.',
  )
  parser.add_argument(
      '--debug', action='store_true', help='Log per-step diagnostics.'
  )
  commands = parser.add_subparsers(dest='command', required=True)
  for name in _COMMAND_KINDS:
    sub = commands.add_parser(name)
    sub.add_argument('--config', help='JSON run configuration.')
    sub.add_argument('--out', help='Output directory.')
    sub.add_argument('--rtol', type=float)
    sub.add_argument('--t-end', type=float, dest='t_end')
    sub.add_argument('--sign', type=int, choices=(1, -1))
    sub.add_argument(
        '--locally-univalent',
        action='store_true',
        default=None,
        help='Only require f\' != 0 on the closed disk.',
    )
    sub.add_argument(
        '--seed', type=int, help='Angular jitter of the quadrature oracle.'
    )
  report = commands.add_parser('report')
  report.add_argument('inputs', nargs='+', help='CSV outputs of earlier runs.')
  report.add_argument('--column', help='Column kept from every input.')
  report.add_argument('--out', help='Merged CSV; stdout when omitted.')
  return parser


def _load_config(args: argparse.Namespace) -> config_lib.RunConfig:
  """The file configuration with the flag overrides applied."""
  if args.config is not None:
    if not os.path.exists(args.config):
      raise FileNotFoundError(args.config)
    cfg = config_lib.load(args.config)
  else:
    cfg = config_lib.RunConfig()
  cfg.kind = _COMMAND_KINDS[args.command].value
  if args.out is not None:
    cfg.output_dir = args.out
  if args.rtol is not None:
    cfg.rtol = args.rtol
  if args.t_end is not None:
    cfg.t_end = args.t_end
  if args.sign is not None:
    cfg.sign = args.sign
  if args.locally_univalent is not None:
    cfg.locally_univalent = args.locally_univalent
  if args.seed is not None:
    cfg.seed = args.seed
  return cfg.validate()


def _prepare_output(cfg: config_lib.RunConfig, argv: Sequence[str]) -> str:
  os.makedirs(cfg.output_dir, exist_ok=True)
  config_lib.dump(cfg, os.path.join(cfg.output_dir, 'config.json'))
  reports.write_metadata(cfg.output_dir, cfg.kind, argv)
  return cfg.output_dir


def cmd_evolve(cfg: config_lib.RunConfig, out_dir: str) -> int:
  """Evolves the initial map and writes its trajectory and summary."""
  with debug.timed('evolve'):
    traj = pg_dynamics.evolve(
        cfg.initial_map(),
        cfg.sign,
        cfg.t_end,
        cfg.evolve_options(),
        cfg.snapshot_times(),
    )
  debug.log_trajectory('evolve', traj)
  header, rows = reports.trajectory_table(traj, cfg.moment_order)
  reports.write_csv(os.path.join(out_dir, 'trajectory.csv'), header, rows)
  summary = reports.run_summary(traj, cfg.moment_order)
  reports.write_json(os.path.join(out_dir, 'summary.json'), summary.to_dict())
  if traj.termination != pg_dynamics.TerminationReason.COMPLETED:
    if traj.blowup is not None:
      print(traj.blowup.message)
    print(f'stopped at t={traj.final_time!r}: {traj.termination}')
    return EXIT_EARLY_TERMINATION
  return EXIT_OK


def cmd_suction_sweep(cfg: config_lib.RunConfig, out_dir: str) -> int:
  rows = perturbation_lab.suction_survival(
      cfg.deltas, cfg.template_map(), cfg.evolve_options(), t_max=cfg.t_end
  )
  header, table = reports.survival_table(rows)
  reports.write_csv(os.path.join(out_dir, 'survival.csv'), header, table)
  return EXIT_OK


def cmd_perturb(cfg: config_lib.RunConfig, out_dir: str) -> int:
  """Co-evolves the base map and each `base + delta * template`."""
  base, template = cfg.initial_map(), cfg.template_map()
  specs = [
      perturbation_lab.make_perturbation(
          base, float(delta) * template, cfg.rho, cfg.norm_order
      )
      for delta in cfg.deltas
  ]
  for spec in specs:
    logging.info('||v||_{%g,%d} = %.6g', spec.rho, spec.k, spec.norm_value)
  tables = perturbation_lab.perturbation_sweep(
      specs,
      cfg.sign,
      cfg.t_end,
      r=cfg.r,
      jmax=cfg.jmax,
      n_snapshots=cfg.schedule.count or _DEFAULT_PERTURB_SNAPSHOTS,
      opts=cfg.evolve_options(),
      cache=cache_lib.TrajectoryCache(),
  )
  header, rows = reports.perturbation_table(cfg.deltas, tables)
  reports.write_csv(os.path.join(out_dir, 'perturbation.csv'), header, rows)
  return EXIT_OK


def cmd_cascade(cfg: config_lib.RunConfig, out_dir: str) -> int:
  report = perturbation_lab.truncation_cascade(
      cfg.initial_map(),
      cfg.degrees,
      cfg.sign,
      cfg.t_end,
      r=cfg.r,
      n_snapshots=cfg.schedule.count or _DEFAULT_PERTURB_SNAPSHOTS,
      opts=cfg.evolve_options(),
  )
  header, rows = reports.cascade_table(report)
  reports.write_csv(os.path.join(out_dir, 'cascade.csv'), header, rows)
  if not report.decreasing:
    logging.warning('Cascade errors are not decreasing: %s', report.errors)
  return EXIT_OK


def cmd_moments(cfg: config_lib.RunConfig, out_dir: str) -> int:
  """Prints M_0..M_K and n_0 of the initial map, checked by quadrature."""
  f0 = cfg.initial_map()
  exact = moments.moments_exact(f0, cfg.moment_order)
  quadrature = moments.moments_quadrature(
      f0, cfg.moment_order, seed=cfg.seed, check_univalence=False
  )
  rows = []
  for k in range(cfg.moment_order + 1):
    rows.append([
        k,
        float(exact[k].real),
        float(exact[k].imag),
        abs(exact[k] - quadrature[k]),
    ])
    print(f'M{k} = {exact[k]!r}')
  print(f'n0 = {exact.n0}')
  reports.write_csv(
      os.path.join(out_dir, 'moments.csv'),
      ['k', 'Mk_re', 'Mk_im', 'quadrature_error'],
      rows,
  )
  return EXIT_OK


def cmd_decay(cfg: config_lib.RunConfig, out_dir: str) -> int:
  """Fits the decay of the rescaled boundary over the configured window."""
  f0 = cfg.initial_map()
  snapshot_times = cfg.snapshot_times()
  if snapshot_times is None:
    snapshot_times = list(
        rescaling.log_spaced_times(
            cfg.window[0], cfg.window[1], cfg.schedule.per_decade
        )
    )
  with debug.timed('decay evolve'):
    traj = pg_dynamics.evolve(
        f0, cfg.sign, cfg.t_end, cfg.evolve_options(), snapshot_times
    )
  debug.log_trajectory('decay', traj)
  m0_0 = moments.moments_exact(f0, 0, check_univalence=False).m0
  fit = rescaling.decay_fit(traj, m0_0, tuple(cfg.window))
  header, rows = reports.decay_table(fit)
  reports.write_csv(os.path.join(out_dir, 'decay.csv'), header, rows)

  last = max(i for i, t in enumerate(traj.times) if t <= cfg.window[1])
  boundary = rescaling.rescaled_boundary(
      traj.states[last], float(traj.times[last]), m0_0
  )
  reports.write_csv(
      os.path.join(out_dir, 'curve.csv'),
      ['x', 'y'],
      [[float(x), float(y)] for x, y in rescaling.rescaled_curve(boundary)],
  )
  history = rescaling.starlike_history(traj)
  reports.write_json(
      os.path.join(out_dir, 'decay.json'),
      {
          'exponent': fit.exponent,
          'exact_zero': fit.exact_zero,
          'starlike_from': history.t0,
          'order_nonincreasing': history.nonincreasing,
      },
  )
  if fit.exponent is not None:
    print(f'decay exponent {fit.exponent!r}')
  if traj.termination != pg_dynamics.TerminationReason.COMPLETED:
    return EXIT_EARLY_TERMINATION
  return EXIT_OK


def cmd_report(inputs: Sequence[str], column: str | None, out: str | None):
  for path in inputs:
    if not os.path.exists(path):
      raise FileNotFoundError(path)
  try:
    merged = reports.merge(inputs, column)
  except KeyError as e:
    raise errors.ConfigError('column', str(e)) from None
  if out is None:
    sys.stdout.write(merged)
  else:
    with open(out, 'wt', newline='') as f:
      f.write(merged)
  return EXIT_OK


_COMMANDS = {
    'evolve': cmd_evolve,
    'suction-sweep': cmd_suction_sweep,
    'perturb': cmd_perturb,
    'cascade': cmd_cascade,
    'moments': cmd_moments,
    'decay': cmd_decay,
}


def run(argv: Sequence[str]) -> int:
  """Runs one command; exceptions propagate."""
  args = _build_parser().parse_args(argv)
  if args.debug:
    logging.set_verbosity(logging.DEBUG)
  if args.command == 'report':
    return cmd_report(args.inputs, args.column, args.out)
  cfg = _load_config(args)
  out_dir = _prepare_output(cfg, argv)
  return _COMMANDS[args.command](cfg, out_dir)


def main(argv: Sequence[str] | None = None) -> int:
  """Console entry point mapping failures to exit codes.

  Numerical failures are matched first since `AliasingError` is also a
  `ValueError`. Any other simulator error counts as a numerical failure.
  """
  argv = list(sys.argv[1:] if argv is None else argv)
  try:
    return run(argv)
  except (errors.NumericalFailure, errors.AliasingError) as e:
    logging.error('Numerical failure: %s', e)
    print(f'error: {e}', file=sys.stderr)
    return EXIT_NUMERICAL_FAILURE
  except (
      errors.NotUnivalentError,
      errors.SingularIntegrandError,
      errors.NotStarlikeError,
      errors.NonRealBoundaryDataError,
      errors.DegenerateBoundaryError,
      errors.InsufficientDataError,
      errors.ConfigError,
      FileNotFoundError,
      ValueError,
  ) as e:
    logging.error('Invalid input: %s', e)
    print(f'error: {e}', file=sys.stderr)
    return EXIT_INVALID_INPUT
  except errors.HeleShawError as e:
    logging.error('Numerical failure: %s', e)
    print(f'error: {e}', file=sys.stderr)
    return EXIT_NUMERICAL_FAILURE


if __name__ == '__main__':
  sys.exit(main())
