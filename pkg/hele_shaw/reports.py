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
"""CSV and JSON outputs of the experiments.

Floats are written with `repr`, the shortest decimal string that parses back
to the same double, so outputs are byte-deterministic for a fixed run and
can be compared as golden files. Timestamps never go into data files; they
live in a separate `metadata.json`.
"""

from collections.abc import Iterable, Sequence
import csv
import dataclasses
import datetime
import io
import json
import math
import os
from typing import Any

import dataclasses_json
from hele_shaw import errors
from hele_shaw import moments
from hele_shaw import pg_dynamics
from hele_shaw.core import perturbation_lab
from hele_shaw.core import rescaling

Row = Sequence[Any]

# Exponent of the weighted decay column of merged decay reports.
DECAY_REPORT_POWER = 1.2


def format_value(value: Any) -> str:
  """Round-trip decimal text of a cell."""
  if isinstance(value, bool) or value is None:
    return '' if value is None else str(value).lower()
  if isinstance(value, float):
    return repr(value) if math.isfinite(value) else str(value)
  return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Row]) -> str:
  buffer = io.StringIO()
  writer = csv.writer(buffer, lineterminator='\n')
  writer.writerow(header)
  for row in rows:
    writer.writerow([format_value(v) for v in row])
  return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Row]) -> None:
  with open(path, 'wt', newline='') as f:
    f.write(to_csv(header, rows))


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
  """Reads a CSV table written by `write_csv`.

  Raises:
    ConfigError: if the file has no header row.
  """
  with open(path, 'rt', newline='') as f:
    reader = csv.reader(f)
    header = next(reader, None)
    if header is None:
      raise errors.ConfigError('inputs', f'{path} is empty')
    return header, [row for row in reader]


def trajectory_table(
    traj: pg_dynamics.Trajectory,
    K: int = 5,  # pylint: disable=invalid-name
) -> tuple[list[str], list[Row]]:
  """Columns t, a_k re/im, M0, M_k re/im, min_fprime, pg_residual, step_size."""
  degree = traj.degree
  header = ['t']
  for k in range(1, degree + 1):
    header += [f'a{k}_re', f'a{k}_im']
  header.append('M0')
  for k in range(1, K + 1):
    header += [f'M{k}_re', f'M{k}_im']
  header += ['min_fprime', 'pg_residual', 'step_size']
  rows = []
  for t, state, diag in zip(traj.times, traj.states, traj.diagnostics):
    row = [float(t)]
    for c in state.padded(degree + 1)[1:]:
      row += [float(c.real), float(c.imag)]
    m = moments.moments_exact(state, K, check_univalence=False)
    row.append(m.m0)
    for k in range(1, K + 1):
      row += [float(m.values[k].real), float(m.values[k].imag)]
    row += [
        float(diag.min_fprime),
        float(diag.pg_residual),
        float(diag.step_size),
    ]
    rows.append(row)
  return header, rows


def moment_table(
    traj: pg_dynamics.Trajectory,
    K: int = 5,  # pylint: disable=invalid-name
) -> tuple[list[str], list[Row]]:
  """Columns t, M0, Mk_re, Mk_im and the conservation deltas."""
  dict_rows = moments.moment_table(traj, K)
  header = list(dict_rows[0])
  return header, [[row[c] for c in header] for row in dict_rows]


DECAY_HEADER = (
    't',
    'sup_rbar',
    'sup_d1',
    'sup_d2',
    'sup_c2',
    'max_kappa_dev',
    'area_check',
    'noise_floor',
)


def decay_table(fit: rescaling.DecayFit) -> tuple[list[str], list[Row]]:
  rows = [[getattr(r, c) for c in DECAY_HEADER] for r in fit.rows]
  return list(DECAY_HEADER), rows


def survival_table(
    rows: Sequence[perturbation_lab.SurvivalRow],
) -> tuple[list[str], list[Row]]:
  header = ['delta', 't_star', 'remaining_fraction', 'termination']
  return header, [
      [r.delta, r.t_star, r.remaining_fraction, str(r.termination)]
      for r in rows
  ]


def perturbation_table(
    deltas: Sequence[float],
    tables: Sequence[perturbation_lab.DeviationTable],
) -> tuple[list[str], list[Row]]:
  jmax = tables[0].per_time.shape[1] - 1 if tables else 0
  header = ['delta'] + [f'sup_dev_n{n}' for n in range(jmax + 1)]
  rows = [
      [float(d)] + [float(v) for v in table.sup]
      for d, table in zip(deltas, tables)
  ]
  return header, rows


def cascade_table(
    report: perturbation_lab.CascadeReport,
) -> tuple[list[str], list[Row]]:
  header = ['degree', 'next_degree', 'e_k', 'ratio', 'final_deviation']
  ratios = (math.nan,) + report.ratios
  rows = [
      [lo, hi, e, ratio, final]
      for lo, hi, e, ratio, final in zip(
          report.degrees,
          report.degrees[1:],
          report.errors,
          ratios,
          report.final_deviation,
      )
  ]
  return header, rows


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class RunSummary:
  """JSON summary of one evolution."""

  final_time: float
  termination: str
  final_state: list[list[float]]
  t_star: float | None
  max_moment_deltas: list[float]
  max_area_delta: float
  max_degree_residual: float
  max_pg_residual: float
  min_fprime: float


def run_summary(
    traj: pg_dynamics.Trajectory,
    K: int = 5,  # pylint: disable=invalid-name
) -> RunSummary:
  report = moments.conservation_report(traj, K)
  return RunSummary(
      final_time=traj.final_time,
      termination=str(traj.termination),
      final_state=traj.final_state.to_pairs(),
      t_star=traj.blowup.t_star if traj.blowup is not None else None,
      max_moment_deltas=[float(v) for v in report.max_moment_deltas],
      max_area_delta=report.max_area_delta,
      max_degree_residual=max(d.degree_residual for d in traj.diagnostics),
      max_pg_residual=max(d.pg_residual for d in traj.diagnostics),
      min_fprime=min(d.min_fprime for d in traj.diagnostics),
  )


def write_json(path: str, payload: dict[str, Any]) -> None:
  with open(path, 'wt') as f:
    json.dump(payload, f, indent=2, sort_keys=True)
    f.write('\n')


def write_metadata(out_dir: str, command: str, argv: Sequence[str]) -> None:
  """Writes the run's provenance next to its data files."""
  from hele_shaw import __version__  # pylint: disable=g-import-not-at-top

  write_json(
      os.path.join(out_dir, 'metadata.json'),
      {
          'command': command,
          'argv': list(argv),
          'version': __version__,
          'created': datetime.datetime.now(datetime.timezone.utc).isoformat(),
      },
  )


def merge(paths: Sequence[str], column: str | None = None) -> str:
  """Merges run outputs into one CSV without recomputation.

  Args:
    paths: existing CSV outputs, each with a leading `t` column (or `delta`
      for sweeps).
    column: with several inputs, keep only this column of each input.

  Returns:
    A single input is passed through unchanged, except for decay tables which
    gain the weighted column `t^1.2 sup_c2`. Several inputs are joined on
    their first column, keeping the keys common to all inputs.
  """
  if len(paths) == 1:
    header, rows = read_csv(paths[0])
    if 'sup_c2' not in header:
      with open(paths[0], 'rt', newline='') as f:
        return f.read()
    t_col, c_col = header.index('t'), header.index('sup_c2')
    out = []
    for row in rows:
      t, sup = float(row[t_col]), float(row[c_col])
      out.append([t, sup, t**DECAY_REPORT_POWER * sup])
    return to_csv(['t', 'sup_c2', f't^{DECAY_REPORT_POWER}*sup_c2'], out)

  tables = [read_csv(p) for p in paths]
  names = []
  for i, p in enumerate(paths):
    stem = os.path.splitext(os.path.basename(p))[0]
    names.append(stem if stem not in names else f'{stem}_{i}')
  key = tables[0][0][0]
  keyed = []
  for header, rows in tables:
    if column is None:
      picks = list(range(1, len(header)))
    else:
      if column not in header:
        raise KeyError(f'Column {column!r} missing from an input.')
      picks = [header.index(column)]
    values = {row[0]: [row[j] for j in picks] for row in rows}
    keyed.append((values, header, picks))
  common = [row[0] for row in tables[0][1]]
  common = [k for k in common if all(k in table for table, _, _ in keyed)]
  header = [key]
  for name, (_, h, picks) in zip(names, keyed):
    if column is None:
      header += [f'{name}.{h[j]}' for j in picks]
    else:
      header.append(name)
  rows = []
  for k in common:
    row = [k]
    for table, _, _ in keyed:
      row += table[k]
    rows.append(row)
  return to_csv(header, rows)
