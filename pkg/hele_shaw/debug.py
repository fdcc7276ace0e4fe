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
"""Utilities to add more debug information to runs."""

from collections.abc import Iterator
import contextlib
import time

from absl import logging
from hele_shaw import pg_dynamics


class Timer:
  """Wall-clock duration of a block, available after it exits."""

  def __init__(self):
    self.start = time.perf_counter()
    self.elapsed = 0.0


@contextlib.contextmanager
def timed(message: str) -> Iterator[Timer]:
  """Logs the wall-clock duration of the enclosed block at INFO level."""
  timer = Timer()
  try:
    yield timer
  finally:
    timer.elapsed = time.perf_counter() - timer.start
    logging.info('%s: %.3f s', message, timer.elapsed)


def trajectory_summary(traj: pg_dynamics.Trajectory) -> str:
  """One line describing a trajectory."""
  worst_residual = max(d.degree_residual for d in traj.diagnostics)
  worst_pg = max(d.pg_residual for d in traj.diagnostics)
  line = (
      f'{len(traj)} states to t={traj.final_time:.6g} ({traj.termination}),'
      f' degree {traj.degree},'
      f' a1={traj.final_state.linear_coefficient.real:.9g},'
      f' max tail {worst_residual:.2e}, max PG residual {worst_pg:.2e},'
      f' {traj.nfev} evaluations'
  )
  if traj.blowup is not None:
    line += f', t*={traj.blowup.t_star:.6g}'
  return line


def log_trajectory(message: str, traj: pg_dynamics.Trajectory) -> None:
  logging.info('%s: %s', message, trajectory_summary(traj))
