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
"""In-memory cache of trajectories.

Evolutions are deterministic, so a trajectory is fully determined by its run
configuration: initial map, flow sign, final time, options and snapshot
schedule. The cache key is the xxhash of the canonical JSON of that
configuration. Perturbation sweeps use it to evolve their common base map
once.
"""

from collections.abc import Callable, Sequence
import dataclasses
import json
import threading
from typing import Any, Optional

from absl import logging
import cachetools
from hele_shaw import pg_dynamics
from hele_shaw import series_core
import xxhash


# Using CacheMiss = object() as a sentinel value doesn't play nicely with typing
class CacheMiss:
  """Sentinel value to represent a cache miss."""


CacheMissT = type[CacheMiss]


@dataclasses.dataclass(frozen=True)
class RunKey:
  """Everything that determines a trajectory."""

  f0: series_core.CoefficientSeries
  sign: pg_dynamics.FlowSign
  t_end: float
  opts: pg_dynamics.EvolveOptions
  snapshot_times: tuple[float, ...] | None = None

  def to_dict(self) -> dict[str, Any]:
    return {
        'f0': self.f0.to_pairs(),
        'sign': int(self.sign),
        't_end': float(self.t_end),
        'opts': dataclasses.asdict(self.opts),
        'snapshot_times': (
            None
            if self.snapshot_times is None
            else [float(t) for t in self.snapshot_times]
        ),
    }


def default_run_hash(key: RunKey) -> str:
  """Deterministic hash of a run configuration."""
  canonical_representation_str = json.dumps(key.to_dict(), sort_keys=True)
  hasher = xxhash.xxh128()
  hasher.update(canonical_representation_str.encode('utf-8'))
  return hasher.hexdigest()


class TrajectoryCache:
  """An in-memory cache of trajectories with TTL and size limits."""

  def __init__(
      self,
      *,
      ttl_hours: float = 12,
      max_items: int = 64,
      base: Optional['TrajectoryCache'] = None,
      hash_fn: Callable[[RunKey], str | None] | None = None,
  ):
    """Initializes the cache.

    Args:
      ttl_hours: Time-to-live for cache items in hours.
      max_items: Maximum number of items in the cache. Must be positive.
      base: share the storage of another cache.
      hash_fn: Function to convert a run key into a string key. If None,
        `default_run_hash` is used. If it returns None, the run is not
        cacheable.
    """
    if max_items <= 0:
      raise ValueError(f'max_items must be positive, got: {max_items}')
    self._hash_fn = hash_fn if hash_fn is not None else default_run_hash
    if base is not None:
      self._cache = base._cache
      self._lock = base._lock
    else:
      ttl_seconds = ttl_hours * 3600
      self._cache = cachetools.TTLCache(
          maxsize=max_items,
          ttl=ttl_seconds if ttl_seconds > 0 else float('inf'),
      )
      self._lock = threading.Lock()

  def with_key_prefix(self, prefix: str) -> 'TrajectoryCache':
    """Returns a view of the same storage with prefixed keys."""
    original_hash_fn = self._hash_fn

    def prefixed_hash_fn(key: RunKey) -> str | None:
      string_key = original_hash_fn(key)
      return f'{prefix}{string_key}' if string_key is not None else None

    return TrajectoryCache(base=self, hash_fn=prefixed_hash_fn)

  def _get_string_key(self, key: RunKey) -> str | None:
    try:
      return self._hash_fn(key)
    except Exception:  # pylint: disable=broad-exception-caught
      return None

  def __len__(self) -> int:
    with self._lock:
      return len(self._cache)

  def lookup(self, key: RunKey) -> pg_dynamics.Trajectory | CacheMissT:
    string_key = self._get_string_key(key)
    if string_key is None:
      return CacheMiss
    with self._lock:
      value = self._cache.get(string_key, CacheMiss)
      if value is not CacheMiss and not isinstance(
          value, pg_dynamics.Trajectory
      ):
        del self._cache[string_key]
        return CacheMiss
    return value

  def put(self, key: RunKey, value: pg_dynamics.Trajectory) -> None:
    string_key = self._get_string_key(key)
    if string_key is None:
      return
    with self._lock:
      self._cache[string_key] = value

  def remove(self, key: RunKey) -> None:
    string_key = self._get_string_key(key)
    if string_key is None:
      return
    with self._lock:
      self._cache.pop(string_key, None)


def evolve_cached(
    cache: TrajectoryCache | None,
    f0: series_core.CoefficientSeries,
    sign: pg_dynamics.FlowSign | int,
    t_end: float,
    opts: pg_dynamics.EvolveOptions | None = None,
    snapshot_times: Sequence[float] | None = None,
) -> pg_dynamics.Trajectory:
  """`pg_dynamics.evolve` behind an optional cache."""
  opts = opts or pg_dynamics.EvolveOptions()
  sign = pg_dynamics.FlowSign.parse(sign)
  if cache is None:
    return pg_dynamics.evolve(f0, sign, t_end, opts, snapshot_times)
  key = RunKey(
      f0=f0,
      sign=sign,
      t_end=t_end,
      opts=opts,
      snapshot_times=(
          None if snapshot_times is None else tuple(snapshot_times)
      ),
  )
  traj = cache.lookup(key)
  if traj is not CacheMiss:
    logging.info('Trajectory cache hit.')
    return traj
  traj = pg_dynamics.evolve(f0, sign, t_end, opts, snapshot_times)
  cache.put(key, traj)
  return traj
