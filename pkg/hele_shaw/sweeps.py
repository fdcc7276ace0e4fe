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
"""Runs independent engines concurrently.

Every evolution is a pure function of its inputs, so members of a parameter
sweep share no mutable state. They are dispatched to worker threads with
`asyncio.to_thread` inside a `context.context()` task group: results come
back in input order and the first failure cancels the remaining members and
is re-raised as is.

```python
from hele_shaw import sweeps

t_stars = sweeps.apply_sync(lambda d: run(d).t_star, [0.05, 0.01, 0.001])
```
"""

import asyncio
from collections.abc import Callable, Iterable, Sequence
from typing import TypeVar

from absl import logging
from hele_shaw import context

_T = TypeVar('_T')
_R = TypeVar('_R')


async def run_parallel(fns: Sequence[Callable[[], _R]]) -> list[_R]:
  """Runs blocking callables in worker threads; results in input order."""
  async with context.context():
    tasks = [context.create_task(asyncio.to_thread(fn)) for fn in fns]
  return [task.result() for task in tasks]


def apply_sync(fn: Callable[[_T], _R], items: Iterable[_T]) -> list[_R]:
  """Applies `fn` to every item concurrently.

  Args:
    fn: a blocking function of one item.
    items: the inputs.

  Returns:
    `[fn(item) for item in items]`, computed in worker threads.
  """
  items = list(items)
  logging.info('Running a sweep of %d members.', len(items))
  fns = [lambda item=item: fn(item) for item in items]
  return asyncio.run(run_parallel(fns))
