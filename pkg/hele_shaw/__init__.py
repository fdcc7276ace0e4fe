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

"""Spectral simulation of Hele-Shaw flows by Polubarinova-Galin dynamics."""

__version__ = '0.1.0'

from . import errors
from . import geometry
from . import moments
from . import pg_dynamics as pg_dynamics_
from . import poisson_kernel
from . import series_core as series_core_
from . import core

# Aliases
CoefficientSeries = series_core_.CoefficientSeries
PowerSeries = series_core_.PowerSeries
EvolveOptions = pg_dynamics_.EvolveOptions
FlowSign = pg_dynamics_.FlowSign
Trajectory = pg_dynamics_.Trajectory
TerminationReason = pg_dynamics_.TerminationReason

evolve = pg_dynamics_.evolve
velocity = pg_dynamics_.velocity
detect_blowup = pg_dynamics_.detect_blowup
