# This file is part of ts_hvlab.
#
# Developed for the Vera Rubin Observatory Systems.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

__all__ = [
    "MIN_GRID_SIZE",
    "DEFAULT_GRID_SIZE",
    "DEFAULT_TOLERANCE",
    "DEFAULT_MAX_ITERATIONS",
    "DEFAULT_STEP_SIZE",
    "DEFAULT_SEED",
    "DEFAULT_NUM_EVENTS",
    "EVENT_CHUNK_SIZE",
    "CANONICAL_SETTINGS",
    "NUM_SIGMA_BOUND",
    "DEFAULT_HERMITE_ORDER",
    "ENERGY_CUTOFF_FRACTION",
    "MAX_LOW_ENERGY_WEIGHT",
    "DEFAULT_FOCK_DIMENSION",
    "MIN_FOCK_DIMENSION",
    "DEFAULT_MIN_PHASE_RADIUS",
    "DEFAULT_TAIL_THRESHOLD",
    "TAIL_FRACTION",
]

import math

# Smallest number of nodes of an angular grid
MIN_GRID_SIZE = 8

# Default number of nodes of an angular grid
DEFAULT_GRID_SIZE = 256

# Default tolerance of the profile solver (max norm of the residual)
DEFAULT_TOLERANCE = 1e-6

# Default number of refinement iterations of the profile solver
DEFAULT_MAX_ITERATIONS = 10000

# Fixed step of the projected gradient refinement
DEFAULT_STEP_SIZE = 0.05

# Root seed of the Monte Carlo when none is given
DEFAULT_SEED = 20241018

# Default number of Monte Carlo events
DEFAULT_NUM_EVENTS = 1000000

# Number of events in one random stream block. The block size is part of the
# stream layout: changing it changes the simulated events.
EVENT_CHUNK_SIZE = 65536

# Settings (alpha, alpha', beta, beta') in radian
CANONICAL_SETTINGS = (math.pi / 4.0, 0.0, math.pi / 8.0, 3.0 * math.pi / 8.0)

# Number of standard errors allowed above the local bound
NUM_SIGMA_BOUND = 5.0

# Gauss-Hermite order per axis of the k-space quadrature
DEFAULT_HERMITE_ORDER = 64

# Energy cutoff of the inverse Hamiltonian as a fraction of <H>
ENERGY_CUTOFF_FRACTION = 1e-6

# Largest probability allowed below the energy cutoff
MAX_LOW_ENERGY_WEIGHT = 1e-8

# Truncation dimension of the oscillator basis
DEFAULT_FOCK_DIMENSION = 128
MIN_FOCK_DIMENSION = 4

# Smallest |<C> + i<S>| for which the phase is defined
DEFAULT_MIN_PHASE_RADIUS = 0.1

# Largest probability allowed in the top basis states
DEFAULT_TAIL_THRESHOLD = 1e-8

# Fraction of the basis counted as the top (tail) states
TAIL_FRACTION = 0.1
