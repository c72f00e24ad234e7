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
    "ChainMode",
    "CommandName",
    "OutputFormat",
    "SolverStage",
    "StreamRole",
    "ExitCode",
]

from enum import Enum, IntEnum, auto


class ChainMode(Enum):
    """Model of the light transfer through a chain of polarizers."""

    # Polarization of the photon is not changed by a polarizer
    Persistent = "persistent"
    # Polarization is reset to the axis of the polarizer after transmission
    Collapse = "collapse"
    # Ideal Mueller matrices acting on unpolarized Stokes light
    Mueller = "mueller"


class CommandName(Enum):
    """Command of the executable."""

    Deconvolve = "deconvolve"
    Chain = "chain"
    Chsh = "chsh"
    Scan = "scan"
    Packet = "packet"
    Osc = "osc"


class OutputFormat(Enum):
    """Format of the summary output."""

    Csv = "csv"
    Json = "json"


class SolverStage(IntEnum):
    """Stage of the profile solver that produced the profile."""

    Spectral = 1
    ProjectedGradient = auto()


class StreamRole(IntEnum):
    """Role of a random stream in one block of Monte Carlo events.

    Notes
    -----
    The value is part of the stream key; do not renumber.
    """

    Source = 0
    WingA = auto()
    WingB = auto()
    ImpactA = auto()
    ImpactB = auto()


class ExitCode(IntEnum):
    """Exit status of the executable."""

    Success = 0
    Failure = auto()
    InvalidInput = auto()
