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

from __future__ import annotations

__all__ = [
    "InvalidGridError",
    "GridMismatchError",
    "InfeasibleTargetError",
    "UnphysicalStokesError",
    "EvolutionDirectionError",
    "UndefinedImpactParameterError",
    "TailWeightError",
    "ConvergenceError",
    "SingularInverseError",
    "UndefinedPhaseError",
]

import typing

if typing.TYPE_CHECKING:
    from .polarizer import TransferProfile


class InvalidGridError(ValueError):
    """The angular grid has too few nodes."""


class GridMismatchError(ValueError):
    """Two sampled functions do not share the same grid."""


class InfeasibleTargetError(ValueError):
    """The Malus target is not the autocorrelation of any real profile."""


class UnphysicalStokesError(ValueError):
    """The Stokes vector is outside of the polarization cone."""


class EvolutionDirectionError(ValueError):
    """The evolution is requested toward the past."""


class UndefinedImpactParameterError(ValueError):
    """The packet has no mean momentum to define an impact parameter."""


class TailWeightError(ValueError):
    """The state has too much weight near the truncation edge."""


class ConvergenceError(RuntimeError):
    """The profile solver did not reach the tolerance.

    Parameters
    ----------
    message : `str`
        Message.
    residual : `float`
        Best max-norm residual of the autocorrelation.
    iterations : `int`
        Number of refinement iterations done.
    profile : `TransferProfile`
        Best box-feasible profile found.
    scale : `float`, optional
        Scale of the fitted target. (the default is 1.0)

    Attributes
    ----------
    residual : `float`
        Best max-norm residual of the autocorrelation.
    iterations : `int`
        Number of refinement iterations done.
    profile : `TransferProfile`
        Best box-feasible profile found.
    scale : `float`
        Scale of the fitted target.
    """

    def __init__(
        self,
        message: str,
        residual: float,
        iterations: int,
        profile: TransferProfile,
        scale: float = 1.0,
    ) -> None:
        super().__init__(message)

        self.residual = residual
        self.iterations = iterations
        self.profile = profile
        self.scale = scale


class SingularInverseError(RuntimeError):
    """The packet has too much weight near zero energy for H^-1."""


class UndefinedPhaseError(RuntimeError):
    """The oscillator state has no well-defined phase."""
