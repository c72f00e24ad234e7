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
    "StokesVector",
    "unpolarized",
    "linearly_polarized",
    "leakage_to_depolarization",
    "linear_polarizer_mueller",
    "mueller_chain",
]

import math
import typing
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .exceptions import UnphysicalStokesError

# Relative slack of the polarization cone check
CONE_SLACK = 1e-12


@dataclass(frozen=True)
class StokesVector:
    """Stokes vector (I, Q, U, V) of a light beam.

    Parameters
    ----------
    intensity : `float`
        Intensity I.
    q : `float`
        Linear polarization along the 0/90 degree axes.
    u : `float`
        Linear polarization along the 45/135 degree axes.
    v : `float`
        Circular polarization.
    """

    intensity: float
    q: float = 0.0
    u: float = 0.0
    v: float = 0.0

    @classmethod
    def from_array(cls, values: typing.Sequence[float]) -> StokesVector:
        intensity, q, u, v = (float(value) for value in values)
        return cls(intensity, q, u, v)

    def to_array(self) -> NDArray[np.float64]:
        return np.array([self.intensity, self.q, self.u, self.v])

    def is_physical(self) -> bool:
        """The vector is inside the polarization cone.

        Returns
        -------
        `bool`
            True if I >= 0 and Q^2 + U^2 + V^2 <= I^2.
        """

        if (self.intensity < 0.0) or (not np.all(np.isfinite(self.to_array()))):
            return False

        polarized = self.q**2 + self.u**2 + self.v**2
        return polarized <= self.intensity**2 * (1.0 + CONE_SLACK)

    def check_physical(self) -> None:
        """Check the vector is physical.

        Raises
        ------
        `UnphysicalStokesError`
            If the vector is outside the polarization cone.
        """

        if not self.is_physical():
            raise UnphysicalStokesError(
                f"Stokes vector {self.to_array().tolist()} is not physical."
            )


def unpolarized(intensity: float = 1.0) -> StokesVector:
    """Unpolarized beam."""
    return StokesVector(intensity)


def linearly_polarized(angle: float, intensity: float = 1.0) -> StokesVector:
    """Fully linearly polarized beam.

    Parameters
    ----------
    angle : `float`
        Polarization angle in radian.
    intensity : `float`, optional
        Intensity. (the default is 1.0)

    Returns
    -------
    `StokesVector`
        Beam polarized along the angle.
    """

    return StokesVector(
        intensity,
        intensity * math.cos(2.0 * angle),
        intensity * math.sin(2.0 * angle),
        0.0,
    )


def leakage_to_depolarization(leakage: float) -> float:
    """Weight of the isotropic attenuator in a leaky polarizer.

    A pair of leaky polarizers with this weight transmits unpolarized light
    with the generalized Malus law of the same leakage, once normalized to
    the parallel setting.

    Parameters
    ----------
    leakage : `float`
        Leakage epsilon of the generalized Malus law, in [0, 1).

    Returns
    -------
    `float`
        Weight eta in [0, 1).

    Raises
    ------
    `ValueError`
        If the leakage is not in [0, 1).
    """

    if not (0.0 <= leakage < 1.0):
        raise ValueError(f"Leakage epsilon={leakage} not in range [0, 1).")

    return 1.0 - math.sqrt((1.0 - leakage) / (1.0 + leakage))


def linear_polarizer_mueller(axis: float, leakage: float = 0.0) -> NDArray[np.float64]:
    """Mueller matrix of a linear polarizer.

    Parameters
    ----------
    axis : `float`
        Transmission axis in radian.
    leakage : `float`, optional
        Leakage epsilon. The ideal element is mixed with an isotropic
        attenuator of 1/2. (the default is 0.0)

    Returns
    -------
    `numpy.ndarray`
        4x4 Mueller matrix.

    Raises
    ------
    `ValueError`
        If the leakage is not in [0, 1).
    """

    c = math.cos(2.0 * axis)
    s = math.sin(2.0 * axis)
    ideal = 0.5 * np.array(
        [
            [1.0, c, s, 0.0],
            [c, c * c, c * s, 0.0],
            [s, c * s, s * s, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )

    eta = leakage_to_depolarization(leakage)
    if eta == 0.0:
        return ideal

    return (1.0 - eta) * ideal + 0.5 * eta * np.eye(4)


def mueller_chain(
    s_in: StokesVector, angles: typing.Sequence[float], leakage: float = 0.0
) -> tuple[StokesVector, float]:
    """Propagate a beam through polarizers in the given order.

    Parameters
    ----------
    s_in : `StokesVector`
        Input beam.
    angles : `list` [`float`]
        Axes of the polarizers in radian, first crossed first.
    leakage : `float`, optional
        Leakage epsilon of every polarizer. (the default is 0.0)

    Returns
    -------
    s_out : `StokesVector`
        Output beam.
    `float`
        Fraction I_out / I_in of the transmitted intensity.

    Raises
    ------
    `UnphysicalStokesError`
        If the input beam is not physical.
    `ValueError`
        If there is no polarizer or the input intensity is zero.
    """

    s_in.check_physical()

    if len(angles) == 0:
        raise ValueError("At least one polarizer angle is required.")

    if s_in.intensity == 0.0:
        raise ValueError("Input intensity is zero.")

    vector = s_in.to_array()
    for angle in angles:
        vector = linear_polarizer_mueller(angle, leakage=leakage) @ vector

    s_out = StokesVector.from_array(vector)
    return s_out, s_out.intensity / s_in.intensity
