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
    "AngularGrid",
    "SampledAngularFunction",
    "make_grid",
    "mean",
    "circular_correlate",
    "spectral",
    "inverse_spectral",
    "harmonic_orders",
    "shift",
    "evaluate",
]

import math
import typing
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .constants import MIN_GRID_SIZE
from .exceptions import GridMismatchError, InvalidGridError


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid on the polarization-angle circle.

    The period is fixed to pi: the angles lambda and lambda + pi describe the
    same linear polarization.

    Parameters
    ----------
    n : `int`
        Number of nodes.

    Raises
    ------
    `InvalidGridError`
        If the number of nodes is less than MIN_GRID_SIZE.
    """

    n: int
    period: float = field(default=math.pi, init=False)

    def __post_init__(self) -> None:
        if (not isinstance(self.n, (int, np.integer))) or (self.n < MIN_GRID_SIZE):
            raise InvalidGridError(
                f"Grid size n={self.n} is not an integer >= {MIN_GRID_SIZE}."
            )

    @property
    def spacing(self) -> float:
        """Node spacing in radian."""
        return self.period / self.n

    @property
    def nodes(self) -> NDArray[np.float64]:
        """Node angles lambda_j = j * pi / n in radian."""
        return np.arange(self.n) * self.spacing


@dataclass(frozen=True, eq=False)
class SampledAngularFunction:
    """Real function sampled at the nodes of an angular grid.

    Parameters
    ----------
    grid : `AngularGrid`
        Grid.
    values : `numpy.ndarray`
        Values at the nodes.

    Raises
    ------
    `ValueError`
        If the number of values does not match the grid or any value is not
        finite.
    """

    grid: AngularGrid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"Expected {self.grid.n} values, got an array of shape {values.shape}."
            )

        if not np.all(np.isfinite(values)):
            raise ValueError("Sampled values must be finite.")

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(
        cls,
        grid: AngularGrid,
        func: typing.Callable[[NDArray[np.float64]], ArrayLike],
    ) -> SampledAngularFunction:
        """Sample a function at the grid nodes.

        Parameters
        ----------
        grid : `AngularGrid`
            Grid.
        func : `collections.abc.Callable`
            Vectorized function of the angle in radian.

        Returns
        -------
        `SampledAngularFunction`
            Sampled function.
        """

        values = np.broadcast_to(
            np.asarray(func(grid.nodes), dtype=np.float64), (grid.n,)
        )
        return cls(grid, values)

    def with_values(self, values: ArrayLike) -> SampledAngularFunction:
        """New function on the same grid."""
        return SampledAngularFunction(self.grid, np.asarray(values))

    def __mul__(self, other: SampledAngularFunction) -> SampledAngularFunction:
        _check_same_grid(self, other)
        return self.with_values(self.values * other.values)

    def __add__(self, other: SampledAngularFunction) -> SampledAngularFunction:
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: SampledAngularFunction) -> SampledAngularFunction:
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)


def make_grid(n: int) -> AngularGrid:
    """Make the angular grid.

    Parameters
    ----------
    n : `int`
        Number of nodes. A power of two is recommended.

    Returns
    -------
    `AngularGrid`
        Grid with the period of pi.

    Raises
    ------
    `InvalidGridError`
        If n < MIN_GRID_SIZE.
    """
    return AngularGrid(n)


def _check_same_grid(f: SampledAngularFunction, g: SampledAngularFunction) -> None:
    """Check the two functions share the grid.

    Raises
    ------
    `GridMismatchError`
        If the grids are different.
    """

    if f.grid != g.grid:
        raise GridMismatchError(
            f"Grid mismatch: n={f.grid.n} versus n={g.grid.n}."
        )


def mean(f: SampledAngularFunction) -> float:
    """Quadrature of the function under the normalized measure d(lambda)/pi.

    Parameters
    ----------
    f : `SampledAngularFunction`
        Function.

    Returns
    -------
    `float`
        Mean of the values.
    """
    return float(np.sum(f.values) / f.grid.n)


def circular_correlate(
    f: SampledAngularFunction, g: SampledAngularFunction
) -> SampledAngularFunction:
    """Circular correlation C(alpha) = integral of f(lambda) * g(lambda - alpha)
    under the normalized measure.

    Parameters
    ----------
    f : `SampledAngularFunction`
        First function.
    g : `SampledAngularFunction`
        Second function, shifted by alpha.

    Returns
    -------
    `SampledAngularFunction`
        Correlation sampled at the grid nodes alpha_m.

    Raises
    ------
    `GridMismatchError`
        If the grids are different.
    """

    _check_same_grid(f, g)

    n = f.grid.n
    spectrum = np.fft.fft(f.values) * np.conj(np.fft.fft(g.values))
    return f.with_values(np.fft.ifft(spectrum).real / n)


def harmonic_orders(grid: AngularGrid) -> NDArray[np.int64]:
    """Harmonic order k of each spectral coefficient (basis exp(2ik*lambda)).

    Parameters
    ----------
    grid : `AngularGrid`
        Grid.

    Returns
    -------
    `numpy.ndarray`
        Orders in the FFT layout: 0, 1, ..., -2, -1.
    """
    return np.rint(np.fft.fftfreq(grid.n, d=1.0 / grid.n)).astype(np.int64)


def spectral(f: SampledAngularFunction) -> NDArray[np.complex128]:
    """Fourier coefficients in the period-pi harmonic basis.

    The function is reconstructed as the sum of c_k * exp(2ik*lambda).

    Parameters
    ----------
    f : `SampledAngularFunction`
        Function.

    Returns
    -------
    `numpy.ndarray`
        Complex coefficients ordered as in `harmonic_orders`.
    """
    return np.fft.fft(f.values) / f.grid.n


def inverse_spectral(
    grid: AngularGrid, coefficients: ArrayLike
) -> SampledAngularFunction:
    """Inverse of `spectral`.

    Parameters
    ----------
    grid : `AngularGrid`
        Grid.
    coefficients : `numpy.ndarray`
        Complex coefficients ordered as in `harmonic_orders`.

    Returns
    -------
    `SampledAngularFunction`
        Real part of the reconstruction.

    Raises
    ------
    `ValueError`
        If the number of coefficients does not match the grid.
    """

    coefficients = np.asarray(coefficients, dtype=np.complex128)
    if coefficients.shape != (grid.n,):
        raise ValueError(
            f"Expected {grid.n} coefficients, got shape {coefficients.shape}."
        )

    return SampledAngularFunction(grid, np.fft.ifft(coefficients * grid.n).real)


def shift(f: SampledAngularFunction, angle: float) -> SampledAngularFunction:
    """Rotate the function: g(lambda) = f(lambda - angle).

    The rotation is exact for the band-limited interpolant of the samples.

    Parameters
    ----------
    f : `SampledAngularFunction`
        Function.
    angle : `float`
        Rotation angle in radian.

    Returns
    -------
    `SampledAngularFunction`
        Rotated function.
    """

    ramp = np.exp(-2j * harmonic_orders(f.grid) * angle)
    return inverse_spectral(f.grid, spectral(f) * ramp)


def evaluate(f: SampledAngularFunction, angles: ArrayLike) -> NDArray[np.float64]:
    """Evaluate the band-limited interpolant of the samples at any angle.

    Parameters
    ----------
    f : `SampledAngularFunction`
        Function.
    angles : `float` or `numpy.ndarray`
        Angles in radian.

    Returns
    -------
    `numpy.ndarray`
        Interpolated values with the shape of the angles.
    """

    angles = np.asarray(angles, dtype=np.float64)
    phases = np.exp(2j * np.multiply.outer(angles, harmonic_orders(f.grid)))
    return (phases @ spectral(f)).real
