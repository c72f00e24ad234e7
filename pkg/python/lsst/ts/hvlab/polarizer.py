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
    "TransferProfile",
    "MalusTarget",
    "SolverOptions",
    "SolverReport",
    "cos2_profile",
    "indicator_profile",
    "constant_profile",
    "generalized_malus",
    "malus_target",
    "target_from_profile",
    "autocorrelation",
    "residual_max_norm",
    "pair_transmission",
    "solve_profile",
    "solve_profile_with_report",
    "chain_transmission",
    "quantum_chain_transmission",
    "belifante_contrast",
]

import logging
import math
import typing
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .angular_grid import (
    AngularGrid,
    SampledAngularFunction,
    circular_correlate,
    evaluate,
    inverse_spectral,
    mean,
    shift,
    spectral,
)
from .constants import DEFAULT_MAX_ITERATIONS, DEFAULT_STEP_SIZE, DEFAULT_TOLERANCE
from .enums import ChainMode, SolverStage
from .exceptions import ConvergenceError, InfeasibleTargetError
from .stokes import mueller_chain, unpolarized

# Slack of the checks of sampled probabilities against [0, 1]
BOX_SLACK = 1e-12

# Largest allowed |M(alpha) - M(-alpha)| of a target
EVENNESS_TOLERANCE = 1e-9

# Relative size below which a Fourier coefficient of the target is zero
SPECTRAL_FLOOR = 1e-14


@dataclass(frozen=True)
class TransferProfile:
    """Transmission probability p(lambda) of a polarizer.

    Parameters
    ----------
    f : `SampledAngularFunction`
        Sampled probability. Values within BOX_SLACK of [0, 1] are clipped.

    Raises
    ------
    `ValueError`
        If any value is outside of [0, 1].
    """

    f: SampledAngularFunction

    def __post_init__(self) -> None:
        values = self.f.values
        if (values.min() < -BOX_SLACK) or (values.max() > 1.0 + BOX_SLACK):
            raise ValueError(
                "Transfer profile not in range [0, 1]: "
                f"min={values.min()}, max={values.max()}."
            )

        object.__setattr__(self, "f", self.f.with_values(np.clip(values, 0.0, 1.0)))

    @classmethod
    def from_values(cls, grid: AngularGrid, values: ArrayLike) -> TransferProfile:
        return cls(SampledAngularFunction(grid, np.asarray(values)))

    @property
    def grid(self) -> AngularGrid:
        return self.f.grid

    @property
    def values(self) -> NDArray[np.float64]:
        return self.f.values

    def at(self, angles: ArrayLike) -> NDArray[np.float64]:
        """Value of the nearest node at each angle.

        Parameters
        ----------
        angles : `float` or `numpy.ndarray`
            Angles in radian, any range.

        Returns
        -------
        `numpy.ndarray`
            Probabilities.
        """

        n = self.grid.n
        index = np.rint(np.asarray(angles) * (n / math.pi)).astype(np.int64) % n
        return self.values[index]


@dataclass(frozen=True)
class MalusTarget:
    """Pair transmission M(alpha) that a profile has to reproduce.

    Parameters
    ----------
    epsilon : `float` or None
        Leakage of the generalized Malus law, None when the curve does not
        come from that law.
    curve : `SampledAngularFunction`
        Sampled M(alpha).

    Raises
    ------
    `ValueError`
        If the curve is outside of [0, 1] or is not even in alpha.
    """

    epsilon: float | None
    curve: SampledAngularFunction

    def __post_init__(self) -> None:
        values = self.curve.values
        if (values.min() < -BOX_SLACK) or (values.max() > 1.0 + BOX_SLACK):
            raise ValueError("Malus target not in range [0, 1].")

        mirrored = np.roll(values[::-1], 1)
        if np.max(np.abs(values - mirrored)) > EVENNESS_TOLERANCE:
            raise ValueError("Malus target is not even in alpha.")

    @property
    def grid(self) -> AngularGrid:
        return self.curve.grid


@dataclass(frozen=True)
class SolverOptions:
    """Options of the profile solver.

    Parameters
    ----------
    tolerance : `float`, optional
        Max norm of the autocorrelation residual to reach.
        (the default is DEFAULT_TOLERANCE)
    max_iterations : `int`, optional
        Maximum iterations of the projected gradient refinement.
        (the default is DEFAULT_MAX_ITERATIONS)
    step : `float`, optional
        Fixed gradient step. (the default is DEFAULT_STEP_SIZE)
    normalize : `bool`, optional
        Fit the largest multiple s * M (0 < s <= 1) of the target whose
        spectral solution peaks at most at 1, instead of M itself. The pair
        transmission normalized to the parallel setting is unchanged by s.
        (the default is False)
    """

    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    step: float = DEFAULT_STEP_SIZE
    normalize: bool = False

    def __post_init__(self) -> None:
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance={self.tolerance} must be > 0.")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations={self.max_iterations} must be >= 0.")
        if self.step <= 0.0:
            raise ValueError(f"step={self.step} must be > 0.")


@dataclass(frozen=True)
class SolverReport:
    """Outcome of the profile solver.

    Parameters
    ----------
    stage : `SolverStage`
        Stage that produced the profile.
    iterations : `int`
        Refinement iterations done.
    residual : `float`
        Max norm of autocorr(p) - s * M.
    feasible : `bool`
        The residual is within the tolerance.
    scale : `float`
        Scale s of the fitted target (1 unless normalized).
    """

    stage: SolverStage
    iterations: int
    residual: float
    feasible: bool
    scale: float = 1.0


def cos2_profile(grid: AngularGrid) -> TransferProfile:
    """Profile p(lambda) = cos^2(lambda)."""
    return TransferProfile(
        SampledAngularFunction.from_callable(grid, lambda x: np.cos(x) ** 2)
    )


def indicator_profile(grid: AngularGrid, half_width: float) -> TransferProfile:
    """Profile equal to 1 where |lambda| < half_width (mod pi), 0 elsewhere.

    Parameters
    ----------
    grid : `AngularGrid`
        Grid.
    half_width : `float`
        Half width of the transmitting window in radian.

    Returns
    -------
    `TransferProfile`
        Profile.
    """

    nodes = grid.nodes
    distance = np.minimum(nodes, math.pi - nodes)
    return TransferProfile.from_values(grid, (distance < half_width).astype(float))


def constant_profile(grid: AngularGrid, value: float) -> TransferProfile:
    """Profile with the same value everywhere."""
    return TransferProfile.from_values(grid, np.full(grid.n, float(value)))


def generalized_malus(alpha: ArrayLike, epsilon: float) -> typing.Any:
    """Generalized Malus law M(alpha) = (1 - epsilon) cos^2(alpha) + epsilon.

    Parameters
    ----------
    alpha : `float` or `numpy.ndarray`
        Angle between the polarizer axes in radian.
    epsilon : `float`
        Leakage in [0, 1).

    Returns
    -------
    `float` or `numpy.ndarray`
        Transmission fraction in [epsilon, 1].

    Raises
    ------
    `ValueError`
        If epsilon is not in [0, 1).
    """

    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"Leakage epsilon={epsilon} not in range [0, 1).")

    value = (1.0 - epsilon) * np.cos(alpha) ** 2 + epsilon
    return float(value) if np.ndim(value) == 0 else value


def malus_target(grid: AngularGrid, epsilon: float) -> MalusTarget:
    """Generalized Malus law sampled on the grid."""
    return MalusTarget(
        epsilon,
        SampledAngularFunction.from_callable(
            grid, lambda x: generalized_malus(x, epsilon)
        ),
    )


def autocorrelation(p: TransferProfile) -> SampledAngularFunction:
    """Pair transmission of two identical polarizers at the grid nodes."""
    return circular_correlate(p.f, p.f)


def target_from_profile(p: TransferProfile) -> MalusTarget:
    """Target reproduced exactly by the profile."""
    return MalusTarget(None, autocorrelation(p))


def residual_max_norm(p: TransferProfile, target: MalusTarget) -> float:
    """Max norm of autocorr(p) - M."""
    return float(np.max(np.abs((autocorrelation(p) - target.curve).values)))


def pair_transmission(
    p1: TransferProfile, p2: TransferProfile, alpha: float
) -> float:
    """Transmission of a pair of polarizers with the axes rotated by alpha.

    M(alpha) = integral of p1(lambda) * p2(lambda - alpha) d(lambda)/pi.

    Parameters
    ----------
    p1 : `TransferProfile`
        First polarizer.
    p2 : `TransferProfile`
        Second polarizer.
    alpha : `float`
        Rotation of the second axis in radian, any value.

    Returns
    -------
    `float`
        Transmission fraction in [0, 1].

    Raises
    ------
    `GridMismatchError`
        If the profiles do not share the grid.
    """

    correlation = circular_correlate(p1.f, p2.f)
    return float(np.clip(evaluate(correlation, alpha), 0.0, 1.0))


def _correlate_values(
    f: NDArray[np.float64], g: NDArray[np.float64]
) -> NDArray[np.float64]:
    spectrum = np.fft.fft(f) * np.conj(np.fft.fft(g))
    return np.fft.ifft(spectrum).real / f.size


def solve_profile_with_report(
    target: MalusTarget,
    options: SolverOptions | None = None,
    log: logging.Logger | None = None,
) -> tuple[TransferProfile, SolverReport]:
    """Find the even profile whose autocorrelation is the target.

    The spectral stage takes the square root of the target spectrum. When
    the result leaves the box [0, 1] or misses the tolerance, it is refined
    by projected gradient descent of the squared residual with a fixed step.

    Parameters
    ----------
    target : `MalusTarget`
        Target.
    options : `SolverOptions` or None, optional
        Options. (the default is None, which means SolverOptions())
    log : `logging.Logger` or None, optional
        A logger. (the default is None)

    Returns
    -------
    `TransferProfile`
        Profile in the box with the residual within the tolerance.
    `SolverReport`
        Report.

    Raises
    ------
    `InfeasibleTargetError`
        If a Fourier coefficient of the target is below -tolerance.
    `ConvergenceError`
        If the tolerance is not reached. The error carries the best profile.
    """

    if options is None:
        options = SolverOptions()

    grid = target.grid
    tolerance = options.tolerance

    coefficients = spectral(target.curve).real
    if coefficients.min() < -tolerance:
        order = int(np.argmin(coefficients))
        raise InfeasibleTargetError(
            f"Fourier coefficient {coefficients[order]:.3e} at index {order} is "
            "negative: the target is not an autocorrelation."
        )

    # Coefficients at the rounding level of the transform are zero
    floor = SPECTRAL_FLOOR * abs(coefficients[0])
    amplitudes = np.sqrt(np.where(coefficients > floor, coefficients, 0.0))
    values = inverse_spectral(grid, amplitudes).values

    scale = 1.0
    if options.normalize and (values.max() > 1.0):
        scale = 1.0 / values.max() ** 2
        values = values * math.sqrt(scale)

    goal = target.curve.values * scale

    in_box = (values.min() >= -BOX_SLACK) and (values.max() <= 1.0 + BOX_SLACK)
    values = np.clip(values, 0.0, 1.0)
    residual = float(np.max(np.abs(_correlate_values(values, values) - goal)))

    if log is not None:
        log.debug(
            f"Spectral stage: residual={residual:.3e}, in box={in_box}, "
            f"scale={scale:.6f}."
        )

    if in_box and (residual <= tolerance):
        return TransferProfile.from_values(grid, values), SolverReport(
            SolverStage.Spectral, 0, residual, True, scale
        )

    best_values = values.copy()
    best_residual = residual
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        difference = _correlate_values(values, values) - goal
        gradient = 4.0 * _correlate_values(values, difference)
        values = np.clip(values - options.step * gradient, 0.0, 1.0)

        residual = float(np.max(np.abs(_correlate_values(values, values) - goal)))
        if residual < best_residual:
            best_residual = residual
            best_values = values.copy()

        if residual <= tolerance:
            break

    profile = TransferProfile.from_values(grid, best_values)
    if best_residual > tolerance:
        if log is not None:
            log.warning(
                f"Profile solver stopped after {iterations} iterations with "
                f"residual {best_residual:.3e} > {tolerance:.3e}."
            )
        raise ConvergenceError(
            f"Residual {best_residual:.3e} above tolerance {tolerance:.3e} "
            f"after {iterations} iterations.",
            best_residual,
            iterations,
            profile,
            scale=scale,
        )

    return profile, SolverReport(
        SolverStage.ProjectedGradient, iterations, best_residual, True, scale
    )


def solve_profile(
    target: MalusTarget,
    options: SolverOptions | None = None,
    log: logging.Logger | None = None,
) -> TransferProfile:
    """Find the even profile whose autocorrelation is the target.

    See `solve_profile_with_report`.
    """
    profile, _ = solve_profile_with_report(target, options=options, log=log)
    return profile


def _check_angles(angles: typing.Sequence[float]) -> None:
    if len(angles) == 0:
        raise ValueError("At least one polarizer angle is required.")


def quantum_chain_transmission(angles: typing.Sequence[float]) -> float:
    """Ideal quantum transmission of unpolarized light through a chain.

    Parameters
    ----------
    angles : `list` [`float`]
        Polarizer axes in radian.

    Returns
    -------
    `float`
        1/2 times the product of cos^2 of the consecutive differences.

    Raises
    ------
    `ValueError`
        If the angle list is empty.
    """

    _check_angles(angles)

    transmission = 0.5
    for previous, current in zip(angles[:-1], angles[1:]):
        transmission *= math.cos(current - previous) ** 2
    return transmission


def chain_transmission(
    p: TransferProfile,
    angles: typing.Sequence[float],
    mode: ChainMode = ChainMode.Persistent,
) -> float:
    """Transmission of a photon through a chain of identical polarizers.

    Parameters
    ----------
    p : `TransferProfile`
        Profile of every polarizer.
    angles : `list` [`float`]
        Polarizer axes in radian. The first one is 0 by convention.
    mode : `ChainMode`, optional
        Chain model. In the persistent mode, the polarization is kept along the
        chain and the transmission is the mean of the product of the
        rotated profiles. In the collapse mode, the polarization is reset to
        each axis after transmission. In the Mueller mode, the single
        transmission mean(p) is followed by ideal Mueller polarizers.
        (the default is ChainMode.Persistent)

    Returns
    -------
    `float`
        Transmission fraction in [0, 1].

    Raises
    ------
    `ValueError`
        If the angle list is empty.
    """

    _check_angles(angles)

    single = mean(p.f)
    if len(angles) == 1:
        return single

    match mode:
        case ChainMode.Persistent:
            product = shift(p.f, angles[0])
            for angle in angles[1:]:
                product = product * shift(p.f, angle)
            transmission = mean(product)

        case ChainMode.Collapse:
            parallel = pair_transmission(p, p, 0.0)
            if parallel == 0.0:
                return 0.0

            transmission = pair_transmission(p, p, angles[1] - angles[0])
            for previous, current in zip(angles[1:-1], angles[2:]):
                transmission *= pair_transmission(p, p, current - previous) / parallel

        case ChainMode.Mueller:
            _, fraction = mueller_chain(unpolarized(), angles)
            transmission = 2.0 * single * fraction

        case _:
            raise ValueError(f"Unknown chain mode: {mode}.")

    return float(np.clip(transmission, 0.0, 1.0))


def belifante_contrast(p: TransferProfile) -> float:
    """Max norm of p(lambda) - cos^2(lambda)."""
    return float(np.max(np.abs(p.values - cos2_profile(p.grid).values)))
