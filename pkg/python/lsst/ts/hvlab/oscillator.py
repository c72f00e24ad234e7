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
    "FockOperatorSet",
    "OscState",
    "CommutatorReport",
    "PhaseReading",
    "build_operators",
    "commutator_residuals",
    "coherent_state",
    "number_state",
    "tail_weight",
    "expectation",
    "expect_cs",
    "expect_osc_R",
    "cs_norm",
    "phase",
    "evolve_osc",
    "phase_trajectory",
]

import logging
import math
import typing
from dataclasses import dataclass

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from .constants import (
    DEFAULT_MIN_PHASE_RADIUS,
    DEFAULT_TAIL_THRESHOLD,
    MIN_FOCK_DIMENSION,
    TAIL_FRACTION,
)
from .exceptions import EvolutionDirectionError, TailWeightError, UndefinedPhaseError

# Tolerance of the unit norm of a state
NORM_TOLERANCE = 1e-12

PHASE_TRAJECTORY_COLUMNS = ("t", "C", "S", "phi", "sheet", "Phi", "T", "CS_norm", "R")


@dataclass(frozen=True, eq=False)
class FockOperatorSet:
    """Operators of the linear oscillator in its truncated energy eigenbasis.

    C = sqrt(k/2) {H^-1/2, q} / 2 and S = -sqrt(1/(2m)) {H^-1/2, p} / 2.

    Parameters
    ----------
    mass : `float`
        Mass.
    spring : `float`
        Spring constant.
    dimension : `int`
        Number of basis states N.
    omega : `float`
        Angular frequency sqrt(k/m).
    hamiltonian : `numpy.ndarray`
        H, diagonal (n + 1/2) omega.
    position : `numpy.ndarray`
        q.
    momentum : `numpy.ndarray`
        p.
    inverse_sqrt_hamiltonian : `numpy.ndarray`
        H^-1/2.
    cos_operator : `numpy.ndarray`
        C.
    sin_operator : `numpy.ndarray`
        S.
    is_low_dimension : `bool`
        N is below MIN_FOCK_DIMENSION.
    """

    mass: float
    spring: float
    dimension: int
    omega: float
    hamiltonian: NDArray[np.float64]
    position: NDArray[np.float64]
    momentum: NDArray[np.complex128]
    inverse_sqrt_hamiltonian: NDArray[np.float64]
    cos_operator: NDArray[np.float64]
    sin_operator: NDArray[np.complex128]
    is_low_dimension: bool

    @property
    def energies(self) -> NDArray[np.float64]:
        return np.diag(self.hamiltonian).copy()


@dataclass(frozen=True, eq=False)
class OscState:
    """State of the oscillator with its phase bookkeeping.

    Parameters
    ----------
    amplitudes : `numpy.ndarray`
        Amplitudes in the energy eigenbasis, unit norm.
    sheet : `int`, optional
        Index of the 2 pi interval of the unwrapped phase. (the default is 0)
    unwrapped_phase : `float` or None, optional
        Last tracked unwrapped phase, None before any tracking.
        (the default is None)

    Raises
    ------
    `ValueError`
        If the amplitudes are not a unit vector.
    """

    amplitudes: NDArray[np.complex128]
    sheet: int = 0
    unwrapped_phase: float | None = None

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1:
            raise ValueError("Amplitudes must be a vector.")

        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State norm {norm} is not 1.")

        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)


@dataclass(frozen=True)
class CommutatorReport:
    """Max-norm residuals of i[H, S] - omega C and i[H, C] + omega S.

    The interior block keeps the rows and columns 0..N-1-buffer.
    """

    buffer: int
    interior_hs: float
    interior_hc: float
    full_hs: float
    full_hc: float


@dataclass(frozen=True)
class PhaseReading:
    """Phase of the state.

    Parameters
    ----------
    phi : `float`
        Angle on the current sheet, in [0, 2 pi).
    sheet : `int`
        Sheet index.
    unwrapped : `float`
        Continuous phase 2 pi sheet + phi.
    radius : `float`
        |<C> + i<S>|.
    """

    phi: float
    sheet: int
    unwrapped: float
    radius: float


def build_operators(
    mass: float,
    spring: float,
    dimension: int,
    log: logging.Logger | None = None,
) -> FockOperatorSet:
    """Build the operators of the linear oscillator.

    Parameters
    ----------
    mass : `float`
        Mass m > 0.
    spring : `float`
        Spring constant k > 0.
    dimension : `int`
        Number of basis states N >= 2. Below MIN_FOCK_DIMENSION the set is
        flagged as low-dimension.
    log : `logging.Logger` or None, optional
        A logger. (the default is None)

    Returns
    -------
    `FockOperatorSet`
        Operators.

    Raises
    ------
    `ValueError`
        If the parameters are not valid.
    """

    if not (mass > 0.0):
        raise ValueError(f"Mass {mass} must be > 0.")
    if not (spring > 0.0):
        raise ValueError(f"Spring constant {spring} must be > 0.")
    if (not isinstance(dimension, (int, np.integer))) or (dimension < 2):
        raise ValueError(f"Dimension {dimension} must be an integer >= 2.")

    is_low_dimension = dimension < MIN_FOCK_DIMENSION
    if is_low_dimension and (log is not None):
        log.warning(
            f"Dimension N={dimension} is below {MIN_FOCK_DIMENSION}: "
            "the operator algebra is not meaningful."
        )

    omega = math.sqrt(spring / mass)
    levels = np.arange(dimension)
    energies = (levels + 0.5) * omega

    lowering = np.diag(np.sqrt(levels[1:].astype(float)), k=1)
    raising = lowering.T

    position = math.sqrt(1.0 / (2.0 * mass * omega)) * (lowering + raising)
    momentum = 1j * math.sqrt(mass * omega / 2.0) * (raising - lowering)

    hamiltonian = np.diag(energies)
    inverse_sqrt = np.diag(1.0 / np.sqrt(energies))

    cos_operator = (
        math.sqrt(spring / 2.0) * 0.5 * (inverse_sqrt @ position + position @ inverse_sqrt)
    )
    sin_operator = (
        -math.sqrt(1.0 / (2.0 * mass))
        * 0.5
        * (inverse_sqrt @ momentum + momentum @ inverse_sqrt)
    )

    for matrix in (hamiltonian, position, momentum, inverse_sqrt, cos_operator, sin_operator):
        matrix.setflags(write=False)

    return FockOperatorSet(
        mass,
        spring,
        int(dimension),
        omega,
        hamiltonian,
        position,
        momentum,
        inverse_sqrt,
        cos_operator,
        sin_operator,
        is_low_dimension,
    )


def _commutator(a: NDArray, b: NDArray) -> NDArray:
    return a @ b - b @ a


def commutator_residuals(
    ops: FockOperatorSet, buffer: int | None = None
) -> CommutatorReport:
    """Residuals of the relations i[H, S] = omega C and i[H, C] = -omega S.

    Parameters
    ----------
    ops : `FockOperatorSet`
        Operators.
    buffer : `int` or None, optional
        Truncation buffer K. (the default is None, which means N // 4)

    Returns
    -------
    `CommutatorReport`
        Interior and full residuals.
    """

    if buffer is None:
        buffer = ops.dimension // 4

    h = ops.hamiltonian
    residual_hs = 1j * _commutator(h, ops.sin_operator) - ops.omega * ops.cos_operator
    residual_hc = 1j * _commutator(h, ops.cos_operator) + ops.omega * ops.sin_operator

    interior = slice(0, max(ops.dimension - buffer, 0))

    def max_norm(matrix: NDArray) -> float:
        return float(np.max(np.abs(matrix))) if matrix.size else 0.0

    return CommutatorReport(
        buffer,
        max_norm(residual_hs[interior, interior]),
        max_norm(residual_hc[interior, interior]),
        max_norm(residual_hs),
        max_norm(residual_hc),
    )


def coherent_state(
    ops: FockOperatorSet, mean_excitation: float, phase_angle: float = 0.0
) -> OscState:
    """Coherent-like state truncated to the basis.

    Parameters
    ----------
    ops : `FockOperatorSet`
        Operators.
    mean_excitation : `float`
        Mean excitation n >= 0.
    phase_angle : `float`, optional
        Phase of <C> + i<S> in radian. (the default is 0.0)

    Returns
    -------
    `OscState`
        State with the amplitudes sqrt(Poisson(n)) exp(-i n phase_angle),
        normalized on the basis.

    Raises
    ------
    `ValueError`
        If the mean excitation is negative.
    """

    if mean_excitation < 0.0:
        raise ValueError(f"Mean excitation {mean_excitation} must be >= 0.")

    levels = np.arange(ops.dimension)
    amplitudes = np.sqrt(stats.poisson.pmf(levels, mean_excitation)) * np.exp(
        -1j * levels * phase_angle
    )
    return OscState(amplitudes / np.linalg.norm(amplitudes))


def number_state(ops: FockOperatorSet, level: int) -> OscState:
    """Energy eigenstate |n>.

    Raises
    ------
    `ValueError`
        If the level is not in the basis.
    """

    if not (0 <= level < ops.dimension):
        raise ValueError(f"Level {level} not in range [0, {ops.dimension}).")

    amplitudes = np.zeros(ops.dimension, dtype=np.complex128)
    amplitudes[level] = 1.0
    return OscState(amplitudes)


def tail_weight(state: OscState, fraction: float = TAIL_FRACTION) -> float:
    """Probability in the top ceil(fraction * N) basis states."""
    size = math.ceil(fraction * state.amplitudes.size)
    return float(np.sum(np.abs(state.amplitudes[-size:]) ** 2))


def expectation(state: OscState, operator: ArrayLike) -> float:
    """Real part of <state|operator|state>."""
    amplitudes = state.amplitudes
    return float(np.real(np.vdot(amplitudes, np.asarray(operator) @ amplitudes)))


def expect_cs(state: OscState, ops: FockOperatorSet) -> tuple[float, float]:
    """(<C>, <S>)."""
    return expectation(state, ops.cos_operator), expectation(state, ops.sin_operator)


def expect_osc_R(state: OscState, ops: FockOperatorSet) -> float:
    """<R> = <pq + qp> / 2, periodic with the period pi / omega."""
    q = ops.position
    p = ops.momentum
    return expectation(state, 0.5 * (p @ q + q @ p))


def cs_norm(
    state: OscState,
    ops: FockOperatorSet,
    threshold: float = DEFAULT_TAIL_THRESHOLD,
) -> float:
    """<C^2 + S^2>.

    Parameters
    ----------
    state : `OscState`
        State.
    ops : `FockOperatorSet`
        Operators.
    threshold : `float`, optional
        Largest tail weight allowed. (the default is DEFAULT_TAIL_THRESHOLD)

    Returns
    -------
    `float`
        Expectation value, close to 1 for highly excited states.

    Raises
    ------
    `TailWeightError`
        If the tail weight is above the threshold.
    """

    weight = tail_weight(state)
    if weight > threshold:
        raise TailWeightError(
            f"Tail weight {weight:.3e} above {threshold:.1e}: the truncation "
            "edge is populated."
        )

    c = ops.cos_operator
    s = ops.sin_operator
    return expectation(state, c @ c + s @ s)


def _wrap(angle: float) -> float:
    """Wrap into [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def phase(
    state: OscState,
    ops: FockOperatorSet,
    min_radius: float = DEFAULT_MIN_PHASE_RADIUS,
) -> PhaseReading:
    """Phase atan2(<S>, <C>) unwrapped against the last tracked phase.

    Parameters
    ----------
    state : `OscState`
        State.
    ops : `FockOperatorSet`
        Operators.
    min_radius : `float`, optional
        Smallest |<C> + i<S>| for a defined phase.
        (the default is DEFAULT_MIN_PHASE_RADIUS)

    Returns
    -------
    `PhaseReading`
        Phase.

    Raises
    ------
    `UndefinedPhaseError`
        If |<C> + i<S>| < min_radius.
    """

    c, s = expect_cs(state, ops)
    radius = math.hypot(c, s)
    if radius < min_radius:
        raise UndefinedPhaseError(
            f"|<C> + i<S>| = {radius:.3e} is below {min_radius}: phase undefined."
        )

    raw = math.atan2(s, c)
    if state.unwrapped_phase is None:
        start = raw % (2.0 * math.pi)
        # A tiny negative angle rounds up to 2 pi
        if start >= 2.0 * math.pi:
            start = 0.0
        unwrapped = 2.0 * math.pi * state.sheet + start
    else:
        unwrapped = state.unwrapped_phase + _wrap(raw - state.unwrapped_phase)

    sheet = math.floor(unwrapped / (2.0 * math.pi))
    return PhaseReading(unwrapped - 2.0 * math.pi * sheet, sheet, unwrapped, radius)


def evolve_osc(
    state: OscState,
    ops: FockOperatorSet,
    t: float,
    min_radius: float = DEFAULT_MIN_PHASE_RADIUS,
) -> OscState:
    """Evolve the state by the duration t.

    The phase is tracked at sub-steps of at most pi / (4 omega), so the
    sheet index follows every crossing of a multiple of 2 pi. A state
    without a defined phase is evolved without tracking.

    Parameters
    ----------
    state : `OscState`
        State.
    ops : `FockOperatorSet`
        Operators.
    t : `float`
        Duration, t >= 0.
    min_radius : `float`, optional
        Smallest |<C> + i<S>| for a defined phase.
        (the default is DEFAULT_MIN_PHASE_RADIUS)

    Returns
    -------
    `OscState`
        Evolved state.

    Raises
    ------
    `EvolutionDirectionError`
        If t < 0.
    """

    if t < 0.0:
        raise EvolutionDirectionError(
            f"Evolution only moves to later times, got t={t}."
        )

    energies = ops.energies

    def propagate(duration: float) -> NDArray[np.complex128]:
        return state.amplitudes * np.exp(-1j * energies * duration)

    try:
        reading = phase(state, ops, min_radius=min_radius)
    except UndefinedPhaseError:
        return OscState(propagate(t), state.sheet, state.unwrapped_phase)

    num_steps = max(1, math.ceil(t / (math.pi / (4.0 * ops.omega))))
    current = OscState(state.amplitudes, reading.sheet, reading.unwrapped)
    for step in range(1, num_steps + 1):
        current = OscState(
            propagate(t * step / num_steps), current.sheet, current.unwrapped_phase
        )
        reading = phase(current, ops, min_radius=min_radius)
        current = OscState(current.amplitudes, reading.sheet, reading.unwrapped)

    return current


def phase_trajectory(
    state: OscState,
    ops: FockOperatorSet,
    times: typing.Sequence[float],
    min_radius: float = DEFAULT_MIN_PHASE_RADIUS,
) -> pd.DataFrame:
    """Phase bookkeeping along the evolution.

    Parameters
    ----------
    state : `OscState`
        State at the time 0.
    ops : `FockOperatorSet`
        Operators.
    times : `list` [`float`]
        Times, increasing and >= 0.
    min_radius : `float`, optional
        Smallest |<C> + i<S>| for a defined phase.
        (the default is DEFAULT_MIN_PHASE_RADIUS)

    Returns
    -------
    `pandas.DataFrame`
        One row per time with the columns of PHASE_TRAJECTORY_COLUMNS.

    Raises
    ------
    `EvolutionDirectionError`
        If the times are not increasing.
    `UndefinedPhaseError`
        If the state has no defined phase.
    `TailWeightError`
        If the truncation edge is populated.
    """

    rows = list()
    elapsed = 0.0
    current = state
    for time in times:
        current = evolve_osc(current, ops, time - elapsed, min_radius=min_radius)
        elapsed = float(time)

        c, s = expect_cs(current, ops)
        reading = phase(current, ops, min_radius=min_radius)
        rows.append(
            [
                elapsed,
                c,
                s,
                reading.phi,
                reading.sheet,
                reading.unwrapped,
                reading.unwrapped / ops.omega,
                cs_norm(current, ops),
                expect_osc_R(current, ops),
            ]
        )

    table = pd.DataFrame(rows, columns=list(PHASE_TRAJECTORY_COLUMNS))
    return table.astype({"sheet": "int64"})
