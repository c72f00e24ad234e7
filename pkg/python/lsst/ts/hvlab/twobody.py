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
    "GaussianPacket",
    "KappaSet",
    "ExtendedState",
    "GaussHermiteQuadrature",
    "evolve",
    "expect_position",
    "expect_momentum",
    "expect_H",
    "expect_Q",
    "expect_R",
    "expect_angular_momentum",
    "expect_L2",
    "expect_T",
    "expect_quadrature",
    "kappa",
    "closest_approach_epoch",
    "impact_parameter",
    "low_energy_weight",
    "packet_overlap",
    "lift_to_extended",
    "extended_inner",
    "trajectory",
]

import functools
import math
import typing
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from .constants import (
    DEFAULT_HERMITE_ORDER,
    ENERGY_CUTOFF_FRACTION,
    MAX_LOW_ENERGY_WEIGHT,
)
from .exceptions import (
    EvolutionDirectionError,
    SingularInverseError,
    UndefinedImpactParameterError,
)

TRAJECTORY_COLUMNS = (
    "tau",
    "q_x",
    "q_y",
    "q_z",
    "p_x",
    "p_y",
    "p_z",
    "H",
    "Q",
    "R",
    "T",
    "b",
)


def _as_vector(value: ArrayLike, name: str) -> NDArray[np.float64]:
    vector = np.array(value, dtype=np.float64)
    if vector.shape != (3,) or (not np.all(np.isfinite(vector))):
        raise ValueError(f"{name} must be a finite 3-vector, got {value!r}.")

    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class GaussianPacket:
    """Free Gaussian wavepacket of the relative motion of two particles.

    Units have hbar = 1. The spectral amplitude is
    g(k) ~ exp(-|k - k0|^2 / (2 sigma_k^2)) exp(-i k.x_i), so the momentum
    variance per axis is sigma_k^2 / 2 and the packet has its minimum width
    at the epoch tau_i.

    Parameters
    ----------
    mass : `float`
        Reduced mass.
    x_i : `numpy.ndarray`
        Center position at the epoch tau_i.
    tau_i : `float`
        Initial epoch.
    k0 : `numpy.ndarray`
        Mean wave vector.
    sigma_k : `float`
        Spectral width per axis.
    tau : `float`
        Current epoch.

    Raises
    ------
    `ValueError`
        If the mass or the spectral width is not positive, or a vector is
        invalid.
    """

    mass: float
    x_i: NDArray[np.float64]
    tau_i: float
    k0: NDArray[np.float64]
    sigma_k: float
    tau: float

    def __post_init__(self) -> None:
        if not (self.mass > 0.0):
            raise ValueError(f"Mass {self.mass} must be > 0.")

        if not (self.sigma_k > 0.0):
            raise ValueError(f"Spectral width {self.sigma_k} must be > 0.")

        if not (math.isfinite(self.tau_i) and math.isfinite(self.tau)):
            raise ValueError("Epochs must be finite.")

        object.__setattr__(self, "x_i", _as_vector(self.x_i, "x_i"))
        object.__setattr__(self, "k0", _as_vector(self.k0, "k0"))

    @classmethod
    def from_closest_approach(
        cls,
        mass: float,
        impact: ArrayLike,
        k0: ArrayLike,
        sigma_k: float,
        tau: float = 0.0,
    ) -> GaussianPacket:
        """Packet whose closest approach is at the epoch 0.

        Parameters
        ----------
        mass : `float`
            Reduced mass.
        impact : `numpy.ndarray`
            Center position at the closest approach, perpendicular to k0.
        k0 : `numpy.ndarray`
            Mean wave vector.
        sigma_k : `float`
            Spectral width per axis.
        tau : `float`, optional
            Current epoch. (the default is 0.0)

        Returns
        -------
        `GaussianPacket`
            Packet with <R> = 0 at the epoch 0.

        Raises
        ------
        `ValueError`
            If the impact vector is not perpendicular to k0.
        """

        impact = _as_vector(impact, "impact")
        k0 = _as_vector(k0, "k0")
        if abs(impact @ k0) > 1e-12 * np.linalg.norm(impact) * np.linalg.norm(k0):
            raise ValueError("Impact vector must be perpendicular to k0.")

        return cls(mass, impact, 0.0, k0, sigma_k, tau)

    @property
    def elapsed(self) -> float:
        """Time since the epoch of minimum width."""
        return self.tau - self.tau_i

    @property
    def momentum_variance(self) -> float:
        """Momentum variance per axis."""
        return 0.5 * self.sigma_k**2

    @property
    def position_variance(self) -> float:
        """Position variance per axis at the current epoch."""
        return 1.0 / (2.0 * self.sigma_k**2) + (
            self.momentum_variance * (self.elapsed / self.mass) ** 2
        )

    @property
    def covariance(self) -> float:
        """Symmetrized position-momentum covariance per axis."""
        return self.momentum_variance * self.elapsed / self.mass


@dataclass(frozen=True)
class KappaSet:
    """Constants of the motion labeling a trajectory.

    Parameters
    ----------
    energy : `float`
        <H>.
    angular_momentum_squared : `float`
        <M> = <L^2>.
    angular_momentum_12 : `float`
        <M_12> = <q_1 p_2 - q_2 p_1>.
    """

    energy: float
    angular_momentum_squared: float
    angular_momentum_12: float


@dataclass(frozen=True)
class ExtendedState:
    """(in, out) pair of the doubled representation.

    Parameters
    ----------
    in_component : `GaussianPacket` or None
        Incoming component.
    out_component : `GaussianPacket` or None
        Outgoing component.
    tau : `float`
        Epoch.
    """

    in_component: GaussianPacket | None
    out_component: GaussianPacket | None
    tau: float


class GaussHermiteQuadrature:
    """Tensor-product Gauss-Hermite quadrature over the spectral density of a
    packet.

    The product grid is laid out in an orthonormal frame whose first axis is
    along k0 and whose second axis is along the part of x_i perpendicular to
    k0, so expectation values keep the reflection symmetries of the packet.

    Parameters
    ----------
    order : `int`, optional
        Nodes per axis. (the default is DEFAULT_HERMITE_ORDER)

    Raises
    ------
    `ValueError`
        If the order is less than 1.
    """

    def __init__(self, order: int = DEFAULT_HERMITE_ORDER) -> None:
        if order < 1:
            raise ValueError(f"Quadrature order {order} must be >= 1.")

        self.order = order

        nodes, weights = _hermite_rule(order)
        grid = np.meshgrid(nodes, nodes, nodes, indexing="ij")
        self._nodes = np.stack([axis.ravel() for axis in grid], axis=-1)
        self._weights = np.einsum("i,j,k->ijk", weights, weights, weights).ravel()

    @staticmethod
    def frame(packet: GaussianPacket) -> NDArray[np.float64]:
        """Orthonormal frame adapted to the packet, one axis per row."""

        axes = list()
        for vector in (packet.k0, packet.x_i, np.eye(3)[0], np.eye(3)[1], np.eye(3)[2]):
            residual = vector - sum(((vector @ axis) * axis for axis in axes), np.zeros(3))
            norm = np.linalg.norm(residual)
            if norm > 1e-12 * max(1.0, np.linalg.norm(vector)):
                axes.append(residual / norm)
            if len(axes) == 3:
                break

        return np.array(axes)

    def wave_vectors(self, packet: GaussianPacket) -> NDArray[np.float64]:
        """Quadrature nodes as wave vectors, shape (order^3, 3)."""
        scale = math.sqrt(2.0 * packet.momentum_variance)
        return packet.k0 + scale * self._nodes @ self.frame(packet)

    def expect(
        self,
        packet: GaussianPacket,
        func: typing.Callable[[NDArray[np.float64]], NDArray[np.float64]],
    ) -> float:
        """Mean of func(k) over the spectral density |g(k)|^2.

        Parameters
        ----------
        packet : `GaussianPacket`
            Packet.
        func : `collections.abc.Callable`
            Vectorized function of the wave vectors (rows).

        Returns
        -------
        `float`
            Expectation value.
        """

        return float(self._weights @ func(self.wave_vectors(packet)))


@functools.lru_cache(maxsize=8)
def _hermite_rule(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights normalized to the Gaussian probability exp(-t^2)."""
    nodes, weights = special.roots_hermite(order)
    return nodes, weights / math.sqrt(math.pi)


@functools.lru_cache(maxsize=4)
def _quadrature(order: int) -> GaussHermiteQuadrature:
    return GaussHermiteQuadrature(order)


def evolve(packet: GaussianPacket, t: float) -> GaussianPacket:
    """Free evolution by the duration t.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.
    t : `float`
        Duration, t >= 0.

    Returns
    -------
    `GaussianPacket`
        Packet at the epoch tau + t.

    Raises
    ------
    `EvolutionDirectionError`
        If t < 0.
    """

    if t < 0.0:
        raise EvolutionDirectionError(
            f"Evolution only moves to later epochs, got t={t}."
        )

    if t == 0.0:
        return packet

    return replace(packet, tau=packet.tau + t)


def expect_position(packet: GaussianPacket) -> NDArray[np.float64]:
    """<q> = x_i + k0 (tau - tau_i) / m."""
    return packet.x_i + packet.k0 * (packet.elapsed / packet.mass)


def expect_momentum(packet: GaussianPacket) -> NDArray[np.float64]:
    """<p> = k0."""
    return packet.k0.copy()


def expect_H(packet: GaussianPacket) -> float:
    """<H> = (|k0|^2 + 3/2 sigma_k^2) / (2 m)."""
    return float(
        (packet.k0 @ packet.k0 + 1.5 * packet.sigma_k**2) / (2.0 * packet.mass)
    )


def expect_Q(packet: GaussianPacket) -> float:
    """<Q> = <q^2>."""
    position = expect_position(packet)
    return float(position @ position + 3.0 * packet.position_variance)


def expect_R(packet: GaussianPacket) -> float:
    """<R> = <(p.q + q.p) / 2>, which grows as 2 <H> per unit time."""
    return float(packet.x_i @ packet.k0 + 2.0 * expect_H(packet) * packet.elapsed)


def expect_angular_momentum(packet: GaussianPacket) -> NDArray[np.float64]:
    """<L> = <q x p>."""
    return np.cross(expect_position(packet), packet.k0)


def expect_L2(packet: GaussianPacket) -> float:
    """<L^2> from the Gaussian moments at the current epoch.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.

    Returns
    -------
    `float`
        Squared angular momentum, conserved along the free evolution.
    """

    position = expect_position(packet)
    momentum = packet.k0
    mean_part = np.cross(position, momentum)

    value = (
        mean_part @ mean_part
        + 2.0 * packet.momentum_variance * (position @ position)
        + 2.0 * packet.position_variance * (momentum @ momentum)
        - 4.0 * packet.covariance * (position @ momentum)
    )
    return float(value)


def kappa(packet: GaussianPacket) -> KappaSet:
    """Constants of the motion of the packet."""
    return KappaSet(
        expect_H(packet),
        expect_L2(packet),
        float(expect_angular_momentum(packet)[2]),
    )


def expect_quadrature(
    packet: GaussianPacket,
    func: typing.Callable[[NDArray[np.float64]], NDArray[np.float64]],
    order: int = DEFAULT_HERMITE_ORDER,
) -> float:
    """Mean of a function of the wave vector by Gauss-Hermite quadrature.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.
    func : `collections.abc.Callable`
        Vectorized function of the wave vectors (rows).
    order : `int`, optional
        Nodes per axis. (the default is DEFAULT_HERMITE_ORDER)

    Returns
    -------
    `float`
        Expectation value.
    """
    return _quadrature(order).expect(packet, func)


def low_energy_weight(
    packet: GaussianPacket, cutoff_fraction: float = ENERGY_CUTOFF_FRACTION
) -> float:
    """Probability of an energy below cutoff_fraction * <H>.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.
    cutoff_fraction : `float`, optional
        Cutoff as a fraction of <H>. (the default is ENERGY_CUTOFF_FRACTION)

    Returns
    -------
    `float`
        Probability.
    """

    variance = packet.momentum_variance
    limit = 2.0 * packet.mass * cutoff_fraction * expect_H(packet) / variance
    noncentrality = float(packet.k0 @ packet.k0) / variance
    if noncentrality == 0.0:
        return float(stats.chi2.cdf(limit, 3))

    return float(stats.ncx2.cdf(limit, 3, noncentrality))


def expect_T(
    packet: GaussianPacket,
    order: int = DEFAULT_HERMITE_ORDER,
    cutoff_fraction: float = ENERGY_CUTOFF_FRACTION,
) -> float:
    """<T> = <{H^-1, R}> / 4.

    In the wave-vector representation this is
    tau - tau_i + m <k.x_i / k^2>, and the last term is done by quadrature.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.
    order : `int`, optional
        Quadrature nodes per axis. (the default is DEFAULT_HERMITE_ORDER)
    cutoff_fraction : `float`, optional
        Energy cutoff of the regularity check as a fraction of <H>.
        (the default is ENERGY_CUTOFF_FRACTION)

    Returns
    -------
    `float`
        Expectation value, equal to the epoch for a packet whose closest
        approach is at the epoch 0.

    Raises
    ------
    `SingularInverseError`
        If too much of the packet is near zero energy.
    """

    weight = low_energy_weight(packet, cutoff_fraction=cutoff_fraction)
    if weight > MAX_LOW_ENERGY_WEIGHT:
        raise SingularInverseError(
            f"Weight {weight:.3e} below the energy cutoff exceeds "
            f"{MAX_LOW_ENERGY_WEIGHT:.1e}: H^-1 is not regular on the packet."
        )

    def offset(k: NDArray[np.float64]) -> NDArray[np.float64]:
        return (k @ packet.x_i) / np.einsum("ij,ij->i", k, k)

    return packet.elapsed + packet.mass * expect_quadrature(packet, offset, order=order)


def closest_approach_epoch(packet: GaussianPacket) -> float:
    """Epoch where <R> = 0 (minimum of <Q>)."""
    return packet.tau_i - float(packet.x_i @ packet.k0) / (2.0 * expect_H(packet))


def impact_parameter(packet: GaussianPacket) -> float:
    """Impact parameter b = |<L>| / |k0|.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.

    Returns
    -------
    `float`
        Impact parameter.

    Raises
    ------
    `UndefinedImpactParameterError`
        If k0 = 0.
    """

    norm = float(np.linalg.norm(packet.k0))
    if norm == 0.0:
        raise UndefinedImpactParameterError(
            "Impact parameter is undefined for k0 = 0."
        )

    return float(np.linalg.norm(expect_angular_momentum(packet))) / norm


def packet_overlap(a: GaussianPacket, b: GaussianPacket) -> complex:
    """Closed-form overlap <a|b> of two Gaussian packets.

    Parameters
    ----------
    a : `GaussianPacket`
        Bra.
    b : `GaussianPacket`
        Ket.

    Returns
    -------
    `complex`
        Overlap, 1 for the same packet.
    """

    alpha = (
        0.5 / a.sigma_k**2
        + 0.5 / b.sigma_k**2
        - 1j * (a.elapsed / (2.0 * a.mass) - b.elapsed / (2.0 * b.mass))
    )
    beta = a.k0 / a.sigma_k**2 + b.k0 / b.sigma_k**2 + 1j * (a.x_i - b.x_i)
    gamma = -(a.k0**2) / (2.0 * a.sigma_k**2) - (b.k0**2) / (2.0 * b.sigma_k**2)

    # Normalization of the Gaussian per axis
    norm = 1.0 / math.sqrt(a.sigma_k * b.sigma_k * math.pi)

    per_axis = norm * np.sqrt(np.pi / alpha) * np.exp(beta**2 / (4.0 * alpha) + gamma)
    return complex(np.prod(per_axis))


def lift_to_extended(packet: GaussianPacket) -> ExtendedState:
    """Place the packet in the incoming (tau < 0) or outgoing (tau >= 0) part.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet.

    Returns
    -------
    `ExtendedState`
        State with exactly one component.
    """

    if packet.tau < 0.0:
        return ExtendedState(packet, None, packet.tau)

    return ExtendedState(None, packet, packet.tau)


def extended_inner(s1: ExtendedState, s2: ExtendedState) -> complex:
    """Inner product of two extended states.

    The incoming and outgoing parts are orthogonal, so only the overlaps of
    matching components contribute.
    """

    value = 0j
    if (s1.in_component is not None) and (s2.in_component is not None):
        value += packet_overlap(s1.in_component, s2.in_component)

    if (s1.out_component is not None) and (s2.out_component is not None):
        value += packet_overlap(s1.out_component, s2.out_component)

    return value


def trajectory(
    packet: GaussianPacket,
    times: typing.Sequence[float],
    order: int = DEFAULT_HERMITE_ORDER,
) -> pd.DataFrame:
    """Expectation values along the free evolution.

    Parameters
    ----------
    packet : `GaussianPacket`
        Packet at its current epoch.
    times : `list` [`float`]
        Epochs, in increasing order, not before the epoch of the packet.
    order : `int`, optional
        Quadrature nodes per axis of <T>. (the default is DEFAULT_HERMITE_ORDER)

    Returns
    -------
    `pandas.DataFrame`
        One row per epoch with the columns of TRAJECTORY_COLUMNS. The impact
        parameter is NaN when k0 = 0.

    Raises
    ------
    `EvolutionDirectionError`
        If an epoch is before the previous one.
    `SingularInverseError`
        If <T> is not defined for the packet.
    """

    rows = list()
    current = packet
    for time in times:
        # Land on the epoch exactly, not on tau + (time - tau)
        current = replace(evolve(current, time - current.tau), tau=float(time))
        impact = (
            impact_parameter(current) if np.any(current.k0 != 0.0) else math.nan
        )
        rows.append(
            [
                current.tau,
                *expect_position(current),
                *expect_momentum(current),
                expect_H(current),
                expect_Q(current),
                expect_R(current),
                expect_T(current, order=order),
                impact,
            ]
        )

    return pd.DataFrame(rows, columns=list(TRAJECTORY_COLUMNS), dtype=float)
