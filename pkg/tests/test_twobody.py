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

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from lsst.ts.hvlab import (
    MAX_LOW_ENERGY_WEIGHT,
    EvolutionDirectionError,
    GaussHermiteQuadrature,
    GaussianPacket,
    SingularInverseError,
    UndefinedImpactParameterError,
    closest_approach_epoch,
    evolve,
    expect_angular_momentum,
    expect_H,
    expect_L2,
    expect_momentum,
    expect_position,
    expect_Q,
    expect_quadrature,
    expect_R,
    expect_T,
    extended_inner,
    impact_parameter,
    kappa,
    lift_to_extended,
    low_energy_weight,
    packet_overlap,
    trajectory,
)
from lsst.ts.hvlab.twobody import TRAJECTORY_COLUMNS


@pytest.fixture
def packet() -> GaussianPacket:
    return GaussianPacket.from_closest_approach(
        1.0, [0.0, 1.0, 0.0], [2.0, 0.0, 0.0], 1.0, tau=-3.0
    )


def test_init_error() -> None:
    with pytest.raises(ValueError):
        GaussianPacket(0.0, [0.0, 0.0, 0.0], 0.0, [1.0, 0.0, 0.0], 1.0, 0.0)

    with pytest.raises(ValueError):
        GaussianPacket(1.0, [0.0, 0.0, 0.0], 0.0, [1.0, 0.0, 0.0], -1.0, 0.0)

    with pytest.raises(ValueError):
        GaussianPacket(1.0, [0.0, 0.0], 0.0, [1.0, 0.0, 0.0], 1.0, 0.0)

    with pytest.raises(ValueError):
        GaussianPacket(1.0, [0.0, 0.0, 0.0], math.inf, [1.0, 0.0, 0.0], 1.0, 0.0)

    with pytest.raises(ValueError):
        GaussianPacket.from_closest_approach(
            1.0, [1.0, 1.0, 0.0], [1.0, 0.0, 0.0], 1.0
        )


def test_variances(packet: GaussianPacket) -> None:
    assert packet.momentum_variance == 0.5
    assert packet.elapsed == -3.0

    # Minimum uncertainty at the initial epoch
    start = evolve(packet, 3.0)
    assert start.position_variance * start.momentum_variance == pytest.approx(0.25)
    assert start.covariance == 0.0


def test_evolve(packet: GaussianPacket) -> None:
    assert evolve(packet, 0.0) is packet
    assert evolve(packet, 1.5).tau == -1.5

    with pytest.raises(EvolutionDirectionError):
        evolve(packet, -0.1)


def test_expect_position_momentum(packet: GaussianPacket) -> None:
    assert expect_position(packet) == pytest.approx([-6.0, 1.0, 0.0])
    assert expect_momentum(packet) == pytest.approx([2.0, 0.0, 0.0])


def test_expect_H(packet: GaussianPacket) -> None:
    assert expect_H(packet) == pytest.approx(2.75)
    assert expect_H(evolve(packet, 10.0)) == expect_H(packet)


def test_expect_Q_R(packet: GaussianPacket) -> None:
    # <Q> = 5.5 tau^2 + 2.5 and d<Q>/dtau = 2 <R> / m
    for tau in (-3.0, -1.0, 0.0, 2.0):
        current = evolve(packet, tau + 3.0)

        assert expect_Q(current) == pytest.approx(5.5 * tau**2 + 2.5)
        assert expect_R(current) == pytest.approx(5.5 * tau)


def test_expect_L2(packet: GaussianPacket) -> None:
    for duration in (0.0, 1.0, 3.0, 7.5):
        assert expect_L2(evolve(packet, duration)) == pytest.approx(9.0)


def test_expect_L2_s_wave() -> None:
    packet = GaussianPacket(1.0, [0.0, 0.0, 0.0], 0.0, [0.0, 0.0, 0.0], 0.7, 0.0)

    assert expect_L2(packet) == 0.0


def test_kappa(packet: GaussianPacket) -> None:
    constants = kappa(packet)

    assert constants.energy == pytest.approx(2.75)
    assert constants.angular_momentum_squared == pytest.approx(9.0)
    assert constants.angular_momentum_12 == pytest.approx(-2.0)

    later = kappa(evolve(packet, 5.0))
    assert later.energy == constants.energy
    assert later.angular_momentum_squared == pytest.approx(9.0)
    assert later.angular_momentum_12 == pytest.approx(-2.0)


def test_closest_approach_epoch(packet: GaussianPacket) -> None:
    assert closest_approach_epoch(packet) == pytest.approx(0.0, abs=1e-15)

    shifted = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [2.0, 0.0, 0.0], 1.0, 0.0)
    assert closest_approach_epoch(shifted) == pytest.approx(-2.0 / 5.5)
    assert expect_R(evolve(shifted, 0.0)) > 0.0


def test_impact_parameter(packet: GaussianPacket) -> None:
    assert impact_parameter(packet) == pytest.approx(1.0)
    assert np.linalg.norm(expect_angular_momentum(packet)) == pytest.approx(2.0)

    at_rest = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [0.0, 0.0, 0.0], 1.0, 0.0)
    with pytest.raises(UndefinedImpactParameterError):
        impact_parameter(at_rest)


def test_quadrature() -> None:
    packet = GaussianPacket(2.0, [0.0, 0.0, 0.0], 0.0, [1.0, 2.0, 0.0], 0.8, 0.0)

    # Exact for polynomials of low degree
    assert expect_quadrature(packet, lambda k: np.ones(len(k))) == pytest.approx(1.0)
    assert expect_quadrature(packet, lambda k: k[:, 1]) == pytest.approx(2.0)
    assert expect_quadrature(
        packet, lambda k: np.einsum("ij,ij->i", k, k) / (2.0 * packet.mass)
    ) == pytest.approx(expect_H(packet))

    frame = GaussHermiteQuadrature.frame(packet)
    assert frame @ frame.T == pytest.approx(np.eye(3))

    with pytest.raises(ValueError):
        GaussHermiteQuadrature(order=0)


def test_low_energy_weight(packet: GaussianPacket) -> None:
    assert low_energy_weight(packet) < MAX_LOW_ENERGY_WEIGHT

    at_rest = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [0.0, 0.0, 0.0], 1.0, 0.0)
    assert 0.0 < low_energy_weight(at_rest) < MAX_LOW_ENERGY_WEIGHT
    assert low_energy_weight(at_rest, cutoff_fraction=0.01) > MAX_LOW_ENERGY_WEIGHT


def test_expect_T(packet: GaussianPacket) -> None:
    # <T> is the epoch for a packet built at its closest approach
    for duration in (0.0, 2.0, 4.5):
        current = evolve(packet, duration)
        assert expect_T(current, order=24) == pytest.approx(current.tau, abs=1e-10)


def test_expect_T_offset() -> None:
    # Narrow spectrum: <T> - tau is close to m x_i.k0 / |k0|^2
    packet = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [2.0, 0.0, 0.0], 0.05, 0.0)

    assert expect_T(packet, order=16) == pytest.approx(0.5, rel=1e-2)
    assert expect_T(evolve(packet, 1.0), order=16) - expect_T(
        packet, order=16
    ) == pytest.approx(1.0)


def test_expect_T_singular() -> None:
    at_rest = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [0.0, 0.0, 0.0], 1.0, 0.0)

    with pytest.raises(SingularInverseError):
        expect_T(at_rest, order=8, cutoff_fraction=0.01)


def test_packet_overlap(packet: GaussianPacket) -> None:
    assert packet_overlap(packet, packet) == pytest.approx(1.0)

    other = GaussianPacket.from_closest_approach(
        1.0, [0.0, 1.5, 0.0], [2.0, 0.0, 0.0], 1.0, tau=-3.0
    )
    distance = np.array([0.0, -0.5, 0.0])
    expected = np.exp(1j * (packet.k0 @ distance) - (distance @ distance) / 4.0)
    assert packet_overlap(packet, other) == pytest.approx(expected)

    # Norm is kept by the evolution, the overlap with the past is below 1
    later = evolve(packet, 2.0)
    assert packet_overlap(later, later) == pytest.approx(1.0)
    assert abs(packet_overlap(packet, later)) < 1.0


def test_extended(packet: GaussianPacket) -> None:
    incoming = lift_to_extended(packet)
    outgoing = lift_to_extended(evolve(packet, 3.0))

    assert incoming.in_component is packet
    assert incoming.out_component is None
    assert outgoing.in_component is None
    assert outgoing.tau == 0.0

    assert extended_inner(incoming, incoming) == pytest.approx(1.0)
    assert extended_inner(incoming, outgoing) == 0.0


def test_trajectory(packet: GaussianPacket) -> None:
    times = [-3.0, -1.5, 0.0, 1.5, 3.0]
    table = trajectory(packet, times, order=16)

    assert tuple(table.columns) == TRAJECTORY_COLUMNS
    assert table["tau"].tolist() == times

    assert table["H"].to_numpy() == pytest.approx(np.full(5, 2.75))
    assert table["R"].to_numpy() == pytest.approx(5.5 * np.array(times))
    assert table["T"].to_numpy() == pytest.approx(times, abs=1e-10)
    assert table["b"].to_numpy() == pytest.approx(np.ones(5))
    assert table["q_x"].to_numpy() == pytest.approx(2.0 * np.array(times))


def test_trajectory_error(packet: GaussianPacket) -> None:
    with pytest.raises(EvolutionDirectionError):
        trajectory(packet, [-1.0, -2.0])

    with pytest.raises(EvolutionDirectionError):
        trajectory(packet, [-4.0])


def test_trajectory_at_rest() -> None:
    at_rest = GaussianPacket(1.0, [1.0, 0.0, 0.0], 0.0, [0.0, 0.0, 0.0], 1.0, 0.0)
    table = trajectory(at_rest, [0.0, 1.0], order=8)

    assert table["b"].isna().all()


@pytest.mark.parametrize("tau", [-5.0, 0.0, 5.0])
def test_expect_T_narrow_packet(tau: float) -> None:
    # sigma_k / |k0| = 0.02
    narrow = GaussianPacket.from_closest_approach(
        1.0, [0.0, 1.0, 0.0], [5.0, 0.0, 0.0], 0.1, tau=tau
    )

    assert abs(expect_T(narrow) - tau) <= 1e-4 * abs(tau) + 1e-6


@pytest.mark.parametrize("step", [1e-3, 1e-4])
def test_ehrenfest_central_difference(step: float) -> None:
    mass = 2.0
    tau = 1.5
    start = GaussianPacket.from_closest_approach(
        mass, [0.0, 1.0, 0.0], [2.0, 0.0, 0.0], 0.5, tau=tau - step
    )
    middle = evolve(start, step)
    end = evolve(start, 2.0 * step)

    energy = expect_H(middle)
    rate_R = (expect_R(end) - expect_R(start)) / (2.0 * step)
    rate_Q = (expect_Q(end) - expect_Q(start)) / (2.0 * step)

    # d<R>/dt = 2 <H> and d<Q>/dt = 2 <R> / m
    assert rate_R == pytest.approx(2.0 * energy, rel=1e-9)
    assert rate_Q == pytest.approx(2.0 * expect_R(middle) / mass, abs=1e-8)

    # The one-sided difference keeps the first-order term dt * d2<Q>/dt2 / 2
    forward_Q = (expect_Q(end) - expect_Q(middle)) / step
    assert forward_Q - rate_Q == pytest.approx(
        2.0 * step * energy / mass, rel=1e-3
    )


vectors = st.lists(
    st.floats(min_value=-3.0, max_value=3.0), min_size=3, max_size=3
)


@settings(max_examples=100, deadline=None)
@given(
    mass=st.floats(min_value=0.1, max_value=10.0),
    x_i=vectors,
    k0=vectors,
    sigma_k=st.floats(min_value=0.1, max_value=2.0),
    tau=st.floats(min_value=-10.0, max_value=10.0),
)
def test_lift_to_extended_branch(
    mass: float, x_i: list[float], k0: list[float], sigma_k: float, tau: float
) -> None:
    packet = GaussianPacket(mass, x_i, 0.0, k0, sigma_k, tau)

    state = lift_to_extended(packet)

    assert state.tau == tau
    if tau < 0.0:
        assert (state.in_component is packet) and (state.out_component is None)
    else:
        assert (state.out_component is packet) and (state.in_component is None)

    incoming = lift_to_extended(GaussianPacket(mass, x_i, 0.0, k0, sigma_k, -1.0))
    outgoing = lift_to_extended(GaussianPacket(mass, x_i, 0.0, k0, sigma_k, 1.0))
    assert extended_inner(incoming, outgoing) == 0
    assert extended_inner(outgoing, incoming) == 0
    assert abs(extended_inner(state, state)) == pytest.approx(1.0)


def test_lift_to_extended_zero_epoch(packet: GaussianPacket) -> None:
    state = lift_to_extended(evolve(packet, -packet.tau))

    assert state.tau == 0.0
    assert state.in_component is None
    assert state.out_component is not None


@settings(max_examples=50, deadline=None)
@given(
    mass=st.floats(min_value=0.1, max_value=10.0),
    speed=st.floats(min_value=0.1, max_value=5.0),
    impact=st.floats(min_value=0.0, max_value=5.0),
    sigma_k=st.floats(min_value=0.1, max_value=2.0),
    steps=st.lists(
        st.integers(min_value=-100, max_value=100),
        min_size=2,
        max_size=8,
        unique=True,
    ),
)
def test_expect_R_monotone(
    mass: float, speed: float, impact: float, sigma_k: float, steps: list[int]
) -> None:
    times = [step / 10.0 for step in sorted(steps)]
    values = [
        expect_R(
            GaussianPacket.from_closest_approach(
                mass, [0.0, impact, 0.0], [speed, 0.0, 0.0], sigma_k, tau=tau
            )
        )
        for tau in times
    ]

    assert all(later > earlier for earlier, later in zip(values, values[1:]))

    # Incoming before the closest approach, outgoing after
    for tau, value in zip(times, values):
        assert (value < 0.0) == (tau < 0.0)
        assert (value > 0.0) == (tau > 0.0)
