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
    CANONICAL_SETTINGS,
    CoincidenceCounts,
    Correlation,
    PairSource,
    SampledAngularFunction,
    TransferProfile,
    arrangement_equivalence,
    chsh,
    chsh_scan,
    correlation,
    cos2_profile,
    indicator_profile,
    make_grid,
    pair_transmission,
    quantum_chsh,
    quantum_correlation,
    run_chsh,
    simulate_coincidences,
    simulate_one_side,
)

NUM_EVENTS = 20000


@pytest.fixture
def cos2() -> TransferProfile:
    return cos2_profile(make_grid(256))


@pytest.fixture
def source() -> PairSource:
    return PairSource(seed=1234)


def test_pair_source_error() -> None:
    grid = make_grid(8)

    with pytest.raises(ValueError):
        PairSource(seed=-1)

    with pytest.raises(ValueError):
        PairSource(polarization_density=SampledAngularFunction(grid, -np.ones(8)))

    with pytest.raises(ValueError):
        PairSource(polarization_density=SampledAngularFunction(grid, np.zeros(8)))


def test_sample_polarization(source: PairSource) -> None:
    angles = source.sample_polarization(np.random.default_rng(1), 1000)

    assert angles.min() >= 0.0
    assert angles.max() < math.pi


def test_sample_polarization_density() -> None:
    grid = make_grid(8)
    density = SampledAngularFunction(grid, np.eye(8)[2])
    source = PairSource(polarization_density=density)

    angles = source.sample_polarization(np.random.default_rng(1), 1000)

    # All the mass is in the cell centered on the node 2
    assert np.all(np.abs(angles - grid.nodes[2]) <= grid.spacing / 2)


def test_coincidence_counts() -> None:
    with pytest.raises(ValueError):
        CoincidenceCounts(3, 1, 1, 0, 0, 0.0, 0.0)

    counts = CoincidenceCounts(4, 1, 1, 1, 1, 0.0, 0.1).merge(
        CoincidenceCounts(2, 2, 0, 0, 0, 0.0, 0.1)
    )

    assert counts == CoincidenceCounts(6, 3, 1, 1, 1, 0.0, 0.1)

    with pytest.raises(ValueError):
        counts.merge(CoincidenceCounts.empty(0.0, 0.2))


def test_simulate_coincidences(source: PairSource, cos2: TransferProfile) -> None:
    counts = simulate_coincidences(source, cos2, 0.0, math.pi / 8, NUM_EVENTS)

    assert counts.n_events == NUM_EVENTS
    assert counts.n_pp + counts.n_pm + counts.n_mp + counts.n_mm == NUM_EVENTS

    # Local model gives E = cos(2 (alpha - beta)) / 2 for the cos^2 profile
    value = correlation(counts)
    assert value.value == pytest.approx(
        0.5 * math.cos(math.pi / 4), abs=5.0 * value.standard_error
    )

    # Coincidence rate is the pair transmission
    assert counts.n_pp / NUM_EVENTS == pytest.approx(
        pair_transmission(cos2, cos2, math.pi / 8), abs=0.02
    )


def test_simulate_coincidences_deterministic(
    source: PairSource, cos2: TransferProfile
) -> None:
    counts = simulate_coincidences(
        source, cos2, 0.2, 0.5, NUM_EVENTS, max_workers=1, block_size=1000
    )

    # Independent of the worker count
    assert counts == simulate_coincidences(
        source, cos2, 0.2, 0.5, NUM_EVENTS, max_workers=4, block_size=1000
    )

    # Depends on the seed
    assert counts != simulate_coincidences(
        PairSource(seed=1235), cos2, 0.2, 0.5, NUM_EVENTS, block_size=1000
    )


def test_simulate_coincidences_no_event(
    source: PairSource, cos2: TransferProfile
) -> None:
    counts = simulate_coincidences(source, cos2, 0.0, 0.0, 0)

    assert counts == CoincidenceCounts.empty(0.0, 0.0)

    with pytest.raises(ValueError):
        correlation(counts)


def test_simulate_coincidences_impact_weight(
    cos2: TransferProfile,
) -> None:
    source = PairSource(seed=1, impact_weight=lambda b: np.zeros_like(b))

    counts = simulate_coincidences(source, cos2, 0.0, 0.0, 1000)

    assert counts.n_mm == 1000


def test_simulate_one_side(source: PairSource, cos2: TransferProfile) -> None:
    one_side = simulate_one_side(source, cos2, math.pi / 8, NUM_EVENTS)
    coincidence = simulate_coincidences(source, cos2, 0.0, math.pi / 8, NUM_EVENTS)

    # Same random streams as the coincidence run
    assert one_side.n_transmitted == coincidence.n_pp
    assert one_side.fraction == pytest.approx(coincidence.n_pp / NUM_EVENTS)


def test_correlation() -> None:
    value = correlation(CoincidenceCounts(4, 2, 0, 0, 2, 0.0, 0.0))

    assert value.value == 1.0
    assert value.standard_error == 0.0


def test_chsh() -> None:
    score = chsh(0.5, 0.5, 0.5, -0.5)

    assert score.s == 2.0
    assert score.standard_error == 0.0

    score = chsh(
        Correlation(0.1, 0.3), Correlation(0.1, 0.4), Correlation(0.0, 0.0), 0.0
    )
    assert score.standard_error == pytest.approx(0.5)

    with pytest.raises(ValueError):
        chsh(1.5, 0.0, 0.0, 0.0)


def test_quantum_chsh() -> None:
    assert quantum_correlation(0.3, 0.3) == 1.0
    assert quantum_chsh(CANONICAL_SETTINGS) == pytest.approx(2.0 * math.sqrt(2.0))

    with pytest.raises(ValueError):
        quantum_chsh([0.0, 0.0, 0.0])

    with pytest.raises(ValueError):
        quantum_chsh([0.0, 0.0, 0.0, math.nan])


def test_run_chsh(source: PairSource, cos2: TransferProfile) -> None:
    score, counts = run_chsh(source, cos2, CANONICAL_SETTINGS, NUM_EVENTS)

    assert len(counts) == 4
    assert [(item.alpha, item.beta) for item in counts] == [
        (CANONICAL_SETTINGS[0], CANONICAL_SETTINGS[2]),
        (CANONICAL_SETTINGS[1], CANONICAL_SETTINGS[2]),
        (CANONICAL_SETTINGS[0], CANONICAL_SETTINGS[3]),
        (CANONICAL_SETTINGS[1], CANONICAL_SETTINGS[3]),
    ]

    # Local bound holds; cos^2 gives sqrt(2)
    assert score.s <= 2.0 + 5.0 * score.standard_error
    assert score.s == pytest.approx(math.sqrt(2.0), abs=5.0 * score.standard_error)

    # Rerun gives the same counts
    assert run_chsh(source, cos2, CANONICAL_SETTINGS, NUM_EVENTS)[1] == counts


def test_run_chsh_error(source: PairSource, cos2: TransferProfile) -> None:
    with pytest.raises(ValueError):
        run_chsh(source, cos2, CANONICAL_SETTINGS, 0)

    with pytest.raises(ValueError):
        run_chsh(source, cos2, CANONICAL_SETTINGS[:3], 10)


def test_chsh_scan(source: PairSource, cos2: TransferProfile) -> None:
    thetas = [0.0, math.pi / 8, math.pi / 4]
    rows = chsh_scan(source, cos2, thetas, 5000)

    assert [row.theta for row in rows] == thetas
    assert rows[1].settings == (math.pi / 4, 0.0, math.pi / 8, 3.0 * math.pi / 8)

    for row in rows:
        assert row.quantum_s == pytest.approx(
            3.0 * math.cos(2.0 * row.theta) - math.cos(6.0 * row.theta)
        )
        assert row.s <= 2.0 + 5.0 * row.standard_error


def test_arrangement_equivalence(cos2: TransferProfile) -> None:
    comparison = arrangement_equivalence(cos2, 0.6)

    assert comparison.difference == pytest.approx(0.0, abs=1e-12)
    assert comparison.one_side == pytest.approx(0.25 + math.cos(1.2) / 8.0)


@pytest.mark.parametrize("seed", range(20))
def test_arrangement_equivalence_random_profile(seed: int) -> None:
    rng = np.random.default_rng(seed)
    grid = make_grid(64)

    # Even in lambda: the value at node j is the value at node -j
    half = rng.random(grid.n // 2 + 1)
    profile = TransferProfile.from_values(
        grid, np.concatenate([half, half[-2:0:-1]])
    )
    alpha = (rng.integers(grid.n) + rng.uniform(0.1, 0.9)) * grid.spacing

    comparison = arrangement_equivalence(profile, alpha)

    assert comparison.difference == pytest.approx(0.0, abs=1e-12)
    assert comparison.one_side == pytest.approx(comparison.coincidence, abs=1e-12)
    assert comparison.coincidence == pytest.approx(
        pair_transmission(profile, profile, alpha), abs=1e-12
    )


LOCAL_GRID = make_grid(32)


@st.composite
def local_profiles(draw: st.DrawFn) -> TransferProfile:
    """Random 0/1 profiles and smooth profiles of two harmonics."""

    if draw(st.booleans()):
        values = draw(
            st.lists(st.booleans(), min_size=LOCAL_GRID.n, max_size=LOCAL_GRID.n)
        )
        return TransferProfile.from_values(LOCAL_GRID, np.array(values, dtype=float))

    unit = st.floats(min_value=0.0, max_value=1.0)
    level = draw(unit)
    first = draw(unit)
    second = draw(unit)
    phase = draw(st.floats(min_value=0.0, max_value=math.pi))

    nodes = LOCAL_GRID.nodes
    values = level * (
        0.5
        + 0.25 * first * np.cos(2.0 * (nodes - phase))
        + 0.25 * second * np.cos(4.0 * nodes)
    )
    return TransferProfile.from_values(LOCAL_GRID, values)


@settings(max_examples=50, deadline=None)
@given(
    profile=local_profiles(),
    settings_=st.lists(
        st.floats(min_value=0.0, max_value=math.pi), min_size=4, max_size=4
    ),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_local_bound(
    profile: TransferProfile, settings_: list[float], seed: int
) -> None:
    score, _ = run_chsh(PairSource(seed=seed), profile, settings_, NUM_EVENTS)

    assert score.s <= 2.0 + 5.0 * score.standard_error


@settings(max_examples=20, deadline=None)
@given(
    alpha=st.floats(min_value=0.0, max_value=math.pi),
    beta=st.floats(min_value=0.0, max_value=math.pi),
    delta=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_rotational_covariance(alpha: float, beta: float, delta: float) -> None:
    cos2 = cos2_profile(make_grid(256))

    first = correlation(
        simulate_coincidences(PairSource(seed=21), cos2, alpha, beta, NUM_EVENTS)
    )
    second = correlation(
        simulate_coincidences(
            PairSource(seed=22), cos2, alpha + delta, beta + delta, NUM_EVENTS
        )
    )

    assert abs(first.value - second.value) <= 5.0 * math.hypot(
        first.standard_error, second.standard_error
    )


def test_quantum_chsh_dense_scan() -> None:
    thetas = np.arange(181) * (math.pi / 180.0)

    values = [
        quantum_chsh((2.0 * theta, 0.0, theta, 3.0 * theta)) for theta in thetas
    ]

    assert max(values) <= 2.0 * math.sqrt(2.0) + 1e-9
    assert max(values) == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-3)
    assert min(values) >= -2.0 * math.sqrt(2.0) - 1e-9

    # Any four settings on a coarser lattice
    lattice = np.arange(12) * (math.pi / 12.0)
    grid = np.stack(np.meshgrid(lattice, lattice, lattice, lattice), axis=-1)
    worst = max(abs(quantum_chsh(row)) for row in grid.reshape(-1, 4))
    assert worst <= 2.0 * math.sqrt(2.0) + 1e-9


def test_simulate_coincidences_indicator(source: PairSource) -> None:
    profile = indicator_profile(make_grid(256), math.pi / 4.0)

    counts = simulate_coincidences(source, profile, 0.0, 0.0, NUM_EVENTS)

    assert counts.n_pm == 0
    assert counts.n_mp == 0
    assert counts.n_pp > 0
    assert counts.n_mm > 0
    assert correlation(counts).value == 1.0
