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
    "PairSource",
    "CoincidenceCounts",
    "OneSideCounts",
    "Correlation",
    "ChshScore",
    "ScanRow",
    "ArrangementComparison",
    "simulate_coincidences",
    "simulate_one_side",
    "correlation",
    "chsh",
    "quantum_correlation",
    "quantum_chsh",
    "run_chsh",
    "chsh_scan",
    "arrangement_equivalence",
]

import functools
import math
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .angular_grid import SampledAngularFunction
from .constants import DEFAULT_SEED, EVENT_CHUNK_SIZE
from .enums import ChainMode, StreamRole
from .polarizer import TransferProfile, chain_transmission, pair_transmission
from .random_streams import check_seed, derive_seed, event_blocks, stream_generator

# Order of the settings pairs in a CHSH run: (alpha, beta), (alpha', beta),
# (alpha, beta'), (alpha', beta'), as index pairs into (alpha, alpha', beta,
# beta').
CHSH_PAIRS = ((0, 2), (1, 2), (0, 3), (1, 3))

ImpactWeight = typing.Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class PairSource:
    """Source of pairs of equally polarized photons.

    Parameters
    ----------
    seed : `int`, optional
        Root seed. (the default is DEFAULT_SEED)
    polarization_density : `SampledAngularFunction` or None, optional
        Nonnegative density of the shared polarization angle on [0, pi); it
        is normalized on construction. None means uniform.
        (the default is None)
    impact_weight : `collections.abc.Callable` or None, optional
        Transmission weight w(b) in [0, 1] of the normalized impact
        parameter b in [0, 1), drawn independently for each photon. None
        means no impact-parameter modulation. (the default is None)

    Raises
    ------
    `ValueError`
        If the seed or the density is invalid.
    """

    seed: int = DEFAULT_SEED
    polarization_density: SampledAngularFunction | None = None
    impact_weight: ImpactWeight | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_seed(self.seed)

        density = self.polarization_density
        if density is not None:
            if density.values.min() < 0.0:
                raise ValueError("Polarization density must be nonnegative.")

            total = density.values.sum()
            if total <= 0.0:
                raise ValueError("Polarization density must have positive mass.")

            object.__setattr__(
                self,
                "polarization_density",
                density.with_values(density.values * (density.grid.n / total)),
            )

    def sample_polarization(
        self, generator: np.random.Generator, size: int
    ) -> NDArray[np.float64]:
        """Draw the shared polarization angles.

        Parameters
        ----------
        generator : `numpy.random.Generator`
            Generator.
        size : `int`
            Number of pairs.

        Returns
        -------
        `numpy.ndarray`
            Angles in radian.
        """

        uniform = generator.random(size)
        density = self.polarization_density
        if density is None:
            return uniform * math.pi

        # Inverse CDF over the cells centered on the grid nodes
        n = density.grid.n
        cumulative = np.cumsum(density.values) / density.values.sum()
        cells = np.minimum(np.searchsorted(cumulative, uniform, side="right"), n - 1)
        offset = generator.random(size) - 0.5
        return (cells + offset) * (math.pi / n)

    def sample_weight(
        self, generator: np.random.Generator, size: int
    ) -> NDArray[np.float64] | float:
        """Draw the impact parameters and return their weights.

        Raises
        ------
        `ValueError`
            If a weight is outside of [0, 1].
        """

        if self.impact_weight is None:
            return 1.0

        weight = np.asarray(self.impact_weight(generator.random(size)), dtype=float)
        if (weight.min() < 0.0) or (weight.max() > 1.0):
            raise ValueError("Impact-parameter weight not in range [0, 1].")

        return weight


@dataclass(frozen=True)
class CoincidenceCounts:
    """Counts of the (transmit, absorb) outcomes at the two wings.

    The index p means transmitted (+1) and m means absorbed (-1); the first
    index is the wing with the setting alpha.

    Raises
    ------
    `ValueError`
        If a count is negative or the counts do not sum to the events.
    """

    n_events: int
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        counts = (self.n_pp, self.n_pm, self.n_mp, self.n_mm)
        if min(counts) < 0:
            raise ValueError(f"Negative coincidence count in {counts}.")

        if sum(counts) != self.n_events:
            raise ValueError(
                f"Counts {counts} do not sum to n_events={self.n_events}."
            )

    @classmethod
    def empty(cls, alpha: float, beta: float) -> CoincidenceCounts:
        return cls(0, 0, 0, 0, 0, alpha, beta)

    def merge(self, other: CoincidenceCounts) -> CoincidenceCounts:
        """Sum with counts of the same settings.

        Raises
        ------
        `ValueError`
            If the settings are different.
        """

        if (self.alpha, self.beta) != (other.alpha, other.beta):
            raise ValueError("Cannot merge counts of different settings.")

        return CoincidenceCounts(
            self.n_events + other.n_events,
            self.n_pp + other.n_pp,
            self.n_pm + other.n_pm,
            self.n_mp + other.n_mp,
            self.n_mm + other.n_mm,
            self.alpha,
            self.beta,
        )


@dataclass(frozen=True)
class OneSideCounts:
    """Photons crossing two polarizers in sequence.

    Parameters
    ----------
    n_events : `int`
        Number of photons.
    n_transmitted : `int`
        Photons transmitted by both polarizers.
    alpha : `float`
        Axis of the second polarizer, the first one is at 0.
    """

    n_events: int
    n_transmitted: int
    alpha: float

    @property
    def fraction(self) -> float:
        return self.n_transmitted / self.n_events if self.n_events else 0.0


@dataclass(frozen=True)
class Correlation:
    """Correlation E in [-1, 1] with its standard error."""

    value: float
    standard_error: float = 0.0


@dataclass(frozen=True)
class ChshScore:
    """CHSH combination S = E1 + E2 + E3 - E4.

    Parameters
    ----------
    correlations : `tuple` [`Correlation`]
        E(alpha, beta), E(alpha', beta), E(alpha, beta'), E(alpha', beta').
    s : `float`
        Combination.
    standard_error : `float`
        Standard error of S.
    """

    correlations: tuple[Correlation, Correlation, Correlation, Correlation]
    s: float
    standard_error: float


@dataclass(frozen=True)
class ScanRow:
    """One row of the CHSH scan over the settings (2 theta, 0, theta, 3 theta)."""

    theta: float
    settings: tuple[float, float, float, float]
    s: float
    standard_error: float
    quantum_s: float


@dataclass(frozen=True)
class ArrangementComparison:
    """One-side versus coincidence transmission of the same profile."""

    one_side: float
    coincidence: float
    difference: float


def _simulate_block(
    source: PairSource,
    p: TransferProfile,
    alpha: float,
    beta: float,
    block: int,
    size: int,
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """Outcomes of the two wings for one block of pairs."""

    seed = source.seed
    polarization = source.sample_polarization(
        stream_generator(seed, block, StreamRole.Source), size
    )

    weight_a = source.sample_weight(
        stream_generator(seed, block, StreamRole.ImpactA), size
    )
    weight_b = source.sample_weight(
        stream_generator(seed, block, StreamRole.ImpactB), size
    )

    uniform_a = stream_generator(seed, block, StreamRole.WingA).random(size)
    uniform_b = stream_generator(seed, block, StreamRole.WingB).random(size)

    transmit_a = uniform_a < p.at(polarization - alpha) * weight_a
    transmit_b = uniform_b < p.at(polarization - beta) * weight_b
    return transmit_a, transmit_b


def _count_block(
    source: PairSource,
    p: TransferProfile,
    alpha: float,
    beta: float,
    block_and_size: tuple[int, int],
) -> CoincidenceCounts:
    transmit_a, transmit_b = _simulate_block(source, p, alpha, beta, *block_and_size)
    return CoincidenceCounts(
        int(transmit_a.size),
        int(np.count_nonzero(transmit_a & transmit_b)),
        int(np.count_nonzero(transmit_a & ~transmit_b)),
        int(np.count_nonzero(~transmit_a & transmit_b)),
        int(np.count_nonzero(~transmit_a & ~transmit_b)),
        alpha,
        beta,
    )


def simulate_coincidences(
    source: PairSource,
    p: TransferProfile,
    alpha: float,
    beta: float,
    n: int,
    max_workers: int | None = None,
    block_size: int = EVENT_CHUNK_SIZE,
) -> CoincidenceCounts:
    """Monte Carlo of the coincidence experiment with a local model.

    Both photons of a pair share the polarization angle lambda. Each wing
    transmits independently with the probability p(lambda - setting), times
    the impact-parameter weight when the source has one.

    Parameters
    ----------
    source : `PairSource`
        Source.
    p : `TransferProfile`
        Profile of both polarizers.
    alpha : `float`
        Setting of the first wing in radian.
    beta : `float`
        Setting of the second wing in radian.
    n : `int`
        Number of pairs.
    max_workers : `int` or None, optional
        Worker threads. (the default is None, which lets the executor decide)
    block_size : `int`, optional
        Events per random stream block. (the default is EVENT_CHUNK_SIZE)

    Returns
    -------
    `CoincidenceCounts`
        Counts, identical for the same seed whatever the number of workers.

    Raises
    ------
    `ValueError`
        If n is negative.
    """

    blocks = event_blocks(n, block_size=block_size)
    counter = functools.partial(_count_block, source, p, alpha, beta)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return functools.reduce(
            CoincidenceCounts.merge,
            executor.map(counter, blocks),
            CoincidenceCounts.empty(alpha, beta),
        )


def simulate_one_side(
    source: PairSource,
    p: TransferProfile,
    alpha: float,
    n: int,
    block_size: int = EVENT_CHUNK_SIZE,
) -> OneSideCounts:
    """Monte Carlo of one photon crossing the polarizers at 0 and alpha.

    The polarization of the photon is not changed by the first polarizer.
    The events use the same streams as `simulate_coincidences` at the
    settings (0, alpha), so the transmitted photons are exactly its (+, +)
    pairs.

    Parameters
    ----------
    source : `PairSource`
        Source.
    p : `TransferProfile`
        Profile of both polarizers.
    alpha : `float`
        Axis of the second polarizer in radian.
    n : `int`
        Number of photons.
    block_size : `int`, optional
        Events per random stream block. (the default is EVENT_CHUNK_SIZE)

    Returns
    -------
    `OneSideCounts`
        Counts.
    """

    transmitted = 0
    for block, size in event_blocks(n, block_size=block_size):
        first, second = _simulate_block(source, p, 0.0, alpha, block, size)
        transmitted += int(np.count_nonzero(first & second))

    return OneSideCounts(n, transmitted, alpha)


def correlation(counts: CoincidenceCounts) -> Correlation:
    """Correlation of the +1/-1 outcomes.

    Parameters
    ----------
    counts : `CoincidenceCounts`
        Counts.

    Returns
    -------
    `Correlation`
        E = (n_pp + n_mm - n_pm - n_mp) / n with the binomial standard error
        sqrt((1 - E^2) / n).

    Raises
    ------
    `ValueError`
        If there is no event.
    """

    if counts.n_events < 1:
        raise ValueError("Correlation needs at least one event.")

    value = (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / counts.n_events
    error = math.sqrt(max(1.0 - value**2, 0.0) / counts.n_events)
    return Correlation(value, error)


def _as_correlation(value: Correlation | float) -> Correlation:
    return value if isinstance(value, Correlation) else Correlation(float(value))


def chsh(
    e1: Correlation | float,
    e2: Correlation | float,
    e3: Correlation | float,
    e4: Correlation | float,
) -> ChshScore:
    """CHSH combination S = E1 + E2 + E3 - E4.

    Parameters
    ----------
    e1 : `Correlation` or `float`
        E(alpha, beta).
    e2 : `Correlation` or `float`
        E(alpha', beta).
    e3 : `Correlation` or `float`
        E(alpha, beta').
    e4 : `Correlation` or `float`
        E(alpha', beta').

    Returns
    -------
    `ChshScore`
        Score with the error propagated in quadrature.

    Raises
    ------
    `ValueError`
        If any |E| > 1.
    """

    correlations = tuple(_as_correlation(value) for value in (e1, e2, e3, e4))
    for item in correlations:
        if abs(item.value) > 1.0:
            raise ValueError(f"Correlation {item.value} not in range [-1, 1].")

    s = (
        correlations[0].value
        + correlations[1].value
        + correlations[2].value
        - correlations[3].value
    )
    error = math.sqrt(sum(item.standard_error**2 for item in correlations))
    return ChshScore(correlations, s, error)  # type: ignore[arg-type]


def quantum_correlation(alpha: float, beta: float) -> float:
    """Quantum correlation cos(2 (alpha - beta)) of equally polarized pairs."""
    return math.cos(2.0 * (alpha - beta))


def _check_settings(settings: typing.Sequence[float]) -> tuple[float, ...]:
    if len(settings) != 4:
        raise ValueError(
            f"Expected 4 settings (alpha, alpha', beta, beta'), got {len(settings)}."
        )

    values = tuple(float(value) for value in settings)
    if not all(math.isfinite(value) for value in values):
        raise ValueError(f"Settings {values} are not finite.")

    return values


def quantum_chsh(settings: typing.Sequence[float]) -> float:
    """Quantum CHSH combination at the settings (alpha, alpha', beta, beta').

    Raises
    ------
    `ValueError`
        If there are not four finite settings.
    """

    values = _check_settings(settings)
    correlations = [
        quantum_correlation(values[first], values[second])
        for first, second in CHSH_PAIRS
    ]
    return chsh(*correlations).s


def run_chsh(
    source: PairSource,
    p: TransferProfile,
    settings: typing.Sequence[float],
    n: int,
    max_workers: int | None = None,
) -> tuple[ChshScore, list[CoincidenceCounts]]:
    """Simulate the four settings pairs of a CHSH experiment.

    Each pair gets its own child seed derived from the seed of the source.

    Parameters
    ----------
    source : `PairSource`
        Source.
    p : `TransferProfile`
        Profile of every polarizer.
    settings : `list` [`float`]
        (alpha, alpha', beta, beta') in radian.
    n : `int`
        Number of pairs per settings pair.
    max_workers : `int` or None, optional
        Worker threads. (the default is None)

    Returns
    -------
    `ChshScore`
        Score.
    `list` [`CoincidenceCounts`]
        Counts of the four settings pairs.

    Raises
    ------
    `ValueError`
        If n < 1 or the settings are invalid.
    """

    values = _check_settings(settings)
    if n < 1:
        raise ValueError(f"Number of events n={n} must be >= 1.")

    counts = [
        simulate_coincidences(
            replace(source, seed=derive_seed(source.seed, index)),
            p,
            values[first],
            values[second],
            n,
            max_workers=max_workers,
        )
        for index, (first, second) in enumerate(CHSH_PAIRS)
    ]

    return chsh(*[correlation(item) for item in counts]), counts


def chsh_scan(
    source: PairSource,
    p: TransferProfile,
    thetas: typing.Sequence[float],
    n: int,
    max_workers: int | None = None,
) -> list[ScanRow]:
    """CHSH over the settings family (2 theta, 0, theta, 3 theta).

    Parameters
    ----------
    source : `PairSource`
        Source. Each row uses a child seed of it.
    p : `TransferProfile`
        Profile of every polarizer.
    thetas : `list` [`float`]
        Angles theta in radian.
    n : `int`
        Number of pairs per settings pair.
    max_workers : `int` or None, optional
        Worker threads. (the default is None)

    Returns
    -------
    `list` [`ScanRow`]
        One row per theta with the local and quantum S.
    """

    rows = list()
    for index, theta in enumerate(thetas):
        settings = (2.0 * theta, 0.0, theta, 3.0 * theta)
        score, _ = run_chsh(
            replace(source, seed=derive_seed(source.seed, len(CHSH_PAIRS) + index)),
            p,
            settings,
            n,
            max_workers=max_workers,
        )
        rows.append(
            ScanRow(
                theta, settings, score.s, score.standard_error, quantum_chsh(settings)
            )
        )

    return rows


def arrangement_equivalence(p: TransferProfile, alpha: float) -> ArrangementComparison:
    """Compare the one-side and coincidence arrangements.

    The one-side value is the chain of the polarizers at 0 and alpha crossed
    by one photon; the coincidence value is the pair transmission of the two
    wings sharing the polarization.

    Parameters
    ----------
    p : `TransferProfile`
        Profile.
    alpha : `float`
        Relative angle in radian.

    Returns
    -------
    `ArrangementComparison`
        Both transmissions and their absolute difference.
    """

    one_side = chain_transmission(p, [0.0, alpha], mode=ChainMode.Persistent)
    coincidence = pair_transmission(p, p, alpha)
    return ArrangementComparison(one_side, coincidence, abs(one_side - coincidence))
