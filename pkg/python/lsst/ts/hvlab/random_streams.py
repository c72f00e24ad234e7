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
    "check_seed",
    "derive_seed",
    "stream_generator",
    "event_blocks",
]

import numpy as np

from .constants import EVENT_CHUNK_SIZE
from .enums import StreamRole

# Seeds are unsigned 64-bit integers
MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Check the seed.

    Parameters
    ----------
    seed : `int`
        Root seed.

    Returns
    -------
    `int`
        Seed.

    Raises
    ------
    `ValueError`
        If the seed is not an integer in [0, 2^64 - 1].
    """

    if isinstance(seed, bool) or (not isinstance(seed, (int, np.integer))):
        raise ValueError(f"Seed {seed!r} is not an integer.")

    if not (0 <= seed <= MAX_SEED):
        raise ValueError(f"seed={seed} not in range [0, {MAX_SEED}].")

    return int(seed)


def derive_seed(seed: int, index: int) -> int:
    """Derive an independent child seed.

    Parameters
    ----------
    seed : `int`
        Root seed.
    index : `int`
        Index of the child (e.g. the settings pair of a CHSH run).

    Returns
    -------
    `int`
        Child seed.
    """

    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream_generator(seed: int, block: int, role: StreamRole) -> np.random.Generator:
    """Random generator of one role in one block of events.

    The stream depends only on (seed, block, role), so a block gives the
    same events whichever worker simulates it and in whatever order.

    Parameters
    ----------
    seed : `int`
        Root seed.
    block : `int`
        Block index.
    role : `enum.StreamRole`
        Role of the stream.

    Returns
    -------
    `numpy.random.Generator`
        Generator based on the counter-based Philox bit generator.
    """

    sequence = np.random.SeedSequence(
        check_seed(seed), spawn_key=(int(block), int(role))
    )
    return np.random.Generator(np.random.Philox(sequence))


def event_blocks(
    num_events: int, block_size: int = EVENT_CHUNK_SIZE
) -> list[tuple[int, int]]:
    """Split the events into blocks.

    Parameters
    ----------
    num_events : `int`
        Number of events.
    block_size : `int`, optional
        Events per block. (the default is EVENT_CHUNK_SIZE)

    Returns
    -------
    `list` [`tuple`]
        (block index, number of events) of each block; empty when there is no
        event.

    Raises
    ------
    `ValueError`
        If the number of events is negative or the block size is not positive.
    """

    if num_events < 0:
        raise ValueError(f"Number of events {num_events} must be >= 0.")

    if block_size <= 0:
        raise ValueError(f"Block size {block_size} must be > 0.")

    return [
        (block, min(block_size, num_events - start))
        for block, start in enumerate(range(0, num_events, block_size))
    ]
