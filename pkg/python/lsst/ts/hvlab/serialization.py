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
    "write_table",
    "read_table",
    "write_json",
    "read_json",
    "write_profile",
    "read_profile",
    "write_target",
    "read_target",
    "read_packet_spec",
]

import json
import math
import typing
from pathlib import Path

import numpy as np
import pandas as pd

from .angular_grid import SampledAngularFunction, make_grid
from .polarizer import MalusTarget, TransferProfile
from .twobody import GaussianPacket

# Format of the floats in CSV files, enough for an exact round trip
FLOAT_FORMAT = "%.17g"

PROFILE_COLUMNS = ("lambda", "value")

# Largest difference between the stored and the recomputed node angles
NODE_TOLERANCE = 1e-12

PACKET_KEYS = ("mass", "x_i", "tau_i", "k0", "sigma_k", "tau")


def write_table(table: pd.DataFrame, path: str | Path) -> None:
    """Write the table as CSV with a header row and LF line endings.

    Parameters
    ----------
    table : `pandas.DataFrame`
        Table.
    path : `str` or `pathlib.Path`
        File path.
    """

    table.to_csv(path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)


def read_table(path: str | Path) -> pd.DataFrame:
    """Read a CSV table written by `write_table`.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the file can not be parsed.
    """

    try:
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise ValueError(f"{path}: {error}") from error


def _to_builtin(value: typing.Any) -> typing.Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable.")


def write_json(data: dict[str, typing.Any], path: str | Path) -> None:
    """Write the data as JSON with a stable key order.

    Parameters
    ----------
    data : `dict`
        Data.
    path : `str` or `pathlib.Path`
        File path.
    """

    text = json.dumps(data, sort_keys=True, indent=2, default=_to_builtin)
    Path(path).write_text(text + "\n")


def read_json(path: str | Path) -> typing.Any:
    """Read a JSON file.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the file is malformed. The message has the line number.
    """

    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise ValueError(
            f"{path}:{error.lineno}:{error.colno}: {error.msg}"
        ) from error


def _header_path(path: Path) -> Path:
    return path.with_suffix(".json")


def _write_curve(
    curve: SampledAngularFunction,
    path: Path,
    epsilon: float | None,
    provenance: str,
) -> None:
    table = pd.DataFrame(
        {PROFILE_COLUMNS[0]: curve.grid.nodes, PROFILE_COLUMNS[1]: curve.values}
    )
    write_table(table, path)
    write_json(
        {"grid_size": curve.grid.n, "epsilon": epsilon, "provenance": provenance},
        _header_path(path),
    )


def _read_curve(path: Path) -> tuple[SampledAngularFunction, dict[str, typing.Any]]:
    """Read a (lambda, value) table and its optional JSON header.

    Returns
    -------
    `SampledAngularFunction`
        Sampled values.
    `dict`
        Header, empty when there is no header file.
    """

    table = read_table(path)

    if tuple(table.columns) != PROFILE_COLUMNS:
        raise ValueError(
            f"{path}:1: expected the columns {list(PROFILE_COLUMNS)}, "
            f"got {list(table.columns)}."
        )

    for column in PROFILE_COLUMNS:
        numbers = pd.to_numeric(table[column], errors="coerce")
        invalid = np.flatnonzero(~np.isfinite(numbers.to_numpy(dtype=float)))
        if invalid.size:
            # Line 1 is the header
            raise ValueError(
                f"{path}:{invalid[0] + 2}: invalid {column} value "
                f"{table[column].iloc[invalid[0]]!r}."
            )
        table[column] = numbers

    grid = make_grid(len(table))
    offset = np.abs(table[PROFILE_COLUMNS[0]].to_numpy() - grid.nodes)
    if offset.max() > NODE_TOLERANCE:
        row = int(np.argmax(offset))
        raise ValueError(f"{path}:{row + 2}: lambda is not on the uniform grid.")

    header: dict[str, typing.Any] = dict()
    header_path = _header_path(path)
    if header_path.exists():
        header = read_json(header_path)
        if header.get("grid_size") != grid.n:
            raise ValueError(
                f"{header_path}: grid_size={header.get('grid_size')} but the "
                f"table has {grid.n} rows."
            )

    return (
        SampledAngularFunction(grid, table[PROFILE_COLUMNS[1]].to_numpy()),
        header,
    )


def write_profile(
    profile: TransferProfile,
    path: str | Path,
    epsilon: float | None = None,
    provenance: str = "",
) -> None:
    """Write the profile as a (lambda, value) CSV and a JSON header.

    The header has the same path with the suffix .json.

    Parameters
    ----------
    profile : `TransferProfile`
        Profile.
    path : `str` or `pathlib.Path`
        CSV path.
    epsilon : `float` or None, optional
        Leakage of the fitted target. (the default is None)
    provenance : `str`, optional
        How the profile was made. (the default is "")
    """

    _write_curve(profile.f, Path(path), epsilon, provenance)


def read_profile(path: str | Path) -> TransferProfile:
    """Read a profile written by `write_profile`.

    The JSON header is optional; when present its grid size is checked.

    Parameters
    ----------
    path : `str` or `pathlib.Path`
        CSV path.

    Returns
    -------
    `TransferProfile`
        Profile.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the file is malformed. The message has the line number when a
        row is at fault.
    """

    curve, _ = _read_curve(Path(path))
    return TransferProfile(curve)


def write_target(target: MalusTarget, path: str | Path, provenance: str = "") -> None:
    """Write the Malus target as a (lambda, value) CSV and a JSON header.

    Parameters
    ----------
    target : `MalusTarget`
        Target. Its leakage goes to the header.
    path : `str` or `pathlib.Path`
        CSV path.
    provenance : `str`, optional
        How the target was made. (the default is "")
    """

    _write_curve(target.curve, Path(path), target.epsilon, provenance)


def read_target(path: str | Path) -> MalusTarget:
    """Read a Malus target written by `write_target`.

    Without a header the leakage is None.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the file is malformed or the values are not a valid target.
    """

    path = Path(path)
    curve, header = _read_curve(path)

    epsilon = header.get("epsilon")
    try:
        return MalusTarget(None if epsilon is None else float(epsilon), curve)
    except (TypeError, ValueError) as error:
        raise ValueError(f"{path}: invalid target: {error}") from error


def _key_line(path: str | Path, key: str) -> int:
    """Line of the first occurrence of the JSON key, 1 if not found."""

    quoted = json.dumps(key)
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if quoted in line:
            return number
    return 1


def read_packet_spec(path: str | Path) -> GaussianPacket:
    """Read a packet specification.

    The JSON object has the keys mass, x_i, tau_i, k0, sigma_k and tau, with
    3-element lists for the vectors. As an alternative to x_i and tau_i, the
    key impact places the closest approach at the epoch 0.

    Parameters
    ----------
    path : `str` or `pathlib.Path`
        JSON path.

    Returns
    -------
    `GaussianPacket`
        Packet.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the specification is malformed or invalid. The message starts
        with the path, and with the line of the key when a key is unknown.
    """

    spec = read_json(path)
    if not isinstance(spec, dict):
        raise ValueError(f"{path}: expected a JSON object.")

    if "impact" in spec:
        keys = {"mass", "impact", "k0", "sigma_k", "tau"}
        required = keys - {"tau"}
    else:
        keys = set(PACKET_KEYS)
        required = keys - {"tau"}

    unknown = sorted(set(spec) - keys)
    if unknown:
        line = _key_line(path, unknown[0])
        raise ValueError(f"{path}:{line}: unknown keys {unknown}.")

    missing = sorted(required - set(spec))
    if missing:
        raise ValueError(f"{path}: missing keys {missing}.")

    try:
        if "impact" in spec:
            return GaussianPacket.from_closest_approach(
                float(spec["mass"]),
                spec["impact"],
                spec["k0"],
                float(spec["sigma_k"]),
                tau=float(spec.get("tau", 0.0)),
            )

        tau_i = float(spec["tau_i"])
        tau = float(spec.get("tau", tau_i))
        if not (math.isfinite(tau_i) and math.isfinite(tau)):
            raise ValueError("epochs must be finite")

        return GaussianPacket(
            float(spec["mass"]),
            spec["x_i"],
            tau_i,
            spec["k0"],
            float(spec["sigma_k"]),
            tau,
        )
    except (TypeError, ValueError) as error:
        raise ValueError(f"{path}: invalid packet: {error}") from error
