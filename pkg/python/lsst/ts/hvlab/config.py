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

__all__ = ["ExperimentConfig", "read_yaml_file", "load_config"]

import dataclasses
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .constants import (
    DEFAULT_FOCK_DIMENSION,
    DEFAULT_GRID_SIZE,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_NUM_EVENTS,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    MIN_GRID_SIZE,
)
from .enums import ChainMode, CommandName, OutputFormat
from .random_streams import check_seed


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one run of the executable.

    Angles are in degree, as on the command line.

    Parameters
    ----------
    command : `CommandName` or None, optional
        Command. (the default is None)
    grid_size : `int`, optional
        Nodes of the angular grid. (the default is DEFAULT_GRID_SIZE)
    epsilon : `float`, optional
        Leakage of the generalized Malus law. (the default is 0.01)
    tolerance : `float`, optional
        Tolerance of the profile solver. (the default is DEFAULT_TOLERANCE)
    max_iterations : `int`, optional
        Iterations of the profile refinement.
        (the default is DEFAULT_MAX_ITERATIONS)
    normalize : `bool`, optional
        Fit the Malus law normalized to the parallel setting.
        (the default is True)
    events : `int`, optional
        Monte Carlo events per settings pair. (the default is DEFAULT_NUM_EVENTS)
    seed : `int`, optional
        Root seed. (the default is DEFAULT_SEED)
    workers : `int` or None, optional
        Monte Carlo worker threads. (the default is None)
    output : `str`, optional
        Output directory. (the default is ".")
    output_format : `OutputFormat`, optional
        Format of the summary. (the default is OutputFormat.Json)
    profile : `str` or None, optional
        Profile CSV file. (the default is None)
    angles : `tuple` [`float`], optional
        Polarizer axes of the chain. (the default is (0, 45, 90))
    mode : `str`, optional
        Chain mode or "all". (the default is "all")
    settings : `tuple` [`float`], optional
        CHSH settings (alpha, alpha', beta, beta').
        (the default is (45, 0, 22.5, 67.5))
    scan : `tuple` [`float`], optional
        (start, stop, count) of theta of the CHSH scan.
        (the default is (0, 90, 19))
    spec : `str` or None, optional
        Packet specification file. (the default is None)
    times : `tuple` [`float`], optional
        (start, stop, count) of the trajectory times.
        (the default is (0, 10, 11))
    mass : `float`, optional
        Oscillator mass. (the default is 1.0)
    spring : `float`, optional
        Oscillator spring constant. (the default is 1.0)
    dimension : `int`, optional
        Oscillator basis size. (the default is DEFAULT_FOCK_DIMENSION)
    mean_excitation : `float`, optional
        Mean excitation of the coherent state. (the default is 10.0)

    Raises
    ------
    `ValueError`
        If a field is not valid.
    """

    command: CommandName | None = None
    grid_size: int = DEFAULT_GRID_SIZE
    epsilon: float = 0.01
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    normalize: bool = True
    events: int = DEFAULT_NUM_EVENTS
    seed: int = DEFAULT_SEED
    workers: int | None = None
    output: str = "."
    output_format: OutputFormat = OutputFormat.Json
    profile: str | None = None
    angles: tuple[float, ...] = (0.0, 45.0, 90.0)
    mode: str = "all"
    settings: tuple[float, ...] = (45.0, 0.0, 22.5, 67.5)
    scan: tuple[float, ...] = (0.0, 90.0, 19.0)
    spec: str | None = None
    times: tuple[float, ...] = field(default=(0.0, 10.0, 11.0))
    mass: float = 1.0
    spring: float = 1.0
    dimension: int = DEFAULT_FOCK_DIMENSION
    mean_excitation: float = 10.0

    def __post_init__(self) -> None:
        if isinstance(self.command, str):
            object.__setattr__(self, "command", CommandName(self.command))
        if isinstance(self.output_format, str):
            object.__setattr__(self, "output_format", OutputFormat(self.output_format))

        for name in ("angles", "settings", "scan", "times"):
            object.__setattr__(
                self, name, tuple(float(value) for value in getattr(self, name))
            )

        if self.grid_size < MIN_GRID_SIZE:
            raise ValueError(f"grid_size={self.grid_size} must be >= {MIN_GRID_SIZE}.")
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError(f"epsilon={self.epsilon} not in range [0, 1).")

        self._check_positive("tolerance", self.tolerance)
        self._check_positive("mass", self.mass)
        self._check_positive("spring", self.spring)

        if self.max_iterations < 0:
            raise ValueError(f"max_iterations={self.max_iterations} must be >= 0.")
        if self.events < 1:
            raise ValueError(f"events={self.events} must be >= 1.")
        if (self.workers is not None) and (self.workers < 1):
            raise ValueError(f"workers={self.workers} must be >= 1.")
        if self.dimension < 2:
            raise ValueError(f"dimension={self.dimension} must be >= 2.")
        if self.mean_excitation < 0.0:
            raise ValueError(
                f"mean_excitation={self.mean_excitation} must be >= 0."
            )

        check_seed(self.seed)

        if self.mode != "all":
            ChainMode(self.mode)

        if len(self.angles) == 0:
            raise ValueError("At least one polarizer angle is required.")

        if len(self.settings) != 4:
            raise ValueError(f"settings={self.settings} must have 4 angles.")

        for name in ("scan", "times"):
            _, _, count = self._check_range(name)
            if count < 1:
                raise ValueError(f"{name}={getattr(self, name)} needs a count >= 1.")

        if not all(math.isfinite(value) for value in self.angles + self.settings):
            raise ValueError("Angles must be finite.")

    @staticmethod
    def _check_positive(name: str, value: float) -> None:
        if not (value > 0.0):
            raise ValueError(f"{name}={value} must be > 0.")

    def _check_range(self, name: str) -> tuple[float, float, int]:
        values = getattr(self, name)
        if len(values) != 3:
            raise ValueError(f"{name}={values} must be (start, stop, count).")

        start, stop, count = values
        if not (math.isfinite(start) and math.isfinite(stop)):
            raise ValueError(f"{name}={values} must be finite.")
        if count != int(count):
            raise ValueError(f"{name}={values} needs an integer count.")

        return start, stop, int(count)

    @classmethod
    def from_mapping(cls, mapping: typing.Mapping[str, typing.Any]) -> ExperimentConfig:
        """Make the configuration from a mapping of field names.

        Raises
        ------
        `ValueError`
            If there is an unknown key or a field is not valid.
        """

        names = {item.name for item in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - names)
        if unknown:
            raise ValueError(f"Unknown configuration keys: {unknown}.")

        return cls(**mapping)

    def updated(self, **overrides: typing.Any) -> ExperimentConfig:
        """Copy with the fields that are not None replaced."""
        return dataclasses.replace(
            self,
            **{key: value for key, value in overrides.items() if value is not None},
        )

    def times_grid(self) -> list[float]:
        """Trajectory times, evenly spaced."""
        start, stop, count = self._check_range("times")
        return _linspace(start, stop, count)

    def scan_grid(self) -> list[float]:
        """Theta of the CHSH scan in degree, evenly spaced."""
        start, stop, count = self._check_range("scan")
        return _linspace(start, stop, count)


def _linspace(start: float, stop: float, count: int) -> list[float]:
    if count == 1:
        return [start]
    return [start + (stop - start) * index / (count - 1) for index in range(count)]


def read_yaml_file(filepath: str | Path) -> dict[str, typing.Any]:
    """Read the YAML file.

    Parameters
    ----------
    filepath : `str` or `pathlib.Path`
        File path.

    Returns
    -------
    `dict`
        Content. Empty when the file is empty.

    Raises
    ------
    `FileNotFoundError`
        If the file does not exist.
    `ValueError`
        If the file is not a YAML mapping.
    """

    with open(filepath, "r") as file:
        try:
            content = yaml.safe_load(file)
        except yaml.YAMLError as error:
            mark = getattr(error, "problem_mark", None)
            line = f":{mark.line + 1}" if mark is not None else ""
            raise ValueError(f"{filepath}{line}: {error}") from error

    if content is None:
        return dict()

    if not isinstance(content, dict):
        raise ValueError(f"{filepath}: expected a mapping of configuration keys.")

    return content


def load_config(filepath: str | Path | None = None) -> ExperimentConfig:
    """Load the configuration.

    Parameters
    ----------
    filepath : `str`, `pathlib.Path` or None, optional
        YAML file with configuration keys. (the default is None, which means
        the defaults)

    Returns
    -------
    `ExperimentConfig`
        Configuration.
    """

    if filepath is None:
        return ExperimentConfig()

    return ExperimentConfig.from_mapping(read_yaml_file(filepath))
