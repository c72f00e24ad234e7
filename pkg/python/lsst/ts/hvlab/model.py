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

__all__ = ["Model"]

import itertools
import logging
import math
import typing
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from .angular_grid import make_grid
from .config import ExperimentConfig
from .constants import NUM_SIGMA_BOUND
from .enums import ChainMode, CommandName, ExitCode, OutputFormat
from .epr import PairSource, chsh_scan, quantum_chsh, run_chsh
from .exceptions import ConvergenceError
from .oscillator import (
    build_operators,
    coherent_state,
    commutator_residuals,
    cs_norm,
    phase_trajectory,
)
from .polarizer import (
    SolverOptions,
    TransferProfile,
    belifante_contrast,
    chain_transmission,
    cos2_profile,
    malus_target,
    quantum_chain_transmission,
    solve_profile_with_report,
)
from .serialization import (
    read_packet_spec,
    read_profile,
    write_json,
    write_profile,
    write_table,
    write_target,
)
from .twobody import kappa, trajectory

# Largest interior commutator residual of a valid operator set
MAX_INTERIOR_RESIDUAL = 1e-8

# Largest relative drift of a conserved quantity along a trajectory
MAX_CONSERVATION_DRIFT = 1e-10


class Model(object):
    """Model class of the application.

    The model runs one command of the executable, writes its artifacts into
    the output directory and checks the postconditions of the result.

    Parameters
    ----------
    log : `logging.Logger`
        A logger.
    config : `ExperimentConfig`, optional
        Configuration. (the default is ExperimentConfig())

    Attributes
    ----------
    log : `logging.Logger`
        A logger.
    config : `ExperimentConfig`
        Configuration.
    output_dir : `pathlib.Path`
        Output directory.
    """

    def __init__(
        self, log: logging.Logger, config: ExperimentConfig | None = None
    ) -> None:
        self.log = log
        self.config = ExperimentConfig() if config is None else config

        self.output_dir = Path(self.config.output)

        self._commands: dict[CommandName, typing.Callable[[], ExitCode]] = {
            CommandName.Deconvolve: self.cmd_deconvolve,
            CommandName.Chain: self.cmd_chain,
            CommandName.Chsh: self.cmd_chsh,
            CommandName.Scan: self.cmd_scan,
            CommandName.Packet: self.cmd_packet,
            CommandName.Osc: self.cmd_osc,
        }

    def run(self) -> ExitCode:
        """Run the configured command.

        Returns
        -------
        `ExitCode`
            Success if all the postconditions held, Failure otherwise.

        Raises
        ------
        `ValueError`
            If there is no command.
        """

        if self.config.command is None:
            raise ValueError("No command to run.")

        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.log.info(f"Run the {self.config.command.value} command.")
        return self._commands[self.config.command]()

    def _write_summary(self, name: str, data: dict[str, typing.Any]) -> Path:
        """Write the summary in the configured format.

        Parameters
        ----------
        name : `str`
            File name without suffix.
        data : `dict`
            Summary. Nested mappings are flattened to dotted keys in CSV.

        Returns
        -------
        `pathlib.Path`
            File path.
        """

        if self.config.output_format == OutputFormat.Csv:
            path = self.output_dir / f"{name}.csv"
            write_table(pd.DataFrame([_flatten(data)]), path)
        else:
            path = self.output_dir / f"{name}.json"
            write_json(data, path)

        self.log.info(f"Wrote {path}.")
        return path

    def _load_profile(self) -> TransferProfile:
        """Profile file of the configuration, cos^2 on the grid otherwise."""

        if self.config.profile is None:
            self.log.info("No profile file: use the cos^2 profile.")
            return cos2_profile(make_grid(self.config.grid_size))

        return read_profile(self.config.profile)

    def cmd_deconvolve(self) -> ExitCode:
        """Recover the profile of the generalized Malus law.

        Writes target.csv, profile.csv with their JSON headers and the
        deconvolve summary.

        Returns
        -------
        `ExitCode`
            Failure if the tolerance is not reached.
        """

        config = self.config
        target = malus_target(make_grid(config.grid_size), config.epsilon)
        options = SolverOptions(
            tolerance=config.tolerance,
            max_iterations=config.max_iterations,
            normalize=config.normalize,
        )

        try:
            profile, report = solve_profile_with_report(target, options, log=self.log)
            summary = {
                "feasible": True,
                "iterations": report.iterations,
                "residual": report.residual,
                "scale": report.scale,
                "stage": report.stage.name,
            }

        except ConvergenceError as error:
            profile = error.profile
            summary = {
                "feasible": False,
                "iterations": error.iterations,
                "residual": error.residual,
                "scale": error.scale,
                "stage": "ProjectedGradient",
            }

        summary.update(
            {
                "epsilon": config.epsilon,
                "grid_size": config.grid_size,
                "tolerance": config.tolerance,
                "normalize": config.normalize,
                "belifante_contrast": belifante_contrast(profile),
            }
        )

        write_target(target, self.output_dir / "target.csv", provenance="malus")
        write_profile(
            profile,
            self.output_dir / "profile.csv",
            epsilon=config.epsilon,
            provenance="deconvolve",
        )
        self._write_summary("deconvolve", summary)

        if not summary["feasible"]:
            self.log.error(
                f"Residual {summary['residual']:.3e} above the tolerance "
                f"{config.tolerance:.3e}: the target is not reproduced."
            )
            return ExitCode.Failure

        return ExitCode.Success

    def cmd_chain(self) -> ExitCode:
        """Transmission of a chain of polarizers in each mode.

        Returns
        -------
        `ExitCode`
            Success.
        """

        profile = self._load_profile()
        angles = [math.radians(angle) for angle in self.config.angles]

        modes = (
            list(ChainMode)
            if self.config.mode == "all"
            else [ChainMode(self.config.mode)]
        )
        transmissions = {
            mode.value: chain_transmission(profile, angles, mode=mode) for mode in modes
        }
        differences = {
            f"{first}-{second}": transmissions[first] - transmissions[second]
            for first, second in itertools.combinations(transmissions, 2)
        }

        for mode, value in transmissions.items():
            self.log.info(f"Chain transmission in the {mode} mode: {value:.6f}.")

        self._write_summary(
            "chain",
            {
                "angles_deg": list(self.config.angles),
                "transmission": transmissions,
                "difference": differences,
                "quantum": quantum_chain_transmission(angles),
            },
        )

        return ExitCode.Success

    def _bound_holds(self, s: float, standard_error: float) -> bool:
        return s <= 2.0 + NUM_SIGMA_BOUND * standard_error

    def cmd_chsh(self) -> ExitCode:
        """Monte Carlo of the CHSH experiment at the configured settings.

        Returns
        -------
        `ExitCode`
            Failure if S exceeds the local bound by more than NUM_SIGMA_BOUND
            standard errors.
        """

        config = self.config
        profile = self._load_profile()
        settings = [math.radians(angle) for angle in config.settings]

        score, counts = run_chsh(
            PairSource(seed=config.seed),
            profile,
            settings,
            config.events,
            max_workers=config.workers,
        )

        is_bounded = self._bound_holds(score.s, score.standard_error)
        self._write_summary(
            "chsh",
            {
                "settings_deg": list(config.settings),
                "seed": config.seed,
                "events": config.events,
                "counts": [asdict(item) for item in counts],
                "correlations": [asdict(item) for item in score.correlations],
                "s": score.s,
                "standard_error": score.standard_error,
                "quantum_s": quantum_chsh(settings),
                "local_bound_holds": is_bounded,
            },
        )

        if not is_bounded:
            self.log.error(
                f"S = {score.s:.6f} violates the local bound 2 + "
                f"{NUM_SIGMA_BOUND} * {score.standard_error:.3e}."
            )
            return ExitCode.Failure

        return ExitCode.Success

    def cmd_scan(self) -> ExitCode:
        """CHSH scan over the settings (2 theta, 0, theta, 3 theta).

        Writes scan.csv with one row per theta.

        Returns
        -------
        `ExitCode`
            Failure if a row violates the local bound.
        """

        config = self.config
        thetas = config.scan_grid()
        rows = chsh_scan(
            PairSource(seed=config.seed),
            self._load_profile(),
            [math.radians(theta) for theta in thetas],
            config.events,
            max_workers=config.workers,
        )

        table = pd.DataFrame(
            {
                "theta_deg": thetas,
                "alpha": [row.settings[0] for row in rows],
                "alpha_prime": [row.settings[1] for row in rows],
                "beta": [row.settings[2] for row in rows],
                "beta_prime": [row.settings[3] for row in rows],
                "s": [row.s for row in rows],
                "standard_error": [row.standard_error for row in rows],
                "quantum_s": [row.quantum_s for row in rows],
            }
        )
        write_table(table, self.output_dir / "scan.csv")

        violations = [
            row.theta for row in rows if not self._bound_holds(row.s, row.standard_error)
        ]
        if violations:
            self.log.error(f"Local bound violated at theta = {violations} rad.")
            return ExitCode.Failure

        return ExitCode.Success

    def cmd_packet(self) -> ExitCode:
        """Trajectory of a two-body wavepacket.

        Writes trajectory.csv and the packet summary.

        Returns
        -------
        `ExitCode`
            Failure if the energy or the angular momentum drifts.
        """

        if self.config.spec is None:
            raise ValueError("The packet command needs a specification file.")

        packet = read_packet_spec(self.config.spec)
        table = trajectory(packet, self.config.times_grid())
        write_table(table, self.output_dir / "trajectory.csv")

        constants = kappa(packet)
        impact = float(table["b"].iloc[0])
        drift = float(
            np.max(np.abs(table["H"] - constants.energy))
            / max(abs(constants.energy), np.finfo(float).tiny)
        )

        self._write_summary(
            "packet",
            {
                "kappa": asdict(constants),
                "energy_drift": drift,
                "impact_parameter": None if math.isnan(impact) else impact,
            },
        )

        if drift > MAX_CONSERVATION_DRIFT:
            self.log.error(f"Energy drift {drift:.3e} along the trajectory.")
            return ExitCode.Failure

        return ExitCode.Success

    def cmd_osc(self) -> ExitCode:
        """Operator algebra and phase trajectory of the linear oscillator.

        Writes osc_trajectory.csv and the osc summary.

        Returns
        -------
        `ExitCode`
            Failure if the interior commutator residuals are above
            MAX_INTERIOR_RESIDUAL.
        """

        config = self.config
        ops = build_operators(config.mass, config.spring, config.dimension, log=self.log)
        residuals = commutator_residuals(ops)

        state = coherent_state(ops, config.mean_excitation)
        table = phase_trajectory(state, ops, config.times_grid())
        write_table(table, self.output_dir / "osc_trajectory.csv")

        self._write_summary(
            "osc",
            {
                "omega": ops.omega,
                "dimension": ops.dimension,
                "low_dimension": ops.is_low_dimension,
                "residuals": asdict(residuals),
                "cs_norm": cs_norm(state, ops),
            },
        )

        interior = max(residuals.interior_hs, residuals.interior_hc)
        if interior > MAX_INTERIOR_RESIDUAL:
            self.log.error(
                f"Interior commutator residual {interior:.3e} above "
                f"{MAX_INTERIOR_RESIDUAL:.1e}."
            )
            return ExitCode.Failure

        return ExitCode.Success


def _flatten(data: typing.Mapping[str, typing.Any], prefix: str = "") -> dict:
    """Flatten nested mappings and lists to dotted keys."""

    flat: dict[str, typing.Any] = dict()
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, typing.Mapping):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat.update(
                _flatten({str(index): item for index, item in enumerate(value)}, f"{name}.")
            )
        else:
            flat[name] = value
    return flat
