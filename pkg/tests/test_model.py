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

import json
import logging
import math
from pathlib import Path

import pandas as pd
import pytest
from lsst.ts.hvlab import (
    CommandName,
    ExitCode,
    ExperimentConfig,
    Model,
    OutputFormat,
    read_profile,
    read_target,
)

NUM_EVENTS = 20000


def make_model(output: Path, command: CommandName, **fields) -> Model:
    config = ExperimentConfig(
        command=command, output=str(output), grid_size=64, **fields
    )
    return Model(logging.getLogger(), config)


def read_summary(path: Path) -> dict:
    return json.loads(path.read_text())


def write_packet_spec(path: Path) -> Path:
    path.write_text(
        json.dumps(
            {
                "mass": 1.0,
                "impact": [0.0, 1.0, 0.0],
                "k0": [2.0, 0.0, 0.0],
                "sigma_k": 1.0,
                "tau": -1.0,
            }
        )
    )
    return path


def test_init() -> None:
    model = Model(logging.getLogger())

    assert model.config == ExperimentConfig()
    assert model.output_dir == Path(".")


def test_run_no_command(tmp_path: Path) -> None:
    model = Model(logging.getLogger(), ExperimentConfig(output=str(tmp_path)))

    with pytest.raises(ValueError):
        model.run()


def test_run_make_output_dir(tmp_path: Path) -> None:
    output = tmp_path / "a" / "b"
    model = make_model(output, CommandName.Chain)

    assert model.run() == ExitCode.Success
    assert (output / "chain.json").exists()


def test_cmd_deconvolve(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Deconvolve, epsilon=0.99)

    assert model.run() == ExitCode.Success

    summary = read_summary(tmp_path / "deconvolve.json")
    assert summary["feasible"] is True
    assert summary["stage"] == "Spectral"
    assert summary["residual"] <= summary["tolerance"]
    assert 0.0 < summary["scale"] <= 1.0

    profile = read_profile(tmp_path / "profile.csv")
    assert profile.grid.n == 64

    header = read_summary(tmp_path / "profile.json")
    assert header["epsilon"] == 0.99
    assert header["provenance"] == "deconvolve"

    target = read_target(tmp_path / "target.csv")
    assert target.epsilon == 0.99
    assert target.grid.n == 64


def test_cmd_deconvolve_infeasible(tmp_path: Path) -> None:
    model = make_model(
        tmp_path, CommandName.Deconvolve, epsilon=0.01, max_iterations=100
    )

    assert model.run() == ExitCode.Failure

    summary = read_summary(tmp_path / "deconvolve.json")
    assert summary["feasible"] is False
    assert 0.0 < summary["scale"] <= 1.0
    assert summary["iterations"] == 100
    assert summary["residual"] > summary["tolerance"]

    # The best profile is still written
    assert read_profile(tmp_path / "profile.csv").grid.n == 64


def test_cmd_chain(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Chain)

    assert model.run() == ExitCode.Success

    summary = read_summary(tmp_path / "chain.json")
    transmission = summary["transmission"]
    assert transmission["persistent"] == pytest.approx(0.0625)
    assert transmission["collapse"] == pytest.approx(0.25 * 0.25 / 0.375)
    assert transmission["mueller"] == pytest.approx(0.125)
    assert summary["quantum"] == pytest.approx(0.125)
    assert summary["difference"]["persistent-mueller"] == pytest.approx(-0.0625)
    assert summary["angles_deg"] == [0.0, 45.0, 90.0]


def test_cmd_chain_one_mode(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Chain, mode="persistent", angles=(0.0, 90.0))

    assert model.run() == ExitCode.Success

    summary = read_summary(tmp_path / "chain.json")
    assert list(summary["transmission"]) == ["persistent"]
    assert summary["difference"] == dict()
    assert summary["quantum"] == pytest.approx(0.0)


def test_cmd_chain_csv(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Chain, output_format=OutputFormat.Csv)

    assert model.run() == ExitCode.Success
    assert not (tmp_path / "chain.json").exists()

    table = pd.read_csv(tmp_path / "chain.csv")
    assert len(table) == 1
    assert table["transmission.persistent"].iloc[0] == pytest.approx(0.0625)
    assert table["angles_deg.1"].iloc[0] == 45.0


def test_cmd_chsh(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Chsh, events=NUM_EVENTS, seed=7)

    assert model.run() == ExitCode.Success

    summary = read_summary(tmp_path / "chsh.json")
    assert summary["local_bound_holds"] is True
    assert summary["s"] == pytest.approx(math.sqrt(2.0), abs=0.1)
    assert summary["quantum_s"] == pytest.approx(2.0 * math.sqrt(2.0))
    assert len(summary["counts"]) == 4
    assert len(summary["correlations"]) == 4
    assert all(item["n_events"] == NUM_EVENTS for item in summary["counts"])


def test_cmd_chsh_deterministic(tmp_path: Path) -> None:
    first = tmp_path / "first"
    second = tmp_path / "second"

    make_model(first, CommandName.Chsh, events=NUM_EVENTS, workers=1).run()
    make_model(second, CommandName.Chsh, events=NUM_EVENTS, workers=3).run()

    assert (first / "chsh.json").read_bytes() == (second / "chsh.json").read_bytes()


def test_cmd_scan(tmp_path: Path) -> None:
    model = make_model(
        tmp_path, CommandName.Scan, events=NUM_EVENTS, scan=(0.0, 90.0, 3.0)
    )

    assert model.run() == ExitCode.Success

    table = pd.read_csv(tmp_path / "scan.csv")
    assert table.columns.tolist() == [
        "theta_deg",
        "alpha",
        "alpha_prime",
        "beta",
        "beta_prime",
        "s",
        "standard_error",
        "quantum_s",
    ]
    assert table["theta_deg"].tolist() == [0.0, 45.0, 90.0]
    assert table["quantum_s"].to_numpy() == pytest.approx([2.0, 0.0, -2.0], abs=1e-12)
    assert (table["s"] <= 2.0 + 5.0 * table["standard_error"]).all()


def test_cmd_packet(tmp_path: Path) -> None:
    spec = write_packet_spec(tmp_path / "packet.json")
    model = make_model(
        tmp_path / "out", CommandName.Packet, spec=str(spec), times=(-1.0, 1.0, 3.0)
    )

    assert model.run() == ExitCode.Success

    table = pd.read_csv(tmp_path / "out" / "trajectory.csv")
    assert table["tau"].tolist() == [-1.0, 0.0, 1.0]
    assert table["R"].to_numpy() == pytest.approx([-5.5, 0.0, 5.5], abs=1e-9)

    summary = read_summary(tmp_path / "out" / "packet.json")
    assert summary["kappa"]["energy"] == pytest.approx(2.75)
    assert summary["energy_drift"] <= 1e-10
    assert summary["impact_parameter"] == pytest.approx(1.0)


def test_cmd_packet_no_spec(tmp_path: Path) -> None:
    model = make_model(tmp_path, CommandName.Packet)

    with pytest.raises(ValueError):
        model.run()


def test_cmd_osc(tmp_path: Path) -> None:
    model = make_model(
        tmp_path,
        CommandName.Osc,
        dimension=64,
        mean_excitation=5.0,
        times=(0.0, 2.0, 3.0),
    )

    assert model.run() == ExitCode.Success

    summary = read_summary(tmp_path / "osc.json")
    assert summary["omega"] == pytest.approx(1.0)
    assert summary["dimension"] == 64
    assert summary["low_dimension"] is False
    assert summary["residuals"]["interior_hs"] < 1e-8
    assert summary["cs_norm"] == pytest.approx(1.0, abs=0.05)

    table = pd.read_csv(tmp_path / "osc_trajectory.csv")
    assert len(table) == 3
    assert table["Phi"].to_numpy() == pytest.approx([0.0, 1.0, 2.0], abs=1e-9)


RERUN_FIELDS = {
    CommandName.Deconvolve: dict(epsilon=0.99),
    CommandName.Chain: dict(angles=(0.0, 30.0, 90.0)),
    CommandName.Scan: dict(events=2000, seed=11, scan=(0.0, 90.0, 3.0)),
    CommandName.Packet: dict(times=(-1.0, 1.0, 5.0)),
    CommandName.Osc: dict(dimension=64, mean_excitation=2.0, times=(0.0, 3.0, 4.0)),
}


@pytest.mark.parametrize("output_format", list(OutputFormat))
@pytest.mark.parametrize("command", list(RERUN_FIELDS))
def test_run_byte_identical(
    tmp_path: Path, command: CommandName, output_format: OutputFormat
) -> None:
    fields = dict(RERUN_FIELDS[command], output_format=output_format)
    if command == CommandName.Packet:
        fields["spec"] = str(write_packet_spec(tmp_path / "packet.json"))

    outputs = [tmp_path / "first", tmp_path / "second"]
    for output in outputs:
        assert make_model(output, command, **fields).run() == ExitCode.Success

    names = sorted(path.name for path in outputs[0].iterdir())
    assert len(names) > 0
    assert names == sorted(path.name for path in outputs[1].iterdir())

    for name in names:
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
