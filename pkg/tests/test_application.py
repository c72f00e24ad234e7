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

import asyncio
import json
import logging
import shutil
from pathlib import Path

import pytest
from lsst.ts.hvlab import (
    CommandName,
    ExitCode,
    create_parser,
    get_log_file_name,
    main,
    set_log,
)


@pytest.mark.asyncio
async def test_run_hvlab() -> None:
    # Make sure this application exists
    application_name = "run_hvlab"
    exe_path = shutil.which(application_name)

    assert exe_path is not None

    # Run the process and get the standard output
    process = await asyncio.create_subprocess_exec(
        application_name,
        "-h",
        stdout=asyncio.subprocess.PIPE,
        stderr=asyncio.subprocess.PIPE,
    )

    stdout, _ = await process.communicate()

    # If there is the error, the result will be empty
    assert stdout.decode() != ""
    assert process.returncode == 0


def test_create_parser() -> None:
    for command in CommandName:
        _, options = create_parser(command)

        names = {name for option in options for name in option.names()}
        assert {"verbose", "debuglevel", "no-logfile", "out", "grid"} <= names

    _, options = create_parser(CommandName.Osc)
    names = {name for option in options for name in option.names()}
    assert {"mass", "spring", "dimension", "excitation", "times"} <= names
    assert "profile" not in names


def test_main_usage(capsys: pytest.CaptureFixture) -> None:
    assert main(list()) == ExitCode.InvalidInput
    assert main(["-h"]) == ExitCode.Success

    assert "deconvolve" in capsys.readouterr().out


def test_main_command_help(capsys: pytest.CaptureFixture) -> None:
    assert main(["chsh", "--help"]) == ExitCode.Success

    assert "--settings" in capsys.readouterr().out


@pytest.mark.parametrize(
    "arguments",
    [
        ["fit"],
        ["chain", "--bogus"],
        ["chain", "extra"],
        ["chain", "--debuglevel", "high"],
        ["chain", "--no-logfile", "--epsilon", "1.5"],
        ["chain", "--no-logfile", "--grid", "many"],
        ["chain", "--no-logfile", "--format", "xml"],
        ["chain", "--no-logfile", "--profile", "missing.csv"],
        ["packet", "--no-logfile"],
    ],
)
def test_main_invalid_input(arguments: list[str], tmp_path: Path) -> None:
    assert (
        main([*arguments, "--out", str(tmp_path)], log=logging.getLogger())
        == ExitCode.InvalidInput
    )


def test_main_chain(tmp_path: Path) -> None:
    status = main(
        [
            "chain",
            "--no-logfile",
            "--out",
            str(tmp_path),
            "--grid",
            "64",
            "--angles",
            "0,45,90",
            "--mode",
            "mueller",
        ],
        log=logging.getLogger(),
    )

    assert status == ExitCode.Success

    summary = json.loads((tmp_path / "chain.json").read_text())
    assert summary["transmission"]["mueller"] == pytest.approx(0.125)


def test_main_config_file(tmp_path: Path) -> None:
    config = tmp_path / "config.yaml"
    config.write_text("grid_size: 64\nmode: persistent\noutput_format: csv\n")

    status = main(
        ["chain", "--no-logfile", "--config", str(config), "--out", str(tmp_path)],
        log=logging.getLogger(),
    )

    assert status == ExitCode.Success
    assert (tmp_path / "chain.csv").exists()


def test_main_deconvolve_failure(tmp_path: Path) -> None:
    status = main(
        [
            "deconvolve",
            "--no-logfile",
            "--out",
            str(tmp_path),
            "--grid",
            "64",
            "--epsilon",
            "0.01",
            "--max-iterations",
            "20",
        ],
        log=logging.getLogger(),
    )

    assert status == ExitCode.Failure
    assert (tmp_path / "profile.csv").exists()


def test_set_log() -> None:
    log = set_log(False, False, logging.DEBUG, log=logging.getLogger("hvlab_test"))

    assert log.name == "hvlab_test.Model"
    assert log.level == logging.DEBUG


def test_get_log_file_name(tmp_path: Path) -> None:
    file_name = get_log_file_name(default_log_dir=str(tmp_path))

    assert file_name.parent == tmp_path
    assert file_name.name.startswith("log_")
    assert file_name.suffix == ".txt"

    assert get_log_file_name(str(tmp_path / "missing")).parent == Path.home()


def test_set_log_screen_handler() -> None:
    parent = logging.getLogger("hvlab_screen_test")
    for _ in range(3):
        log = set_log(False, True, logging.INFO, log=parent)

    screen_handlers = [
        handler
        for handler in log.handlers
        if isinstance(handler, logging.StreamHandler)
    ]
    assert len(screen_handlers) == 1
