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

__all__ = ["run_hvlab", "create_parser", "set_log", "get_log_file_name", "main"]

import logging
import pathlib
import sys
import typing
from datetime import datetime

from PySide6.QtCore import QCommandLineOption, QCommandLineParser, QCoreApplication

from .config import load_config
from .enums import CommandName, ExitCode, OutputFormat
from .exceptions import InfeasibleTargetError
from .model import Model

APPLICATION_NAME = "run_hvlab"

MESSAGE_FORMAT = "%(asctime)s, %(levelname)s, %(message)s"

COMMAND_DESCRIPTIONS = {
    CommandName.Deconvolve: "Recover the polarizer profile of the generalized Malus law.",
    CommandName.Chain: "Transmission of a chain of polarizers.",
    CommandName.Chsh: "Monte Carlo of the CHSH experiment with a local model.",
    CommandName.Scan: "CHSH scan over the settings (2 theta, 0, theta, 3 theta).",
    CommandName.Packet: "Trajectory of a two-body Gaussian wavepacket.",
    CommandName.Osc: "Phase and time operators of the linear oscillator.",
}


def run_hvlab() -> None:
    """Run the hidden-variable laboratory."""
    sys.exit(main(sys.argv[1:]))


def _add_option(
    parser: QCommandLineParser,
    options: list[QCommandLineOption],
    names: list[str],
    description: str,
    value_name: str = "",
    default_value: str = "",
) -> None:
    if value_name == "":
        option = QCommandLineOption(names, description)
    else:
        option = QCommandLineOption(names, description, value_name, default_value)

    parser.addOption(option)
    options.append(option)


def create_parser(
    command: CommandName,
) -> tuple[QCommandLineParser, list[QCommandLineOption]]:
    """Create the command line parser of the command.

    Parameters
    ----------
    command : `CommandName`
        Command.

    Returns
    -------
    parser : `PySide6.QtCore.QCommandLineParser`
        Command line parser.
    `list` [`PySide6.QtCore.QCommandLineOption`]
        List of command line options.
    """

    parser = QCommandLineParser()
    parser.setApplicationDescription(COMMAND_DESCRIPTIONS[command])
    parser.addHelpOption()

    options: list[QCommandLineOption] = list()

    _add_option(
        parser, options, ["v", "verbose"], "Print log messages to terminal."
    )
    _add_option(
        parser,
        options,
        ["d", "debuglevel"],
        (
            "Debug logging level: CRITICAL (50), ERROR (40), WARNING (30), "
            "INFO (20), DEBUG (10), NOTSET (0). The default is 20."
        ),
        "level",
        "20",
    )
    _add_option(
        parser, options, ["no-logfile"], "Do not write log messages to file."
    )
    _add_option(
        parser,
        options,
        ["config"],
        "YAML file of configuration keys. Options override the file.",
        "path",
    )
    _add_option(parser, options, ["out"], "Output directory.", "dir")
    _add_option(
        parser,
        options,
        ["format"],
        "Format of the summary: json or csv.",
        "format",
    )
    _add_option(parser, options, ["grid"], "Nodes of the angular grid.", "n")
    _add_option(parser, options, ["seed"], "Root seed of the random streams.", "seed")
    _add_option(parser, options, ["workers"], "Monte Carlo worker threads.", "n")

    _add_option(
        parser, options, ["epsilon"], "Leakage of the Malus law in [0, 1).", "value"
    )
    _add_option(parser, options, ["tolerance"], "Solver tolerance.", "value")
    _add_option(parser, options, ["events"], "Events per settings pair.", "n")

    if command == CommandName.Deconvolve:
        _add_option(
            parser, options, ["max-iterations"], "Solver iterations.", "n"
        )
        _add_option(
            parser,
            options,
            ["no-normalize"],
            "Fit the Malus law as is, not normalized to the parallel setting.",
        )

    if command in (CommandName.Chain, CommandName.Chsh, CommandName.Scan):
        _add_option(
            parser,
            options,
            ["profile"],
            "Profile CSV file. The default is cos^2 on the grid.",
            "path",
        )

    if command == CommandName.Chain:
        _add_option(
            parser, options, ["angles"], "Polarizer axes in degree, comma separated.", "list"
        )
        _add_option(
            parser, options, ["mode"], "persistent, collapse, mueller or all.", "mode"
        )

    if command == CommandName.Chsh:
        _add_option(
            parser,
            options,
            ["settings"],
            "alpha,alpha',beta,beta' in degree.",
            "list",
        )

    if command == CommandName.Scan:
        _add_option(
            parser, options, ["scan"], "start,stop,count of theta in degree.", "list"
        )

    if command == CommandName.Packet:
        _add_option(parser, options, ["spec"], "Packet specification JSON file.", "path")

    if command in (CommandName.Packet, CommandName.Osc):
        _add_option(parser, options, ["times"], "start,stop,count of the times.", "list")

    if command == CommandName.Osc:
        _add_option(parser, options, ["mass"], "Mass.", "value")
        _add_option(parser, options, ["spring"], "Spring constant.", "value")
        _add_option(parser, options, ["dimension"], "Basis size.", "n")
        _add_option(
            parser, options, ["excitation"], "Mean excitation of the coherent state.", "value"
        )

    return parser, options


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(float(item) for item in text.split(",") if item.strip() != "")


# Option name, configuration field and conversion of the value
OVERRIDES: list[tuple[str, str, typing.Callable[[str], typing.Any]]] = [
    ("out", "output", str),
    ("format", "output_format", OutputFormat),
    ("grid", "grid_size", int),
    ("seed", "seed", int),
    ("workers", "workers", int),
    ("epsilon", "epsilon", float),
    ("tolerance", "tolerance", float),
    ("max-iterations", "max_iterations", int),
    ("profile", "profile", str),
    ("angles", "angles", _parse_list),
    ("mode", "mode", str),
    ("events", "events", int),
    ("settings", "settings", _parse_list),
    ("scan", "scan", _parse_list),
    ("spec", "spec", str),
    ("times", "times", _parse_list),
    ("mass", "mass", float),
    ("spring", "spring", float),
    ("dimension", "dimension", int),
    ("excitation", "mean_excitation", float),
]


def _get_overrides(
    parser: QCommandLineParser, options: list[QCommandLineOption]
) -> dict[str, typing.Any]:
    """Configuration fields given on the command line.

    Raises
    ------
    `ValueError`
        If a value can not be converted.
    """

    names = {name for option in options for name in option.names()}
    overrides: dict[str, typing.Any] = dict()
    for name, field, convert in OVERRIDES:
        if (name in names) and parser.isSet(name):
            try:
                overrides[field] = convert(parser.value(name))
            except ValueError as error:
                raise ValueError(f"--{name}: {error}") from error

    if ("no-normalize" in names) and parser.isSet("no-normalize"):
        overrides["normalize"] = False

    return overrides


def set_log(
    is_output_log_to_file: bool,
    is_output_log_on_screen: bool,
    level: int,
    log: logging.Logger | None = None,
) -> logging.Logger:
    """Set the logger.

    Parameters
    ----------
    is_output_log_to_file : `bool`
        Is outputting the log messages to file or not.
    is_output_log_on_screen : `bool`
        Is outputting the log messages on screen or not.
    level : `int`
        Logging level.
    log : `logging.Logger` or None, optional
        A logger. If None, a logger will be instantiated. (the default is
        None)

    Returns
    -------
    log : `logging.Logger`
        A logger.
    """

    if log is None:
        log = logging.getLogger(Model.__name__)
    else:
        log = log.getChild(Model.__name__)

    if is_output_log_to_file:
        logging.basicConfig(filename=get_log_file_name(), format=MESSAGE_FORMAT)
    else:
        logging.basicConfig(format=MESSAGE_FORMAT)

    # One screen handler per logger when main() runs more than once
    if is_output_log_on_screen and not any(
        isinstance(handler, logging.StreamHandler)
        and (getattr(handler, "stream", None) is sys.stdout)
        for handler in log.handlers
    ):
        log.addHandler(logging.StreamHandler(sys.stdout))

    log.setLevel(level)

    return log


def get_log_file_name(default_log_dir: str = "/rubin/hvlab/log") -> pathlib.Path:
    """Get the log file name.

    Parameters
    ----------
    default_log_dir : `str`, optional
        Default log directory. (the default is "/rubin/hvlab/log")

    Returns
    -------
    `pathlib.Path`
        Log file name.
    """

    log_dir = pathlib.Path(default_log_dir)
    if not log_dir.is_dir():
        print(
            f"Default log directory: {default_log_dir} does not exist. "
            "Use the home directory instead."
        )
        log_dir = pathlib.Path.home()

    name = "log_%s.txt" % datetime.now().strftime("%d_%m_%Y_%H_%M_%S")

    return log_dir / name


def _usage() -> str:
    lines = [f"Usage: {APPLICATION_NAME} <command> [options]", "", "Commands:"]
    lines += [
        f"  {command.value:<12}{description}"
        for command, description in COMMAND_DESCRIPTIONS.items()
    ]
    lines += ["", f"Run '{APPLICATION_NAME} <command> -h' for the options of a command."]
    return "\n".join(lines)


def main(arguments: list[str], log: logging.Logger | None = None) -> int:
    """Main application.

    Parameters
    ----------
    arguments : `list` [`str`]
        Command line arguments without the program name. The first one is
        the command.
    log : `logging.Logger` or None, optional
        A logger. If None, a logger will be instantiated. (the default is
        None)

    Returns
    -------
    `int`
        Exit status: 0 on success, 1 if a numerical procedure or a
        postcondition failed, 2 if an argument or an input file is invalid.
    """

    if (len(arguments) == 0) or (arguments[0] in ("-h", "--help", "-?")):
        print(_usage())
        return ExitCode.Success if len(arguments) > 0 else ExitCode.InvalidInput

    try:
        command = CommandName(arguments[0])
    except ValueError:
        print(f"Unknown command: {arguments[0]}.\n\n{_usage()}", file=sys.stderr)
        return ExitCode.InvalidInput

    # The parser names the executable after the application
    application = QCoreApplication.instance()
    if application is None:
        application = QCoreApplication([APPLICATION_NAME])
    application.setApplicationName(APPLICATION_NAME)

    parser, options = create_parser(command)
    if not parser.parse([APPLICATION_NAME, *arguments[1:]]):
        print(parser.errorText(), file=sys.stderr)
        return ExitCode.InvalidInput

    if parser.isSet("help"):
        print(parser.helpText())
        return ExitCode.Success

    if len(parser.positionalArguments()) > 0:
        print(
            f"Unexpected arguments: {parser.positionalArguments()}.", file=sys.stderr
        )
        return ExitCode.InvalidInput

    # Get the argument and check the values
    try:
        log_level = int(parser.value("debuglevel"))
    except ValueError:
        print(f"Invalid debug level: {parser.value('debuglevel')}.", file=sys.stderr)
        return ExitCode.InvalidInput

    log = set_log(
        not parser.isSet("no-logfile"),
        parser.isSet("verbose"),
        log_level,
        log=log,
    )

    try:
        config_file = parser.value("config") if parser.isSet("config") else None
        config = load_config(config_file).updated(
            command=command, **_get_overrides(parser, options)
        )
        return Model(log, config).run()

    except InfeasibleTargetError as error:
        log.error(f"Infeasible target: {error}")
        return ExitCode.Failure

    except (ValueError, OSError) as error:
        log.error(f"Invalid input: {error}")
        print(f"Invalid input: {error}", file=sys.stderr)
        return ExitCode.InvalidInput

    except RuntimeError as error:
        log.exception(f"Failed: {error}")
        return ExitCode.Failure
