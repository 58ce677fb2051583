#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Copyright (C) 2022 PolySC contributors.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as
published by the Free Software Foundation, either version 3 of the
License, or (at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program. If not, see <https://www.gnu.org/licenses/>.

Name: PolySC
Creator: PolySC contributors
Date Created: May 2, 2022
Last Modified: June 20, 2022
"""

import argparse
import dataclasses
import os
import pathlib
import sys
from typing import List, Optional, Sequence

import pandas as pd
from loguru import logger
from rich import print as rich_print
from rich.console import Console
from rich.file_proxy import FileProxy
from rich.progress import (
    BarColumn,
    Progress,
    ProgressColumn,
    Task,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table
from rich.text import Text

from . import __version__
from .circuits import MODES, CircuitKind, Sourcing
from .config import load_config, parse_overrides
from .errors import ConfigError, InvariantViolation
from .harness import (
    TrialConfig,
    TrialReport,
    aggregate,
    check_invariants,
    report_emit,
    run_experiment,
)
from .images import SYNTHETIC_IMAGES

LEGAL_INFO = f"""PolySC\t\t{__version__}
Author:\t\tPolySC contributors
License:\tGNU AGPL v3"""

# progress bar labels for different actions
ACTION_LABELS = {"simulate": "Simulating", "inject-sweep": "Injecting"}

# format string for Loguru loggers
LOGURU_FORMAT = (
    "<green>{time:HH:mm:ss.SSSSSS!UTC}</green> | "
    "<level>{level: <8}</level> | "
    "<level>{message}</level>"
)


class RunSpeedColumn(ProgressColumn):
    """Custom progress bar column that displays array runs per second"""

    def render(self, task: Task) -> Text:
        speed = task.finished_speed or task.speed
        return Text(
            f"{round(speed, 2) if isinstance(speed, float) else '?'} runs/s",
            style="progress.data.speed",
        )


class PolySC:
    """
    PolySC class

    provides three functions:
        - simulate: baseline sync vs poly accuracy of one circuit
        - inject_sweep: the same under a list of soft-error rates
        - report: re-aggregate result CSVs
    """

    def __init__(self) -> None:
        self.version = __version__

    def _run(self, config: TrialConfig, action: str) -> TrialReport:

        # record original STDOUT and STDERR for restoration
        original_stdout = sys.stdout
        original_stderr = sys.stderr

        # create console for rich's Live display
        console = Console()

        # redirect STDOUT and STDERR to console
        sys.stdout = FileProxy(console, sys.stdout)
        sys.stderr = FileProxy(console, sys.stderr)

        # re-add Loguru to point to the new STDERR
        logger.remove()
        logger.add(
            sys.stderr,
            colorize=True,
            format=LOGURU_FORMAT,
            level=os.environ.get("LOGURU_LEVEL", "INFO"),
        )

        total_runs = len(config.rates) * config.trials * len(config.modes)
        self.progress = Progress(
            "[progress.description]{task.description}",
            BarColumn(complete_style="blue", finished_style="green"),
            "[progress.percentage]{task.percentage:>3.0f}%",
            "[color(240)]({task.completed}/{task.total})",
            RunSpeedColumn(),
            TimeElapsedColumn(),
            "<",
            TimeRemainingColumn(),
            console=console,
        )
        self.task = self.progress.add_task(
            f"[cyan]{ACTION_LABELS.get(action, 'Running')}", total=total_runs
        )

        try:
            self.progress.start()
            report = run_experiment(
                config, lambda: self.progress.update(self.task, advance=1)
            )
            self.progress.stop()

            check_invariants(report)
            report_emit(report)
            return report

        finally:
            self.progress.stop()

            # restore original STDOUT and STDERR
            sys.stdout = original_stdout
            sys.stderr = original_stderr

            # re-add Loguru to point to the restored STDERR
            logger.remove()
            logger.add(
                sys.stderr,
                colorize=True,
                format=LOGURU_FORMAT,
                level=os.environ.get("LOGURU_LEVEL", "INFO"),
            )

    def simulate(self, config: TrialConfig) -> TrialReport:
        return self._run(dataclasses.replace(config, fault_rates=()), "simulate")

    def inject_sweep(self, config: TrialConfig) -> TrialReport:
        if len(config.fault_rates) == 0:
            raise ConfigError("inject-sweep needs at least one fault rate")
        return self._run(config, "inject-sweep")

    @staticmethod
    def report(csv_paths: Sequence[pathlib.Path]) -> pd.DataFrame:
        summary = aggregate(csv_paths)

        table = Table(title="Mean output error")
        for column in ("circuit", "mode", "rate", "trials", "mean %", "stddev %"):
            table.add_column(column, justify="left" if column in ("circuit", "mode") else "right")
        for row in summary.itertuples(index=False):
            table.add_row(
                row.circuit,
                row.mode,
                f"{row.rate:g}",
                str(row.trials),
                f"{row.mean_error_pct:.3f}",
                f"{row.stddev_pct:.3f}",
            )
        Console().print(table)
        return summary


def _csv_floats(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _csv_strings(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    # defaults stay None so that only explicit flags override the config file
    parser.add_argument(
        "-k",
        "--circuit",
        choices=[kind.value for kind in CircuitKind],
        help="circuit to simulate",
    )
    parser.add_argument("-i", "--input", type=pathlib.Path, help="input PGM image")
    parser.add_argument(
        "-f",
        "--frames",
        type=pathlib.Path,
        help="directory of history frames followed by the current frame (KDE)",
    )
    parser.add_argument(
        "-s", "--synthetic", choices=SYNTHETIC_IMAGES, help="synthetic input image"
    )
    parser.add_argument("--size", type=int, help="synthetic image size")
    parser.add_argument("-n", "--trials", type=int, help="number of trials")
    parser.add_argument("--length", dest="stream_length", type=int, help="stream length")
    parser.add_argument("--seed", dest="master_seed", type=int, help="master seed")
    parser.add_argument(
        "-m", "--modes", type=_csv_strings, help=f"comma-separated subset of {MODES}"
    )
    parser.add_argument(
        "--clock-min", dest="clock_min", type=float, help="shortest local clock period (ns)"
    )
    parser.add_argument(
        "--clock-max", dest="clock_max", type=float, help="longest local clock period (ns)"
    )
    parser.add_argument(
        "--sync-period", dest="sync_period", type=float, help="synchronous clock period (ns)"
    )
    parser.add_argument(
        "--spike-width", dest="spike_width", type=float, help="spike filter width (ns)"
    )
    parser.add_argument(
        "--sourcing",
        dest="sourcing",
        choices=[sourcing.value for sourcing in Sourcing],
        help="where Robert's cross and thresholding cells take neighbor pixel streams from",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any configuration key, e.g. lfsr.width=12",
    )


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    parse command line arguments

    :rtype argparse.Namespace: command parsing results
    """
    parser = argparse.ArgumentParser(
        prog="polysc",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "--version", help="show version information and exit", action="store_true"
    )
    parser.add_argument(
        "-c", "--config", type=pathlib.Path, help="configuration file path"
    )
    parser.add_argument(
        "-o", "--output", type=pathlib.Path, help="output directory path"
    )
    parser.add_argument(
        "-p", "--processes", dest="workers", type=int, help="number of processes to launch"
    )
    parser.add_argument(
        "-l",
        "--loglevel",
        choices=["trace", "debug", "info", "success", "warning", "error", "critical"],
        default="info",
    )

    action = parser.add_subparsers(
        help="action to perform", dest="action", required=True
    )

    simulate = action.add_parser(
        "simulate",
        help="measure sync vs poly accuracy of a circuit",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_experiment_arguments(simulate)

    inject_sweep = action.add_parser(
        "inject-sweep",
        help="measure accuracy under soft-error injection",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_experiment_arguments(inject_sweep)
    inject_sweep.add_argument(
        "-r",
        "--rates",
        dest="fault_rates",
        type=_csv_floats,
        help="comma-separated fault rates in [0, 1]",
    )

    report = action.add_parser(
        "report",
        help="re-aggregate result CSV files",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    report.add_argument("csv", type=pathlib.Path, nargs="+", help="result CSV files")

    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> TrialConfig:
    """defaults, then the config file, then --set overrides, then explicit flags"""
    values = {}
    if args.config is not None:
        values.update(load_config(args.config))
    values.update(parse_overrides(args.overrides))

    fields = {field.name for field in dataclasses.fields(TrialConfig)}
    for name, value in vars(args).items():
        if name in fields and value is not None:
            values[name] = tuple(value) if isinstance(value, list) else value

    return TrialConfig(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    command line entrypoint for direct CLI invocation

    :rtype int: 0 on success, 1 on configuration errors, 2 on I/O errors,
        3 on invariant violations
    """

    try:
        # display version and lawful informaition
        if "--version" in (sys.argv if argv is None else argv):
            rich_print(LEGAL_INFO)
            return 0

        # parse command line arguments
        args = parse_arguments(argv)

        # set logger level
        if os.environ.get("LOGURU_LEVEL") is None:
            os.environ["LOGURU_LEVEL"] = args.loglevel.upper()

        # remove default handler
        logger.remove()

        # add new sink with custom handler
        logger.add(
            sys.stderr,
            colorize=True,
            format=LOGURU_FORMAT,
            level=os.environ.get("LOGURU_LEVEL", "INFO"),
        )

        # print package version and copyright notice
        logger.opt(colors=True).info(f"<magenta>PolySC {__version__}</magenta>")
        logger.opt(colors=True).info(
            "<magenta>Copyright (C) 2022 PolySC contributors.</magenta>"
        )

        polysc = PolySC()

        if args.action == "report":
            polysc.report(args.csv)

        else:
            config = build_config(args)
            if args.action == "simulate":
                polysc.simulate(config)
            elif args.action == "inject-sweep":
                polysc.inject_sweep(config)

    # don't print the traceback for manual terminations
    except KeyboardInterrupt:
        return 130

    except ConfigError as error:
        logger.critical(str(error))
        return 1

    except InvariantViolation as error:
        logger.critical(f"Invariant violated: {error}")
        return 3

    except OSError as error:
        logger.critical(f"I/O error: {error}")
        return 2

    except Exception as error:
        logger.exception(error)
        return 1

    # if no exceptions were produced
    else:
        logger.success("Processing completed successfully")
        return 0
