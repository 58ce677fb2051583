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

Name: Harness
Author: PolySC contributors
Date Created: May 27, 2022
Last Modified: June 20, 2022
"""

import dataclasses
import pathlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from .circuits import (
    DEFAULT_KDE_THRESHOLD,
    MODES,
    CellArray,
    CircuitKind,
    RunConfig,
    Sourcing,
)
from .config import dump_config
from .errors import ConfigError, InvariantViolation
from .faults import SweepRow, sweep
from .images import SYNTHETIC_IMAGES, load_image, save_image, synthetic, video_frames
from .metrics import ErrorReport, summarize

CSV_COLUMNS = ["circuit", "mode", "rate", "trial", "error_pct", "ideal_error_pct"]
CLOCK_COLUMNS = ["trial", "mode", "row", "col", "period_ns", "phase_ns"]
FLOAT_FORMAT = "%.6f"

# synthetic input used when no image is given
DEFAULT_SYNTHETIC = {
    "robert": "checkerboard",
    "gamma": "ramp",
    "threshold": "document",
    "kde": "video",
}


@dataclass(frozen=True)
class TrialConfig:
    circuit: str = "robert"
    input: Optional[pathlib.Path] = None
    frames: Optional[pathlib.Path] = None
    synthetic: Optional[str] = None
    size: int = 32
    image_seed: int = 0
    stream_length: int = 1024
    trials: int = 10
    modes: Tuple[str, ...] = MODES
    clock_min: float = 2.0
    clock_max: float = 4.0
    sync_period: float = 2.0
    spike_width: float = 0.2
    master_seed: int = 0
    fault_rates: Tuple[float, ...] = ()
    lfsr_width: int = 10
    lfsr_taps: Optional[Tuple[int, ...]] = None
    invert: bool = False
    window: int = 8
    kde_history: int = 32
    kde_threshold: float = DEFAULT_KDE_THRESHOLD
    sourcing: str = "local"
    comparator_states: int = 32
    exp_states: int = 64
    exp_g: int = 2
    workers: int = 1
    output: pathlib.Path = pathlib.Path("results")

    def __post_init__(self) -> None:
        kinds = [kind.value for kind in CircuitKind]
        if self.circuit not in kinds:
            raise ConfigError(f"circuit must be one of {kinds}, got {self.circuit!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.stream_length < 1:
            raise ConfigError(f"stream length must be >= 1, got {self.stream_length}")
        if not 0 < self.clock_min <= self.clock_max:
            raise ConfigError(f"invalid clock range [{self.clock_min}, {self.clock_max}]")
        if len(self.modes) == 0 or any(mode not in MODES for mode in self.modes):
            raise ConfigError(f"modes must be a non-empty subset of {MODES}, got {self.modes}")
        if any(not 0.0 <= rate <= 1.0 for rate in self.fault_rates):
            raise ConfigError(f"fault rates must lie in [0, 1], got {self.fault_rates}")
        if self.sourcing not in [sourcing.value for sourcing in Sourcing]:
            raise ConfigError(f"unknown stream sourcing {self.sourcing!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.synthetic is not None and self.synthetic not in SYNTHETIC_IMAGES:
            raise ConfigError(f"unknown synthetic image {self.synthetic!r}")
        if (self.circuit == "kde") != (self.input_name == "video"):
            raise ConfigError("the KDE circuit takes video frames, the others a still image")

    @property
    def kind(self) -> CircuitKind:
        return CircuitKind(self.circuit)

    @property
    def input_name(self) -> str:
        if self.circuit == "kde" and self.frames is not None:
            return "video"
        if self.input is not None:
            return "image"
        return self.synthetic or DEFAULT_SYNTHETIC[self.circuit]

    @property
    def rates(self) -> Tuple[float, ...]:
        """baseline rate 0 followed by the configured fault rates"""
        return (0.0,) + tuple(rate for rate in self.fault_rates if rate != 0.0)

    def run_config(self) -> RunConfig:
        return RunConfig(
            master_seed=self.master_seed,
            stream_length=self.stream_length,
            min_period=self.clock_min,
            max_period=self.clock_max,
            sync_period=self.sync_period,
            spike_width=self.spike_width,
            lfsr_width=self.lfsr_width,
            lfsr_taps=self.lfsr_taps,
            invert=self.invert,
            comparator_states=self.comparator_states,
            exp_states=self.exp_states,
            exp_g=self.exp_g,
            kde_threshold=self.kde_threshold,
            workers=self.workers,
        )

    def cell_array(self, height: int, width: int) -> CellArray:
        return CellArray(
            self.kind,
            height,
            width,
            window=self.window,
            history=self.kde_history,
            sourcing=self.sourcing,
        )

    def to_mapping(self) -> Dict[str, object]:
        return dataclasses.asdict(self)


@dataclass
class TrialReport:
    config: TrialConfig
    rows: List[SweepRow]
    summaries: Dict[Tuple[str, float], ErrorReport]
    output_images: List[pathlib.Path] = field(default_factory=list)

    def frame(self) -> pd.DataFrame:
        """one row per circuit, mode, rate and trial"""
        return pd.DataFrame(
            [
                (
                    row.circuit,
                    row.mode,
                    row.rate,
                    row.trial,
                    row.error_pct,
                    np.nan if row.ideal_error_pct is None else row.ideal_error_pct,
                )
                for row in self.rows
            ],
            columns=CSV_COLUMNS,
        )


def load_inputs(config: TrialConfig):
    """
    read or synthesize the input image(s) of an experiment

    :rtype: an image, or (history frames, current frame) for KDE
    """
    if config.kind is CircuitKind.KDE:
        if config.frames is None:
            return video_frames(
                config.size, config.size, config.image_seed, config.kde_history
            )
        paths = sorted(pathlib.Path(config.frames).glob("*.pgm"))
        if len(paths) != config.kde_history + 1:
            raise ConfigError(
                f"{config.frames} must hold {config.kde_history + 1} PGM frames,"
                f" found {len(paths)}"
            )
        frames = [load_image(path) for path in paths]
        return np.stack(frames[:-1]), frames[-1]

    if config.input is not None:
        return load_image(config.input)
    return synthetic(config.input_name, config.size, config.image_seed)


def run_experiment(
    config: TrialConfig, on_progress: Optional[Callable[[], None]] = None
) -> TrialReport:
    images = load_inputs(config)
    current = images[1] if config.kind is CircuitKind.KDE else images
    height, width = np.shape(current)
    array = config.cell_array(height, width)

    logger.info(
        f"Running {config.circuit} on a {height}x{width} array:"
        f" {config.trials} trials, modes {', '.join(config.modes)},"
        f" fault rates {', '.join(f'{rate:g}' for rate in config.rates)}"
    )
    rows = sweep(
        array,
        images,
        config.rates,
        config.trials,
        config.run_config(),
        config.modes,
        on_progress,
    )

    summaries = {}
    for rate in config.rates:
        for mode in config.modes:
            errors = [row.error_pct for row in rows if row.mode == mode and row.rate == rate]
            summaries[(mode, rate)] = summarize(errors, mode, config.circuit)
            logger.info(
                f"{config.circuit} {mode} rate={rate:g}:"
                f" mean error {summaries[(mode, rate)].mean:.3f}%"
                f" (stddev {summaries[(mode, rate)].stddev:.3f})"
            )
    return TrialReport(config, rows, summaries)


def check_invariants(report: TrialReport) -> None:
    """
    :raises InvariantViolation: on an error rate outside [0, 100] or a
        non-binary pixel from a binary circuit
    """
    for row in report.rows:
        for value in (row.error_pct, row.ideal_error_pct):
            if value is not None and not 0.0 <= value <= 100.0:
                raise InvariantViolation(
                    f"error rate {value} out of range ({row.mode}, trial {row.trial})"
                )
        if report.config.kind.binary and not np.isin(row.result.image, (0, 255)).all():
            raise InvariantViolation(
                f"{row.circuit} produced non-binary pixels ({row.mode}, trial {row.trial})"
            )


def plot_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """mean and population stddev of the error per circuit, mode and rate"""
    grouped = frame.groupby(["circuit", "mode", "rate"], sort=True)["error_pct"]
    return pd.DataFrame(
        {
            "mean_error_pct": grouped.mean(),
            "stddev_pct": grouped.std(ddof=0),
        }
    ).reset_index()


def _clock_frame(report: TrialReport) -> pd.DataFrame:
    grid = report.config.run_config().grid
    records = []
    for row in report.rows:
        # clocks do not depend on the fault rate
        if row.rate != report.config.rates[0]:
            continue
        width = row.result.values.shape[1]
        for index, clock in enumerate(row.result.clocks):
            records.append(
                (
                    row.trial,
                    row.mode,
                    index // width,
                    index % width,
                    grid.to_ns(clock.period),
                    grid.to_ns(clock.phase),
                )
            )
    return pd.DataFrame(records, columns=CLOCK_COLUMNS)


def report_emit(
    report: TrialReport,
    directory: Optional[pathlib.Path] = None,
    formats: Sequence[str] = ("csv", "pgm", "plot", "clocks", "config"),
) -> List[pathlib.Path]:
    """
    write the report artifacts, overwriting earlier ones

    :rtype List[pathlib.Path]: the files written
    """
    directory = pathlib.Path(directory or report.config.output)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    if "csv" in formats:
        path = directory / "results.csv"
        report.frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
        written.append(path)

    if "plot" in formats:
        path = directory / "plot.dat"
        plot_frame(report.frame()).to_csv(
            path, sep=" ", index=False, float_format=FLOAT_FORMAT
        )
        written.append(path)

    if "clocks" in formats:
        path = directory / "clocks.csv"
        _clock_frame(report).to_csv(path, index=False, float_format=FLOAT_FORMAT)
        written.append(path)

    if "config" in formats:
        written.append(dump_config(report.config.to_mapping(), directory / "config.ini"))

    if "pgm" in formats:
        outputs = directory / "outputs"
        outputs.mkdir(exist_ok=True)
        report.output_images = []
        for row in report.rows:
            path = outputs / f"{row.circuit}_{row.mode}_r{row.rate:g}_t{row.trial}.pgm"
            report.output_images.append(save_image(row.result.image, path))
        written.extend(report.output_images)

    logger.info(f"Wrote {len(written)} files to {directory}")
    return written


def aggregate(csv_paths: Sequence[pathlib.Path]) -> pd.DataFrame:
    """re-read result CSVs and summarize them per circuit, mode and rate"""
    if len(csv_paths) == 0:
        raise ConfigError("no result files given")
    frame = pd.concat([pd.read_csv(path) for path in csv_paths], ignore_index=True)
    missing = set(CSV_COLUMNS) - set(frame.columns)
    if missing:
        raise ConfigError(f"result files lack columns {sorted(missing)}")

    summary = plot_frame(frame)
    summary["trials"] = (
        frame.groupby(["circuit", "mode", "rate"], sort=True)["trial"].count().values
    )
    return summary
