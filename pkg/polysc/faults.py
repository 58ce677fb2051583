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

Name: Faults
Author: PolySC contributors
Date Created: May 23, 2022
Last Modified: June 18, 2022

Soft-error injection. XOR gates driven by LFSR error sources sit on every
element output and on every element input fed straight from a cell input;
the taps of one element take turns, one enabled per local clock cycle.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from .circuits import (
    MODES,
    ArrayResult,
    CellArray,
    CellCircuit,
    Injector,
    RunConfig,
    build_circuit,
    run_array,
)
from .errors import ConfigError, HorizonError
from .metrics import error_rate, ideal_for, oracle_for
from .sng import (
    DEFAULT_WIDTH,
    FAULT_STREAM,
    MAXIMAL_TAPS,
    ClockDomain,
    Lfsr,
    lfsr_seed,
    quantize,
)
from .waveform import XOR, Waveform, combine2

CyclePredicate = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Tap:
    element: str
    port: str
    wire: str


@dataclass(frozen=True)
class ErrorSource:
    """LFSR and comparator emitting one flip bit per cycle of its clock"""

    lfsr: Lfsr
    threshold: int
    clock: ClockDomain

    @property
    def probability(self) -> float:
        return self.threshold / (1 << self.lfsr.width)

    def bits(self, count: int) -> np.ndarray:
        return self.lfsr.values(count) < self.threshold


def inject(
    w: Waveform, src: ErrorSource, enable: Optional[CyclePredicate] = None
) -> Waveform:
    """
    XOR a flip signal into a waveform

    in every enabled cycle of the source clock whose source bit is 1 the
    waveform is inverted for the whole cycle

    :param enable Optional[CyclePredicate]: maps cycle numbers to enable bits,
        None enables every cycle
    """
    if src.clock.horizon < w.horizon:
        raise HorizonError("the error source clock does not cover the waveform")
    if src.threshold == 0:
        return w

    edges = src.clock.edges()
    edges = edges[edges < w.horizon]
    flips = src.bits(edges.size)
    if enable is not None:
        flips &= np.asarray(enable(np.arange(edges.size)), dtype=bool)
    if not flips.any():
        return w
    return combine2(w, Waveform.from_bits(flips, edges, w.horizon), XOR)


def _round_robin(slot: int, period: int) -> CyclePredicate:
    return lambda cycles: cycles % period == slot


@dataclass(frozen=True)
class FaultPlan:
    """
    taps of one cell with their error source seeds and enable schedule

    slots[k] / periods[k] place tap k in its element's round-robin
    """

    rate: float
    taps: Tuple[Tap, ...]
    seeds: Tuple[int, ...]
    slots: Tuple[int, ...]
    periods: Tuple[int, ...]
    width: int = DEFAULT_WIDTH
    lfsr_taps: Tuple[int, ...] = MAXIMAL_TAPS[DEFAULT_WIDTH]

    def tap_probability(self, index: int) -> float:
        # the tap is enabled one cycle in `period`
        return min(1.0, self.rate * self.periods[index])

    @property
    def clamped(self) -> bool:
        return any(self.rate * period > 1.0 for period in self.periods)

    def source(self, index: int, clock: ClockDomain) -> ErrorSource:
        return ErrorSource(
            Lfsr(self.width, self.lfsr_taps, self.seeds[index]),
            quantize(self.tap_probability(index), self.width),
            clock,
        )

    def enable(self, index: int) -> CyclePredicate:
        return _round_robin(self.slots[index], self.periods[index])

    def injector(self, clock: ClockDomain) -> Injector:
        """port hook for circuits.evaluate, error sources run on `clock`"""
        index_of = {(tap.element, tap.port): index for index, tap in enumerate(self.taps)}

        def apply(element: str, port: str, waveform: Waveform) -> Waveform:
            index = index_of.get((element, port))
            if index is None or self.rate == 0:
                return waveform
            return inject(waveform, self.source(index, clock), self.enable(index))

        return apply

    def schedule_trace(self, cycles: int) -> Dict[str, np.ndarray]:
        """
        per element, a (taps x cycles) boolean matrix of enabled taps

        :param cycles int: number of local clock cycles to trace
        """
        numbers = np.arange(cycles)
        trace = {}
        for index, tap in enumerate(self.taps):
            trace.setdefault(tap.element, []).append(self.enable(index)(numbers))
        return {element: np.array(rows, dtype=bool) for element, rows in trace.items()}


def plan_for_circuit(
    cell: CellCircuit,
    rate: float,
    master_seed: int,
    key: Sequence[int] = (),
    width: int = DEFAULT_WIDTH,
    lfsr_taps: Optional[Tuple[int, ...]] = None,
) -> FaultPlan:
    """
    enumerate the fault taps of a cell

    every element output is tapped where it is driven, so a wire between two
    elements is flipped once for all its consumers. Cell inputs have no
    driving element; each consuming port gets a tap of its own

    :param key Sequence[int]: seed key path of the cell, e.g. (trial, row, col)
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigError(f"fault rate must be in [0, 1], got {rate}")

    primary = set(cell.inputs)
    taps: List[Tap] = []
    slots: List[int] = []
    periods: List[int] = []

    for element in cell.elements:
        claimed = [
            Tap(element.name, f"in{k}", wire)
            for k, wire in enumerate(element.inputs)
            if wire in primary
        ]
        claimed.append(Tap(element.name, "out", element.output))
        for slot, tap in enumerate(claimed):
            taps.append(tap)
            slots.append(slot)
            periods.append(len(claimed))

    seeds = tuple(
        lfsr_seed(master_seed, FAULT_STREAM, *key, index, width=width)
        for index in range(len(taps))
    )
    return FaultPlan(
        rate,
        tuple(taps),
        seeds,
        tuple(slots),
        tuple(periods),
        width,
        tuple(lfsr_taps or MAXIMAL_TAPS[width]),
    )


@dataclass(frozen=True)
class SweepRow:
    circuit: str
    mode: str
    rate: float
    trial: int
    error_pct: float
    ideal_error_pct: Optional[float]
    result: ArrayResult = field(compare=False, repr=False)


def sweep(
    array: CellArray,
    images,
    rates: Iterable[float],
    trials: int,
    config: RunConfig = RunConfig(),
    modes: Sequence[str] = MODES,
    on_progress: Optional[Callable[[], None]] = None,
) -> List[SweepRow]:
    """
    run both clocking arms at every fault rate and score them against the
    software oracle; rate 0 runs without injection

    :rtype List[SweepRow]: one row per rate, trial and mode
    """
    rates = [float(rate) for rate in rates]
    if any(not 0.0 <= rate <= 1.0 for rate in rates):
        raise ConfigError(f"fault rates must lie in [0, 1], got {rates}")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")

    reference = oracle_for(
        array.kind, images, array.window, config.kde_threshold, config.coefficients
    )
    ideal = ideal_for(array.kind, images)

    for rate in rates:
        plan = plan_for_circuit(build_circuit(array, config), rate, config.master_seed)
        if plan.clamped:
            logger.warning(
                f"Fault rate {rate} exceeds what one-per-cycle taps can inject;"
                " per-tap probability clamped to 1"
            )

    rows = []
    for rate in rates:
        for trial in range(trials):
            for mode in modes:
                run_config = replace(config, mode=mode, trial=trial, fault_rate=rate)
                result = run_array(
                    array,
                    images,
                    run_config,
                    fault_planner=plan_for_circuit if rate > 0 else None,
                )
                rows.append(
                    SweepRow(
                        array.kind.value,
                        mode,
                        rate,
                        trial,
                        error_rate(reference, result.image),
                        None if ideal is None else error_rate(ideal, result.image),
                        result,
                    )
                )
                logger.debug(
                    f"{array.kind.value} {mode} rate={rate} trial={trial}:"
                    f" {rows[-1].error_pct:.3f}%"
                )
                if on_progress is not None:
                    on_progress()
    return rows


def sweep_table(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """mean output error per mode and rate"""
    frame = pd.DataFrame(
        [(row.mode, row.rate, row.error_pct) for row in rows],
        columns=["mode", "rate", "error_pct"],
    )
    return frame.groupby(["mode", "rate"], as_index=False)["error_pct"].mean()
