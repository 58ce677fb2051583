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

Name: Stochastic Number Generator
Author: PolySC contributors
Date Created: May 3, 2022
Last Modified: June 11, 2022
"""

import functools
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import HorizonError
from .waveform import DEFAULT_GRID, TimeGrid, Waveform

# feedback taps of maximal-length Fibonacci LFSRs, numbered from the output
# end as in x^n + ... + 1 (tap n feeds back the bit that is shifted out)
MAXIMAL_TAPS = {
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 11, 10, 4),
    13: (13, 12, 11, 8),
    14: (14, 13, 12, 2),
    15: (15, 14),
    16: (16, 15, 13, 4),
}

DEFAULT_WIDTH = 10

# first element of every seed key path
SNG_STREAM = 0
CLOCK_STREAM = 1
FAULT_STREAM = 2


@dataclass(frozen=True)
class ClockDomain:
    """
    local clock with rising edges at phase + k * period inside [0, horizon)

    all values are in TimeGrid ticks
    """

    period: int
    phase: int
    horizon: int

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError(f"clock period must be > 0, got {self.period}")
        if not 0 <= self.phase < self.period:
            raise ValueError(f"clock phase must be in [0, period), got {self.phase}")
        if self.horizon <= 0:
            raise HorizonError(f"clock horizon must be > 0, got {self.horizon}")

    @classmethod
    def from_ns(
        cls,
        period: float,
        phase: float = 0.0,
        horizon: Optional[float] = None,
        grid: TimeGrid = DEFAULT_GRID,
    ) -> "ClockDomain":
        horizon = 1024 * period if horizon is None else horizon
        return cls(grid.to_ticks(period), grid.to_ticks(phase), grid.to_ticks(horizon))

    def edges(self, count: Optional[int] = None) -> np.ndarray:
        edges = np.arange(self.phase, self.horizon, self.period, dtype=np.int64)
        return edges if count is None else edges[:count]

    def edge_count(self) -> int:
        return len(range(self.phase, self.horizon, self.period))


@dataclass(frozen=True)
class Lfsr:
    """Fibonacci linear feedback shift register"""

    width: int = DEFAULT_WIDTH
    taps: Tuple[int, ...] = MAXIMAL_TAPS[DEFAULT_WIDTH]
    state: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "taps", tuple(int(t) for t in self.taps))
        if self.width < 2:
            raise ValueError(f"LFSR width must be >= 2, got {self.width}")
        if self.width not in self.taps or any(
            not 1 <= tap <= self.width for tap in self.taps
        ):
            raise ValueError(f"invalid taps {self.taps} for width {self.width}")
        if not 0 < self.state < (1 << self.width):
            raise ValueError(f"LFSR state must be nonzero and fit in {self.width} bits")

    @classmethod
    def maximal(cls, width: int = DEFAULT_WIDTH, state: int = 1) -> "Lfsr":
        return cls(width, MAXIMAL_TAPS[width], state)

    def values(self, count: int) -> np.ndarray:
        """the next `count` register values, without advancing this register"""
        cycle, position = _cycle(self.width, self.taps, 1)
        if position[self.state] < 0:
            cycle, position = _cycle(self.width, self.taps, self.state)
        offsets = position[self.state] + 1 + np.arange(count)
        return cycle[offsets % cycle.size]

    def advance(self, count: int) -> "Lfsr":
        if count == 0:
            return self
        return replace(self, state=int(self.values(count)[-1]))


def lfsr_step(lfsr: Lfsr) -> Tuple[Lfsr, int]:
    """
    shift once, feeding back the XOR of the tap bits into the top bit

    :rtype Tuple[Lfsr, int]: the advanced register and its new value
    """
    feedback = 0
    for tap in lfsr.taps:
        feedback ^= (lfsr.state >> (lfsr.width - tap)) & 1
    value = (lfsr.state >> 1) | (feedback << (lfsr.width - 1))
    return replace(lfsr, state=value), value


@functools.lru_cache(maxsize=None)
def _cycle(width: int, taps: Tuple[int, ...], start: int):
    # walk the orbit of `start` once and index every state on it
    lfsr = Lfsr(width, taps, start)
    values = []
    while True:
        lfsr, value = lfsr_step(lfsr)
        values.append(value)
        if value == start:
            break

    cycle = np.array(values, dtype=np.int64)
    position = np.full(1 << width, -1, dtype=np.int64)
    position[cycle] = np.arange(cycle.size)
    cycle.setflags(write=False)
    position.setflags(write=False)
    return cycle, position


@dataclass(frozen=True)
class SngConfig:
    """
    comparator-based stochastic number generator

    invert selects the alternative comparator polarity that emits a one
    when the random value is at or above the threshold
    """

    target: float
    lfsr: Lfsr
    clock: ClockDomain
    invert: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.target <= 1.0:
            raise ValueError(f"target probability must be in [0, 1], got {self.target}")

    @property
    def quantized_target(self) -> int:
        return quantize(self.target, self.lfsr.width)


def quantize(target: float, width: int) -> int:
    """round target * 2^width half up to the comparator threshold"""
    return int(math.floor(target * (1 << width) + 0.5))


def generate(config: SngConfig, length: Optional[int] = None) -> Waveform:
    """
    emit one comparator bit per rising edge of the SNG's clock

    with an explicit length the SNG stops after `length` bits and the signal
    is low for the rest of the horizon; without one the SNG runs until the
    horizon and the last bit is cut off there

    :raises HorizonError: when `length` bits do not fit before the horizon
    """
    clock = config.clock
    if length is None:
        edges = clock.edges()
        end = clock.horizon
    else:
        end = clock.phase + length * clock.period
        if end > clock.horizon:
            raise HorizonError(
                f"{length} bits at period {clock.period} and phase {clock.phase}"
                f" overflow the horizon {clock.horizon}"
            )
        edges = clock.edges(length)

    values = config.lfsr.values(edges.size)
    threshold = config.quantized_target
    bits = values >= threshold if config.invert else values < threshold
    return Waveform.from_bits(bits, edges, clock.horizon, end=end)


def random_clock(
    seed,
    min_period: float,
    max_period: float,
    horizon: Optional[float] = None,
    grid: TimeGrid = DEFAULT_GRID,
) -> ClockDomain:
    """
    draw a local clock with a uniform period in [min_period, max_period] ns
    and a uniform phase in [0, period)
    """
    if not 0 < min_period <= max_period:
        raise ValueError(f"invalid clock period range [{min_period}, {max_period}]")

    generator = np.random.default_rng(seed)
    low, high = grid.to_ticks(min_period), grid.to_ticks(max_period)
    period = low if low == high else int(generator.integers(low, high, endpoint=True))
    phase = int(generator.integers(0, period))
    horizon = 1024 * max_period if horizon is None else horizon
    return ClockDomain(period, phase, grid.to_ticks(horizon))


def derive_seed(master_seed: int, *key: int) -> int:
    """
    counter-based split of the master seed

    any stream can be re-derived in isolation from its key path
    """
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def lfsr_seed(master_seed: int, *key: int, width: int = DEFAULT_WIDTH) -> int:
    """nonzero LFSR state derived from the master seed"""
    return 1 + derive_seed(master_seed, *key) % ((1 << width) - 1)
