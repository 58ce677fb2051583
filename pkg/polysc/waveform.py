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

Name: Waveform
Author: PolySC contributors
Date Created: May 2, 2022
Last Modified: June 11, 2022
"""

import functools
import operator
import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import HorizonError

# two-input boolean functions accepted by combine2
AND = operator.and_
OR = operator.or_
XOR = operator.xor

BooleanFunction = Callable[[int, int], int]


@dataclass(frozen=True)
class TimeGrid:
    """
    quantization grid for continuous time

    every instant stored in a Waveform or a ClockDomain is an integer
    number of ticks; one tick is `resolution` nanoseconds
    """

    resolution: float = 1e-6

    def __post_init__(self) -> None:
        if not self.resolution > 0:
            raise ValueError(f"grid resolution must be > 0, got {self.resolution}")

    def to_ticks(self, nanoseconds: float) -> int:
        return int(round(nanoseconds / self.resolution))

    def to_ns(self, ticks) -> float:
        return ticks * self.resolution

    @property
    def decimals(self) -> int:
        return max(0, int(round(-np.log10(self.resolution))))


# one femtosecond
DEFAULT_GRID = TimeGrid()


class Waveform:
    """
    piecewise-constant binary signal over [0, horizon)

    the level at time t is initial_level XOR (number of transitions <= t) mod 2,
    so a transition instant already carries the new level
    """

    __slots__ = ("initial_level", "transitions", "horizon")

    def __init__(
        self, initial_level: int, transitions: Iterable[int], horizon: int
    ) -> None:
        transitions = np.array(transitions, dtype=np.int64).reshape(-1)
        horizon = int(horizon)

        if initial_level not in (0, 1):
            raise ValueError(f"initial level must be 0 or 1, got {initial_level}")
        if horizon <= 0:
            raise HorizonError(f"horizon must be > 0, got {horizon}")
        if transitions.size > 0:
            if transitions[0] <= 0 or transitions[-1] >= horizon:
                raise ValueError("transition instants must lie in (0, horizon)")
            if np.any(np.diff(transitions) <= 0):
                raise ValueError("transition instants must be strictly increasing")

        self._assign(int(initial_level), transitions, horizon)

    def _assign(self, initial_level: int, transitions: np.ndarray, horizon: int):
        transitions.setflags(write=False)
        object.__setattr__(self, "initial_level", initial_level)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "horizon", horizon)

    def __setattr__(self, name, value):
        raise AttributeError("Waveform is immutable")

    @classmethod
    def _trusted(
        cls, initial_level: int, transitions: np.ndarray, horizon: int
    ) -> "Waveform":
        # internal constructor for already-validated data
        waveform = cls.__new__(cls)
        waveform._assign(int(initial_level), transitions.astype(np.int64), int(horizon))
        return waveform

    @classmethod
    def constant(cls, level: int, horizon: int) -> "Waveform":
        return cls(level, (), horizon)

    @classmethod
    def from_segments(
        cls, starts: np.ndarray, levels: np.ndarray, horizon: int
    ) -> "Waveform":
        """
        build a waveform from segment start instants and their levels,
        coalescing adjacent segments with equal levels

        :param starts np.ndarray: ascending instants, starts[0] == 0
        :param levels np.ndarray: level of each segment
        :param horizon int: end of the last segment
        """
        levels = np.asarray(levels, dtype=np.uint8) & 1
        starts = np.asarray(starts, dtype=np.int64)
        changed = levels[1:] != levels[:-1]
        return cls._trusted(int(levels[0]), starts[1:][changed], horizon)

    @classmethod
    def from_bits(
        cls,
        bits: Sequence[int],
        edges: Sequence[int],
        horizon: int,
        end: Optional[int] = None,
    ) -> "Waveform":
        """
        build the output of a register updated at each clock edge

        bit k holds on [edges[k], edges[k + 1]); bit 0 also covers [0, edges[0])
        since the register leaves reset already holding its first value; the
        signal is low from `end` (default: horizon) to the horizon

        :param bits Sequence[int]: register value after each edge
        :param edges Sequence[int]: strictly increasing edge instants in [0, horizon)
        :param horizon int: waveform horizon
        :param end Optional[int]: instant the register stops driving the signal
        """
        bits = np.asarray(bits, dtype=np.uint8)
        edges = np.asarray(edges, dtype=np.int64)
        end = horizon if end is None else int(end)

        if bits.size != edges.size:
            raise ValueError("one bit is required per clock edge")
        if bits.size == 0:
            return cls.constant(0, horizon)
        if edges[0] < 0 or edges[-1] >= horizon or np.any(np.diff(edges) <= 0):
            raise ValueError("clock edges must be strictly increasing within [0, horizon)")
        if end <= edges[-1] or end > horizon:
            raise HorizonError(f"register end {end} outside ({edges[-1]}, {horizon}]")

        starts = np.concatenate(([0], edges[1:]))
        if end < horizon:
            starts = np.append(starts, end)
            bits = np.append(bits, 0)
        return cls.from_segments(starts, bits, horizon)

    def levels_at(self, instants) -> np.ndarray:
        """levels at the given instants, reading the post-transition level"""
        toggles = np.searchsorted(self.transitions, instants, side="right")
        return ((toggles & 1) ^ self.initial_level).astype(np.uint8)

    def level_at(self, instant: int) -> int:
        return int(self.levels_at(np.int64(instant)))

    def segments(self):
        """segment starts, segment ends and segment levels"""
        starts = np.concatenate(([0], self.transitions))
        ends = np.concatenate((self.transitions, [self.horizon]))
        levels = (np.arange(starts.size) & 1) ^ self.initial_level
        return starts, ends, levels.astype(np.uint8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Waveform):
            return NotImplemented
        return (
            self.initial_level == other.initial_level
            and self.horizon == other.horizon
            and np.array_equal(self.transitions, other.transitions)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Waveform(initial_level={self.initial_level}, "
            f"transitions={self.transitions.size}, horizon={self.horizon})"
        )

    def __getstate__(self):
        return self.initial_level, self.transitions, self.horizon

    def __setstate__(self, state):
        self._assign(state[0], np.array(state[1], dtype=np.int64), state[2])


def _check_horizons(*waveforms: Waveform) -> int:
    horizon = waveforms[0].horizon
    for waveform in waveforms[1:]:
        if waveform.horizon != horizon:
            raise HorizonError(
                f"horizon mismatch: {waveform.horizon} != {horizon}"
            )
    return horizon


def _merged_starts(*waveforms: Waveform) -> np.ndarray:
    instants = functools.reduce(np.union1d, [w.transitions for w in waveforms])
    return np.concatenate(([0], instants)).astype(np.int64)


def measure(
    waveform: Waveform, start: int = 0, end: Optional[int] = None
) -> float:
    """
    fraction of [start, end) during which the waveform is high

    :param waveform Waveform: signal to evaluate
    :param start int: window start in ticks
    :param end Optional[int]: window end in ticks, defaults to the horizon
    :rtype float: value encoded by the signal in [0, 1]
    """
    end = waveform.horizon if end is None else int(end)
    if not 0 <= start < end <= waveform.horizon:
        raise HorizonError(f"measurement window [{start}, {end}) is out of range")

    starts, ends, levels = waveform.segments()
    overlap = np.minimum(ends, end) - np.maximum(starts, start)
    high = int(np.sum(np.clip(overlap, 0, None) * levels))
    return high / (end - start)


def combine2(a: Waveform, b: Waveform, function: BooleanFunction) -> Waveform:
    """
    pointwise combination f(a(t), b(t)) by transition merging

    :param function BooleanFunction: two-input boolean function on bits
    """
    horizon = _check_horizons(a, b)
    table = np.array(
        [[function(x, y) & 1 for y in (0, 1)] for x in (0, 1)], dtype=np.uint8
    )
    starts = _merged_starts(a, b)
    levels = table[a.levels_at(starts), b.levels_at(starts)]
    return Waveform.from_segments(starts, levels, horizon)


def combine(waveforms: Sequence[Waveform], function: BooleanFunction) -> Waveform:
    """n-ary combination folded left to right over the declared input order"""
    if len(waveforms) == 0:
        raise ValueError("at least one waveform is required")
    return functools.reduce(lambda a, b: combine2(a, b, function), waveforms)


def invert(waveform: Waveform) -> Waveform:
    return Waveform._trusted(
        waveform.initial_level ^ 1, waveform.transitions, waveform.horizon
    )


def mux(select: Waveform, a: Waveform, b: Waveform) -> Waveform:
    """pointwise a(t) while select is low, b(t) while select is high"""
    horizon = _check_horizons(select, a, b)
    starts = _merged_starts(select, a, b)
    levels = np.where(select.levels_at(starts), b.levels_at(starts), a.levels_at(starts))
    return Waveform.from_segments(starts, levels, horizon)


def filter_spikes(waveform: Waveform, min_width: int) -> Waveform:
    """
    pull every maximal high interval shorter than min_width ticks low

    low intervals are never touched, so the operation is idempotent and
    never increases the measured value
    """
    if min_width < 0:
        raise ValueError(f"minimum spike width must be >= 0, got {min_width}")
    if min_width == 0 or waveform.transitions.size == 0:
        return waveform

    starts, ends, levels = waveform.segments()
    spikes = (levels == 1) & ((ends - starts) < min_width)
    if not np.any(spikes):
        return waveform
    return Waveform.from_segments(starts, np.where(spikes, 0, levels), waveform.horizon)


def sample(waveform: Waveform, edges: Sequence[int]) -> np.ndarray:
    """
    read the waveform at each clock edge

    an edge that coincides with a transition reads the new level
    """
    edges = np.asarray(edges, dtype=np.int64)
    if edges.size > 0:
        if edges[0] < 0 or edges[-1] >= waveform.horizon:
            raise HorizonError("sampling edges must lie within [0, horizon)")
        if np.any(np.diff(edges) < 0):
            raise ValueError("sampling edges must be ascending")
    return waveform.levels_at(edges)


def dumps(waveform: Waveform, grid: TimeGrid = DEFAULT_GRID) -> str:
    """debug dump, one `t=<ns> level=<0|1>` line per segment"""
    starts, _, levels = waveform.segments()
    return "\n".join(
        f"t={grid.to_ns(int(start)):.{grid.decimals}f} level={level}"
        for start, level in zip(starts, levels)
    )


def to_bytes(waveform: Waveform) -> bytes:
    """
    binary serialization: u64 transition count, u64 instants, u8 initial level,
    u64 horizon, all little-endian
    """
    return b"".join(
        (
            struct.pack("<Q", waveform.transitions.size),
            waveform.transitions.astype("<u8").tobytes(),
            struct.pack("<B", waveform.initial_level),
            struct.pack("<Q", waveform.horizon),
        )
    )


def from_bytes(data: bytes) -> Waveform:
    (count,) = struct.unpack_from("<Q", data, 0)
    offset = 8 + 8 * count
    if len(data) != offset + 9:
        raise ValueError(f"expected {offset + 9} bytes, got {len(data)}")
    transitions = np.frombuffer(data, dtype="<u8", count=count, offset=8)
    (initial_level,) = struct.unpack_from("<B", data, offset)
    (horizon,) = struct.unpack_from("<Q", data, offset + 1)
    return Waveform(initial_level, transitions.astype(np.int64), horizon)
