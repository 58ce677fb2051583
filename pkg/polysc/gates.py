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

Name: Gates
Author: PolySC contributors
Date Created: May 4, 2022
Last Modified: June 12, 2022
"""

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .sng import ClockDomain
from .waveform import AND, XOR, Waveform, combine2, mux, sample

DEFAULT_COMPARATOR_STATES = 32
DEFAULT_EXP_STATES = 64
DEFAULT_EXP_G = 2


class GateKind(enum.Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"
    NOT = "not"
    MUX = "mux"
    SCALED_ADD_TREE = "scaled_add_tree"
    COMPARATOR_FSM = "comparator_fsm"
    EXP_FSM = "exp_fsm"

    @property
    def arity(self) -> Optional[int]:
        """number of inputs, None for kinds sized by their parameters"""
        return _ARITY.get(self)

    @property
    def clocked(self) -> bool:
        return self in (GateKind.COMPARATOR_FSM, GateKind.EXP_FSM)


_ARITY = {
    GateKind.AND: 2,
    GateKind.OR: 2,
    GateKind.XOR: 2,
    GateKind.NOT: 1,
    GateKind.MUX: 3,
    GateKind.COMPARATOR_FSM: 2,
    GateKind.EXP_FSM: 2,
}


class Correlation(enum.Enum):
    CORRELATED = "correlated"
    INDEPENDENT = "independent"


@dataclass
class FsmState:
    """saturating counter state of a clocked element"""

    state_count: int
    current: int

    def __post_init__(self) -> None:
        if self.state_count < 2:
            raise ValueError(f"an FSM needs at least 2 states, got {self.state_count}")
        if not 0 <= self.current < self.state_count:
            raise ValueError(f"FSM state {self.current} out of range")

    @classmethod
    def midpoint(cls, state_count: int) -> "FsmState":
        return cls(state_count, state_count // 2)

    @classmethod
    def top(cls, state_count: int) -> "FsmState":
        return cls(state_count, state_count - 1)

    def run(self, steps: np.ndarray) -> np.ndarray:
        """
        apply one saturating step of -1, 0 or +1 per sample

        every step is the map x -> min(high, max(low, x + shift)); maps of
        this form are closed under composition, so the whole trace comes
        from a log-depth prefix scan over the steps

        :rtype np.ndarray: counter value after each step
        """
        shift = np.array(steps, dtype=np.int64).reshape(-1)
        if shift.size == 0:
            return shift
        low = np.zeros_like(shift)
        high = np.full_like(shift, self.state_count - 1)

        span = 1
        while span < shift.size:
            # compose the map ending at i - span with the one ending at i
            later_shift, later_low, later_high = shift[span:], low[span:], high[span:]
            composed = (
                shift[:-span] + later_shift,
                np.maximum(later_low, low[:-span] + later_shift),
                np.minimum(later_high, np.maximum(later_low, high[:-span] + later_shift)),
            )
            shift[span:], low[span:], high[span:] = composed
            span *= 2

        trace = np.minimum(high, np.maximum(low, self.current + shift))
        self.current = int(trace[-1])
        return trace


def stochastic_multiply(a: Waveform, b: Waveform) -> Waveform:
    return combine2(a, b, AND)


def scaled_add(a: Waveform, b: Waveform, select: Waveform) -> Waveform:
    """(a + b) / 2 when select is an independent 0.5 stream"""
    return mux(select, a, b)


def scaled_add_tree(data: Sequence[Waveform], selects: Sequence[Waveform]) -> Waveform:
    """
    balanced MUX tree averaging 2^k streams, one select stream per level

    level 0 pairs adjacent inputs, the last select drives the root MUX
    """
    if len(data) != 1 << len(selects):
        raise ValueError(
            f"a tree with {len(selects)} select levels takes {1 << len(selects)}"
            f" data streams, got {len(data)}"
        )
    level = list(data)
    for select in selects:
        level = [scaled_add(a, b, select) for a, b in zip(level[0::2], level[1::2])]
    return level[0]


def abs_diff(
    a: Waveform, b: Waveform, mode: Correlation = Correlation.CORRELATED
) -> Waveform:
    """
    XOR of two streams

    correlated streams (shared random source and clock) measure |pa - pb|,
    independent streams measure pa + pb - 2 pa pb
    """
    Correlation(mode)
    return combine2(a, b, XOR)


def abs_diff_expectation(pa: float, pb: float, mode: Correlation) -> float:
    if Correlation(mode) is Correlation.CORRELATED:
        return abs(pa - pb)
    return pa + pb - 2 * pa * pb


def _clock_edges(clock: ClockDomain, horizon: int) -> np.ndarray:
    if clock.horizon < horizon:
        raise ValueError("the element clock does not cover its input streams")
    edges = clock.edges()
    return edges[edges < horizon]


def comparator_fsm(
    x: Waveform,
    t: Waveform,
    clock: ClockDomain,
    states: int = DEFAULT_COMPARATOR_STATES,
    initial: Optional[FsmState] = None,
) -> Waveform:
    """
    stochastic comparator: emits ones while x has been winning against t

    both inputs are sampled at the element's own rising edges; the counter
    moves up on (1, 0), down on (0, 1) and the output is 1 in the upper half
    """
    if states < 2 or states % 2:
        raise ValueError(f"comparator states must be even and >= 2, got {states}")
    if x.horizon != t.horizon:
        raise ValueError("comparator inputs have different horizons")

    edges = _clock_edges(clock, x.horizon)
    steps = sample(x, edges).astype(np.int64) - sample(t, edges).astype(np.int64)
    counter = (initial or FsmState.midpoint(states)).run(steps)
    return Waveform.from_bits(counter >= states // 2, edges, x.horizon)


def exp_fsm(
    d: Waveform,
    clock: ClockDomain,
    states: int = DEFAULT_EXP_STATES,
    g: int = DEFAULT_EXP_G,
    bias: Optional[Waveform] = None,
    initial: Optional[FsmState] = None,
) -> Waveform:
    """
    saturating-counter exponentiation element

    the counter moves up when the sampled input (ORed with the optional bias
    stream) is 1 and down otherwise; the output is 1 while the counter is
    below states - g. With an independent 0.5 bias the long-run output
    approximates ((1 - p) / (1 + p))^g, i.e. e^(-2gp). The counter starts in
    the top state, where that stationary distribution peaks
    """
    if states < 2 or not 0 < g < states:
        raise ValueError(f"invalid exponentiation FSM: states={states}, g={g}")

    edges = _clock_edges(clock, d.horizon)
    ups = sample(d, edges)
    if bias is not None:
        if bias.horizon != d.horizon:
            raise ValueError("bias stream has a different horizon")
        ups = ups | sample(bias, edges)

    counter = (initial or FsmState.top(states)).run(2 * ups.astype(np.int64) - 1)
    return Waveform.from_bits(counter < states - g, edges, d.horizon)


def exp_fsm_expectation(p: float, states: int, g: int, biased: bool = True) -> float:
    """stationary output of exp_fsm for an input probability p"""
    up = (1 + p) / 2 if biased else p
    if up <= 0:
        return 1.0
    if up >= 1:
        return 0.0
    weights = (up / (1 - up)) ** np.arange(states, dtype=np.float64)
    return float(weights[: states - g].sum() / weights.sum())

