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

Name: Circuits
Author: PolySC contributors
Date Created: May 9, 2022
Last Modified: June 20, 2022
"""

import enum
import functools
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .errors import ConfigError, HorizonError
from .evaluator import evaluate_jobs
from .gates import (
    DEFAULT_COMPARATOR_STATES,
    DEFAULT_EXP_G,
    DEFAULT_EXP_STATES,
    Correlation,
    GateKind,
    abs_diff,
    comparator_fsm,
    exp_fsm,
    scaled_add_tree,
)
from .images import check_image, to_intensity
from .sng import (
    CLOCK_STREAM,
    DEFAULT_WIDTH,
    MAXIMAL_TAPS,
    SNG_STREAM,
    ClockDomain,
    Lfsr,
    SngConfig,
    derive_seed,
    generate,
    lfsr_seed,
    random_clock,
)
from .waveform import (
    AND,
    DEFAULT_GRID,
    OR,
    TimeGrid,
    Waveform,
    combine,
    filter_spikes,
    invert,
    measure,
    mux,
)

MODES = ("sync", "poly")

# one pixel stream per cell lives in slot 0, private streams follow
PIXEL_SLOT = 0

DEFAULT_KDE_THRESHOLD = 0.2


class CircuitKind(enum.Enum):
    ROBERT = "robert"
    GAMMA = "gamma"
    THRESHOLD = "threshold"
    KDE = "kde"

    @property
    def binary(self) -> bool:
        return self in (CircuitKind.THRESHOLD, CircuitKind.KDE)


class Sourcing(enum.Enum):
    """where a Robert's cross or thresholding cell gets its neighbor pixel streams"""

    LOCAL = "local"
    NEIGHBOR = "neighbor"


@dataclass(frozen=True)
class BernsteinCoeffs:
    """coefficients of the degree-6 Bernstein polynomial approximating x^0.45"""

    values: Tuple[float, ...] = (
        0.0955,
        0.7207,
        0.3476,
        0.9988,
        0.7017,
        0.9695,
        0.9939,
    )

    def __post_init__(self) -> None:
        if len(self.values) != 7:
            raise ValueError(f"expected 7 Bernstein coefficients, got {len(self.values)}")
        if any(not 0.0 <= value <= 1.0 for value in self.values):
            raise ValueError("Bernstein coefficients must lie in [0, 1]")

    @property
    def degree(self) -> int:
        return len(self.values) - 1


GAMMA_COEFFICIENTS = BernsteinCoeffs()


@dataclass(frozen=True)
class Element:
    name: str
    kind: GateKind
    inputs: Tuple[str, ...]
    output: str
    params: Mapping[str, Union[int, str]] = field(default_factory=dict)


@dataclass(frozen=True)
class CellCircuit:
    """
    gate-level netlist of one processing cell

    elements are listed in evaluation order; every element input is either a
    cell input or the output of an earlier element, so the graph is acyclic
    """

    kind: CircuitKind
    elements: Tuple[Element, ...]
    inputs: Tuple[str, ...]
    output: str
    clock: Optional[ClockDomain] = None

    def __post_init__(self) -> None:
        known = set()
        for name in self.inputs:
            if name in known:
                raise ValueError(f"input wire {name} declared twice")
            known.add(name)

        for element in self.elements:
            arity = element.kind.arity
            if arity is not None and len(element.inputs) != arity:
                raise ValueError(
                    f"{element.name}: {element.kind.value} takes {arity} inputs,"
                    f" got {len(element.inputs)}"
                )
            for wire in element.inputs:
                if wire not in known:
                    raise ValueError(f"{element.name}: wire {wire} is not driven yet")
            if element.output in known:
                raise ValueError(f"{element.name}: wire {element.output} has two drivers")
            known.add(element.output)

        if self.output not in known:
            raise ValueError(f"output wire {self.output} is not driven")

    def with_clock(self, clock: ClockDomain) -> "CellCircuit":
        return replace(self, clock=clock)


def _mux_tree(
    prefix: str, data: Sequence[str], selects: Sequence[str], root: str
) -> List[Element]:
    # one select per level, level 0 pairs adjacent inputs
    elements = []
    level = list(data)
    for depth, select in enumerate(selects):
        outputs = []
        for node, (a, b) in enumerate(zip(level[0::2], level[1::2])):
            output = root if len(level) == 2 else f"{prefix}{depth}_{node}"
            elements.append(
                Element(f"{prefix}mux{depth}_{node}", GateKind.MUX, (a, b, select), output)
            )
            outputs.append(output)
        level = outputs
    return elements


def robert_circuit(correlation: Correlation = Correlation.CORRELATED) -> CellCircuit:
    params = {"correlation": Correlation(correlation).value}
    return CellCircuit(
        CircuitKind.ROBERT,
        (
            Element("xor0", GateKind.XOR, ("r00", "r11"), "d0", params),
            Element("xor1", GateKind.XOR, ("r01", "r10"), "d1", params),
            Element("mux", GateKind.MUX, ("d0", "d1", "sel"), "out"),
        ),
        ("r00", "r11", "r01", "r10", "sel"),
        "out",
    )


def _full_adder(prefix: str, a: str, b: str, c: str, total: str, carry: str) -> List[Element]:
    return [
        Element(f"{prefix}xor0", GateKind.XOR, (a, b), f"{prefix}p"),
        Element(f"{prefix}xor1", GateKind.XOR, (f"{prefix}p", c), total),
        Element(f"{prefix}and0", GateKind.AND, (a, b), f"{prefix}g"),
        Element(f"{prefix}and1", GateKind.AND, (f"{prefix}p", c), f"{prefix}h"),
        Element(f"{prefix}or", GateKind.OR, (f"{prefix}g", f"{prefix}h"), carry),
    ]


def gamma_circuit(coefficients: BernsteinCoeffs = GAMMA_COEFFICIENTS) -> CellCircuit:
    """
    MUX-based Bernstein polynomial of degree 6

    a gate-level adder counts the ones among x0..x5 into n2 n1 n0 and a
    tree of 2:1 MUXes forwards coefficient stream b[n]
    """
    xs = tuple(f"x{k}" for k in range(coefficients.degree))
    bs = tuple(f"b{k}" for k in range(coefficients.degree + 1))

    # popcount: two full adders, a half adder on the sums, a full adder on the carries
    elements = _full_adder("fa0", "x0", "x1", "x2", "s0", "c0")
    elements += _full_adder("fa1", "x3", "x4", "x5", "s1", "c1")
    elements += [
        Element("ha_xor", GateKind.XOR, ("s0", "s1"), "n0"),
        Element("ha_and", GateKind.AND, ("s0", "s1"), "k"),
    ]
    elements += _full_adder("fa2", "c0", "c1", "k", "n1", "n2")

    # count 7 never occurs, so b6 skips the first level
    elements += [
        Element("sel0_0", GateKind.MUX, ("b0", "b1", "n0"), "m0"),
        Element("sel0_1", GateKind.MUX, ("b2", "b3", "n0"), "m1"),
        Element("sel0_2", GateKind.MUX, ("b4", "b5", "n0"), "m2"),
        Element("sel1_0", GateKind.MUX, ("m0", "m1", "n1"), "q0"),
        Element("sel1_1", GateKind.MUX, ("m2", "b6", "n1"), "q1"),
        Element("sel2", GateKind.MUX, ("q0", "q1", "n2"), "out"),
    ]
    return CellCircuit(CircuitKind.GAMMA, tuple(elements), xs + bs, "out")


def threshold_circuit(
    window: int = 8, states: int = DEFAULT_COMPARATOR_STATES
) -> CellCircuit:
    size = window * window
    levels = size.bit_length() - 1
    if window < 2 or 1 << levels != size:
        raise ValueError(f"window {window}x{window} does not fill a balanced MUX tree")

    data = tuple(f"w{n}" for n in range(size))
    selects = tuple(f"s{level}" for level in range(levels))
    elements = _mux_tree("t", data, selects, "mean")
    elements.append(
        Element("comparator", GateKind.COMPARATOR_FSM, ("center", "mean"), "out", {"states": states})
    )
    return CellCircuit(
        CircuitKind.THRESHOLD, tuple(elements), data + ("center",) + selects, "out"
    )


def kde_circuit(
    history: int = 32, states: int = DEFAULT_EXP_STATES, g: int = DEFAULT_EXP_G
) -> CellCircuit:
    levels = history.bit_length() - 1
    if history < 2 or 1 << levels != history:
        raise ValueError(f"history length {history} is not a power of two")

    frames = tuple(f"h{n}" for n in range(history))
    selects = tuple(f"s{level}" for level in range(levels))
    elements = []
    for n, frame in enumerate(frames):
        elements.append(
            Element(
                f"xor{n}",
                GateKind.XOR,
                ("x", frame),
                f"d{n}",
                {"correlation": Correlation.CORRELATED.value},
            )
        )
        elements.append(
            Element(f"exp{n}", GateKind.EXP_FSM, (f"d{n}", "bias"), f"e{n}", {"states": states, "g": g})
        )
    elements.extend(_mux_tree("p", [f"e{n}" for n in range(history)], selects, "pdf"))
    return CellCircuit(
        CircuitKind.KDE, tuple(elements), ("x",) + frames + selects + ("bias",), "pdf"
    )


def _apply(element: Element, args: List[Waveform], clock: Optional[ClockDomain]) -> Waveform:
    kind = element.kind
    if kind.clocked and clock is None:
        raise ValueError(f"{element.name}: clocked element needs a cell clock")

    if kind is GateKind.AND:
        return combine(args, AND)
    if kind is GateKind.OR:
        return combine(args, OR)
    if kind is GateKind.XOR:
        return abs_diff(args[0], args[1], element.params.get("correlation", "correlated"))
    if kind is GateKind.NOT:
        return invert(args[0])
    if kind is GateKind.MUX:
        return mux(args[2], args[0], args[1])
    if kind is GateKind.SCALED_ADD_TREE:
        levels = element.params["levels"]
        if len(args) != (1 << levels) + levels:
            raise ValueError(
                f"{element.name}: a {levels}-level tree takes {(1 << levels) + levels}"
                f" inputs, got {len(args)}"
            )
        return scaled_add_tree(args[: 1 << levels], args[1 << levels :])
    if kind is GateKind.COMPARATOR_FSM:
        return comparator_fsm(args[0], args[1], clock, element.params.get("states", DEFAULT_COMPARATOR_STATES))
    if kind is GateKind.EXP_FSM:
        return exp_fsm(
            args[0],
            clock,
            element.params.get("states", DEFAULT_EXP_STATES),
            element.params.get("g", DEFAULT_EXP_G),
            bias=args[1],
        )
    raise ValueError(f"unsupported element kind {kind}")


# (element name, port, waveform) -> waveform, ports are in0, in1, ... and out
Injector = Callable[[str, str, Waveform], Waveform]


def evaluate(
    cell: CellCircuit,
    bindings: Mapping[str, Waveform],
    injector: Optional[Injector] = None,
) -> Dict[str, Waveform]:
    """
    evaluate a cell netlist

    :param bindings Mapping[str, Waveform]: one waveform per cell input
    :param injector Optional[Injector]: applied to every element port; what it
        does to an input port is seen by that element only, what it does to
        the output port is seen by every consumer of the wire
    :rtype Dict[str, Waveform]: waveform of every wire in the cell as driven
    """
    missing = set(cell.inputs) - set(bindings)
    extra = set(bindings) - set(cell.inputs)
    if missing or extra:
        raise ValueError(
            f"input bindings do not match the cell: missing {sorted(missing)},"
            f" unexpected {sorted(extra)}"
        )

    wires = {name: bindings[name] for name in cell.inputs}
    for element in cell.elements:
        args = [wires[name] for name in element.inputs]
        if injector is not None:
            args = [injector(element.name, f"in{k}", w) for k, w in enumerate(args)]
        waveform = _apply(element, args, cell.clock)
        wires[element.output] = (
            waveform if injector is None else injector(element.name, "out", waveform)
        )
    return wires


def robert_cell(
    r00: Waveform,
    r11: Waveform,
    r01: Waveform,
    r10: Waveform,
    sel: Waveform,
    correlation: Correlation = Correlation.CORRELATED,
) -> Waveform:
    """0.5 * (|r00 - r11| + |r01 - r10|)"""
    bindings = {"r00": r00, "r11": r11, "r01": r01, "r10": r10, "sel": sel}
    return evaluate(robert_circuit(correlation), bindings)["out"]


def gamma_cell(
    x_streams: Sequence[Waveform],
    coeff_streams: Sequence[Waveform],
    clock: ClockDomain,
) -> Waveform:
    cell = gamma_circuit().with_clock(clock)
    if len(x_streams) != 6 or len(coeff_streams) != 7:
        raise ValueError(
            f"gamma correction takes 6 x streams and 7 coefficient streams,"
            f" got {len(x_streams)} and {len(coeff_streams)}"
        )
    bindings = {f"x{k}": w for k, w in enumerate(x_streams)}
    bindings.update({f"b{k}": w for k, w in enumerate(coeff_streams)})
    return evaluate(cell, bindings)["out"]


def threshold_cell(
    window: Sequence[Waveform],
    center: Waveform,
    sel_streams: Sequence[Waveform],
    clock: ClockDomain,
    states: int = DEFAULT_COMPARATOR_STATES,
) -> Waveform:
    if len(window) != 64:
        raise ValueError(f"mean thresholding takes an 8x8 window, got {len(window)} streams")
    if len(sel_streams) != 6:
        raise ValueError(f"a 64-input MUX tree takes 6 select streams, got {len(sel_streams)}")

    cell = threshold_circuit(8, states).with_clock(clock)
    bindings = {f"w{n}": w for n, w in enumerate(window)}
    bindings.update({f"s{n}": w for n, w in enumerate(sel_streams)})
    bindings["center"] = center
    return evaluate(cell, bindings)["out"]


def kde_pdf(
    x_t: Waveform,
    history: Sequence[Waveform],
    clock: ClockDomain,
    selects: Sequence[Waveform],
    bias: Waveform,
    states: int = DEFAULT_EXP_STATES,
    g: int = DEFAULT_EXP_G,
) -> Waveform:
    """stream whose value estimates (1/n) sum e^(-4 |x_t - x_(t-i)|)"""
    if len(history) != 32:
        raise ValueError(f"the estimator takes 32 history frames, got {len(history)}")
    if len(selects) != 5:
        raise ValueError(f"a 32-input MUX tree takes 5 select streams, got {len(selects)}")

    cell = kde_circuit(32, states, g).with_clock(clock)
    bindings = {f"h{n}": w for n, w in enumerate(history)}
    bindings.update({f"s{n}": w for n, w in enumerate(selects)})
    bindings.update(x=x_t, bias=bias)
    return evaluate(cell, bindings)["pdf"]


def kde_cell(
    x_t: Waveform,
    history: Sequence[Waveform],
    clock: ClockDomain,
    threshold: float,
    selects: Sequence[Waveform],
    bias: Waveform,
    states: int = DEFAULT_EXP_STATES,
    g: int = DEFAULT_EXP_G,
) -> int:
    """1 when the pixel is unlike its history (PDF below threshold)"""
    pdf = kde_pdf(x_t, history, clock, selects, bias, states, g)
    return int(measure(pdf) < threshold)


@dataclass(frozen=True)
class CellArray:
    """grid of cells, one per output pixel, each with its own local clock"""

    kind: CircuitKind
    height: int
    width: int
    window: int = 8
    history: int = 32
    sourcing: Sourcing = Sourcing.LOCAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CircuitKind(self.kind))
        object.__setattr__(self, "sourcing", Sourcing(self.sourcing))
        if self.height <= 0 or self.width <= 0:
            raise ValueError(f"invalid array size {self.height}x{self.width}")

    def _clamp(self, row: int, col: int) -> Tuple[int, int]:
        return min(max(row, 0), self.height - 1), min(max(col, 0), self.width - 1)

    def neighbors(self, row: int, col: int) -> List[Tuple[int, int]]:
        """
        cells whose pixel streams feed cell (row, col); borders replicate

        ROBERT: (i, j), (i+1, j+1), (i, j+1), (i+1, j)
        THRESHOLD: the window rows i-K/2..i+K/2-1, cols j-K/2..j+K/2-1, row-major
        """
        if self.kind is CircuitKind.ROBERT:
            offsets = [(0, 0), (1, 1), (0, 1), (1, 0)]
        elif self.kind is CircuitKind.THRESHOLD:
            span = range(-(self.window // 2), self.window - self.window // 2)
            offsets = [(dr, dc) for dr in span for dc in span]
        else:
            offsets = [(0, 0)]
        return [self._clamp(row + dr, col + dc) for dr, dc in offsets]


@dataclass(frozen=True)
class RunConfig:
    """parameters of one array evaluation"""

    mode: str = "sync"
    trial: int = 0
    master_seed: int = 0
    stream_length: int = 1024
    min_period: float = 2.0
    max_period: float = 4.0
    sync_period: float = 2.0
    spike_width: float = 0.2
    lfsr_width: int = DEFAULT_WIDTH
    lfsr_taps: Optional[Tuple[int, ...]] = None
    invert: bool = False
    comparator_states: int = DEFAULT_COMPARATOR_STATES
    exp_states: int = DEFAULT_EXP_STATES
    exp_g: int = DEFAULT_EXP_G
    kde_threshold: float = DEFAULT_KDE_THRESHOLD
    coefficients: BernsteinCoeffs = GAMMA_COEFFICIENTS
    fault_rate: float = 0.0
    workers: int = 1
    grid: TimeGrid = DEFAULT_GRID

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.stream_length < 1:
            raise ConfigError(f"stream length must be >= 1, got {self.stream_length}")
        if not 0 < self.min_period <= self.max_period or self.sync_period <= 0:
            raise ConfigError(
                f"invalid clock periods: range [{self.min_period}, {self.max_period}],"
                f" sync {self.sync_period}"
            )
        if self.spike_width < 0:
            raise ConfigError(f"spike width must be >= 0, got {self.spike_width}")
        if not 0.0 <= self.fault_rate <= 1.0:
            raise ConfigError(f"fault rate must be in [0, 1], got {self.fault_rate}")
        if self.lfsr_taps is None and self.lfsr_width not in MAXIMAL_TAPS:
            raise ConfigError(f"no built-in taps for LFSR width {self.lfsr_width}")

    @property
    def taps(self) -> Tuple[int, ...]:
        return tuple(self.lfsr_taps or MAXIMAL_TAPS[self.lfsr_width])

    @property
    def horizon(self) -> int:
        """common stream duration in ticks, length periods of the slowest clock"""
        period = self.sync_period if self.mode == "sync" else self.max_period
        return self.grid.to_ticks(self.stream_length * period)

    def lfsr(self, *key: int) -> Lfsr:
        seed = lfsr_seed(self.master_seed, SNG_STREAM, self.trial, *key, width=self.lfsr_width)
        return Lfsr(self.lfsr_width, self.taps, seed)

    def clock(self, row: int, col: int) -> ClockDomain:
        if self.mode == "sync":
            return ClockDomain(self.grid.to_ticks(self.sync_period), 0, self.horizon)
        seed = derive_seed(self.master_seed, CLOCK_STREAM, self.trial, row, col)
        return random_clock(
            seed,
            self.min_period,
            self.max_period,
            self.grid.to_ns(self.horizon),
            self.grid,
        )


@dataclass(frozen=True)
class ArrayResult:
    values: np.ndarray
    image: np.ndarray
    clocks: Tuple[ClockDomain, ...]


FaultPlanner = Callable[..., object]


@dataclass(frozen=True)
class CellJob:
    """everything a worker needs to evaluate one cell in isolation"""

    row: int
    col: int
    array: CellArray
    config: RunConfig
    clock: ClockDomain
    local: Tuple[Tuple[str, SngConfig], ...]
    foreign: Tuple[Tuple[str, SngConfig], ...]
    fault_planner: Optional[FaultPlanner] = None

    def evaluate(self) -> float:
        config = self.config
        cell = build_circuit(self.array, config).with_clock(self.clock)
        spike_width = config.grid.to_ticks(config.spike_width)

        streams = {}
        bindings = {}
        for wire, sng in self.local:
            if sng not in streams:
                streams[sng] = generate(sng)
            bindings[wire] = streams[sng]
        for wire, sng in self.foreign:
            if sng not in streams:
                streams[sng] = filter_spikes(generate(sng), spike_width)
            bindings[wire] = streams[sng]

        injector = None
        if config.fault_rate > 0:
            plan = self.fault_planner(
                cell,
                config.fault_rate,
                config.master_seed,
                key=(config.trial, self.row, self.col),
                width=config.lfsr_width,
                lfsr_taps=config.taps,
            )
            injector = plan.injector(self.clock)

        wires = evaluate(cell, bindings, injector)
        value = measure(filter_spikes(wires[cell.output], spike_width))

        if self.array.kind is CircuitKind.THRESHOLD:
            return float(value >= 0.5)
        if self.array.kind is CircuitKind.KDE:
            return float(value < config.kde_threshold)
        return value


@functools.lru_cache(maxsize=32)
def build_circuit(array: CellArray, config: RunConfig) -> CellCircuit:
    if array.kind is CircuitKind.ROBERT:
        if array.sourcing is Sourcing.NEIGHBOR:
            return robert_circuit(Correlation.INDEPENDENT)
        return robert_circuit(Correlation.CORRELATED)
    if array.kind is CircuitKind.GAMMA:
        return gamma_circuit(config.coefficients)
    if array.kind is CircuitKind.THRESHOLD:
        return threshold_circuit(array.window, config.comparator_states)
    return kde_circuit(array.history, config.exp_states, config.exp_g)


def _split_images(array: CellArray, images) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    # KDE takes (history frames, current frame), the others a single image
    if array.kind is CircuitKind.KDE:
        history, current = images
        history = np.asarray(history)
        if history.ndim != 3 or history.shape[0] != array.history:
            raise ValueError(
                f"KDE needs a stack of {array.history} history frames,"
                f" got shape {history.shape}"
            )
        for frame in history:
            check_image(frame)
    else:
        current, history = images, None

    current = check_image(current)
    if current.shape != (array.height, array.width) or (
        history is not None and history.shape[1:] != current.shape
    ):
        raise ValueError(
            f"image size {current.shape} does not match the"
            f" {array.height}x{array.width} array"
        )
    return current, history


def _plan_cell(
    array: CellArray,
    config: RunConfig,
    row: int,
    col: int,
    current: np.ndarray,
    history: Optional[np.ndarray],
    clocks: Sequence[ClockDomain],
    fault_planner: Optional[FaultPlanner],
) -> CellJob:
    clock = clocks[row * array.width + col]

    def pixel(r: int, c: int, image: np.ndarray = current) -> float:
        return float(image[r, c]) / 255.0

    def own_stream(r: int, c: int) -> SngConfig:
        # the pixel stream cell (r, c) drives onto its output wire
        return SngConfig(
            pixel(r, c),
            config.lfsr(r, c, PIXEL_SLOT),
            clocks[r * array.width + c],
            config.invert,
        )

    def private(slot: int, target: float, lfsr: Optional[Lfsr] = None) -> SngConfig:
        return SngConfig(target, lfsr or config.lfsr(row, col, slot), clock, config.invert)

    local, foreign = [], []
    kind = array.kind

    if kind is CircuitKind.ROBERT:
        wires = ("r00", "r11", "r01", "r10")
        shared = config.lfsr(row, col, PIXEL_SLOT)
        for wire, (r, c) in zip(wires, array.neighbors(row, col)):
            if array.sourcing is Sourcing.LOCAL:
                local.append((wire, private(PIXEL_SLOT, pixel(r, c), shared)))
            elif (r, c) == (row, col):
                local.append((wire, own_stream(r, c)))
            else:
                foreign.append((wire, own_stream(r, c)))
        local.append(("sel", private(1, 0.5)))

    elif kind is CircuitKind.GAMMA:
        coefficients = config.coefficients
        for k in range(coefficients.degree):
            local.append((f"x{k}", private(1 + k, pixel(row, col))))
        for k, value in enumerate(coefficients.values):
            local.append((f"b{k}", private(1 + coefficients.degree + k, value)))

    elif kind is CircuitKind.THRESHOLD:
        shared = config.lfsr(row, col, PIXEL_SLOT)
        for n, (r, c) in enumerate(array.neighbors(row, col)):
            if array.sourcing is Sourcing.LOCAL:
                local.append((f"w{n}", private(PIXEL_SLOT, pixel(r, c), shared)))
            elif (r, c) == (row, col):
                local.append((f"w{n}", own_stream(r, c)))
            else:
                foreign.append((f"w{n}", own_stream(r, c)))
        if array.sourcing is Sourcing.LOCAL:
            local.append(("center", private(PIXEL_SLOT, pixel(row, col), shared)))
        else:
            local.append(("center", own_stream(row, col)))
        levels = (array.window * array.window).bit_length() - 1
        for level in range(levels):
            local.append((f"s{level}", private(1 + level, 0.5)))

    else:
        shared = config.lfsr(row, col, PIXEL_SLOT)
        local.append(("x", private(PIXEL_SLOT, pixel(row, col), shared)))
        for n in range(array.history):
            local.append((f"h{n}", private(PIXEL_SLOT, pixel(row, col, history[n]), shared)))
        levels = array.history.bit_length() - 1
        for level in range(levels):
            local.append((f"s{level}", private(1 + level, 0.5)))
        local.append(("bias", private(1 + levels, 0.5)))

    return CellJob(
        row, col, array, config, clock, tuple(local), tuple(foreign), fault_planner
    )


def run_array(
    array: CellArray,
    images,
    config: RunConfig,
    fault_planner: Optional[FaultPlanner] = None,
) -> ArrayResult:
    """
    evaluate every cell of the array under its own local clock

    :param images: the input image, or (history frames, current frame) for KDE
    :param fault_planner: plan_for_circuit, required when config.fault_rate > 0
    :raises HorizonError: when a clock runs fewer than stream_length periods
    """
    current, history = _split_images(array, images)
    if config.fault_rate > 0 and fault_planner is None:
        raise ConfigError("fault injection requires a fault planner")

    clocks = tuple(
        config.clock(row, col)
        for row in range(array.height)
        for col in range(array.width)
    )
    for clock in clocks:
        if clock.period * config.stream_length > config.horizon:
            raise HorizonError(
                f"horizon {config.horizon} is shorter than {config.stream_length}"
                f" periods of {clock.period}"
            )

    logger.debug(
        f"Evaluating {array.height}x{array.width} {array.kind.value} array"
        f" ({config.mode}, trial {config.trial}, fault rate {config.fault_rate})"
    )
    jobs = [
        _plan_cell(array, config, row, col, current, history, clocks, fault_planner)
        for row in range(array.height)
        for col in range(array.width)
    ]
    values = np.array(evaluate_jobs(jobs, config.workers), dtype=np.float64).reshape(
        array.height, array.width
    )
    return ArrayResult(values, to_intensity(values), clocks)
