#!/usr/bin/python
# -*- coding: utf-8 -*-

import numpy as np
import pytest
import utils

from polysc.circuits import (
    GAMMA_COEFFICIENTS,
    MODES,
    CellArray,
    CellCircuit,
    CircuitKind,
    Element,
    RunConfig,
    Sourcing,
    evaluate,
    gamma_cell,
    gamma_circuit,
    kde_cell,
    kde_circuit,
    robert_cell,
    robert_circuit,
    run_array,
    threshold_cell,
    threshold_circuit,
)
from polysc.errors import ConfigError, HorizonError
from polysc.gates import GateKind
from polysc.images import checkerboard, random_image, ramp
from polysc.metrics import bernstein
from polysc.sng import Lfsr, SngConfig, generate
from polysc.waveform import XOR, Waveform, combine2, invert, measure


def test_netlist_validation():
    xor = Element("xor", GateKind.XOR, ("a", "b"), "d")
    with pytest.raises(ValueError):
        CellCircuit(CircuitKind.ROBERT, (xor,), ("a",), "d")
    with pytest.raises(ValueError):
        CellCircuit(CircuitKind.ROBERT, (xor, xor), ("a", "b"), "d")
    with pytest.raises(ValueError):
        CellCircuit(
            CircuitKind.ROBERT,
            (Element("mux", GateKind.MUX, ("a", "b"), "d"),),
            ("a", "b"),
            "d",
        )
    with pytest.raises(ValueError):
        CellCircuit(CircuitKind.ROBERT, (xor,), ("a", "b"), "e")


def test_circuit_shapes():
    assert [element.kind for element in robert_circuit().elements] == [
        GateKind.XOR,
        GateKind.XOR,
        GateKind.MUX,
    ]
    threshold = threshold_circuit()
    assert sum(e.kind is GateKind.MUX for e in threshold.elements) == 63
    assert threshold.elements[-1].kind is GateKind.COMPARATOR_FSM
    gamma = gamma_circuit()
    assert len(gamma.elements) == 23
    assert sum(e.kind is GateKind.MUX for e in gamma.elements) == 6
    assert max(len(e.inputs) for e in gamma.elements) == 3
    kde = kde_circuit()
    assert sum(e.kind is GateKind.EXP_FSM for e in kde.elements) == 32
    assert sum(e.kind is GateKind.MUX for e in kde.elements) == 31
    with pytest.raises(ValueError):
        threshold_circuit(6)


def test_evaluate_checks_bindings():
    horizon = 100
    with pytest.raises(ValueError):
        evaluate(robert_circuit(), {"r00": Waveform.constant(0, horizon)})


def test_evaluate_calls_injector_once_per_port():
    seen = []

    def injector(element, port, waveform):
        seen.append((element, port))
        return waveform

    clock = utils.sync_clock(32)
    bindings = {
        name: Waveform.constant(0, clock.horizon)
        for name in ("r00", "r11", "r01", "r10", "sel")
    }
    evaluate(robert_circuit(), bindings, injector)
    assert seen == [
        ("xor0", "in0"),
        ("xor0", "in1"),
        ("xor0", "out"),
        ("xor1", "in0"),
        ("xor1", "in1"),
        ("xor1", "out"),
        ("mux", "in0"),
        ("mux", "in1"),
        ("mux", "in2"),
        ("mux", "out"),
    ]


def test_input_port_flip_stays_with_its_consumer():
    cell = CellCircuit(
        CircuitKind.KDE,
        (
            Element("left", GateKind.NOT, ("a",), "l"),
            Element("right", GateKind.NOT, ("a",), "r"),
        ),
        ("a",),
        "r",
    )
    ones = Waveform.constant(1, 100)

    def input_injector(element, port, waveform):
        return invert(waveform) if (element, port) == ("left", "in0") else waveform

    wires = evaluate(cell, {"a": ones}, input_injector)
    assert wires["a"] is ones
    assert measure(wires["l"]) == 1.0
    assert measure(wires["r"]) == 0.0

    def output_injector(element, port, waveform):
        return invert(waveform) if (element, port) == ("left", "out") else waveform

    wires = evaluate(cell, {"a": ones}, output_injector)
    assert measure(wires["l"]) == 1.0
    assert measure(wires["r"]) == 0.0


def test_scaled_add_tree_element():
    clock = utils.sync_clock()
    cell = CellCircuit(
        CircuitKind.THRESHOLD,
        (
            Element(
                "tree",
                GateKind.SCALED_ADD_TREE,
                ("a", "b", "c", "d", "s0", "s1"),
                "mean",
                {"levels": 2},
            ),
        ),
        ("a", "b", "c", "d", "s0", "s1"),
        "mean",
    )
    bindings = {
        wire: utils.stream(p, 10 + k, clock)
        for k, (wire, p) in enumerate(zip("abcd", (0.1, 0.3, 0.5, 0.9)))
    }
    bindings.update(s0=utils.stream(0.5, 77, clock), s1=utils.stream(0.5, 78, clock))
    assert measure(evaluate(cell, bindings)["mean"]) == pytest.approx(0.45, abs=0.05)

    short = ("a", "b", "c", "s0")
    broken = Element("tree", GateKind.SCALED_ADD_TREE, short, "m", {"levels": 2})
    with pytest.raises(ValueError):
        evaluate(
            CellCircuit(CircuitKind.THRESHOLD, (broken,), short, "m"),
            {wire: bindings[wire] for wire in short},
        )


def test_robert_cell_with_shared_source():
    clock = utils.sync_clock()
    lfsr = Lfsr.maximal(10, 123)
    r00, r11, r01, r10 = (
        generate(SngConfig(p, lfsr, clock)) for p in (0.8, 0.2, 0.5, 0.4)
    )
    sel = utils.stream(0.5, 456, clock)
    expected = 0.5 * (abs(0.8 - 0.2) + abs(0.5 - 0.4))
    assert measure(robert_cell(r00, r11, r01, r10, sel)) == pytest.approx(expected, abs=0.03)


def test_gamma_cell_stream_counts():
    clock = utils.sync_clock(16)
    zero = Waveform.constant(0, clock.horizon)
    with pytest.raises(ValueError):
        gamma_cell([zero] * 5, [zero] * 7, clock)
    ones = Waveform.constant(1, clock.horizon)
    assert measure(gamma_cell([ones] * 6, [zero] * 6 + [ones], clock)) == 1.0


def test_gamma_circuit_selects_by_popcount():
    clock = utils.sync_clock(8)
    horizon = clock.horizon
    # coefficient k is high only during cycle k, so the output shows which was picked
    coefficients = [
        Waveform.from_bits(np.arange(8) == k, clock.edges(), horizon) for k in range(7)
    ]
    for count in range(7):
        xs = [Waveform.constant(int(k < count), horizon) for k in range(6)]
        out = gamma_cell(xs, coefficients, clock)
        assert measure(combine2(out, coefficients[count], XOR)) == 0.0


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_gamma_cell_follows_bernstein_polynomial(x):
    clock = utils.sync_clock()
    values = []
    for seed in range(10):
        xs = [utils.stream(x, 100 * seed + k + 1, clock) for k in range(6)]
        bs = [
            utils.stream(b, 100 * seed + k + 50, clock)
            for k, b in enumerate(GAMMA_COEFFICIENTS.values)
        ]
        values.append(measure(gamma_cell(xs, bs, clock)))
    assert np.mean(values) == pytest.approx(bernstein(x), abs=0.03)


@pytest.mark.parametrize("center,expected", [(0.9, True), (0.1, False)])
def test_threshold_cell_decision(center, expected):
    clock = utils.sync_clock()
    window = [utils.stream(0.3 + 0.4 * (n % 2), 1 + n, clock) for n in range(64)]
    selects = [utils.stream(0.5, 200 + level, clock) for level in range(6)]
    out = threshold_cell(window, utils.stream(center, 300, clock), selects, clock)
    assert (measure(out) >= 0.5) is expected


@pytest.mark.parametrize("mode", MODES)
def test_flat_image_thresholds_to_white(mode):
    # equal center and window, ties resolve to white
    image = np.full((8, 8), 128, dtype=np.uint8)
    result = run_array(CellArray(CircuitKind.THRESHOLD, 8, 8), image, RunConfig(mode=mode))
    assert (result.image == 255).all()


def test_kde_cell_classification():
    clock = utils.sync_clock()
    lfsr = Lfsr.maximal(10, 42)
    selects = [utils.stream(0.5, 900 + level, clock) for level in range(5)]
    bias = utils.stream(0.5, 999, clock)

    same = generate(SngConfig(0.5, lfsr, clock))
    assert kde_cell(same, [same] * 32, clock, 0.5, selects, bias) == 0

    bright = generate(SngConfig(1.0, lfsr, clock))
    dark = generate(SngConfig(0.0, lfsr, clock))
    assert kde_cell(bright, [dark] * 32, clock, 0.5, selects, bias) == 1


def test_neighbors_replicate_borders():
    robert = CellArray(CircuitKind.ROBERT, 4, 4)
    assert robert.neighbors(3, 3) == [(3, 3), (3, 3), (3, 3), (3, 3)]
    assert robert.neighbors(1, 2) == [(1, 2), (2, 3), (1, 3), (2, 2)]

    threshold = CellArray(CircuitKind.THRESHOLD, 16, 16)
    window = threshold.neighbors(8, 8)
    assert len(window) == 64
    assert window[0] == (4, 4)
    assert window[-1] == (11, 11)
    assert threshold.neighbors(0, 0)[0] == (0, 0)


def test_sync_robert_matches_bitstream_simulation():
    image = random_image(8, 8, seed=3)
    config = RunConfig(mode="sync", master_seed=11)
    result = run_array(CellArray(CircuitKind.ROBERT, 8, 8), image, config)
    assert np.array_equal(result.image, utils.bitstream_robert(image, config))


def test_run_array_independent_of_workers():
    image = ramp(4, 4)
    array = CellArray(CircuitKind.ROBERT, 4, 4, sourcing=Sourcing.NEIGHBOR)
    inline = run_array(array, image, RunConfig(mode="poly", workers=1))
    parallel = run_array(array, image, RunConfig(mode="poly", workers=2))
    assert np.array_equal(inline.values, parallel.values)
    assert inline.clocks == parallel.clocks


def test_poly_clocks_are_local():
    image = checkerboard(4, 4)
    result = run_array(CellArray(CircuitKind.ROBERT, 4, 4), image, RunConfig(mode="poly"))
    assert len({clock.period for clock in result.clocks}) > 1
    for clock in result.clocks:
        assert clock.edge_count() >= 1024

    sync = run_array(CellArray(CircuitKind.ROBERT, 4, 4), image, RunConfig(mode="sync"))
    assert len(set(sync.clocks)) == 1


def test_run_array_preconditions():
    array = CellArray(CircuitKind.ROBERT, 4, 4)
    with pytest.raises(ValueError):
        run_array(array, ramp(4, 5), RunConfig())
    with pytest.raises(ConfigError):
        run_array(array, ramp(4, 4), RunConfig(fault_rate=0.1))
    with pytest.raises(ConfigError):
        RunConfig(mode="async")


def test_kde_array_is_binary():
    history = np.stack([np.full((2, 2), 100, dtype=np.uint8)] * 32)
    current = np.array([[100, 100], [255, 100]], dtype=np.uint8)
    result = run_array(CellArray(CircuitKind.KDE, 2, 2), (history, current), RunConfig())
    assert set(np.unique(result.image).tolist()) <= {0, 255}
    assert result.image[1, 0] == 255
    assert result.image[0, 0] == 0


def test_cell_rejects_mismatched_horizons():
    short = utils.stream(0.5, 1, utils.sync_clock(16))
    long = utils.stream(0.5, 2, utils.sync_clock(32))
    with pytest.raises(HorizonError):
        robert_cell(short, long, short, short, short)
