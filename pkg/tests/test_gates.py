#!/usr/bin/python
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest
import utils
from hypothesis import given, settings
from hypothesis import strategies as st

from polysc.gates import (
    Correlation,
    FsmState,
    GateKind,
    abs_diff,
    abs_diff_expectation,
    comparator_fsm,
    exp_fsm,
    exp_fsm_expectation,
    scaled_add,
    scaled_add_tree,
    stochastic_multiply,
)
from polysc.sng import Lfsr, SngConfig, generate
from polysc.waveform import Waveform, measure


def test_gate_kinds():
    assert GateKind.MUX.arity == 3
    assert GateKind.SCALED_ADD_TREE.arity is None
    assert GateKind.EXP_FSM.clocked
    assert not GateKind.XOR.clocked


def test_fsm_state_saturates():
    state = FsmState(4, 2)
    trace = state.run(np.array([1, 1, 1, -1, -1, -1, -1, -1]))
    assert trace.tolist() == [3, 3, 3, 2, 1, 0, 0, 0]
    assert state.current == 0
    with pytest.raises(ValueError):
        FsmState(4, 4)


def test_unsynchronized_multiply():
    values = []
    for seed in range(20):
        clock_a, clock_b = utils.unsynchronized_clocks(seed)
        a = utils.stream(0.6, 2 * seed + 1, clock_a)
        b = utils.stream(0.5, 2 * seed + 2, clock_b)
        values.append(measure(stochastic_multiply(a, b)))
    assert np.mean(values) == pytest.approx(0.30, abs=0.03)


def test_unsynchronized_scaled_add():
    values = []
    for seed in range(20):
        clock_a, clock_b, clock_s = utils.unsynchronized_clocks(seed, 3)
        a = utils.stream(0.25, 3 * seed + 1, clock_a)
        b = utils.stream(0.5, 3 * seed + 2, clock_b)
        select = utils.stream(0.5, 3 * seed + 3, clock_s)
        values.append(measure(scaled_add(a, b, select)))
    assert np.mean(values) == pytest.approx(0.375, abs=0.03)


def test_scaled_add_tree_averages():
    clock = utils.sync_clock()
    targets = [0.1, 0.3, 0.5, 0.7, 0.9, 0.2, 0.4, 0.6]
    data = [utils.stream(p, 11 + k, clock) for k, p in enumerate(targets)]
    selects = [utils.stream(0.5, 101 + k, clock) for k in range(3)]
    assert measure(scaled_add_tree(data, selects)) == pytest.approx(np.mean(targets), abs=0.05)
    with pytest.raises(ValueError):
        scaled_add_tree(data[:6], selects)


def test_correlated_abs_diff_is_exact():
    clock = utils.sync_clock()
    lfsr = Lfsr.maximal(10, 99)
    a = generate(SngConfig(0.7, lfsr, clock))
    b = generate(SngConfig(0.3, lfsr, clock))
    assert measure(abs_diff(a, b)) == pytest.approx(0.4, abs=0.01)


def test_independent_abs_diff():
    clock = utils.sync_clock()
    values = []
    for seed in range(20):
        a = utils.stream(0.7, 2 * seed + 1, clock)
        b = utils.stream(0.3, 2 * seed + 500, clock)
        values.append(measure(abs_diff(a, b, Correlation.INDEPENDENT)))
    expected = abs_diff_expectation(0.7, 0.3, Correlation.INDEPENDENT)
    assert expected == pytest.approx(0.58)
    assert np.mean(values) == pytest.approx(expected, abs=0.03)


@pytest.mark.parametrize("px,pt", [(0.7, 0.5), (0.3, 0.5), (0.2, 0.6), (0.9, 0.4), (0.45, 0.65)])
def test_comparator_decisions(px, pt):
    clock = utils.sync_clock()
    wrong = 0
    for seed in range(20):
        x = utils.stream(px, 1 + seed, clock)
        t = utils.stream(pt, 300 + seed, clock)
        decision = measure(comparator_fsm(x, t, clock)) >= 0.5
        wrong += decision != (px > pt)
    assert wrong <= 1


def test_comparator_holds_decision_per_cycle():
    clock = utils.sync_clock(16)
    high = Waveform.constant(1, clock.horizon)
    low = Waveform.constant(0, clock.horizon)
    assert measure(comparator_fsm(high, low, clock)) == 1.0
    assert measure(comparator_fsm(low, high, clock)) == 0.0
    with pytest.raises(ValueError):
        comparator_fsm(high, low, clock, states=7)


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5])
def test_exp_fsm_calibration(p):
    clock = utils.sync_clock(4096)
    values = []
    for seed in range(20):
        d = utils.stream(p, 1 + seed, clock)
        bias = utils.stream(0.5, 700 + seed, clock)
        values.append(measure(exp_fsm(d, clock, bias=bias)))
    assert np.mean(values) == pytest.approx(exp_fsm_expectation(p, 64, 2), abs=0.04)
    assert exp_fsm_expectation(p, 64, 2) == pytest.approx(math.exp(-4 * p), abs=0.05)


def test_exp_fsm_expectation():
    assert exp_fsm_expectation(0.0, 64, 2) == pytest.approx(62 / 64)
    assert exp_fsm_expectation(0.25, 64, 2) == pytest.approx(0.36, abs=0.005)
    assert exp_fsm_expectation(0.5, 64, 2) == pytest.approx(1 / 9, abs=0.005)


def test_exp_fsm_without_bias_saturates():
    clock = utils.sync_clock(64)
    ones = Waveform.constant(1, clock.horizon)
    zeros = Waveform.constant(0, clock.horizon)
    # counter starts at 7 and drops below 6 on the second cycle
    assert measure(exp_fsm(zeros, clock, states=8, g=2)) == pytest.approx(63 / 64)
    assert measure(exp_fsm(ones, clock, states=8, g=2)) == 0.0
    start = FsmState.midpoint(8)
    assert measure(exp_fsm(ones, clock, states=8, g=2, initial=start)) == pytest.approx(1 / 64)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=2, max_value=40).flatmap(
        lambda states: st.tuples(
            st.just(states),
            st.integers(min_value=0, max_value=states - 1),
            st.lists(st.sampled_from([-1, 0, 1]), max_size=300),
        )
    )
)
def test_fsm_state_matches_step_by_step_counter(case):
    states, start, steps = case
    expected = []
    current = start
    for step in steps:
        current = min(max(current + step, 0), states - 1)
        expected.append(current)

    state = FsmState(states, start)
    assert state.run(np.array(steps, dtype=np.int64)).tolist() == expected
    assert state.current == current


def test_fsm_state_runs_long_streams():
    state = FsmState.midpoint(64)
    steps = np.tile([1, 1, -1], 100_000)
    trace = state.run(steps)
    assert trace.size == steps.size
    assert trace.max() == 63
    assert state.current == 62


def test_comparator_monotone_in_difference():
    clock = utils.sync_clock()
    means = []
    for px in np.linspace(0.1, 0.9, 9):
        values = []
        for seed in range(20):
            x = utils.stream(px, 1 + seed, clock)
            t = utils.stream(0.5, 500 + seed, clock)
            values.append(measure(comparator_fsm(x, t, clock)))
        means.append(np.mean(values))
    assert np.all(np.diff(means) >= -0.02)
    assert means[0] < 0.05
    assert means[-1] > 0.95


def test_exp_fsm_monotone_in_probability():
    clock = utils.sync_clock()
    means = []
    for p in np.linspace(0.0, 1.0, 9):
        values = []
        for seed in range(20):
            d = utils.stream(p, 1 + seed, clock)
            bias = utils.stream(0.5, 700 + seed, clock)
            values.append(measure(exp_fsm(d, clock, bias=bias)))
        means.append(np.mean(values))
    assert np.all(np.diff(means) <= 0.02)
    assert means[-1] <= 0.05
