#!/usr/bin/python
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from polysc.circuits import CircuitKind
from polysc.images import stripes
from polysc.metrics import (
    error_rate,
    ideal_for,
    kde_pdf_oracle,
    oracle_for,
    oracle_gamma,
    oracle_gamma_ideal,
    oracle_kde,
    oracle_robert,
    oracle_threshold,
    summarize,
)


def test_error_rate():
    golden = np.zeros((2, 2), dtype=np.uint8)
    assert error_rate(golden, golden) == 0.0
    assert error_rate(golden, np.array([[255, 255], [0, 0]], dtype=np.uint8)) == 50.0
    assert error_rate(golden, np.full((2, 2), 255, dtype=np.uint8)) == 100.0
    with pytest.raises(ValueError):
        error_rate(golden, np.zeros((2, 3), dtype=np.uint8))


def test_summarize():
    report = summarize([1.0, 3.0], "poly", "robert")
    assert report.mean == 2.0
    assert report.stddev == 1.0
    assert report.errors == (1.0, 3.0)
    with pytest.raises(ValueError):
        summarize([], "sync", "robert")


def test_robert_oracle_on_stripes():
    edges = oracle_robert(stripes(4, 4))
    assert edges.tolist() == [[255, 255, 255, 0]] * 4


def test_robert_oracle_bright_pixel():
    image = np.zeros((5, 5), dtype=np.uint8)
    image[2, 2] = 255
    edges = oracle_robert(image)
    assert sorted(zip(*np.nonzero(edges))) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert set(edges[edges > 0].tolist()) == {128}


def test_gamma_oracles():
    image = np.array([[0, 255]], dtype=np.uint8)
    assert oracle_gamma(image).tolist() == [[24, 253]]
    assert oracle_gamma_ideal(image).tolist() == [[0, 255]]
    mid = oracle_gamma_ideal(np.array([[128]], dtype=np.uint8))
    assert mid[0, 0] == round(255 * (128 / 255) ** 0.45)


def test_threshold_oracle():
    flat = np.full((10, 10), 90, dtype=np.uint8)
    assert (oracle_threshold(flat) == 255).all()

    spot = np.full((10, 10), 200, dtype=np.uint8)
    spot[5, 5] = 20
    result = oracle_threshold(spot)
    assert result[5, 5] == 0
    assert (result == 0).sum() == 1


def test_kde_oracles():
    frames = np.full((32, 2, 2), 100, dtype=np.uint8)
    current = np.array([[100, 100], [100, 255]], dtype=np.uint8)
    pdf = kde_pdf_oracle(frames, current)
    assert pdf[0, 0] == pytest.approx(1.0)
    assert pdf[1, 1] == pytest.approx(math.exp(-4 * 155 / 255))
    assert oracle_kde(frames, current).tolist() == [[0, 0], [0, 255]]
    assert np.array_equal(oracle_for(CircuitKind.KDE, (frames, current)), oracle_kde(frames, current))


def test_ideal_reference_only_for_gamma():
    image = np.zeros((2, 2), dtype=np.uint8)
    assert ideal_for(CircuitKind.ROBERT, image) is None
    assert ideal_for(CircuitKind.GAMMA, image) is not None
