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

Name: Metrics
Author: PolySC contributors
Date Created: May 20, 2022
Last Modified: June 15, 2022

Software reference implementations of the four image kernels and the
output error metric the simulator is scored with.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .circuits import (
    DEFAULT_KDE_THRESHOLD,
    GAMMA_COEFFICIENTS,
    BernsteinCoeffs,
    CircuitKind,
)
from .images import check_image, to_intensity

GAMMA_EXPONENT = 0.45
KDE_BANDWIDTH = 4.0


@dataclass(frozen=True)
class ErrorReport:
    circuit: str
    mode: str
    errors: Tuple[float, ...]
    mean: float
    stddev: float


def error_rate(g: np.ndarray, s: np.ndarray) -> float:
    """
    mean absolute error in percent of full scale

    :param g np.ndarray: golden image
    :param s np.ndarray: simulated image
    :rtype float: sum |g - s| / (255 * H * W) * 100
    """
    g, s = check_image(g), check_image(s)
    if g.shape != s.shape:
        raise ValueError(f"image sizes differ: {g.shape} != {s.shape}")
    difference = np.abs(g.astype(np.int64) - s.astype(np.int64)).sum()
    return float(difference) / (255 * g.size) * 100


def summarize(errors: Sequence[float], mode: str, circuit: str) -> ErrorReport:
    errors = tuple(float(error) for error in errors)
    if len(errors) == 0:
        raise ValueError("cannot summarize an empty error list")
    return ErrorReport(
        circuit, mode, errors, float(np.mean(errors)), float(np.std(errors))
    )


def _normalize(img) -> np.ndarray:
    return check_image(img).astype(np.float64) / 255.0


def oracle_robert(img) -> np.ndarray:
    x = np.pad(_normalize(img), ((0, 1), (0, 1)), mode="edge")
    r00, r11 = x[:-1, :-1], x[1:, 1:]
    r01, r10 = x[:-1, 1:], x[1:, :-1]
    return to_intensity(0.5 * (np.abs(r00 - r11) + np.abs(r01 - r10)))


def bernstein(x, coefficients: BernsteinCoeffs = GAMMA_COEFFICIENTS) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = coefficients.degree
    return sum(
        value * math.comb(n, k) * x**k * (1 - x) ** (n - k)
        for k, value in enumerate(coefficients.values)
    )


def oracle_gamma(img, coefficients: BernsteinCoeffs = GAMMA_COEFFICIENTS) -> np.ndarray:
    return to_intensity(bernstein(_normalize(img), coefficients))


def oracle_gamma_ideal(img) -> np.ndarray:
    return to_intensity(_normalize(img) ** GAMMA_EXPONENT)


def oracle_threshold(img, window: int = 8) -> np.ndarray:
    """
    binary local-mean thresholding

    the window spans rows i-K/2..i+K/2-1 and columns j-K/2..j+K/2-1 with
    replicated borders; pixels at or above the window mean become 255
    """
    img = check_image(img).astype(np.int64)
    before, after = window // 2, window - window // 2 - 1
    padded = np.pad(img, ((before, after), (before, after)), mode="edge")
    sums = sliding_window_view(padded, (window, window)).sum(axis=(-2, -1))
    return np.where(window * window * img >= sums, 255, 0).astype(np.uint8)


def kde_pdf_oracle(frames, current) -> np.ndarray:
    """(1/n) sum over history frames of e^(-4 |x_t - x_(t-i)|) per pixel"""
    frames = np.asarray(frames)
    current = _normalize(current)
    history = np.stack([_normalize(frame) for frame in frames])
    if history.shape[1:] != current.shape:
        raise ValueError("history frames and current frame differ in size")
    return np.exp(-KDE_BANDWIDTH * np.abs(current - history)).mean(axis=0)


def oracle_kde(frames, current, threshold: float = DEFAULT_KDE_THRESHOLD) -> np.ndarray:
    """255 where the estimated PDF falls below threshold"""
    return np.where(kde_pdf_oracle(frames, current) < threshold, 255, 0).astype(np.uint8)


def oracle_for(
    kind: CircuitKind,
    images,
    window: int = 8,
    threshold: float = DEFAULT_KDE_THRESHOLD,
    coefficients: BernsteinCoeffs = GAMMA_COEFFICIENTS,
) -> np.ndarray:
    kind = CircuitKind(kind)
    if kind is CircuitKind.ROBERT:
        return oracle_robert(images)
    if kind is CircuitKind.GAMMA:
        return oracle_gamma(images, coefficients)
    if kind is CircuitKind.THRESHOLD:
        return oracle_threshold(images, window)
    history, current = images
    return oracle_kde(history, current, threshold)


def ideal_for(kind: CircuitKind, images) -> Optional[np.ndarray]:
    """secondary reference, only defined for gamma correction"""
    if CircuitKind(kind) is CircuitKind.GAMMA:
        return oracle_gamma_ideal(images)
    return None
